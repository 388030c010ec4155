use std::fmt;

use thiserror::Error;

use crate::policies::BoundaryRules;
use crate::stream::Token;

/// Mora used for a phrase whose text yields no moras at all.
pub const PAUSE_MORA: &str = "pau";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhraseError {
    #[error("accent phrase has no moras")]
    NoMoras,
    #[error("accent type {accent_type} exceeds the {n_moras} moras of `{surface}`")]
    AccentOutOfRange {
        accent_type: u32,
        n_moras: usize,
        surface: String,
    },
}

/// A run of moras sharing one pitch-accent pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccentPhrase {
    moras: Vec<String>,
    accent_type: u32,
    surface: Vec<String>,
}

impl AccentPhrase {
    pub fn new(moras: Vec<String>, accent_type: u32, surface: Vec<String>) -> Result<Self, PhraseError> {
        if moras.is_empty() {
            return Err(PhraseError::NoMoras);
        }
        if accent_type as usize > moras.len() {
            return Err(PhraseError::AccentOutOfRange {
                accent_type,
                n_moras: moras.len(),
                surface: surface.join(" "),
            });
        }
        Ok(Self {
            moras,
            accent_type,
            surface,
        })
    }

    /// Builds a phrase from romanized tokens. The accent nucleus comes from
    /// the first token with a lexicon entry, shifted by the moras before it;
    /// without any entry the phrase is flat.
    pub fn from_tokens(tokens: &[Token], rules: &BoundaryRules) -> Result<Self, PhraseError> {
        let mut moras = Vec::new();
        let mut accent = None;
        for tok in tokens.iter().filter(|t| t.is_regular()) {
            if accent.is_none() {
                if let Some(n) = rules.accent_of(tok.text()) {
                    accent = Some(if n == 0 { 0 } else { moras.len() as u32 + n });
                }
            }
            moras.extend(split_moras(tok.text()));
        }
        if moras.is_empty() {
            moras.push(PAUSE_MORA.to_string());
        }
        let surface = tokens
            .iter()
            .filter(|t| t.is_regular())
            .map(|t| t.text().to_string())
            .collect();
        Self::new(moras, accent.unwrap_or(0), surface)
    }

    pub fn moras(&self) -> &[String] {
        &self.moras
    }

    pub fn n_moras(&self) -> usize {
        self.moras.len()
    }

    pub fn accent_type(&self) -> u32 {
        self.accent_type
    }

    pub fn surface(&self) -> &[String] {
        &self.surface
    }

    pub fn surface_text(&self) -> String {
        self.surface.join(" ")
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Splits a romanized word into moras.
///
/// `n` not followed by a vowel or `y` is the moraic nasal `N`, a doubled
/// consonant contributes the geminate `Q`, and an apostrophe only separates.
/// Characters outside ASCII count as one mora each; other ASCII symbols are
/// ignored.
pub fn split_moras(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.to_lowercase().chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii() {
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
            i += 1;
            continue;
        }
        if !c.is_ascii_alphabetic() {
            i += 1;
            continue;
        }
        if is_vowel(c) {
            out.push(c.to_string());
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        if c == 'n' && !next.is_some_and(|n| is_vowel(n) || n == 'y') {
            out.push("N".to_string());
            i += 1;
            continue;
        }
        if next == Some(c) {
            out.push("Q".to_string());
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_alphabetic() && !is_vowel(chars[i]) {
            i += 1;
        }
        if i < chars.len() && is_vowel(chars[i]) {
            i += 1;
        }
        out.push(chars[start..i].iter().collect());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pitch {
    High,
    Low,
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pitch::High => "H",
            Pitch::Low => "L",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoraFeature {
    pub mora: String,
    /// 1-based.
    pub position: usize,
    pub n_moras: usize,
    pub accent_type: u32,
    pub pitch: Pitch,
}

fn tokyo_pitch(position: usize, accent_type: u32) -> Pitch {
    let a = accent_type as usize;
    let high = match (position, a) {
        (1, 1) => true,
        (1, _) => false,
        (_, 0) => true,
        (p, a) => p <= a,
    };
    if high {
        Pitch::High
    } else {
        Pitch::Low
    }
}

/// One record per mora with its Tokyo-dialect pitch.
pub fn extract_features(phrase: &AccentPhrase) -> Vec<MoraFeature> {
    let n = phrase.n_moras();
    phrase
        .moras
        .iter()
        .enumerate()
        .map(|(i, m)| MoraFeature {
            mora: m.clone(),
            position: i + 1,
            n_moras: n,
            accent_type: phrase.accent_type,
            pitch: tokyo_pitch(i + 1, phrase.accent_type),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrase(moras: &[&str], accent: u32) -> AccentPhrase {
        AccentPhrase::new(moras.iter().map(|m| m.to_string()).collect(), accent, vec![]).unwrap()
    }

    fn pitches(p: &AccentPhrase) -> String {
        extract_features(p).iter().map(|f| f.pitch.to_string()).collect()
    }

    #[test]
    fn pitch_patterns() {
        assert_eq!(pitches(&phrase(&["a"], 0)), "L");
        assert_eq!(pitches(&phrase(&["ka", "re", "wa"], 1)), "HLL");
        assert_eq!(pitches(&phrase(&["shi", "te", "N"], 0)), "LHH");
        assert_eq!(pitches(&phrase(&["a", "ta", "ma", "ga"], 3)), "LHHL");
        assert_eq!(pitches(&phrase(&["o", "to", "ko"], 3)), "LHH");
    }

    #[test]
    fn feature_positions() {
        let f = extract_features(&phrase(&["ka", "re", "wa"], 1));
        assert_eq!(f[2].position, 3);
        assert!(f.iter().all(|r| r.n_moras == 3 && r.accent_type == 1));
    }

    #[test]
    fn invariants_enforced() {
        assert_eq!(AccentPhrase::new(vec![], 0, vec![]), Err(PhraseError::NoMoras));
        assert!(matches!(
            AccentPhrase::new(vec!["a".into()], 2, vec![]),
            Err(PhraseError::AccentOutOfRange { .. })
        ));
    }

    #[test]
    fn romaji_moras() {
        let s = |w: &str| split_moras(w).join(".");
        assert_eq!(s("shiten"), "shi.te.N");
        assert_eq!(s("kore"), "ko.re");
        assert_eq!(s("gakkou"), "ga.Q.ko.u");
        assert_eq!(s("kyou"), "kyo.u");
        assert_eq!(s("kan'i"), "ka.N.i");
        assert_eq!(s("kani"), "ka.ni");
        assert_eq!(s("Tsuki"), "tsu.ki");
        assert_eq!(s("nyanko"), "nya.N.ko");
        assert_eq!(s("desu."), "de.su");
        assert_eq!(s("視点"), "視.点");
        assert!(split_moras("...").is_empty());
    }

    #[test]
    fn phrase_from_tokens() {
        let t = |w: &str| Token::regular(w).unwrap();
        let rules = BoundaryRules::new().with_accent("betsu", 1);
        let p = AccentPhrase::from_tokens(&[t("kore"), t("betsu")], &rules).unwrap();
        assert_eq!(p.moras(), ["ko", "re", "be", "tsu"]);
        assert_eq!(p.accent_type(), 3);
        assert_eq!(p.surface_text(), "kore betsu");
        let p = AccentPhrase::from_tokens(&[t("!")], &rules).unwrap();
        assert_eq!(p.moras(), [PAUSE_MORA]);
    }
}
