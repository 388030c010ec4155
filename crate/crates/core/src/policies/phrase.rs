//! Rule-based accent phrase buffering with hold-one emission.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::stream::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

/// Token-set boundary predicate.
///
/// A phrase boundary falls before any token in `pre` and after any token in
/// `post`; `*` in either set matches every token. Optional accent entries
/// give the accent nucleus of a word (0 = flat).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryRules {
    pre: HashSet<String>,
    post: HashSet<String>,
    accents: HashMap<String, u32>,
}

const WILDCARD: &str = "*";

impl BoundaryRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_pre(mut self, token: &str) -> Self {
        self.pre.insert(token.to_string());
        self
    }

    pub fn with_post(mut self, token: &str) -> Self {
        self.post.insert(token.to_string());
        self
    }

    pub fn with_accent(mut self, token: &str, nucleus: u32) -> Self {
        self.accents.insert(token.to_string(), nucleus);
        self
    }

    /// Every token starts its own phrase.
    pub fn every_token() -> Self {
        Self::new().with_pre(WILDCARD)
    }

    fn matches(set: &HashSet<String>, token: &Token) -> bool {
        set.contains(WILDCARD) || set.contains(token.text())
    }

    pub fn boundary_between(&self, prev: &Token, next: &Token) -> bool {
        Self::matches(&self.post, prev) || Self::matches(&self.pre, next)
    }

    pub fn accent_of(&self, word: &str) -> Option<u32> {
        self.accents.get(word).copied()
    }

    /// Parses `pre <token>`, `post <token>` and `accent <token> <n>` lines.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut rules = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |reason: String| LexiconError { line, reason };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            match parts.as_slice() {
                ["pre", tok] => {
                    rules.pre.insert(tok.to_string());
                }
                ["post", tok] => {
                    rules.post.insert(tok.to_string());
                }
                ["accent", tok, n] => {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| err(format!("accent type `{n}` is not a non-negative integer")))?;
                    rules.accents.insert(tok.to_string(), n);
                }
                _ => {
                    return Err(err(format!(
                        "expected `pre <token>`, `post <token>` or `accent <token> <n>`, got `{trimmed}`"
                    )))
                }
            }
        }
        Ok(rules)
    }
}

/// Tokens of the phrase being built.
#[derive(Debug, Clone, Default)]
pub struct PhraseBuffer {
    current: Vec<Token>,
}

impl PhraseBuffer {
    /// Adds a regular token; returns the previous phrase if this token
    /// opens a new one.
    pub fn push(&mut self, rules: &BoundaryRules, token: &Token) -> Option<Vec<Token>> {
        let done = match self.current.last() {
            Some(prev) if rules.boundary_between(prev, token) => Some(std::mem::take(&mut self.current)),
            _ => None,
        };
        self.current.push(token.clone());
        done
    }

    /// End of segment: returns the last phrase, if any.
    pub fn end(&mut self) -> Option<Vec<Token>> {
        let rest = std::mem::take(&mut self.current);
        (!rest.is_empty()).then_some(rest)
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedPhrase {
    pub tokens: Vec<Token>,
    pub emit_ms: u64,
}

impl TimedPhrase {
    pub fn text(&self) -> String {
        phrase_text(&self.tokens)
    }
}

pub fn phrase_text(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::text)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Groups one segment's timed tokens into phrases. Phrase `p` is emitted
/// when the first token of phrase `p + 1` arrives; the last one on `</s>`.
/// Markers are ignored.
pub fn accent_phrase_stage(tokens: &[(Token, u64)], rules: &BoundaryRules) -> Vec<TimedPhrase> {
    let mut buffer = PhraseBuffer::default();
    let mut out = Vec::new();
    for (tok, t) in tokens {
        match tok.kind() {
            TokenKind::Regular => {
                if let Some(tokens) = buffer.push(rules, tok) {
                    out.push(TimedPhrase { tokens, emit_ms: *t });
                }
            }
            TokenKind::EndSeq => {
                if let Some(tokens) = buffer.end() {
                    out.push(TimedPhrase { tokens, emit_ms: *t });
                }
                break;
            }
            TokenKind::BeginSeq | TokenKind::EndBlock => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timed(words: &str) -> Vec<(Token, u64)> {
        let mut v: Vec<_> = words
            .split_whitespace()
            .enumerate()
            .map(|(i, w)| (Token::from_text(w).unwrap(), (i as u64 + 1) * 100))
            .collect();
        let end = (v.len() as u64 + 1) * 100;
        v.push((Token::end_seq(), end));
        v
    }

    fn summary(p: &[TimedPhrase]) -> Vec<(String, u64)> {
        p.iter().map(|p| (p.text(), p.emit_ms)).collect()
    }

    #[test]
    fn every_token_boundary() {
        let out = accent_phrase_stage(&timed("a b c"), &BoundaryRules::every_token());
        assert_eq!(
            summary(&out),
            vec![("a".into(), 200), ("b".into(), 300), ("c".into(), 400)]
        );
    }

    #[test]
    fn hold_one_example() {
        let rules = BoundaryRules::new().with_pre("betsu").with_pre("shiten");
        let out = accent_phrase_stage(&timed("kore wa betsu no shiten desu"), &rules);
        assert_eq!(
            summary(&out),
            vec![
                ("kore wa".into(), 300),
                ("betsu no".into(), 500),
                ("shiten desu".into(), 700)
            ]
        );
    }

    #[test]
    fn single_phrase_at_end() {
        let out = accent_phrase_stage(&timed("kore wa"), &BoundaryRules::new());
        assert_eq!(summary(&out), vec![("kore wa".into(), 300)]);
    }

    #[test]
    fn empty_segment_no_phrases() {
        assert!(accent_phrase_stage(&timed(""), &BoundaryRules::every_token()).is_empty());
    }

    #[test]
    fn post_rule_and_markers() {
        let rules = BoundaryRules::new().with_post("wa");
        let out = accent_phrase_stage(&timed("kore wa <m> betsu no"), &rules);
        assert_eq!(
            summary(&out),
            vec![("kore wa".into(), 400), ("betsu no".into(), 600)]
        );
    }

    #[test]
    fn lexicon_parsing() {
        let rules = BoundaryRules::parse("# rules\npre betsu\npost wa\n\naccent kore 1\n").unwrap();
        let t = |s: &str| Token::regular(s).unwrap();
        assert!(rules.boundary_between(&t("x"), &t("betsu")));
        assert!(rules.boundary_between(&t("wa"), &t("x")));
        assert!(!rules.boundary_between(&t("x"), &t("y")));
        assert_eq!(rules.accent_of("kore"), Some(1));
        assert_eq!(BoundaryRules::parse("pre\n").unwrap_err().line, 1);
        assert_eq!(BoundaryRules::parse("pre a\naccent x y\n").unwrap_err().line, 2);
    }
}
