use std::collections::HashMap;

use thiserror::Error;

use super::mora::AccentPhrase;

/// Synthesis frame period; every duration is a whole number of frames.
pub const FRAME_MS: u64 = 5;
pub const DEFAULT_MORA_MS: u64 = 150;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DurationError {
    #[error("no duration for mora `{0}` and no default configured")]
    UnknownMora(String),
    #[error("duration model returned 0 ms for mora `{0}`")]
    NonPositive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct DurationTableError {
    pub line: usize,
    pub reason: String,
}

/// Duration of one mora in context.
pub trait DurationModel {
    fn mora_ms(
        &self,
        mora: &str,
        position: usize,
        n_moras: usize,
        accent_type: u32,
    ) -> Result<u64, DurationError>;
}

impl<M: DurationModel + ?Sized> DurationModel for Box<M> {
    fn mora_ms(&self, mora: &str, position: usize, n_moras: usize, accent_type: u32) -> Result<u64, DurationError> {
        (**self).mora_ms(mora, position, n_moras, accent_type)
    }
}

/// Per-mora lookup table with an optional fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDurationModel {
    table: HashMap<String, u64>,
    default_ms: Option<u64>,
}

impl Default for TableDurationModel {
    fn default() -> Self {
        Self::uniform(DEFAULT_MORA_MS)
    }
}

impl TableDurationModel {
    pub fn uniform(ms: u64) -> Self {
        Self {
            table: HashMap::new(),
            default_ms: Some(ms),
        }
    }

    pub fn new(table: HashMap<String, u64>, default_ms: Option<u64>) -> Self {
        Self { table, default_ms }
    }

    pub fn default_ms(&self) -> Option<u64> {
        self.default_ms
    }

    /// Parses `mora<TAB>ms` lines and an optional `default<TAB>ms`.
    pub fn parse(text: &str) -> Result<Self, DurationTableError> {
        let mut table = HashMap::new();
        let mut default_ms = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |reason: String| DurationTableError { line, reason };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((mora, ms)) = trimmed.split_once('\t') else {
                return Err(err(format!("expected `mora<TAB>ms`, got `{trimmed}`")));
            };
            let ms: u64 = ms
                .trim()
                .parse()
                .ok()
                .filter(|&ms| ms > 0)
                .ok_or_else(|| err(format!("`{}` is not a positive integer", ms.trim())))?;
            let mora = mora.trim();
            if mora == "default" {
                if default_ms.replace(ms).is_some() {
                    return Err(err("duplicate default".into()));
                }
            } else if table.insert(mora.to_string(), ms).is_some() {
                return Err(err(format!("duplicate mora `{mora}`")));
            }
        }
        Ok(Self { table, default_ms })
    }
}

impl DurationModel for TableDurationModel {
    fn mora_ms(&self, mora: &str, _: usize, _: usize, _: u32) -> Result<u64, DurationError> {
        self.table
            .get(mora)
            .copied()
            .or(self.default_ms)
            .ok_or_else(|| DurationError::UnknownMora(mora.to_string()))
    }
}

/// Sum of per-mora durations, each rounded up to a whole frame.
pub fn predict_duration<M: DurationModel + ?Sized>(
    phrase: &AccentPhrase,
    model: &M,
) -> Result<u64, DurationError> {
    let n = phrase.n_moras();
    let mut total = 0;
    for (i, mora) in phrase.moras().iter().enumerate() {
        let ms = model.mora_ms(mora, i + 1, n, phrase.accent_type())?;
        if ms == 0 {
            return Err(DurationError::NonPositive(mora.clone()));
        }
        total += ms.div_ceil(FRAME_MS) * FRAME_MS;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrase(moras: &[&str]) -> AccentPhrase {
        AccentPhrase::new(moras.iter().map(|m| m.to_string()).collect(), 0, vec![]).unwrap()
    }

    #[test]
    fn uniform_three_moras() {
        let d = predict_duration(&phrase(&["ka", "re", "wa"]), &TableDurationModel::default());
        assert_eq!(d, Ok(450));
    }

    #[test]
    fn rounds_each_mora_to_frame() {
        let m = TableDurationModel::parse("a\t147\n").unwrap();
        assert_eq!(predict_duration(&phrase(&["a"]), &m), Ok(150));
        assert_eq!(predict_duration(&phrase(&["a", "a"]), &m), Ok(300));
    }

    #[test]
    fn unknown_without_default() {
        let m = TableDurationModel::parse("a\t100\n").unwrap();
        assert_eq!(
            predict_duration(&phrase(&["a", "ka"]), &m),
            Err(DurationError::UnknownMora("ka".into()))
        );
        let m = TableDurationModel::parse("a\t100\ndefault\t90\n").unwrap();
        assert_eq!(predict_duration(&phrase(&["a", "ka"]), &m), Ok(190));
    }

    #[test]
    fn table_errors() {
        assert_eq!(TableDurationModel::parse("a 100\n").unwrap_err().line, 1);
        assert_eq!(TableDurationModel::parse("# x\na\t0\n").unwrap_err().line, 2);
        assert_eq!(TableDurationModel::parse("a\t1\na\t2\n").unwrap_err().line, 2);
        assert_eq!(TableDurationModel::parse("default\t1\ndefault\t2\n").unwrap_err().line, 2);
    }
}
