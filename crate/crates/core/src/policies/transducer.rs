use std::collections::HashMap;

use thiserror::Error;

use crate::stream::Token;

/// Plug point for a recognizer or translator.
///
/// Outputs must be a deterministic function of the regular tokens consumed
/// since the last reset.
pub trait Transducer {
    fn consume(&mut self, token: &Token) -> Vec<Token>;

    /// Called once `</s>` is read; returns whatever is still buffered.
    fn finish(&mut self) -> Vec<Token> {
        Vec::new()
    }

    /// Return to the freshly constructed state.
    fn reset(&mut self);
}

impl<T: Transducer + ?Sized> Transducer for Box<T> {
    fn consume(&mut self, token: &Token) -> Vec<Token> {
        (**self).consume(token)
    }

    fn finish(&mut self) -> Vec<Token> {
        (**self).finish()
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}

/// What a dictionary transducer does with a token missing from its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownTokens {
    #[default]
    PassThrough,
    Drop,
}

/// Stateless per-token substitution.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTransducer {
    table: HashMap<String, Vec<Token>>,
    unknown: UnknownTokens,
}

pub fn make_dictionary_transducer(
    table: HashMap<String, Vec<Token>>,
    unknown: UnknownTokens,
) -> DictionaryTransducer {
    DictionaryTransducer { table, unknown }
}

impl DictionaryTransducer {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Applies the table to a whole token list at once.
    pub fn map_all<'a>(&self, tokens: impl IntoIterator<Item = &'a Token>) -> Vec<Token> {
        tokens.into_iter().flat_map(|t| self.lookup(t)).collect()
    }

    fn lookup(&self, token: &Token) -> Vec<Token> {
        match self.table.get(token.text()) {
            Some(out) => out.clone(),
            None => match self.unknown {
                UnknownTokens::PassThrough => vec![token.clone()],
                UnknownTokens::Drop => Vec::new(),
            },
        }
    }
}

impl Transducer for DictionaryTransducer {
    fn consume(&mut self, token: &Token) -> Vec<Token> {
        self.lookup(token)
    }

    fn reset(&mut self) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct TableError {
    pub line: usize,
    pub reason: String,
}

/// Parses `src<TAB>tgt1 tgt2 ...` lines. An empty target list drops the
/// source token. Blank lines and `#` comments are skipped.
pub fn parse_dictionary_table(text: &str) -> Result<HashMap<String, Vec<Token>>, TableError> {
    let mut table = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| TableError { line, reason };
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let (src, tgt) = raw
            .split_once('\t')
            .ok_or_else(|| err("expected `source<TAB>targets`".into()))?;
        let key = Token::regular(src).map_err(|e| err(format!("source `{src}`: {e}")))?;
        let targets = tgt
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| Token::regular(s).map_err(|e| err(format!("target `{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if table.insert(key.text().to_string(), targets).is_some() {
            return Err(err(format!("duplicate source `{src}`")));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        s.split_whitespace().map(|t| Token::regular(t).unwrap()).collect()
    }

    #[test]
    fn empty_table_is_identity() {
        let mut t = make_dictionary_transducer(HashMap::new(), UnknownTokens::PassThrough);
        assert_eq!(t.consume(&toks("x")[0]), toks("x"));
    }

    #[test]
    fn expands_and_passes_unknown() {
        let table = parse_dictionary_table("a\tX Y\n").unwrap();
        let mut t = make_dictionary_transducer(table, UnknownTokens::PassThrough);
        let out: Vec<_> = toks("a b").iter().flat_map(|x| t.consume(x)).collect();
        assert_eq!(out, toks("X Y b"));
    }

    #[test]
    fn drop_default() {
        let table = parse_dictionary_table("a\tX\nb\t\n").unwrap();
        let t = make_dictionary_transducer(table, UnknownTokens::Drop);
        assert_eq!(t.map_all(&toks("a b c")), toks("X"));
    }

    #[test]
    fn table_errors_carry_line() {
        assert_eq!(
            parse_dictionary_table("# c\na\tX\na\tY\n").unwrap_err().line,
            3
        );
        assert_eq!(parse_dictionary_table("a X\n").unwrap_err().line, 1);
        assert!(parse_dictionary_table("</s>\tX\n").is_err());
    }
}
