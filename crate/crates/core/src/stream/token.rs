use std::fmt;

use thiserror::Error;

pub const BOS_TEXT: &str = "<s>";
pub const EOB_TEXT: &str = "<m>";
pub const EOS_TEXT: &str = "</s>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Regular,
    /// `<s>`, beginning of a segment.
    BeginSeq,
    /// `<m>`, closes one recognizer sub-segment.
    EndBlock,
    /// `</s>`, end of segment; every stage flushes on it.
    EndSeq,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token text is empty")]
    Empty,
    #[error("token text contains a tab or line break at byte {0}")]
    ControlChar(usize),
    #[error("regular token cannot use the reserved text `{0}`")]
    Reserved(String),
}

/// A subword symbol exchanged between stages.
///
/// Construction goes through [`Token::regular`] or the special-token
/// constructors, so the text/kind pairing is always consistent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    text: String,
    kind: TokenKind,
}

impl Token {
    pub fn regular(text: impl Into<String>) -> Result<Self, TokenError> {
        let text = text.into();
        check_text(&text)?;
        if is_reserved(&text) {
            return Err(TokenError::Reserved(text));
        }
        Ok(Self {
            text,
            kind: TokenKind::Regular,
        })
    }

    pub fn begin_seq() -> Self {
        Self::special(TokenKind::BeginSeq)
    }

    pub fn end_block() -> Self {
        Self::special(TokenKind::EndBlock)
    }

    pub fn end_seq() -> Self {
        Self::special(TokenKind::EndSeq)
    }

    pub fn special(kind: TokenKind) -> Self {
        let text = match kind {
            TokenKind::BeginSeq => BOS_TEXT,
            TokenKind::EndBlock => EOB_TEXT,
            TokenKind::EndSeq => EOS_TEXT,
            TokenKind::Regular => panic!("Token::special called with TokenKind::Regular"),
        };
        Self {
            text: text.to_string(),
            kind,
        }
    }

    /// Classifies raw text: the three reserved strings become special
    /// tokens, anything else a regular token.
    pub fn from_text(text: &str) -> Result<Self, TokenError> {
        match text {
            BOS_TEXT => Ok(Self::begin_seq()),
            EOB_TEXT => Ok(Self::end_block()),
            EOS_TEXT => Ok(Self::end_seq()),
            _ => Self::regular(text),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn is_regular(&self) -> bool {
        self.kind == TokenKind::Regular
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn is_reserved(text: &str) -> bool {
    matches!(text, BOS_TEXT | EOB_TEXT | EOS_TEXT)
}

/// Shared text rule for tokens and chunk texts: non-empty, no tab/CR/LF.
pub(crate) fn check_text(text: &str) -> Result<(), TokenError> {
    if text.is_empty() {
        return Err(TokenError::Empty);
    }
    if let Some(pos) = text.find(['\t', '\n', '\r']) {
        return Err(TokenError::ControlChar(pos));
    }
    Ok(())
}
