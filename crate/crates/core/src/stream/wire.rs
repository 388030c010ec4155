//! Line protocol spoken between stages.
//!
//! ```text
//! <channel>\t<seq>\t<emit_ms>\t<segment_id>\t<first_input_ms>\t<kind>\t<payload...>
//! ```
//!
//! `kind` is one of `tok`, `bos`, `blk`, `eos` (payload: token text),
//! `frm` (payload: `<n_frames>\t<hop_ms>`) or `chk` (payload:
//! `<duration_ms>\t<phrase_text>`). Parsing is strict: every numeric field
//! must be in canonical form, so a line parses only if re-serializing the
//! result reproduces it byte for byte.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::event::{Channel, ChunkRef, HopMs, Payload, Provenance, TimedEvent};
use super::token::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed line: field `{field}` at byte {offset}: {reason}")]
    MalformedLine {
        field: &'static str,
        offset: usize,
        reason: String,
    },
    #[error("unknown channel `{found}` at byte {offset}")]
    UnknownChannel { found: String, offset: usize },
    #[error("unknown payload kind `{found}` at byte {offset}")]
    UnknownPayloadKind { found: String, offset: usize },
}

impl ParseError {
    pub fn field(&self) -> &'static str {
        match self {
            ParseError::MalformedLine { field, .. } => field,
            ParseError::UnknownChannel { .. } => "channel",
            ParseError::UnknownPayloadKind { .. } => "kind",
        }
    }

    pub fn offset(&self) -> usize {
        match self {
            ParseError::MalformedLine { offset, .. }
            | ParseError::UnknownChannel { offset, .. }
            | ParseError::UnknownPayloadKind { offset, .. } => *offset,
        }
    }
}

fn kind_tag(payload: &Payload) -> &'static str {
    match payload {
        Payload::Token(t) => match t.kind() {
            TokenKind::Regular => "tok",
            TokenKind::BeginSeq => "bos",
            TokenKind::EndBlock => "blk",
            TokenKind::EndSeq => "eos",
        },
        Payload::Frames { .. } => "frm",
        Payload::Chunk(_) => "chk",
    }
}

/// Renders one LF-terminated line.
pub fn serialize_event(ev: &TimedEvent) -> String {
    let head = format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        ev.channel.wire_name(),
        ev.seq,
        ev.emit_ms,
        ev.provenance.segment_id,
        ev.provenance.first_input_ms,
        kind_tag(&ev.payload),
    );
    match &ev.payload {
        Payload::Token(t) => format!("{head}\t{}\n", t.text()),
        Payload::Frames { n_frames, hop } => format!("{head}\t{n_frames}\t{hop}\n"),
        Payload::Chunk(c) => format!("{head}\t{}\t{}\n", c.duration_ms(), c.text()),
    }
}

struct Fields<'a> {
    parts: Vec<(usize, &'a str)>,
    line_len: usize,
}

impl<'a> Fields<'a> {
    fn split(line: &'a str) -> Self {
        let mut parts = Vec::new();
        let mut offset = 0;
        for part in line.split('\t') {
            parts.push((offset, part));
            offset += part.len() + 1;
        }
        Self {
            parts,
            line_len: line.len(),
        }
    }

    fn get(&self, idx: usize, field: &'static str) -> Result<(usize, &'a str), ParseError> {
        self.parts
            .get(idx)
            .copied()
            .ok_or_else(|| ParseError::MalformedLine {
                field,
                offset: self.line_len,
                reason: "missing field".into(),
            })
    }

    fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        if let Some(&(offset, _)) = self.parts.get(n) {
            return Err(ParseError::MalformedLine {
                field: "trailing",
                offset,
                reason: format!("expected {n} fields, found {}", self.parts.len()),
            });
        }
        Ok(())
    }
}

fn malformed(field: &'static str, offset: usize, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedLine {
        field,
        offset,
        reason: reason.into(),
    }
}

fn parse_u64(field: &'static str, (offset, s): (usize, &str)) -> Result<u64, ParseError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(field, offset, format!("`{s}` is not a decimal integer")));
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(malformed(field, offset, "leading zero"));
    }
    s.parse()
        .map_err(|_| malformed(field, offset, "integer out of range"))
}

/// Parses one line, with or without its trailing LF.
pub fn parse_event(line: &str) -> Result<TimedEvent, ParseError> {
    let body = line.strip_suffix('\n').unwrap_or(line);
    let fields = Fields::split(body);

    let (off, ch) = fields.get(0, "channel")?;
    let channel = Channel::from_wire(ch).ok_or_else(|| ParseError::UnknownChannel {
        found: ch.to_string(),
        offset: off,
    })?;
    let seq = parse_u64("seq", fields.get(1, "seq")?)?;
    let emit_ms = parse_u64("emit_ms", fields.get(2, "emit_ms")?)?;
    let segment_id = parse_u64("segment_id", fields.get(3, "segment_id")?)?;
    let first_input_ms = parse_u64("first_input_ms", fields.get(4, "first_input_ms")?)?;
    let (kind_off, kind) = fields.get(5, "kind")?;

    let payload = match kind {
        "tok" | "bos" | "blk" | "eos" => {
            let (off, text) = fields.get(6, "token")?;
            fields.expect_len(7)?;
            let expected = match kind {
                "bos" => Some(TokenKind::BeginSeq),
                "blk" => Some(TokenKind::EndBlock),
                "eos" => Some(TokenKind::EndSeq),
                _ => None,
            };
            let token = match expected {
                Some(k) => {
                    let t = Token::special(k);
                    if t.text() != text {
                        return Err(malformed(
                            "token",
                            off,
                            format!("kind `{kind}` requires text `{}`", t.text()),
                        ));
                    }
                    t
                }
                None => Token::regular(text).map_err(|e| malformed("token", off, e.to_string()))?,
            };
            Payload::Token(token)
        }
        "frm" => {
            let n = fields.get(6, "n_frames")?;
            let n_frames = parse_u64("n_frames", n)?;
            let n_frames = u32::try_from(n_frames)
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| malformed("n_frames", n.0, "expected 1..=u32::MAX"))?;
            let (off, hop) = fields.get(7, "hop_ms")?;
            fields.expect_len(8)?;
            let hop: HopMs = hop
                .parse()
                .map_err(|e: super::event::HopParseError| malformed("hop_ms", off, e.to_string()))?;
            Payload::Frames { n_frames, hop }
        }
        "chk" => {
            let d = fields.get(6, "duration_ms")?;
            let duration = parse_u64("duration_ms", d)?;
            let (off, text) = fields.get(7, "phrase_text")?;
            fields.expect_len(8)?;
            let chunk = ChunkRef::new(duration, text).map_err(|e| {
                let (field, offset) = if duration == 0 {
                    ("duration_ms", d.0)
                } else {
                    ("phrase_text", off)
                };
                malformed(field, offset, e.to_string())
            })?;
            Payload::Chunk(chunk)
        }
        other => {
            return Err(ParseError::UnknownPayloadKind {
                found: other.to_string(),
                offset: kind_off,
            })
        }
    };

    Ok(TimedEvent {
        channel,
        seq,
        emit_ms,
        payload,
        provenance: Provenance {
            segment_id,
            first_input_ms,
        },
    })
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads an event log, skipping blank lines. Line numbers are 1-based.
pub fn read_log(reader: impl BufRead) -> Result<Vec<TimedEvent>, LogError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let ev = parse_event(&line).map_err(|source| LogError::Parse { line: i + 1, source })?;
        out.push(ev);
    }
    Ok(out)
}

pub fn write_log<'a>(
    mut writer: impl Write,
    events: impl IntoIterator<Item = &'a TimedEvent>,
) -> io::Result<()> {
    for ev in events {
        writer.write_all(serialize_event(ev).as_bytes())?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov(segment_id: u64, first_input_ms: u64) -> Provenance {
        Provenance {
            segment_id,
            first_input_ms,
        }
    }

    #[test]
    fn serializes_end_seq() {
        let ev = TimedEvent::new(
            Channel::Isr,
            7,
            1650,
            Payload::Token(Token::end_seq()),
            prov(0, 0),
        );
        assert_eq!(serialize_event(&ev), "ISR\t7\t1650\t0\t0\teos\t</s>\n");
        assert_eq!(parse_event("ISR\t7\t1650\t0\t0\teos\t</s>").unwrap(), ev);
    }

    #[test]
    fn serializes_regular_token() {
        let ev = TimedEvent::new(
            Channel::Imt,
            3,
            2750,
            Payload::Token(Token::regular("shiten").unwrap()),
            prov(1, 550),
        );
        assert_eq!(serialize_event(&ev), "IMT\t3\t2750\t1\t550\ttok\tshiten\n");
    }

    #[test]
    fn serializes_frame_block() {
        let ev = TimedEvent::new(
            Channel::Source,
            2,
            1100,
            Payload::frames(32, HopMs::default()).unwrap(),
            prov(0, 1100),
        );
        let line = serialize_event(&ev);
        assert_eq!(line, "SRC\t2\t1100\t0\t1100\tfrm\t32\t17.1875\n");
        assert_eq!(parse_event(&line).unwrap(), ev);
    }

    #[test]
    fn serializes_chunk() {
        let ev = TimedEvent::new(
            Channel::Itts,
            0,
            3850,
            Payload::Chunk(ChunkRef::new(600, "kore wa").unwrap()),
            prov(0, 0),
        );
        let line = serialize_event(&ev);
        assert_eq!(line, "ITTS\t0\t3850\t0\t0\tchk\t600\tkore wa\n");
        assert_eq!(parse_event(&line).unwrap(), ev);
    }

    #[test]
    fn non_numeric_seq_names_field() {
        let err = parse_event("ISR\tseven\t1650\t0\t0\teos\t</s>").unwrap_err();
        assert_eq!(err.field(), "seq");
        assert_eq!(err.offset(), 4);
    }

    #[test]
    fn unknown_channel_and_kind() {
        let err = parse_event("ASR\t0\t0\t0\t0\ttok\ta").unwrap_err();
        assert!(matches!(err, ParseError::UnknownChannel { offset: 0, .. }));
        let err = parse_event("ISR\t0\t0\t0\t0\twav\ta").unwrap_err();
        assert!(matches!(err, ParseError::UnknownPayloadKind { offset: 12, .. }));
    }

    #[test]
    fn strictness() {
        let bad = [
            "ISR\t7\t1650\t0\t0\teos\t</s>\t",
            "ISR\t7\t1650\t0\t0\teos\t<s>",
            "ISR\t07\t1650\t0\t0\teos\t</s>",
            "ISR\t+7\t1650\t0\t0\teos\t</s>",
            "ISR\t7\t1650\t0\t0\ttok\t</s>",
            "ISR\t7\t1650\t0\t0\ttok\t",
            "ISR\t7\t1650\t0\t0\teos\t</s>\r",
            "SRC\t2\t1100\t0\t1100\tfrm\t0\t17.1875",
            "SRC\t2\t1100\t0\t1100\tfrm\t32\t17.18750",
            "SRC\t2\t1100\t0\t1100\tfrm\t32",
            "ITTS\t0\t0\t0\t0\tchk\t0\tkore",
            "ISR\t7\t1650",
            "",
        ];
        for line in bad {
            assert!(parse_event(line).is_err(), "accepted {line:?}");
        }
    }

    #[test]
    fn missing_field_offset_is_line_end() {
        let err = parse_event("ISR\t7\t1650").unwrap_err();
        assert_eq!(err.field(), "segment_id");
        assert_eq!(err.offset(), 10);
    }

    #[test]
    fn log_reports_line_numbers() {
        let text = "ISR\t0\t0\t0\t0\ttok\ta\n\nISR\tx\t0\t0\t0\ttok\tb\n";
        match read_log(text.as_bytes()) {
            Err(LogError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
