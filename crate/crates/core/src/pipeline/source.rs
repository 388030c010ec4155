use std::fs;
use std::path::Path;

use thiserror::Error;

use super::config::SourceConfig;
use crate::stream::{
    parse_event, read_log, validate_stream, Channel, LogError, Payload, Provenance, TimedEvent, Token,
    TokenError, EOB_TEXT,
};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Token { line: usize, source: TokenError },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("source log is not a valid SRC stream: {0}")]
    Invalid(String),
}

/// A token-file line split into blocks: explicit `<m>` separators, or
/// `tokens_per_block` tokens each.
fn split_blocks(line: &str, tokens_per_block: usize) -> Vec<Vec<&str>> {
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.contains(&EOB_TEXT) {
        let mut blocks = vec![Vec::new()];
        for w in &words {
            if *w == EOB_TEXT {
                blocks.push(Vec::new());
            } else {
                blocks.last_mut().expect("never empty").push(*w);
            }
        }
        if blocks.last().is_some_and(Vec::is_empty) {
            blocks.pop();
        }
        blocks
    } else {
        words.chunks(tokens_per_block.max(1)).map(<[_]>::to_vec).collect()
    }
}

/// Lays token-file segments out back to back as a SRC stream. Every block
/// becomes a `frm` event at its start time followed by its transcript
/// tokens; `</s>` closes the segment when its last frame ends.
pub fn source_from_tokens(text: &str, cfg: &SourceConfig) -> Result<Vec<TimedEvent>, InputError> {
    let mut out = Vec::new();
    let mut seg_start = 0;
    let mut segment_id = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let blocks = split_blocks(line, cfg.tokens_per_block);
        let frames = cfg.block_frames as u64;
        let mut push = |t: u64, payload: Payload| {
            let seq = out.len() as u64;
            out.push(TimedEvent::new(
                Channel::Source,
                seq,
                t,
                payload,
                Provenance {
                    segment_id,
                    first_input_ms: t,
                },
            ));
        };
        for (b, block) in blocks.iter().enumerate() {
            let t = seg_start + cfg.hop.span_ms_floor(b as u64 * frames);
            push(
                t,
                Payload::Frames {
                    n_frames: cfg.block_frames,
                    hop: cfg.hop,
                },
            );
            for w in block {
                let tok = Token::regular(*w).map_err(|source| InputError::Token { line: i + 1, source })?;
                push(t, Payload::Token(tok));
            }
        }
        let end = seg_start + cfg.hop.span_ms_ceil(blocks.len() as u64 * frames);
        push(end, Payload::Token(Token::end_seq()));
        seg_start = end + cfg.gap_ms;
        segment_id += 1;
    }
    Ok(out)
}

/// Reads a SRC event log, or a token file (one segment per line) when the
/// first non-blank line is not a wire event.
pub fn load_input(path: &Path, cfg: &SourceConfig) -> Result<Vec<TimedEvent>, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_log = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| parse_event(l).is_ok());
    let events = if is_log {
        read_log(text.as_bytes())?
    } else {
        source_from_tokens(&text, cfg)?
    };
    check_source(&events)?;
    Ok(events)
}

pub fn check_source(events: &[TimedEvent]) -> Result<(), InputError> {
    if let Some(ev) = events.iter().find(|e| e.channel != Channel::Source) {
        return Err(InputError::Invalid(format!(
            "event seq {} is on channel {}",
            ev.seq, ev.channel
        )));
    }
    let report = validate_stream(events);
    if let Some(v) = report.violations.first() {
        return Err(InputError::Invalid(v.to_string()));
    }
    Ok(())
}
