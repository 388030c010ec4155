//! Tokens, timed events, clocks and the line protocol connecting stages.

mod clock;
mod event;
mod token;
mod validate;
pub mod wire;

pub use clock::{unix_now_ms, Clock, ClockError, ClockMode};
pub use event::{
    frame_blocks, Channel, ChunkRef, FrameBlock, HopMs, HopParseError, Payload, PayloadError,
    Provenance, TimedEvent,
};
pub use token::{is_reserved, Token, TokenError, TokenKind, BOS_TEXT, EOB_TEXT, EOS_TEXT};
pub use validate::{validate_stream, ValidationReport, Violation};
pub use wire::{parse_event, read_log, serialize_event, write_log, LogError, ParseError};
