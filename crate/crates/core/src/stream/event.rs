use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::token::{check_text, Token, TokenError};

/// Which stage produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Source,
    Isr,
    Imt,
    Itts,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Source, Channel::Isr, Channel::Imt, Channel::Itts];

    pub fn wire_name(self) -> &'static str {
        match self {
            Channel::Source => "SRC",
            Channel::Isr => "ISR",
            Channel::Imt => "IMT",
            Channel::Itts => "ITTS",
        }
    }

    pub fn from_wire(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.wire_name() == name)
    }

    /// Lower-case name used for log file stems (`isr.log`, ...).
    pub fn file_stem(self) -> &'static str {
        match self {
            Channel::Source => "src",
            Channel::Isr => "isr",
            Channel::Imt => "imt",
            Channel::Itts => "itts",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// Milliseconds per frame, as a fixed-point decimal with four fractional
/// digits. 550/32 = 17.1875 is representable exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HopMs(u64);

impl HopMs {
    pub const SCALE: u64 = 10_000;

    pub fn from_units(units: u64) -> Option<Self> {
        (units > 0).then_some(Self(units))
    }

    /// Ten-thousandths of a millisecond.
    pub fn units(self) -> u64 {
        self.0
    }

    /// Exact span of `n_frames` frames, in ten-thousandths of a millisecond.
    pub fn span_units(self, n_frames: u64) -> u64 {
        self.0 * n_frames
    }

    /// Span of `n_frames` frames rounded up to whole milliseconds.
    pub fn span_ms_ceil(self, n_frames: u64) -> u64 {
        self.span_units(n_frames).div_ceil(Self::SCALE)
    }

    pub fn span_ms_floor(self, n_frames: u64) -> u64 {
        self.span_units(n_frames) / Self::SCALE
    }
}

impl Default for HopMs {
    fn default() -> Self {
        Self(171_875)
    }
}

impl fmt::Display for HopMs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.0 / Self::SCALE;
        let frac = self.0 % Self::SCALE;
        if frac == 0 {
            return write!(f, "{int}");
        }
        let digits = format!("{frac:04}");
        write!(f, "{int}.{}", digits.trim_end_matches('0'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid hop `{0}`: expected a positive decimal with at most 4 fractional digits in canonical form")]
pub struct HopParseError(pub String);

impl FromStr for HopMs {
    type Err = HopParseError;

    /// Accepts only the canonical form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || HopParseError(s.to_string());
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (s, None),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if int.len() > 1 && int.starts_with('0') {
            return Err(err());
        }
        let int: u64 = int.parse().map_err(|_| err())?;
        let frac_units = match frac {
            None => 0,
            Some(f) => {
                if f.is_empty()
                    || f.len() > 4
                    || f.ends_with('0')
                    || !f.bytes().all(|b| b.is_ascii_digit())
                {
                    return Err(err());
                }
                let padded = format!("{f:0<4}");
                padded.parse::<u64>().map_err(|_| err())?
            }
        };
        let units = int
            .checked_mul(Self::SCALE)
            .and_then(|u| u.checked_add(frac_units))
            .ok_or_else(err)?;
        Self::from_units(units).ok_or_else(err)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error(transparent)]
    Text(#[from] TokenError),
    #[error("chunk duration must be positive")]
    ZeroDuration,
    #[error("frame block must hold at least one frame")]
    ZeroFrames,
}

/// Reference to a synthesized chunk: its playback length and the phrase
/// text it voices. The waveform itself is not modelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChunkRef {
    duration_ms: u64,
    text: String,
}

impl ChunkRef {
    pub fn new(duration_ms: u64, text: impl Into<String>) -> Result<Self, PayloadError> {
        let text = text.into();
        if duration_ms == 0 {
            return Err(PayloadError::ZeroDuration);
        }
        check_text(&text)?;
        Ok(Self { duration_ms, text })
    }

    pub fn duration_ms(&self) -> u64 {
        self.duration_ms
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    Token(Token),
    /// A block of acoustic frames; its start time is the event's `emit_ms`.
    Frames { n_frames: u32, hop: HopMs },
    Chunk(ChunkRef),
}

impl Payload {
    pub fn frames(n_frames: u32, hop: HopMs) -> Result<Self, PayloadError> {
        if n_frames == 0 {
            return Err(PayloadError::ZeroFrames);
        }
        Ok(Payload::Frames { n_frames, hop })
    }

    pub fn as_token(&self) -> Option<&Token> {
        match self {
            Payload::Token(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_end_seq(&self) -> bool {
        matches!(self, Payload::Token(t) if t.kind() == super::TokenKind::EndSeq)
    }

    /// Regular tokens and synthesized chunks: the events that count as
    /// "output" when measuring delays.
    pub fn is_content(&self) -> bool {
        match self {
            Payload::Token(t) => t.is_regular(),
            Payload::Chunk(_) => true,
            Payload::Frames { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Provenance {
    pub segment_id: u64,
    /// Earliest source time that contributed to this event.
    pub first_input_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimedEvent {
    pub channel: Channel,
    pub seq: u64,
    pub emit_ms: u64,
    pub payload: Payload,
    pub provenance: Provenance,
}

impl TimedEvent {
    pub fn new(
        channel: Channel,
        seq: u64,
        emit_ms: u64,
        payload: Payload,
        provenance: Provenance,
    ) -> Self {
        Self {
            channel,
            seq,
            emit_ms,
            payload,
            provenance,
        }
    }

    pub fn segment_id(&self) -> u64 {
        self.provenance.segment_id
    }

    pub fn token(&self) -> Option<&Token> {
        self.payload.as_token()
    }
}

/// A block of frames with its position inside a segment.
///
/// Only `n_frames`, `hop_ms`, `start_ms` (as emit time) and `segment_id`
/// travel on the wire; `block_index` is recovered from stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameBlock {
    pub segment_id: u64,
    pub block_index: u32,
    pub n_frames: u32,
    pub hop_ms: HopMs,
    pub start_ms: u64,
}

impl FrameBlock {
    pub fn duration_units(&self) -> u64 {
        self.hop_ms.span_units(self.n_frames as u64)
    }

    pub fn duration_ms(&self) -> u64 {
        self.hop_ms.span_ms_ceil(self.n_frames as u64)
    }

    pub fn end_ms(&self) -> u64 {
        self.start_ms + self.duration_ms()
    }

    pub fn to_event(&self, seq: u64) -> TimedEvent {
        TimedEvent::new(
            Channel::Source,
            seq,
            self.start_ms,
            Payload::Frames {
                n_frames: self.n_frames,
                hop: self.hop_ms,
            },
            Provenance {
                segment_id: self.segment_id,
                first_input_ms: self.start_ms,
            },
        )
    }
}

/// Recovers frame blocks, numbering them per segment in stream order.
pub fn frame_blocks(events: &[TimedEvent]) -> Vec<FrameBlock> {
    let mut out = Vec::new();
    let mut current: Option<(u64, u32)> = None;
    for ev in events {
        if ev.payload.is_end_seq() {
            current = None;
            continue;
        }
        if let Payload::Frames { n_frames, hop } = ev.payload {
            let seg = ev.segment_id();
            let index = match current {
                Some((s, next)) if s == seg => next,
                _ => 0,
            };
            current = Some((seg, index + 1));
            out.push(FrameBlock {
                segment_id: seg,
                block_index: index,
                n_frames,
                hop_ms: hop,
                start_ms: ev.emit_ms,
            });
        }
    }
    out
}
