use std::collections::HashSet;
use std::fmt;

use super::event::{Channel, Payload, TimedEvent};
use super::token::TokenKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MixedChannel { index: usize, expected: Channel, found: Channel },
    SeqGap { index: usize, expected: u64, found: u64 },
    MonotonicityViolation { seq: u64, prev_ms: u64, emit_ms: u64 },
    CausalityViolation { seq: u64, emit_ms: u64, first_input_ms: u64 },
    /// An event of another segment appeared before the open segment's `</s>`.
    SegmentMismatch { seq: u64, open: u64, found: u64 },
    MisplacedBeginSeq { seq: u64 },
    DuplicateEndSeq { seq: u64, segment_id: u64 },
    SegmentReopened { seq: u64, segment_id: u64 },
    UnterminatedSegment { segment_id: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MixedChannel { index, expected, found } => {
                write!(f, "event #{index}: channel {found} in a {expected} stream")
            }
            Violation::SeqGap { index, expected, found } => {
                write!(f, "event #{index}: seq {found}, expected {expected}")
            }
            Violation::MonotonicityViolation { seq, prev_ms, emit_ms } => {
                write!(f, "seq {seq}: emit_ms {emit_ms} earlier than previous {prev_ms}")
            }
            Violation::CausalityViolation { seq, emit_ms, first_input_ms } => write!(
                f,
                "seq {seq}: emit_ms {emit_ms} precedes first_input_ms {first_input_ms}"
            ),
            Violation::SegmentMismatch { seq, open, found } => write!(
                f,
                "seq {seq}: segment {found} event while segment {open} is still open"
            ),
            Violation::MisplacedBeginSeq { seq } => write!(f, "seq {seq}: <s> inside a segment"),
            Violation::DuplicateEndSeq { seq, segment_id } => {
                write!(f, "seq {seq}: second </s> for segment {segment_id}")
            }
            Violation::SegmentReopened { seq, segment_id } => {
                write!(f, "seq {seq}: segment {segment_id} reopened after its </s>")
            }
            Violation::UnterminatedSegment { segment_id } => {
                write!(f, "segment {segment_id} has no </s>")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Open {
    segment_id: u64,
    has_events: bool,
}

/// Checks a single-channel stream: dense `seq` from 0, non-decreasing
/// `emit_ms`, causality, and `<s>`/`</s>` bracketing of segments.
///
/// A segment opens at stream start or after the previous `</s>`, with or
/// without an explicit `<s>`, and closes with exactly one `</s>`. A bare
/// `</s>` outside any segment is an empty segment.
pub fn validate_stream(events: &[TimedEvent]) -> ValidationReport {
    let mut violations = Vec::new();
    let Some(first) = events.first() else {
        return ValidationReport::default();
    };
    let channel = first.channel;
    let mut prev_ms: Option<u64> = None;
    let mut open: Option<Open> = None;
    let mut closed: HashSet<u64> = HashSet::new();

    for (index, ev) in events.iter().enumerate() {
        if ev.channel != channel {
            violations.push(Violation::MixedChannel {
                index,
                expected: channel,
                found: ev.channel,
            });
        }
        if ev.seq != index as u64 {
            violations.push(Violation::SeqGap {
                index,
                expected: index as u64,
                found: ev.seq,
            });
        }
        if let Some(p) = prev_ms {
            if ev.emit_ms < p {
                violations.push(Violation::MonotonicityViolation {
                    seq: ev.seq,
                    prev_ms: p,
                    emit_ms: ev.emit_ms,
                });
            }
        }
        prev_ms = Some(prev_ms.map_or(ev.emit_ms, |p| p.max(ev.emit_ms)));
        if ev.emit_ms < ev.provenance.first_input_ms {
            violations.push(Violation::CausalityViolation {
                seq: ev.seq,
                emit_ms: ev.emit_ms,
                first_input_ms: ev.provenance.first_input_ms,
            });
        }

        let seg = ev.segment_id();
        let kind = match &ev.payload {
            Payload::Token(t) => Some(t.kind()),
            _ => None,
        };
        match (&mut open, kind) {
            (Some(o), Some(TokenKind::EndSeq)) => {
                if o.segment_id != seg {
                    violations.push(Violation::SegmentMismatch {
                        seq: ev.seq,
                        open: o.segment_id,
                        found: seg,
                    });
                }
                closed.insert(o.segment_id);
                open = None;
            }
            (None, Some(TokenKind::EndSeq)) => {
                if closed.contains(&seg) {
                    violations.push(Violation::DuplicateEndSeq {
                        seq: ev.seq,
                        segment_id: seg,
                    });
                }
                closed.insert(seg);
            }
            (Some(o), Some(TokenKind::BeginSeq)) => {
                if o.has_events || o.segment_id != seg {
                    violations.push(Violation::MisplacedBeginSeq { seq: ev.seq });
                }
                o.has_events = true;
            }
            (Some(o), _) => {
                if o.segment_id != seg {
                    violations.push(Violation::SegmentMismatch {
                        seq: ev.seq,
                        open: o.segment_id,
                        found: seg,
                    });
                }
                o.has_events = true;
            }
            (None, k) => {
                if closed.contains(&seg) {
                    violations.push(Violation::SegmentReopened {
                        seq: ev.seq,
                        segment_id: seg,
                    });
                }
                open = Some(Open {
                    segment_id: seg,
                    has_events: k != Some(TokenKind::BeginSeq),
                });
            }
        }
    }
    if let Some(o) = open {
        violations.push(Violation::UnterminatedSegment {
            segment_id: o.segment_id,
        });
    }
    ValidationReport { violations }
}
