//! Fixed-block recognizer timing with look-ahead.

use super::stage::{payload_kind, Emitter, SegmentTracker, Stage, StageError};
use crate::stream::{Channel, Clock, ClockMode, HopMs, Payload, TimedEvent, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEmitterConfig {
    pub block_frames: u32,
    pub hop_ms: HopMs,
    /// Future blocks the recognizer waits for before emitting a block.
    pub lookahead_blocks: u32,
    pub compute_ms_per_block: u64,
}

impl Default for BlockEmitterConfig {
    /// 32 frames of 17.1875 ms: 550 ms blocks, no look-ahead, free compute.
    fn default() -> Self {
        Self {
            block_frames: 32,
            hop_ms: HopMs::default(),
            lookahead_blocks: 0,
            compute_ms_per_block: 0,
        }
    }
}

impl BlockEmitterConfig {
    pub fn block_duration_ms(&self) -> u64 {
        self.hop_ms.span_ms_ceil(self.block_frames as u64)
    }
}

/// Emission time of every block of a segment starting at 0 ms.
///
/// Block `b` is ready once frames up to the end of block `b + lookahead`
/// have arrived, or at segment end if those frames do not exist. Blocks are
/// recognized one after another, each costing `compute_ms_per_block`.
pub fn block_emit_schedule(total_frames: u64, cfg: &BlockEmitterConfig) -> Vec<u64> {
    let per_block = cfg.block_frames as u64;
    let n_blocks = total_frames.div_ceil(per_block);
    let mut out = Vec::with_capacity(n_blocks as usize);
    let mut prev = 0;
    for b in 0..n_blocks {
        let needed = ((b + 1 + cfg.lookahead_blocks as u64) * per_block).min(total_frames);
        let avail = cfg.hop_ms.span_ms_ceil(needed);
        let t = avail.max(prev) + cfg.compute_ms_per_block;
        out.push(t);
        prev = t;
    }
    out
}

#[derive(Debug)]
struct Block {
    /// Frames from segment start through the end of this block, in
    /// ten-thousandths of a millisecond.
    end_units: u64,
    tokens: Vec<Token>,
}

#[derive(Debug)]
struct Segment {
    start_ms: u64,
    blocks: Vec<Block>,
    next_emit: usize,
}

impl Segment {
    fn block_end_ms(&self, b: usize) -> u64 {
        self.start_ms + self.blocks[b].end_units.div_ceil(HopMs::SCALE)
    }
}

/// Recognizer stage: turns `frm` blocks (each followed by the `tok`
/// transcript it carries) into regular tokens plus an `<m>` per block.
pub struct BlockEmitter {
    cfg: BlockEmitterConfig,
    emitter: Emitter,
    tracker: SegmentTracker,
    segment: Option<Segment>,
}

impl BlockEmitter {
    pub fn new(cfg: BlockEmitterConfig, clock: Clock) -> Self {
        Self {
            cfg,
            emitter: Emitter::new(Channel::Isr, clock),
            tracker: SegmentTracker::default(),
            segment: None,
        }
    }

    fn emit_block(&mut self, avail_ms: u64, out: &mut Vec<TimedEvent>) {
        let Some(seg) = self.segment.as_mut() else {
            return;
        };
        let b = seg.next_emit;
        seg.next_emit += 1;
        let tokens = std::mem::take(&mut seg.blocks[b].tokens);
        let prov = match self.tracker.current() {
            Some(s) => s.provenance(),
            None => return,
        };
        let t = self.emitter.stamp(avail_ms, self.cfg.compute_ms_per_block);
        for tok in tokens {
            out.push(self.emitter.emit(t, Payload::Token(tok), prov));
        }
        out.push(self.emitter.emit(t, Payload::Token(Token::end_block()), prov));
    }

    fn malformed(&self, reason: impl Into<String>) -> StageError {
        StageError::MalformedInput {
            channel: Channel::Isr,
            reason: reason.into(),
        }
    }
}

impl Stage for BlockEmitter {
    fn channel(&self) -> Channel {
        Channel::Isr
    }

    fn push(&mut self, ev: &TimedEvent, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        let lookahead = self.cfg.lookahead_blocks as usize;
        let wall = self.emitter.mode() == ClockMode::Wall;
        match &ev.payload {
            Payload::Frames { n_frames, hop } => {
                self.tracker.observe(Channel::Isr, ev)?;
                let seg = self.segment.get_or_insert(Segment {
                    start_ms: ev.emit_ms,
                    blocks: Vec::new(),
                    next_emit: 0,
                });
                let prev = seg.blocks.last().map_or(0, |b| b.end_units);
                seg.blocks.push(Block {
                    end_units: prev + hop.span_units(*n_frames as u64),
                    tokens: Vec::new(),
                });
                // Block b is complete (transcript included) once block b+1 has
                // started; it may be emitted once b+lookahead is complete.
                loop {
                    let seg = self.segment.as_ref().expect("segment just opened");
                    let b = seg.next_emit;
                    if b + lookahead + 1 >= seg.blocks.len() {
                        break;
                    }
                    let avail = if wall {
                        ev.emit_ms
                    } else {
                        seg.block_end_ms(b + lookahead)
                    };
                    self.emit_block(avail, out);
                }
            }
            Payload::Token(tok) => match tok.kind() {
                TokenKind::Regular => {
                    self.tracker.observe(Channel::Isr, ev)?;
                    let block = self
                        .segment
                        .as_mut()
                        .and_then(|s| s.blocks.last_mut())
                        .ok_or_else(|| {
                            StageError::MalformedInput {
                                channel: Channel::Isr,
                                reason: format!(
                                    "transcript token `{tok}` (seq {}) precedes the first frame block",
                                    ev.seq
                                ),
                            }
                        })?;
                    block.tokens.push(tok.clone());
                }
                TokenKind::BeginSeq | TokenKind::EndBlock => {
                    self.tracker.observe(Channel::Isr, ev)?;
                }
                TokenKind::EndSeq => {
                    self.tracker.observe(Channel::Isr, ev)?;
                    let eos_ms = ev.emit_ms;
                    while let Some(seg) = self.segment.as_ref() {
                        let b = seg.next_emit;
                        if b >= seg.blocks.len() {
                            break;
                        }
                        let avail = if wall || b + lookahead >= seg.blocks.len() {
                            eos_ms
                        } else {
                            seg.block_end_ms(b + lookahead)
                        };
                        self.emit_block(avail, out);
                    }
                    self.segment = None;
                    let seg = self
                        .tracker
                        .close()
                        .ok_or_else(|| self.malformed("</s> without a segment"))?;
                    let t = self.emitter.stamp(eos_ms, 0);
                    out.push(
                        self.emitter
                            .emit(t, Payload::Token(Token::end_seq()), seg.provenance()),
                    );
                }
            },
            Payload::Chunk(_) => {
                return Err(StageError::UnexpectedPayload {
                    channel: Channel::Isr,
                    seq: ev.seq,
                    kind: payload_kind(&ev.payload),
                })
            }
        }
        Ok(())
    }

    fn finish(&mut self, _out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        if let Some(open) = self.tracker.current() {
            let (read, written) = self
                .segment
                .as_ref()
                .map_or((0, 0), |s| (s.blocks.len(), s.next_emit));
            return Err(StageError::Deadlock {
                channel: Channel::Isr,
                segment_id: Some(open.segment_id),
                n_read: read,
                n_written: written,
            });
        }
        Ok(())
    }
}
