use super::duration::{predict_duration, DurationModel, FRAME_MS};
use super::mora::AccentPhrase;
use crate::policies::{BoundaryRules, Emitter, PhraseBuffer, Stage, StageError};
use crate::policies::{payload_kind, SegmentTracker};
use crate::stream::{Channel, ChunkRef, Clock, Payload, TimedEvent, Token, TokenKind};

/// Modeled synthesis cost per emitted phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SynthCompute {
    pub stage_ms: u64,
    pub per_mora_ms: u64,
}

/// Synthesizer stage: buffers translated tokens into accent phrases
/// (hold-one) and emits one `chk` per phrase, frame aligned.
pub struct SynthStage<M> {
    rules: BoundaryRules,
    model: M,
    compute: SynthCompute,
    emitter: Emitter,
    tracker: SegmentTracker,
    buffer: PhraseBuffer,
}

impl<M: DurationModel> SynthStage<M> {
    pub fn new(rules: BoundaryRules, model: M, compute: SynthCompute, clock: Clock) -> Self {
        Self {
            rules,
            model,
            compute,
            emitter: Emitter::new(Channel::Itts, clock).with_frame_alignment(FRAME_MS),
            tracker: SegmentTracker::default(),
            buffer: PhraseBuffer::default(),
        }
    }

    fn synthesize(&mut self, tokens: &[Token], avail_ms: u64, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        let fail = |reason: String| StageError::Synthesis {
            channel: Channel::Itts,
            reason,
        };
        let phrase = AccentPhrase::from_tokens(tokens, &self.rules).map_err(|e| fail(e.to_string()))?;
        let duration = predict_duration(&phrase, &self.model).map_err(|e| fail(e.to_string()))?;
        let chunk = ChunkRef::new(duration, phrase.surface_text()).map_err(|e| fail(e.to_string()))?;
        let prov = self
            .tracker
            .current()
            .ok_or_else(|| fail("phrase outside a segment".into()))?
            .provenance();
        let cost = self.compute.stage_ms + self.compute.per_mora_ms * phrase.n_moras() as u64;
        let t = self.emitter.stamp(avail_ms, cost);
        out.push(self.emitter.emit(t, Payload::Chunk(chunk), prov));
        Ok(())
    }
}

impl<M: DurationModel> Stage for SynthStage<M> {
    fn channel(&self) -> Channel {
        Channel::Itts
    }

    fn push(&mut self, ev: &TimedEvent, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        let Payload::Token(tok) = &ev.payload else {
            return Err(StageError::UnexpectedPayload {
                channel: Channel::Itts,
                seq: ev.seq,
                kind: payload_kind(&ev.payload),
            });
        };
        self.tracker.observe(Channel::Itts, ev)?;
        match tok.kind() {
            TokenKind::Regular => {
                if let Some(done) = self.buffer.push(&self.rules, tok) {
                    self.synthesize(&done, ev.emit_ms, out)?;
                }
            }
            TokenKind::BeginSeq | TokenKind::EndBlock => {}
            TokenKind::EndSeq => {
                if let Some(rest) = self.buffer.end() {
                    self.synthesize(&rest, ev.emit_ms, out)?;
                }
                let seg = self.tracker.close().expect("segment observed above");
                let t = self.emitter.stamp(ev.emit_ms, 0);
                out.push(
                    self.emitter
                        .emit(t, Payload::Token(Token::end_seq()), seg.provenance()),
                );
            }
        }
        Ok(())
    }

    fn finish(&mut self, _out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        match self.tracker.current() {
            Some(open) => Err(StageError::Deadlock {
                channel: Channel::Itts,
                segment_id: Some(open.segment_id),
                n_read: 0,
                n_written: 0,
            }),
            None => Ok(()),
        }
    }
}
