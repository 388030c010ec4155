//! Generic incremental stage: a policy decides when to read input and when
//! to write transducer output; an [`Emitter`] stamps outputs with times.

use std::collections::VecDeque;

use thiserror::Error;

use super::transducer::Transducer;
use super::wait_k::{Action, StagePolicy};
use crate::stream::{
    validate_stream, Channel, Clock, ClockMode, Payload, Provenance, TimedEvent, Token, TokenKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error("{channel} stage deadlocked in segment {segment_id:?}: {n_read} read, {n_written} written, input closed")]
    Deadlock {
        channel: Channel,
        segment_id: Option<u64>,
        n_read: usize,
        n_written: usize,
    },
    #[error("{channel} stage: malformed input: {reason}")]
    MalformedInput { channel: Channel, reason: String },
    #[error("{channel} stage cannot consume `{kind}` payload (input seq {seq})")]
    UnexpectedPayload {
        channel: Channel,
        seq: u64,
        kind: &'static str,
    },
    #[error("{channel} stage: {reason}")]
    Synthesis { channel: Channel, reason: String },
}

/// Modeled compute cost of a stage in virtual time.
///
/// `stage_ms` is paid once per decoder invocation (the first write after
/// new input); `per_token_ms` for every output token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComputeModel {
    pub stage_ms: u64,
    pub per_token_ms: u64,
}

/// Assigns dense sequence numbers and emission times for one output channel.
#[derive(Debug, Clone)]
pub struct Emitter {
    channel: Channel,
    next_seq: u64,
    clock: Clock,
    last_ms: u64,
    frame_ms: Option<u64>,
}

impl Emitter {
    pub fn new(channel: Channel, clock: Clock) -> Self {
        let last_ms = match clock {
            Clock::Virtual { now_ms } => now_ms,
            Clock::Wall { .. } => 0,
        };
        Self {
            channel,
            next_seq: 0,
            clock,
            last_ms,
            frame_ms: None,
        }
    }

    /// Rounds every emission time up to a multiple of `frame_ms`.
    pub fn with_frame_alignment(mut self, frame_ms: u64) -> Self {
        self.frame_ms = Some(frame_ms.max(1));
        self
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn mode(&self) -> ClockMode {
        self.clock.mode()
    }

    pub fn last_ms(&self) -> u64 {
        self.last_ms
    }

    /// Emission time for output whose inputs were all available at
    /// `avail_ms`. Virtual: `max(avail, previous) + cost`. Wall: the
    /// current wall time, never earlier than `avail` or the previous output.
    pub fn stamp(&mut self, avail_ms: u64, cost_ms: u64) -> u64 {
        let t = match self.clock.mode() {
            ClockMode::Virtual => avail_ms.max(self.last_ms) + cost_ms,
            ClockMode::Wall => self.clock.now_ms().max(self.last_ms).max(avail_ms),
        };
        let t = match self.frame_ms {
            Some(f) => t.div_ceil(f) * f,
            None => t,
        };
        // t >= last_ms >= virtual now, so this cannot fail.
        let _ = self.clock.advance_to(t);
        self.last_ms = t;
        t
    }

    pub fn emit(&mut self, at_ms: u64, payload: Payload, provenance: Provenance) -> TimedEvent {
        let at_ms = at_ms.max(self.last_ms);
        self.last_ms = at_ms;
        let seq = self.next_seq;
        self.next_seq += 1;
        TimedEvent::new(self.channel, seq, at_ms, payload, provenance)
    }
}

/// Push-driven stage: events go in one at a time, outputs come out as soon
/// as the stage decides to write them.
pub trait Stage {
    fn channel(&self) -> Channel;
    fn push(&mut self, ev: &TimedEvent, out: &mut Vec<TimedEvent>) -> Result<(), StageError>;
    /// Input is closed. Errors if a segment is left unfinished.
    fn finish(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError>;
}

impl<S: Stage + ?Sized> Stage for Box<S> {
    fn channel(&self) -> Channel {
        (**self).channel()
    }

    fn push(&mut self, ev: &TimedEvent, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        (**self).push(ev, out)
    }

    fn finish(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        (**self).finish(out)
    }
}

/// Feeds a whole stream through a stage.
pub fn drive_stage<S: Stage + ?Sized>(
    stage: &mut S,
    input: &[TimedEvent],
) -> Result<Vec<TimedEvent>, StageError> {
    let mut out = Vec::new();
    for ev in input {
        stage.push(ev, &mut out)?;
    }
    stage.finish(&mut out)?;
    Ok(out)
}

/// Segment currently being consumed by a stage.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OpenSegment {
    pub segment_id: u64,
    pub first_input_ms: u64,
    /// Latest availability time among consumed inputs.
    pub last_avail_ms: u64,
}

impl OpenSegment {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            segment_id: self.segment_id,
            first_input_ms: self.first_input_ms,
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct SegmentTracker {
    open: Option<OpenSegment>,
}

impl SegmentTracker {
    pub fn observe(
        &mut self,
        channel: Channel,
        ev: &TimedEvent,
    ) -> Result<&mut OpenSegment, StageError> {
        let seg = ev.segment_id();
        let open = self.open.get_or_insert(OpenSegment {
            segment_id: seg,
            first_input_ms: ev.provenance.first_input_ms,
            last_avail_ms: ev.emit_ms,
        });
        if open.segment_id != seg {
            return Err(StageError::MalformedInput {
                channel,
                reason: format!(
                    "segment {seg} started before segment {} was closed with </s>",
                    open.segment_id
                ),
            });
        }
        open.first_input_ms = open.first_input_ms.min(ev.provenance.first_input_ms);
        open.last_avail_ms = open.last_avail_ms.max(ev.emit_ms);
        Ok(open)
    }

    pub fn current(&self) -> Option<&OpenSegment> {
        self.open.as_ref()
    }

    pub fn close(&mut self) -> Option<OpenSegment> {
        self.open.take()
    }
}

pub(crate) fn payload_kind(p: &Payload) -> &'static str {
    match p {
        Payload::Token(_) => "token",
        Payload::Frames { .. } => "frm",
        Payload::Chunk(_) => "chk",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    Read,
    ReadMarker,
    ReadEnd,
    Write,
    Flush,
}

/// One decision of a [`PolicyStage`], with the stage's own per-segment
/// counts of regular tokens read and written *after* the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub action: TraceAction,
    pub n_read: usize,
    pub n_written: usize,
}

pub struct PolicyStage<P, T> {
    policy: P,
    transducer: T,
    emitter: Emitter,
    compute: ComputeModel,
    queue: VecDeque<TimedEvent>,
    pending: VecDeque<Token>,
    segment: SegmentTracker,
    read_since_write: bool,
    n_read: usize,
    n_written: usize,
    trace: Option<Vec<TraceStep>>,
}

impl<P: StagePolicy, T: Transducer> PolicyStage<P, T> {
    pub fn new(
        channel: Channel,
        policy: P,
        transducer: T,
        clock: Clock,
        compute: ComputeModel,
    ) -> Self {
        Self {
            policy,
            transducer,
            emitter: Emitter::new(channel, clock),
            compute,
            queue: VecDeque::new(),
            pending: VecDeque::new(),
            segment: SegmentTracker::default(),
            read_since_write: false,
            n_read: 0,
            n_written: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[TraceStep] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn record(&mut self, action: TraceAction) {
        let (n_read, n_written) = (self.n_read, self.n_written);
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceStep {
                action,
                n_read,
                n_written,
            });
        }
    }

    fn channel_err(&self, reason: impl Into<String>) -> StageError {
        StageError::MalformedInput {
            channel: self.emitter.channel(),
            reason: reason.into(),
        }
    }

    fn drive(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        loop {
            let action = self
                .policy
                .next_action(!self.queue.is_empty(), !self.pending.is_empty());
            match action {
                Ok(Action::Read) => {
                    let ev = self
                        .queue
                        .pop_front()
                        .ok_or_else(|| self.channel_err("policy read with no input available"))?;
                    self.read(&ev)?;
                }
                Ok(Action::Write) => self.write(out)?,
                Ok(Action::Flush) => self.flush(out)?,
                // Waiting for more input.
                Err(_) => return Ok(()),
            }
        }
    }

    fn read(&mut self, ev: &TimedEvent) -> Result<(), StageError> {
        let channel = self.emitter.channel();
        let Payload::Token(token) = &ev.payload else {
            return Err(StageError::UnexpectedPayload {
                channel,
                seq: ev.seq,
                kind: payload_kind(&ev.payload),
            });
        };
        self.segment.observe(channel, ev)?;
        match token.kind() {
            TokenKind::Regular => {
                self.policy.on_read();
                self.n_read += 1;
                let outs = self.transducer.consume(token);
                self.pending.extend(outs);
                self.read_since_write = true;
                self.record(TraceAction::Read);
            }
            TokenKind::BeginSeq | TokenKind::EndBlock => {
                if self.policy.forwards_markers() {
                    self.pending.push_back(token.clone());
                }
                self.record(TraceAction::ReadMarker);
            }
            TokenKind::EndSeq => {
                self.policy.on_source_done();
                let outs = self.transducer.finish();
                self.pending.extend(outs);
                self.record(TraceAction::ReadEnd);
            }
        }
        Ok(())
    }

    fn write(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        let token = self
            .pending
            .pop_front()
            .ok_or_else(|| self.channel_err("policy wrote with nothing pending"))?;
        let seg = *self
            .segment
            .current()
            .ok_or_else(|| self.channel_err("output outside a segment"))?;
        let mut cost = self.compute.per_token_ms;
        if self.read_since_write {
            cost += self.compute.stage_ms;
        }
        let t = self.emitter.stamp(seg.last_avail_ms, cost);
        if token.is_regular() {
            self.n_written += 1;
        }
        out.push(self.emitter.emit(t, Payload::Token(token), seg.provenance()));
        self.policy.on_write();
        self.read_since_write = false;
        self.record(TraceAction::Write);
        Ok(())
    }

    fn flush(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        let seg = self
            .segment
            .close()
            .ok_or_else(|| self.channel_err("flush outside a segment"))?;
        let t = self.emitter.stamp(seg.last_avail_ms, 0);
        out.push(
            self.emitter
                .emit(t, Payload::Token(Token::end_seq()), seg.provenance()),
        );
        self.transducer.reset();
        self.policy.reset();
        self.read_since_write = false;
        self.record(TraceAction::Flush);
        self.n_read = 0;
        self.n_written = 0;
        Ok(())
    }
}

impl<P: StagePolicy, T: Transducer> Stage for PolicyStage<P, T> {
    fn channel(&self) -> Channel {
        self.emitter.channel()
    }

    fn push(&mut self, ev: &TimedEvent, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        self.queue.push_back(ev.clone());
        self.drive(out)
    }

    fn finish(&mut self, out: &mut Vec<TimedEvent>) -> Result<(), StageError> {
        self.drive(out)?;
        if self.segment.current().is_some() || !self.queue.is_empty() {
            return Err(StageError::Deadlock {
                channel: self.emitter.channel(),
                segment_id: self.segment.current().map(|s| s.segment_id),
                n_read: self.n_read,
                n_written: self.n_written,
            });
        }
        Ok(())
    }
}

/// Next stage in the cascade SRC → ISR → IMT → ITTS.
pub fn downstream(channel: Channel) -> Option<Channel> {
    match channel {
        Channel::Source => Some(Channel::Isr),
        Channel::Isr => Some(Channel::Imt),
        Channel::Imt => Some(Channel::Itts),
        Channel::Itts => None,
    }
}

/// Runs a policy/transducer pair over a complete, validated input stream.
/// Output goes on the channel downstream of the input's.
pub fn run_stage<P: StagePolicy, T: Transducer>(
    policy: P,
    transducer: T,
    input: &[TimedEvent],
    clock: Clock,
    compute: ComputeModel,
) -> Result<Vec<TimedEvent>, StageError> {
    let Some(first) = input.first() else {
        return Ok(Vec::new());
    };
    let channel = downstream(first.channel).ok_or_else(|| StageError::MalformedInput {
        channel: first.channel,
        reason: "no stage downstream of ITTS".into(),
    })?;
    let report = validate_stream(input);
    if let Some(v) = report.violations.first() {
        return Err(StageError::MalformedInput {
            channel,
            reason: format!(
                "{} violation(s) in input, first: {v}",
                report.violations.len()
            ),
        });
    }
    let mut stage = PolicyStage::new(channel, policy, transducer, clock, compute);
    drive_stage(&mut stage, input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::transducer::{make_dictionary_transducer, DictionaryTransducer, UnknownTokens};
    use crate::policies::wait_k::{PassThrough, WaitK};
    use std::collections::HashMap;

    fn isr_stream(items: &[(&str, u64)], segment_id: u64, seq0: u64) -> Vec<TimedEvent> {
        items
            .iter()
            .enumerate()
            .map(|(i, &(text, t))| {
                TimedEvent::new(
                    Channel::Isr,
                    seq0 + i as u64,
                    t,
                    Payload::Token(Token::from_text(text).unwrap()),
                    Provenance {
                        segment_id,
                        first_input_ms: 0,
                    },
                )
            })
            .collect()
    }

    fn texts(evs: &[TimedEvent]) -> Vec<(String, u64)> {
        evs.iter()
            .map(|e| (e.token().unwrap().text().to_string(), e.emit_ms))
            .collect()
    }

    fn upper() -> DictionaryTransducer {
        let mut table = HashMap::new();
        for (a, b) in [("a", "A"), ("b", "B"), ("c", "C")] {
            table.insert(a.to_string(), vec![Token::regular(b).unwrap()]);
        }
        make_dictionary_transducer(table, UnknownTokens::PassThrough)
    }

    #[test]
    fn identity_pass_through_shifts_by_cost_only() {
        let input = isr_stream(&[("a", 0), ("<m>", 0), ("b", 100), ("</s>", 200)], 0, 0);
        let out = run_stage(
            PassThrough::default(),
            DictionaryTransducer::identity(),
            &input,
            Clock::virtual_at(0),
            ComputeModel {
                stage_ms: 0,
                per_token_ms: 10,
            },
        )
        .unwrap();
        assert_eq!(
            texts(&out),
            vec![
                ("a".into(), 10),
                ("<m>".into(), 20),
                ("b".into(), 110),
                ("</s>".into(), 200)
            ]
        );
        assert!(validate_stream(&out).is_empty());
        assert!(out.iter().all(|e| e.channel == Channel::Imt));
    }

    #[test]
    fn wait_2_timing() {
        let input = isr_stream(&[("a", 0), ("b", 100), ("c", 200), ("</s>", 250)], 0, 0);
        let out = run_stage(
            WaitK::new(2),
            upper(),
            &input,
            Clock::virtual_at(0),
            ComputeModel::default(),
        )
        .unwrap();
        assert_eq!(
            texts(&out),
            vec![
                ("A".into(), 100),
                ("B".into(), 200),
                ("C".into(), 250),
                ("</s>".into(), 250)
            ]
        );
    }

    #[test]
    fn second_segment_unaffected_by_first() {
        let mut input = isr_stream(&[("a", 0), ("b", 10), ("</s>", 20)], 0, 0);
        input.extend(isr_stream(&[("c", 30), ("a", 40), ("</s>", 50)], 1, 3));
        let both = run_stage(WaitK::new(3), upper(), &input, Clock::virtual_at(0), ComputeModel::default())
            .unwrap();
        let alone = run_stage(
            WaitK::new(3),
            upper(),
            &isr_stream(&[("c", 30), ("a", 40), ("</s>", 50)], 1, 0),
            Clock::virtual_at(0),
            ComputeModel::default(),
        )
        .unwrap();
        let tail: Vec<_> = both.iter().filter(|e| e.segment_id() == 1).collect();
        assert_eq!(tail.len(), alone.len());
        for (x, y) in tail.iter().zip(&alone) {
            assert_eq!(x.payload, y.payload);
        }
    }

    #[test]
    fn stage_cost_paid_once_per_invocation() {
        let input = isr_stream(&[("a", 0), ("</s>", 0)], 0, 0);
        let table = parse("a\tX Y\n");
        let out = run_stage(
            PassThrough::default(),
            make_dictionary_transducer(table, UnknownTokens::Drop),
            &input,
            Clock::virtual_at(0),
            ComputeModel {
                stage_ms: 100,
                per_token_ms: 5,
            },
        )
        .unwrap();
        let times: Vec<_> = out.iter().map(|e| e.emit_ms).collect();
        assert_eq!(times, vec![105, 110, 110]);
    }

    fn parse(s: &str) -> HashMap<String, Vec<Token>> {
        crate::policies::transducer::parse_dictionary_table(s).unwrap()
    }

    #[test]
    fn truncated_input_deadlocks() {
        let input = isr_stream(&[("a", 0), ("b", 10)], 0, 0);
        let mut stage = PolicyStage::new(
            Channel::Imt,
            WaitK::new(5),
            upper(),
            Clock::virtual_at(0),
            ComputeModel::default(),
        );
        let err = drive_stage(&mut stage, &input).unwrap_err();
        assert_eq!(
            err,
            StageError::Deadlock {
                channel: Channel::Imt,
                segment_id: Some(0),
                n_read: 2,
                n_written: 0
            }
        );
    }

    #[test]
    fn run_stage_rejects_invalid_input() {
        let input = isr_stream(&[("a", 100), ("</s>", 0)], 0, 0);
        let err = run_stage(WaitK::new(1), upper(), &input, Clock::virtual_at(0), ComputeModel::default())
            .unwrap_err();
        assert!(matches!(err, StageError::MalformedInput { .. }));
    }

    #[test]
    fn frame_alignment() {
        let mut e = Emitter::new(Channel::Itts, Clock::virtual_at(0)).with_frame_alignment(5);
        assert_eq!(e.stamp(1651, 0), 1655);
        assert_eq!(e.stamp(0, 3), 1660);
    }
}
