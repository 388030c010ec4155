use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Read,
    Write,
    Flush,
}

impl Action {
    pub fn letter(self) -> char {
        match self {
            Action::Read => 'R',
            Action::Write => 'W',
            Action::Flush => 'F',
        }
    }
}

/// The policy wants input that is not there yet and is not allowed to
/// write. In a live stream this means "wait"; once the input is closed it
/// is a real deadlock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("stalled: {n_read} read, {n_written} written, no input available")]
pub struct Deadlock {
    pub n_read: usize,
    pub n_written: usize,
}

/// Read/write decision procedure of an incremental stage.
pub trait StagePolicy {
    fn next_action(&self, input_available: bool, output_pending: bool) -> Result<Action, Deadlock>;
    /// A regular source token was consumed.
    fn on_read(&mut self);
    fn on_write(&mut self);
    /// `</s>` was consumed; the source length is now final.
    fn on_source_done(&mut self);
    fn reset(&mut self);
    /// Whether `<s>`/`<m>` markers are forwarded downstream.
    fn forwards_markers(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaitKState {
    pub k: usize,
    pub n_read: usize,
    pub n_written: usize,
    pub source_done: bool,
}

impl WaitKState {
    /// # Panics
    /// If `k` is zero.
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "wait-k delay must be at least 1");
        Self {
            k,
            n_read: 0,
            n_written: 0,
            source_done: false,
        }
    }

    /// Whether target token `n_written + 1` may be written now.
    pub fn write_permitted(&self) -> bool {
        self.source_done || self.n_read >= self.n_written + self.k
    }
}

/// One step of the wait-k policy.
///
/// Target token `i` (1-based) needs `min(i + k - 1, J)` source tokens. `J`
/// is unknown until the source is done, after which writes are
/// unconstrained and the stage flushes once nothing is pending.
pub fn wait_k_next_action(
    state: &WaitKState,
    input_available: bool,
    output_pending: bool,
) -> Result<Action, Deadlock> {
    if state.source_done {
        return Ok(if output_pending {
            Action::Write
        } else {
            Action::Flush
        });
    }
    if output_pending && state.write_permitted() {
        return Ok(Action::Write);
    }
    if input_available {
        return Ok(Action::Read);
    }
    Err(Deadlock {
        n_read: state.n_read,
        n_written: state.n_written,
    })
}

/// Read/write string for a source of `j` tokens and a target of `i`
/// tokens, obtained by driving [`wait_k_next_action`] to completion.
///
/// # Panics
/// If any argument is zero.
pub fn wait_k_schedule(j: usize, i: usize, k: usize) -> Vec<Action> {
    assert!(j >= 1 && i >= 1 && k >= 1, "wait_k_schedule needs J, I, k >= 1");
    let mut state = WaitKState::new(k);
    let mut out = Vec::with_capacity(i + j);
    loop {
        state.source_done = state.n_read == j;
        match wait_k_next_action(&state, state.n_read < j, state.n_written < i) {
            Ok(Action::Read) => {
                state.n_read += 1;
                out.push(Action::Read);
            }
            Ok(Action::Write) => {
                state.n_written += 1;
                out.push(Action::Write);
            }
            // The source is exhausted and all target tokens are out.
            Ok(Action::Flush) => break,
            Err(_) => unreachable!("schedule source is always available until exhausted"),
        }
    }
    out
}

pub fn schedule_string(actions: &[Action]) -> String {
    actions.iter().map(|a| a.letter()).collect()
}

#[derive(Debug, Clone)]
pub struct WaitK {
    state: WaitKState,
}

impl WaitK {
    pub fn new(k: usize) -> Self {
        Self {
            state: WaitKState::new(k),
        }
    }

    pub fn state(&self) -> &WaitKState {
        &self.state
    }
}

impl StagePolicy for WaitK {
    fn next_action(&self, input_available: bool, output_pending: bool) -> Result<Action, Deadlock> {
        wait_k_next_action(&self.state, input_available, output_pending)
    }

    fn on_read(&mut self) {
        self.state.n_read += 1;
    }

    fn on_write(&mut self) {
        self.state.n_written += 1;
    }

    fn on_source_done(&mut self) {
        self.state.source_done = true;
    }

    fn reset(&mut self) {
        self.state = WaitKState::new(self.state.k);
    }
}

/// Writes everything as soon as it is available; forwards markers.
#[derive(Debug, Clone, Default)]
pub struct PassThrough {
    n_read: usize,
    n_written: usize,
    source_done: bool,
}

impl StagePolicy for PassThrough {
    fn next_action(&self, input_available: bool, output_pending: bool) -> Result<Action, Deadlock> {
        if output_pending {
            Ok(Action::Write)
        } else if self.source_done {
            Ok(Action::Flush)
        } else if input_available {
            Ok(Action::Read)
        } else {
            Err(Deadlock {
                n_read: self.n_read,
                n_written: self.n_written,
            })
        }
    }

    fn on_read(&mut self) {
        self.n_read += 1;
    }

    fn on_write(&mut self) {
        self.n_written += 1;
    }

    fn on_source_done(&mut self) {
        self.source_done = true;
    }

    fn reset(&mut self) {
        *self = Self::default();
    }

    fn forwards_markers(&self) -> bool {
        true
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(k: usize, n_read: usize, n_written: usize, source_done: bool) -> WaitKState {
        WaitKState {
            k,
            n_read,
            n_written,
            source_done,
        }
    }

    #[test]
    fn fifth_token_not_yet_read() {
        assert_eq!(
            wait_k_next_action(&state(5, 4, 0, false), true, true),
            Ok(Action::Read)
        );
    }

    #[test]
    fn minimal_delay_writes() {
        assert_eq!(
            wait_k_next_action(&state(1, 1, 0, false), true, true),
            Ok(Action::Write)
        );
    }

    #[test]
    fn tail_writes_unconstrained() {
        assert_eq!(
            wait_k_next_action(&state(3, 2, 0, true), false, true),
            Ok(Action::Write)
        );
        assert_eq!(
            wait_k_next_action(&state(3, 2, 2, true), false, false),
            Ok(Action::Flush)
        );
    }

    #[test]
    fn stall_without_input() {
        assert_eq!(
            wait_k_next_action(&state(3, 1, 0, false), false, true),
            Err(Deadlock {
                n_read: 1,
                n_written: 0
            })
        );
    }

    #[test]
    fn nothing_pending_keeps_reading() {
        assert_eq!(
            wait_k_next_action(&state(1, 3, 0, false), true, false),
            Ok(Action::Read)
        );
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule_string(&wait_k_schedule(3, 4, 2)), "RRWRWWW");
        assert_eq!(schedule_string(&wait_k_schedule(3, 3, 5)), "RRRWWW");
        assert_eq!(schedule_string(&wait_k_schedule(1, 1, 1)), "RW");
        assert_eq!(schedule_string(&wait_k_schedule(4, 1, 1)), "RWRRR");
    }

    #[test]
    fn pass_through_forwards_and_flushes() {
        let mut p = PassThrough::default();
        assert!(p.forwards_markers());
        assert_eq!(p.next_action(true, false), Ok(Action::Read));
        p.on_source_done();
        assert_eq!(p.next_action(false, true), Ok(Action::Write));
        assert_eq!(p.next_action(false, false), Ok(Action::Flush));
    }
}
