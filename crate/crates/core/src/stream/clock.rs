use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    Virtual,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("virtual clock cannot move back from {now_ms} ms to {target_ms} ms")]
pub struct ClockError {
    pub now_ms: u64,
    pub target_ms: u64,
}

/// Stage-local time source.
///
/// A virtual clock only moves through [`Clock::advance_to`]. A wall clock
/// reads milliseconds elapsed since a shared UNIX-epoch origin, so stages in
/// separate processes agree on timestamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clock {
    Virtual { now_ms: u64 },
    Wall { origin_unix_ms: u64 },
}

impl Clock {
    pub fn virtual_at(now_ms: u64) -> Self {
        Clock::Virtual { now_ms }
    }

    pub fn wall(origin_unix_ms: u64) -> Self {
        Clock::Wall { origin_unix_ms }
    }

    pub fn mode(&self) -> ClockMode {
        match self {
            Clock::Virtual { .. } => ClockMode::Virtual,
            Clock::Wall { .. } => ClockMode::Wall,
        }
    }

    pub fn now_ms(&self) -> u64 {
        match *self {
            Clock::Virtual { now_ms } => now_ms,
            Clock::Wall { origin_unix_ms } => unix_now_ms().saturating_sub(origin_unix_ms),
        }
    }

    /// Moves a virtual clock forward. A no-op for wall clocks.
    pub fn advance_to(&mut self, target_ms: u64) -> Result<(), ClockError> {
        if let Clock::Virtual { now_ms } = self {
            if target_ms < *now_ms {
                return Err(ClockError {
                    now_ms: *now_ms,
                    target_ms,
                });
            }
            *now_ms = target_ms;
        }
        Ok(())
    }
}

pub fn unix_now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
