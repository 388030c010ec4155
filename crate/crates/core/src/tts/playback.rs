use super::mora::AccentPhrase;

/// A synthesized phrase waiting for the audio device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthChunk {
    pub phrase: AccentPhrase,
    /// Time its inputs and synthesis compute were complete.
    pub ready_ms: u64,
    pub duration_ms: u64,
    pub segment_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaybackEntry {
    pub ready_ms: u64,
    pub duration_ms: u64,
    pub play_start_ms: u64,
    pub speaking_latency_ms: u64,
}

impl PlaybackEntry {
    pub fn play_end_ms(&self) -> u64 {
        self.play_start_ms + self.duration_ms
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaybackPlan {
    pub entries: Vec<PlaybackEntry>,
}

impl PlaybackPlan {
    pub fn latencies(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.speaking_latency_ms).collect()
    }

    pub fn play_starts(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.play_start_ms).collect()
    }

    pub fn max_latency_ms(&self) -> Option<u64> {
        self.entries.iter().map(|e| e.speaking_latency_ms).max()
    }
}

/// Single FIFO player: a chunk starts when it is ready and the previous
/// one has finished.
pub fn schedule_ready_durations(chunks: &[(u64, u64)]) -> PlaybackPlan {
    let mut entries = Vec::with_capacity(chunks.len());
    let mut free_at = 0;
    for (i, &(ready_ms, duration_ms)) in chunks.iter().enumerate() {
        let play_start_ms = if i == 0 { ready_ms } else { ready_ms.max(free_at) };
        free_at = play_start_ms + duration_ms;
        entries.push(PlaybackEntry {
            ready_ms,
            duration_ms,
            play_start_ms,
            speaking_latency_ms: play_start_ms - ready_ms,
        });
    }
    PlaybackPlan { entries }
}

pub fn schedule_playback(chunks: &[SynthChunk]) -> PlaybackPlan {
    let pairs: Vec<_> = chunks.iter().map(|c| (c.ready_ms, c.duration_ms)).collect();
    schedule_ready_durations(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(ready: &[u64], dur: &[u64]) -> PlaybackPlan {
        let pairs: Vec<_> = ready.iter().copied().zip(dur.iter().copied()).collect();
        schedule_ready_durations(&pairs)
    }

    #[test]
    fn gaps_exceed_durations() {
        assert_eq!(plan(&[0, 1000, 2000], &[800, 800, 800]).latencies(), vec![0, 0, 0]);
    }

    #[test]
    fn queue_builds_up() {
        let p = plan(&[0, 500, 1000], &[800, 800, 800]);
        assert_eq!(p.play_starts(), vec![0, 800, 1600]);
        assert_eq!(p.latencies(), vec![0, 300, 600]);
        assert_eq!(p.max_latency_ms(), Some(600));
    }

    #[test]
    fn single_and_empty() {
        assert_eq!(plan(&[1234], &[5]).latencies(), vec![0]);
        assert_eq!(plan(&[], &[]).max_latency_ms(), None);
    }
}
