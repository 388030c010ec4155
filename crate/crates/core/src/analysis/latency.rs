use std::fmt::Write as _;

use super::align::{AlignedUnit, AnalysisError};
use crate::stream::{Channel, Payload, TimedEvent};
use crate::tts::{schedule_ready_durations, PlaybackPlan};

/// Mean and sample variance of one module's delays, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuleStats {
    pub mean_s: f64,
    pub var_s: f64,
    pub n: usize,
}

impl ModuleStats {
    fn from_seconds(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Self {
            mean_s: mean,
            var_s: var,
            n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeakingStats {
    pub mean_s: f64,
    pub max_s: f64,
    pub chunks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub isr: Option<ModuleStats>,
    pub imt: Option<ModuleStats>,
    pub itts: Option<ModuleStats>,
    pub speaking: Option<SpeakingStats>,
    pub units: Vec<AlignedUnit>,
}

fn fmt3(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    }
}

fn fmt_ms(x: Option<u64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl LatencyReport {
    pub fn module(&self, channel: Channel) -> Option<ModuleStats> {
        match channel {
            Channel::Source => None,
            Channel::Isr => self.isr,
            Channel::Imt => self.imt,
            Channel::Itts => self.itts,
        }
    }

    /// Adds speaking-latency statistics from the synthesizer's playback queue.
    pub fn with_speaking(mut self, plan: &PlaybackPlan) -> Self {
        let lat: Vec<f64> = plan
            .entries
            .iter()
            .map(|e| e.speaking_latency_ms as f64 / 1000.0)
            .collect();
        self.speaking = (!lat.is_empty()).then(|| SpeakingStats {
            mean_s: lat.iter().sum::<f64>() / lat.len() as f64,
            max_s: lat.iter().copied().fold(0.0, f64::max),
            chunks: lat.len(),
        });
        self
    }

    /// `key = value` lines, seconds with three decimals; `n/a` when no
    /// unit has output on that channel.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (name, stats) in [("isr", self.isr), ("imt", self.imt), ("itts", self.itts)] {
            let _ = writeln!(s, "{name}_delay_mean = {}", fmt3(stats.map(|m| m.mean_s)));
            let _ = writeln!(s, "{name}_delay_var = {}", fmt3(stats.map(|m| m.var_s)));
        }
        let _ = writeln!(s, "speak_latency_mean = {}", fmt3(self.speaking.map(|m| m.mean_s)));
        let _ = writeln!(s, "speak_latency_max = {}", fmt3(self.speaking.map(|m| m.max_s)));
        let _ = writeln!(s, "units = {}", self.units.len());
        s
    }

    /// Per-unit table, tab separated, `-` for a missing channel.
    pub fn render_tsv(&self) -> String {
        let mut s = String::from("segment_id\tsource_start_ms\tisr_delay_ms\timt_delay_ms\titts_delay_ms\n");
        for u in &self.units {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}",
                u.segment_id,
                u.source_start_ms,
                fmt_ms(u.delay_ms(Channel::Isr)),
                fmt_ms(u.delay_ms(Channel::Imt)),
                fmt_ms(u.delay_ms(Channel::Itts)),
            );
        }
        s
    }
}

/// Ear-voice span per module: first output minus source start, averaged
/// over the units that have output on that channel.
pub fn compute_evs(units: &[AlignedUnit]) -> Result<LatencyReport, AnalysisError> {
    if units.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let stats = |c: Channel| {
        let xs: Vec<f64> = units
            .iter()
            .filter_map(|u| u.delay_ms(c))
            .map(|ms| ms as f64 / 1000.0)
            .collect();
        ModuleStats::from_seconds(&xs)
    };
    Ok(LatencyReport {
        isr: stats(Channel::Isr),
        imt: stats(Channel::Imt),
        itts: stats(Channel::Itts),
        speaking: None,
        units: units.to_vec(),
    })
}

/// Playback queue over every `chk` event of a synthesizer log, in log order.
pub fn speaking_plan(itts_log: &[TimedEvent]) -> PlaybackPlan {
    let pairs: Vec<_> = itts_log
        .iter()
        .filter_map(|e| match &e.payload {
            Payload::Chunk(c) => Some((e.emit_ms, c.duration_ms())),
            _ => None,
        })
        .collect();
    schedule_ready_durations(&pairs)
}
