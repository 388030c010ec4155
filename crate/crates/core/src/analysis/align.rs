use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::stream::{read_log, validate_stream, Channel, LogError, TimedEvent};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{}: {source}", path.display())]
    Log {
        path: PathBuf,
        #[source]
        source: LogError,
    },
    #[error("{}", format_invalid(.0))]
    Invalid(Vec<(String, Vec<String>)>),
    #[error("{channel} log holds a {found} event (seq {seq})")]
    WrongChannel {
        channel: Channel,
        found: Channel,
        seq: u64,
    },
    #[error("{channel} event seq {seq} refers to segment {segment_id}, which is not in the source log")]
    InconsistentProvenance {
        channel: Channel,
        segment_id: u64,
        seq: u64,
    },
    #[error("no segments to analyze")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn format_invalid(files: &[(String, Vec<String>)]) -> String {
    let mut s = String::from("invalid logs:");
    for (file, violations) in files {
        for v in violations {
            s.push_str(&format!("\n  {file}: {v}"));
        }
    }
    s
}

/// One log per channel; an absent log is an empty one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChannelLogs {
    pub src: Vec<TimedEvent>,
    pub isr: Vec<TimedEvent>,
    pub imt: Vec<TimedEvent>,
    pub itts: Vec<TimedEvent>,
}

impl ChannelLogs {
    pub fn get(&self, channel: Channel) -> &[TimedEvent] {
        match channel {
            Channel::Source => &self.src,
            Channel::Isr => &self.isr,
            Channel::Imt => &self.imt,
            Channel::Itts => &self.itts,
        }
    }

    pub fn get_mut(&mut self, channel: Channel) -> &mut Vec<TimedEvent> {
        match channel {
            Channel::Source => &mut self.src,
            Channel::Isr => &mut self.isr,
            Channel::Imt => &mut self.imt,
            Channel::Itts => &mut self.itts,
        }
    }

    pub fn is_empty(&self) -> bool {
        Channel::ALL.iter().all(|&c| self.get(c).is_empty())
    }

    /// Checks every log with the stream validator and that each holds only
    /// its own channel. All failures are collected, per file.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let mut bad = Vec::new();
        for channel in Channel::ALL {
            let log = self.get(channel);
            let mut msgs: Vec<String> = validate_stream(log)
                .violations
                .iter()
                .map(ToString::to_string)
                .collect();
            if let Some(ev) = log.iter().find(|e| e.channel != channel) {
                msgs.push(format!("holds a {} event (seq {})", ev.channel, ev.seq));
            }
            if !msgs.is_empty() {
                bad.push((log_file_name(channel), msgs));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(AnalysisError::Invalid(bad))
        }
    }
}

pub(crate) fn log_file_name(channel: Channel) -> String {
    format!("{}.log", channel.file_stem())
}

/// Reads `src.log`, `isr.log`, `imt.log` and `itts.log` from `dir`;
/// missing files count as empty logs.
pub fn load_log_dir(dir: &Path) -> Result<ChannelLogs, AnalysisError> {
    if !dir.is_dir() {
        return Err(AnalysisError::Io(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} is not a directory", dir.display()),
        )));
    }
    let mut logs = ChannelLogs::default();
    for channel in Channel::ALL {
        let path = dir.join(log_file_name(channel));
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e.into()),
        };
        *logs.get_mut(channel) = read_log(io::BufReader::new(file))
            .map_err(|source| AnalysisError::Log { path, source })?;
    }
    Ok(logs)
}

/// First-output times of one source segment on every channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignedUnit {
    pub segment_id: u64,
    pub source_start_ms: u64,
    pub isr_ms: Option<u64>,
    pub imt_ms: Option<u64>,
    pub itts_ms: Option<u64>,
}

impl AlignedUnit {
    pub fn first_output_ms(&self, channel: Channel) -> Option<u64> {
        match channel {
            Channel::Source => Some(self.source_start_ms),
            Channel::Isr => self.isr_ms,
            Channel::Imt => self.imt_ms,
            Channel::Itts => self.itts_ms,
        }
    }

    /// First output minus source start. Saturates at zero for logs whose
    /// output precedes the source.
    pub fn delay_ms(&self, channel: Channel) -> Option<u64> {
        self.first_output_ms(channel)
            .map(|t| t.saturating_sub(self.source_start_ms))
    }

    pub fn missing_channels(&self) -> Vec<Channel> {
        [Channel::Isr, Channel::Imt, Channel::Itts]
            .into_iter()
            .filter(|&c| self.first_output_ms(c).is_none())
            .collect()
    }

    /// Source start ≤ ISR ≤ IMT ≤ ITTS over the channels present.
    pub fn is_causal(&self) -> bool {
        let mut prev = self.source_start_ms;
        for c in [Channel::Isr, Channel::Imt, Channel::Itts] {
            if let Some(t) = self.first_output_ms(c) {
                if t < prev {
                    return false;
                }
                prev = t;
            }
        }
        true
    }
}

/// One unit per source segment, in order of first appearance in the
/// source log.
pub fn align_outputs(logs: &ChannelLogs) -> Result<Vec<AlignedUnit>, AnalysisError> {
    let mut units: Vec<AlignedUnit> = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    for ev in &logs.src {
        let seg = ev.segment_id();
        match index.get(&seg) {
            Some(&i) => {
                let u = &mut units[i];
                u.source_start_ms = u.source_start_ms.min(ev.emit_ms);
            }
            None => {
                index.insert(seg, units.len());
                units.push(AlignedUnit {
                    segment_id: seg,
                    source_start_ms: ev.emit_ms,
                    isr_ms: None,
                    imt_ms: None,
                    itts_ms: None,
                });
            }
        }
    }
    for channel in [Channel::Isr, Channel::Imt, Channel::Itts] {
        for ev in logs.get(channel) {
            if ev.channel != channel {
                return Err(AnalysisError::WrongChannel {
                    channel,
                    found: ev.channel,
                    seq: ev.seq,
                });
            }
            let seg = ev.segment_id();
            let &i = index
                .get(&seg)
                .ok_or(AnalysisError::InconsistentProvenance {
                    channel,
                    segment_id: seg,
                    seq: ev.seq,
                })?;
            if !ev.payload.is_content() {
                continue;
            }
            let u = &mut units[i];
            let slot = match channel {
                Channel::Isr => &mut u.isr_ms,
                Channel::Imt => &mut u.imt_ms,
                _ => &mut u.itts_ms,
            };
            *slot = Some(slot.map_or(ev.emit_ms, |t| t.min(ev.emit_ms)));
        }
    }
    Ok(units)
}
