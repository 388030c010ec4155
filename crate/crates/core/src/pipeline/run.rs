use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use super::config::{ImtPolicyKind, PipelineConfig};
use crate::analysis::{align_outputs, compute_evs, speaking_plan, AnalysisError, ChannelLogs, LatencyReport};
use crate::policies::{
    drive_stage, make_dictionary_transducer, BlockEmitter, DictionaryTransducer, PassThrough, PolicyStage, Stage,
    StageError, WaitK,
};
use crate::stream::{parse_event, serialize_event, write_log, Channel, Clock, ParseError};
use crate::tts::SynthStage;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("{channel} stage input line {line}: {source}")]
    Parse {
        channel: Channel,
        line: usize,
        source: ParseError,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn imt_transducer(cfg: &PipelineConfig) -> DictionaryTransducer {
    match &cfg.imt.table {
        Some(t) => make_dictionary_transducer(t.clone(), cfg.imt.unknown),
        None => DictionaryTransducer::identity(),
    }
}

/// Builds the stage that produces `channel`.
pub fn build_stage(channel: Channel, cfg: &PipelineConfig, clock: Clock) -> Option<Box<dyn Stage + Send>> {
    Some(match channel {
        Channel::Source => return None,
        Channel::Isr => Box::new(BlockEmitter::new(cfg.isr, clock)),
        Channel::Imt => {
            let t = imt_transducer(cfg);
            match cfg.imt.policy {
                ImtPolicyKind::WaitK(k) => {
                    Box::new(PolicyStage::new(Channel::Imt, WaitK::new(k), t, clock, cfg.imt.compute))
                }
                ImtPolicyKind::PassThrough => Box::new(PolicyStage::new(
                    Channel::Imt,
                    PassThrough::default(),
                    t,
                    clock,
                    cfg.imt.compute,
                )),
            }
        }
        Channel::Itts => Box::new(SynthStage::new(
            cfg.itts.rules.clone(),
            cfg.itts.durations.clone(),
            cfg.itts.compute,
            clock,
        )),
    })
}

/// Runs the whole cascade in virtual time. Each stage only sees its
/// upstream log, so running them one after another is exact.
pub fn run_sim(cfg: &PipelineConfig, src: Vec<crate::stream::TimedEvent>) -> Result<ChannelLogs, RunError> {
    let mut logs = ChannelLogs {
        src,
        ..Default::default()
    };
    for (input, output) in [
        (Channel::Source, Channel::Isr),
        (Channel::Isr, Channel::Imt),
        (Channel::Imt, Channel::Itts),
    ] {
        let mut stage = build_stage(output, cfg, Clock::virtual_at(0)).expect("stage channel");
        let produced = drive_stage(&mut stage, logs.get(input))?;
        *logs.get_mut(output) = produced;
    }
    Ok(logs)
}

/// Aligned units, EVS statistics and speaking latency for a set of logs.
pub fn latency_report(logs: &ChannelLogs) -> Result<LatencyReport, AnalysisError> {
    let units = align_outputs(logs)?;
    Ok(compute_evs(&units)?.with_speaking(&speaking_plan(&logs.itts)))
}

pub fn write_logs(dir: &Path, logs: &ChannelLogs) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for channel in Channel::ALL {
        let mut f = io::BufWriter::new(fs::File::create(dir.join(format!("{}.log", channel.file_stem())))?);
        write_log(&mut f, logs.get(channel))?;
        f.flush()?;
    }
    Ok(())
}

/// Serves one stage over the line protocol: events in on `input`, outputs
/// out on `output` (flushed after every input line) and copied to `log`.
pub fn serve_stage<S: Stage + ?Sized>(
    stage: &mut S,
    input: impl BufRead,
    mut output: impl Write,
    mut log: Option<&mut dyn Write>,
) -> Result<(), RunError> {
    let channel = stage.channel();
    let mut out = Vec::new();
    let mut emit = |out: &mut Vec<_>, output: &mut dyn Write| -> io::Result<()> {
        for ev in out.drain(..) {
            let line = serialize_event(&ev);
            output.write_all(line.as_bytes())?;
            if let Some(l) = log.as_mut() {
                l.write_all(line.as_bytes())?;
            }
        }
        output.flush()
    };
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let ev = parse_event(&line).map_err(|source| RunError::Parse {
            channel,
            line: i + 1,
            source,
        })?;
        let pushed = stage.push(&ev, &mut out);
        emit(&mut out, &mut output)?;
        pushed?;
    }
    let finished = stage.finish(&mut out);
    emit(&mut out, &mut output)?;
    finished?;
    Ok(())
}
