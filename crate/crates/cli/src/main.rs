use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cascade_core::analysis::{
    align_outputs, bleu, compute_evs, corpus_cer, corpus_wer, load_log_dir, render_alignment_chart, speaking_plan,
    ChartConfig, ScoreReport,
};
use cascade_core::pipeline::{
    build_stage, latency_report, load_input, run_sim, serve_stage, write_logs, PipelineConfig, RunMode,
};
use cascade_core::policies::{schedule_string, wait_k_schedule};
use cascade_core::stream::{Channel, Clock};

mod pipe;

#[derive(Parser)]
#[command(name = "cascade", version, about = "Simultaneous speech translation cascade simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sim,
    Pipe,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreMode {
    Wer,
    Cer,
    Bleu,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Isr,
    Imt,
    Itts,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cascade on a SRC log or token file and write one log per channel.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Overrides `run.mode` from the config.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: PathBuf,
        /// Pipe mode pacing: source time runs this many times faster than
        /// real time; 0 sends the input as fast as possible.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
    /// Print the wait-k read/write schedule for J source and I target tokens.
    Schedule {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        j: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        i: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
    /// Score a hypothesis file against a reference file, one segment per line.
    Score {
        #[arg(long, value_enum)]
        mode: ScoreMode,
        hyp: PathBuf,
        reference: PathBuf,
    },
    /// Print latency statistics for a log directory and write chart.txt into it.
    Report {
        logdir: PathBuf,
        #[arg(long, default_value_t = 10)]
        column_width: usize,
    },
    /// Serve one stage over stdin/stdout (used by pipe mode).
    #[command(hide = true)]
    Stage {
        #[arg(value_enum)]
        stage: StageArg,
        #[arg(long)]
        config: PathBuf,
        /// Wall-clock origin shared by every stage, in Unix milliseconds.
        #[arg(long)]
        epoch: u64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            input,
            mode,
            out,
            speed,
        } => cmd_run(&config, &input, mode, &out, speed),
        Command::Schedule { j, i, k } => {
            let actions = wait_k_schedule(j as usize, i as usize, k as usize);
            println!("{}", schedule_string(&actions));
            Ok(())
        }
        Command::Score { mode, hyp, reference } => cmd_score(mode, &hyp, &reference),
        Command::Report { logdir, column_width } => cmd_report(&logdir, column_width),
        Command::Stage {
            stage,
            config,
            epoch,
            log,
        } => cmd_stage(stage, &config, epoch, log.as_deref()),
    }
}

fn cmd_run(config: &Path, input: &Path, mode: Option<ModeArg>, out: &Path, speed: f64) -> Result<()> {
    let cfg = PipelineConfig::load(config).context("loading config")?;
    let src = load_input(input, &cfg.source).with_context(|| format!("loading input {}", input.display()))?;
    let mode = match mode {
        Some(ModeArg::Sim) => RunMode::Sim,
        Some(ModeArg::Pipe) => RunMode::Pipe,
        None => cfg.mode,
    };
    let logs = match mode {
        RunMode::Sim => {
            let logs = run_sim(&cfg, src)?;
            write_logs(out, &logs).with_context(|| format!("writing logs to {}", out.display()))?;
            logs
        }
        RunMode::Pipe => {
            if !(speed >= 0.0 && speed.is_finite()) {
                bail!("--speed must be a non-negative number");
            }
            pipe::run_pipe(config, &src, out, speed)?;
            let logs = load_log_dir(out)?;
            logs.validate()?;
            logs
        }
    };
    let report = latency_report(&logs)?;
    for unit in &report.units {
        let missing = unit.missing_channels();
        if !missing.is_empty() {
            let names: Vec<_> = missing.iter().map(|c| c.wire_name()).collect();
            eprintln!("warning: segment {} has no output on {}", unit.segment_id, names.join(", "));
        }
    }
    let text = report.render();
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn cmd_score(mode: ScoreMode, hyp: &Path, reference: &Path) -> Result<()> {
    let hyps = read_lines(hyp)?;
    let refs = read_lines(reference)?;
    if hyps.len() != refs.len() {
        let n = hyps.len().min(refs.len()) + 1;
        bail!(
            "line {n}: present in only one file ({} has {} lines, {} has {})",
            hyp.display(),
            hyps.len(),
            reference.display(),
            refs.len()
        );
    }
    let mut report = ScoreReport::default();
    match mode {
        ScoreMode::Wer => report.wer = Some(corpus_wer(&hyps, &refs)?),
        ScoreMode::Cer => report.cer = Some(corpus_cer(&hyps, &refs)?),
        ScoreMode::Bleu => {
            let tok = |v: &[String]| -> Vec<Vec<String>> {
                v.iter()
                    .map(|l| l.split_whitespace().map(str::to_string).collect())
                    .collect()
            };
            report.bleu = Some(bleu(&tok(&hyps), &tok(&refs))?);
        }
    }
    print!("{}", report.render());
    Ok(())
}

fn cmd_report(logdir: &Path, column_width: usize) -> Result<()> {
    let logs = load_log_dir(logdir)?;
    logs.validate()?;
    let units = align_outputs(&logs)?;
    let report = compute_evs(&units)?.with_speaking(&speaking_plan(&logs.itts));
    let chart = render_alignment_chart(
        &units,
        &logs,
        &ChartConfig {
            column_width,
            ..Default::default()
        },
    );
    fs::write(logdir.join("chart.txt"), chart).context("writing chart.txt")?;
    print!("{}", report.render());
    Ok(())
}

fn cmd_stage(stage: StageArg, config: &Path, epoch: u64, log: Option<&Path>) -> Result<()> {
    let cfg = PipelineConfig::load(config)?;
    let channel = match stage {
        StageArg::Isr => Channel::Isr,
        StageArg::Imt => Channel::Imt,
        StageArg::Itts => Channel::Itts,
    };
    let mut s = build_stage(channel, &cfg, Clock::wall(epoch)).expect("stage channel");
    let mut log_file = match log {
        Some(p) => Some(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let stdout = io::stdout();
    let result = serve_stage(
        &mut s,
        io::stdin().lock(),
        stdout.lock(),
        log_file.as_mut().map(|f| f as &mut dyn Write),
    );
    if let Some(f) = log_file.as_mut() {
        f.flush()?;
    }
    result?;
    Ok(())
}
