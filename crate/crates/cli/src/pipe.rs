//! Pipe mode: one child process per stage, stdout of each feeding stdin
//! of the next.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use cascade_core::stream::{serialize_event, unix_now_ms, TimedEvent};

const STAGES: [&str; 3] = ["isr", "imt", "itts"];

pub fn run_pipe(config: &Path, src: &[TimedEvent], out: &Path, speed: f64) -> Result<()> {
    fs::create_dir_all(out)?;
    let exe = std::env::current_exe().context("locating the cascade executable")?;
    let config = fs::canonicalize(config)?;
    let epoch = unix_now_ms();

    let mut children: Vec<(&str, Child)> = Vec::new();
    let mut upstream: Option<Stdio> = None;
    for name in STAGES {
        let child = Command::new(&exe)
            .arg("stage")
            .arg(name)
            .arg("--config")
            .arg(&config)
            .arg("--epoch")
            .arg(epoch.to_string())
            .arg("--log")
            .arg(out.join(format!("{name}.log")))
            .stdin(upstream.take().unwrap_or_else(Stdio::piped))
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .with_context(|| format!("starting {name} stage"))?;
        children.push((name, child));
        if name != "itts" {
            let stdout = children.last_mut().expect("just pushed").1.stdout.take().expect("piped");
            upstream = Some(Stdio::from(stdout));
        }
    }

    let mut tail = children[2].1.stdout.take();
    let drain = thread::spawn(move || {
        if let Some(t) = tail.as_mut() {
            let _ = io::copy(t, &mut io::sink());
        }
    });

    let mut sink = children[0].1.stdin.take().expect("piped");
    let mut src_log = BufWriter::new(fs::File::create(out.join("src.log"))?);
    let first_ms = src.first().map_or(0, |e| e.emit_ms);
    let mut last = 0;
    let mut broken = false;
    for ev in src {
        if speed > 0.0 {
            let due = epoch + ((ev.emit_ms - first_ms) as f64 / speed) as u64;
            let now = unix_now_ms();
            if due > now {
                thread::sleep(Duration::from_millis(due - now));
            }
        }
        let t = unix_now_ms().saturating_sub(epoch).max(last);
        last = t;
        let mut stamped = ev.clone();
        stamped.emit_ms = t;
        stamped.provenance.first_input_ms = t;
        let line = serialize_event(&stamped);
        src_log.write_all(line.as_bytes())?;
        if sink.write_all(line.as_bytes()).and_then(|_| sink.flush()).is_err() {
            broken = true;
            break;
        }
    }
    src_log.flush()?;
    drop(sink);

    let mut failed = Vec::new();
    for (name, mut child) in children {
        let status = child.wait()?;
        if !status.success() {
            failed.push(format!("{name} ({status})"));
        }
    }
    let _ = drain.join();
    if !failed.is_empty() {
        bail!("pipeline stage failed: {}", failed.join(", "));
    }
    if broken {
        bail!("isr stage closed its input early");
    }
    Ok(())
}
