use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::align::{AlignedUnit, ChannelLogs};
use crate::stream::{Channel, Payload, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartConfig {
    pub block_ms: u64,
    pub column_width: usize,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            block_ms: 550,
            column_width: 10,
        }
    }
}

const LABEL_WIDTH: usize = 6;

fn cell(text: &str, width: usize) -> String {
    let mut t: String = text.chars().take(width.saturating_sub(1)).collect();
    if text.chars().count() >= width {
        t.pop();
        t.push('~');
    }
    format!("{t:<width$}")
}

/// Text chart, one block of `block_ms` per column and one row per channel.
/// Each output sits in the column of its emission time relative to the
/// segment's source start; segments are separated by a divider line.
pub fn render_alignment_chart(units: &[AlignedUnit], logs: &ChannelLogs, cfg: &ChartConfig) -> String {
    let block_ms = cfg.block_ms.max(1);
    let width = cfg.column_width.max(2);
    let mut out = format!("block_ms = {block_ms}, column_width = {width}\n");
    for (i, unit) in units.iter().enumerate() {
        if i > 0 {
            let _ = writeln!(out, "{}", "-".repeat(LABEL_WIDTH + 8 * width));
        }
        let _ = writeln!(
            out,
            "segment {} (source start {} ms)",
            unit.segment_id, unit.source_start_ms
        );
        let mut rows: Vec<(Channel, BTreeMap<u64, Vec<String>>)> = Vec::new();
        let mut n_cols = 1;
        for channel in Channel::ALL {
            let mut cols: BTreeMap<u64, Vec<String>> = BTreeMap::new();
            for ev in logs.get(channel).iter().filter(|e| e.segment_id() == unit.segment_id) {
                let text = match &ev.payload {
                    Payload::Token(t) if t.kind() == TokenKind::Regular => t.text().to_string(),
                    Payload::Chunk(c) => c.text().to_string(),
                    _ => continue,
                };
                let col = ev.emit_ms.saturating_sub(unit.source_start_ms) / block_ms;
                n_cols = n_cols.max(col + 1);
                cols.entry(col).or_default().push(text);
            }
            rows.push((channel, cols));
        }
        let mut ruler = format!("{:<LABEL_WIDTH$}", "block");
        for c in 0..n_cols {
            ruler.push_str(&cell(&c.to_string(), width));
        }
        let _ = writeln!(out, "{}", ruler.trim_end());
        for (channel, cols) in rows {
            let mut line = format!("{:<LABEL_WIDTH$}", channel.wire_name());
            for c in 0..n_cols {
                let text = cols.get(&c).map(|v| v.join(" ")).unwrap_or_default();
                line.push_str(&cell(&text, width));
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    }
    out
}
