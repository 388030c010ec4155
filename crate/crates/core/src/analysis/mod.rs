//! Offline analysis of channel logs: alignment, latency statistics,
//! alignment charts and output-quality metrics.

mod align;
mod chart;
mod latency;
mod metrics;

pub use align::{align_outputs, load_log_dir, AlignedUnit, AnalysisError, ChannelLogs};
pub use chart::{render_alignment_chart, ChartConfig};
pub use latency::{compute_evs, speaking_plan, LatencyReport, ModuleStats, SpeakingStats};
pub use metrics::{
    bleu, cer, corpus_cer, corpus_wer, edit_distance, wer, BleuScores, MetricError, ScoreReport,
};
