//! Synthesis timing: accent phrases to moras, per-mora durations, timed
//! chunks and the playback queue that turns them into speaking latency.

mod duration;
mod mora;
mod playback;
mod stage;

pub use duration::{
    predict_duration, DurationError, DurationModel, DurationTableError, TableDurationModel,
    DEFAULT_MORA_MS, FRAME_MS,
};
pub use mora::{extract_features, split_moras, AccentPhrase, MoraFeature, PhraseError, Pitch, PAUSE_MORA};
pub use playback::{schedule_playback, schedule_ready_durations, PlaybackEntry, PlaybackPlan, SynthChunk};
pub use stage::{SynthCompute, SynthStage};
