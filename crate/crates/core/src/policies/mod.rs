//! Incremental stage policies and the pluggable transducers they drive.

mod attention;
mod block;
mod phrase;
mod stage;
mod transducer;
mod wait_k;

pub use attention::{
    mark_sub_segments, segment_by_attention, AttentionError, AttentionMatrix, SegmentBoundaries,
    ROW_SUM_TOLERANCE,
};
pub use block::{block_emit_schedule, BlockEmitter, BlockEmitterConfig};
pub use phrase::{
    accent_phrase_stage, phrase_text, BoundaryRules, LexiconError, PhraseBuffer, TimedPhrase,
};
pub(crate) use stage::{payload_kind, SegmentTracker};
pub use stage::{
    downstream, drive_stage, run_stage, ComputeModel, Emitter, PolicyStage, Stage, StageError,
    TraceAction, TraceStep,
};
pub use transducer::{
    make_dictionary_transducer, parse_dictionary_table, DictionaryTransducer, TableError,
    Transducer, UnknownTokens,
};
pub use wait_k::{
    schedule_string, wait_k_next_action, wait_k_schedule, Action, Deadlock, PassThrough,
    StagePolicy, WaitK, WaitKState,
};
