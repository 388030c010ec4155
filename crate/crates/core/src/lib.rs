//! Simultaneous speech-to-speech translation cascade.
//!
//! Three incremental stages (block recognizer, wait-k translator,
//! accent-phrase synthesizer timing model) exchange tokens over a
//! tab-separated line protocol. Every event carries its emission time and
//! provenance, so ear-voice span and speaking latency fall out of the logs.

pub mod policies;
pub mod analysis;
pub mod pipeline;
pub mod stream;
pub mod tts;
