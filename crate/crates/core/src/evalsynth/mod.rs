//! Scoring, modality comparison and synthetic recordings.

mod compare;
mod eval;
mod synth;

pub use compare::{compare_modalities, Comparison, ModalityRun};
pub use eval::{evaluate, ClassRecall, EvalReport, Evaluation};
pub use synth::{synth_recording, SynthRecording, SynthSpec};
