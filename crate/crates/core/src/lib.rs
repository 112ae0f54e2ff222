//! Activity recognition for construction equipment from fused audio and
//! kinematic (IMU) recordings.
//!
//! The pipeline tiles both modalities onto a shared 120 ms segment grid,
//! extracts spectral and time-domain descriptors per segment, concatenates
//! them, classifies each segment as [`Activity::Major`] or
//! [`Activity::Minor`] with a soft-margin SVM, and smooths the label
//! sequence with two majority-window filters and a two-state Viterbi pass.
//!
//! Data-parallel loops (per-segment features, kernel rows, per-modality
//! pipelines) run on rayon when the `parallel` feature is enabled and fall
//! back to plain iterators otherwise; see [`Exec`].

pub mod activity;
pub mod classifier;
pub mod error;
pub mod evalsynth;
pub mod exec;
pub mod features;
pub mod fusion;
pub mod ingest;
pub mod pipeline;
pub mod smoothing;
pub mod timeline;

pub use activity::Activity;
pub use error::{Error, Result};
pub use exec::Exec;
pub use features::{FeatureConfig, SegmentGrid};
pub use fusion::{FeatureMatrix, Standardizer};
pub use ingest::{AnnotationTrack, AudioStream, KinematicStream, SyncConfig};
