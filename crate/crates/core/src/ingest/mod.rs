//! Decoding of audio and kinematic recordings plus ground-truth annotations.
//!
//! Audio arrives as RIFF/WAVE and is downmixed to a mono [`AudioStream`].
//! Kinematic data arrives as a timestamped CSV and is resampled onto a
//! uniform 100 Hz grid so downstream windowing is plain index arithmetic.
//! Stream index 0 of the kinematic stream corresponds to the first CSV
//! timestamp; any residual clock offset against the audio is corrected with
//! [`apply_sync`].

mod annotation;
mod kinematic;
mod sync;
mod wav;

pub use annotation::{decode_annotations, encode_annotations, parse_annotations, Annotation, AnnotationTrack};
pub(crate) use annotation::TIME_EPS;
pub use kinematic::{
    decode_kinematic, encode_kinematic_csv, parse_kinematic_csv, KinematicStream, ACC_X, ACC_Y,
    ACC_Z, CHANNEL_NAMES, DEFAULT_KINEMATIC_RATE_HZ, GYR_X, GYR_Y, GYR_Z,
};
pub use sync::{apply_sync, SyncConfig};
pub use wav::{decode_audio, decode_wav_bytes, encode_wav, AudioStream, WavEncoding};

pub const DEFAULT_AUDIO_RATE_HZ: u32 = 44_100;
