//! Segment tiling and the per-segment feature set.
//!
//! Both modalities share one grid of non-overlapping 120 ms segments. Each
//! segment gets an analysis window centered on it: 120 ms for audio and
//! 1.2 s for the kinematic channels (a 120 ms span holds only 12 IMU
//! samples). Windows near the ends are shifted inward, never shortened.
//!
//! Per window the extractor computes 25 normalized band coefficients of the
//! averaged STFT magnitude, RMS, short-time energy, spectral flux, entropy,
//! centroid and roll-off; kinematic channels also get the zero-crossing
//! rate. Kinematic features are taken from two orientation-free channels:
//! the magnitude of mean-removed acceleration and the magnitude of angular
//! velocity.

pub mod descriptors;
pub mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::FeatureMatrix;
use crate::ingest::{AudioStream, KinematicStream, ACC_X, GYR_X};
use descriptors::{
    rms, spectral_centroid, spectral_entropy, spectral_flux, spectral_rolloff, ste, stft_band_coeffs, zcr,
};
pub use spectrum::{avg_spectrum, hann, SpectrumAnalyzer, SpectrumFrame};

pub const SEGMENT_S: f64 = 0.120;

/// Segment edges are multiples of 0.12 s computed in floating point; this
/// absorbs the representation error when comparing them with durations.
const GRID_EPS: f64 = 1e-9;

/// Shared tiling of the timeline into `n_segments` consecutive 120 ms segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentGrid {
    n_segments: usize,
}

impl SegmentGrid {
    pub fn new(n_segments: usize) -> Self {
        Self { n_segments }
    }

    /// `floor(min(durations) / 0.120)` segments.
    pub fn from_durations(audio_s: f64, kinematic_s: f64) -> Self {
        let d = audio_s.min(kinematic_s).max(0.0);
        Self::new((d / SEGMENT_S + GRID_EPS).floor() as usize)
    }

    pub fn for_streams(audio: &AudioStream, kin: &KinematicStream) -> Self {
        Self::from_durations(audio.duration_s(), kin.duration_s())
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn segment_s(&self) -> f64 {
        SEGMENT_S
    }

    pub fn start_s(&self, k: usize) -> f64 {
        k as f64 * SEGMENT_S
    }

    pub fn end_s(&self, k: usize) -> f64 {
        (k + 1) as f64 * SEGMENT_S
    }

    pub fn center_s(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * SEGMENT_S
    }

    pub fn duration_s(&self) -> f64 {
        self.n_segments as f64 * SEGMENT_S
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub audio_window_s: f64,
    pub audio_frame_len: usize,
    pub audio_fft_len: usize,
    pub kin_window_s: f64,
    pub kin_frame_len: usize,
    pub kin_fft_len: usize,
    pub n_bands: usize,
    pub rolloff_q: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            audio_window_s: 0.120,
            audio_frame_len: 1024,
            audio_fft_len: 1024,
            kin_window_s: 1.2,
            kin_frame_len: 64,
            kin_fft_len: 128,
            n_bands: 25,
            rolloff_q: 0.85,
        }
    }
}

fn window_len(window_s: f64, rate_hz: u32) -> usize {
    (window_s * rate_hz as f64).round() as usize
}

/// One analysis window per grid segment, centered on the segment and
/// clamped into the signal.
pub fn segment_signal<'a>(x: &'a [f64], rate_hz: u32, grid: &SegmentGrid, window_s: f64) -> Result<Vec<&'a [f64]>> {
    let len = window_len(window_s, rate_hz);
    if window_s < SEGMENT_S - GRID_EPS {
        return Err(Error::invalid(format!(
            "analysis window {window_s} s is shorter than the {SEGMENT_S} s segment"
        )));
    }
    if len < 8 {
        return Err(Error::invalid(format!(
            "analysis window of {len} samples is too short (need at least 8)"
        )));
    }
    if x.len() < len {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than one {len}-sample window",
            x.len()
        )));
    }
    let max_start = x.len() - len;
    Ok((0..grid.n_segments())
        .map(|k| {
            let start = (grid.center_s(k) * rate_hz as f64 - len as f64 / 2.0).round();
            let start = (start.max(0.0) as usize).min(max_start);
            &x[start..start + len]
        })
        .collect())
}

/// Everything computable from one window alone; flux is filled in later.
#[derive(Debug, Clone)]
struct WindowDescriptors {
    spectrum: SpectrumFrame,
    bands: Vec<f64>,
    rms: f64,
    ste: f64,
    entropy: f64,
    centroid: f64,
    rolloff: f64,
    zcr: Option<f64>,
}

fn describe_window(
    window: &[f64],
    analyzer: &SpectrumAnalyzer,
    cfg: &FeatureConfig,
    with_zcr: bool,
) -> Result<WindowDescriptors> {
    let spectrum = analyzer.analyze(window)?;
    Ok(WindowDescriptors {
        bands: stft_band_coeffs(&spectrum, cfg.n_bands)?,
        rms: rms(window),
        ste: ste(window),
        entropy: spectral_entropy(&spectrum),
        centroid: spectral_centroid(&spectrum),
        rolloff: spectral_rolloff(&spectrum, cfg.rolloff_q),
        zcr: with_zcr.then(|| zcr(window)),
        spectrum,
    })
}

fn column_names(prefix: &str, n_bands: usize, with_zcr: bool) -> Vec<String> {
    let mut names: Vec<String> = (0..n_bands).map(|b| format!("{prefix}.stft{b:02}")).collect();
    for s in ["rms", "ste", "sf", "se", "sc", "sro"] {
        names.push(format!("{prefix}.{s}"));
    }
    if with_zcr {
        names.push(format!("{prefix}.zcr"));
    }
    names
}

/// Flattens per-segment descriptors into rows, linking consecutive spectra
/// for flux in segment order.
fn assemble(descs: &[WindowDescriptors], n_cols: usize) -> Vec<f64> {
    let mut data = Vec::with_capacity(descs.len() * n_cols);
    let zero = descs.first().map(|d| SpectrumFrame::zeros(d.spectrum.magnitudes.len(), d.spectrum.bin_hz));
    for (k, d) in descs.iter().enumerate() {
        let prev = if k == 0 { zero.as_ref().unwrap() } else { &descs[k - 1].spectrum };
        data.extend_from_slice(&d.bands);
        data.extend([d.rms, d.ste, spectral_flux(&d.spectrum, prev), d.entropy, d.centroid, d.rolloff]);
        data.extend(d.zcr);
    }
    data
}

fn check_covers(duration_s: f64, grid: &SegmentGrid, what: &str) -> Result<()> {
    if grid.duration_s() > duration_s + GRID_EPS {
        return Err(Error::invalid(format!(
            "{what} stream lasts {duration_s} s but the grid spans {} s",
            grid.duration_s()
        )));
    }
    Ok(())
}

/// 31 audio features per segment, prefixed `aud.`.
pub fn extract_audio_features(audio: &AudioStream, grid: &SegmentGrid, cfg: &FeatureConfig, exec: Exec) -> Result<FeatureMatrix> {
    check_covers(audio.duration_s(), grid, "audio")?;
    let rate = audio.sample_rate_hz();
    let analyzer = SpectrumAnalyzer::new(rate, cfg.audio_frame_len, cfg.audio_fft_len)?;
    let windows = segment_signal(audio.samples(), rate, grid, cfg.audio_window_s)?;
    let descs = exec.try_map_range(windows.len(), |k| describe_window(windows[k], &analyzer, cfg, false))?;
    let names = column_names("aud", cfg.n_bands, false);
    let data = assemble(&descs, names.len());
    FeatureMatrix::from_flat(names, data, grid.n_segments())
}

fn magnitude_windows(kin: &KinematicStream, grid: &SegmentGrid, cfg: &FeatureConfig) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let rate = kin.sample_rate_hz();
    let axes: Vec<Vec<&[f64]>> = (0..6)
        .map(|c| segment_signal(kin.channel(c), rate, grid, cfg.kin_window_s))
        .collect::<Result<_>>()?;
    let mut acc = Vec::with_capacity(grid.n_segments());
    let mut gyr = Vec::with_capacity(grid.n_segments());
    for k in 0..grid.n_segments() {
        let a = [axes[ACC_X][k], axes[ACC_X + 1][k], axes[ACC_X + 2][k]];
        let g = [axes[GYR_X][k], axes[GYR_X + 1][k], axes[GYR_X + 2][k]];
        // Offset by the first sample so a constant axis cancels exactly.
        let means = a.map(|w| w[0] + w.iter().map(|v| v - w[0]).sum::<f64>() / w.len() as f64);
        let n = a[0].len();
        acc.push(
            (0..n)
                .map(|i| (0..3).map(|c| (a[c][i] - means[c]).powi(2)).sum::<f64>().sqrt())
                .collect(),
        );
        gyr.push((0..n).map(|i| (0..3).map(|c| g[c][i].powi(2)).sum::<f64>().sqrt()).collect());
    }
    Ok((acc, gyr))
}

/// 64 kinematic features per segment: 32 each for `kin.acc.` and `kin.gyr.`.
pub fn extract_kinematic_features(
    kin: &KinematicStream,
    grid: &SegmentGrid,
    cfg: &FeatureConfig,
    exec: Exec,
) -> Result<FeatureMatrix> {
    check_covers(kin.duration_s(), grid, "kinematic")?;
    let analyzer = SpectrumAnalyzer::new(kin.sample_rate_hz(), cfg.kin_frame_len, cfg.kin_fft_len)?;
    let (acc, gyr) = magnitude_windows(kin, grid, cfg)?;
    let mut out = FeatureMatrix::empty(grid.n_segments());
    for (prefix, windows) in [("kin.acc", &acc), ("kin.gyr", &gyr)] {
        let descs = exec.try_map_range(windows.len(), |k| describe_window(&windows[k], &analyzer, cfg, true))?;
        let names = column_names(prefix, cfg.n_bands, true);
        let data = assemble(&descs, names.len());
        out = crate::fusion::fuse(&out, &FeatureMatrix::from_flat(names, data, grid.n_segments())?)?;
    }
    Ok(out)
}

/// Per-modality feature matrices on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityFeatures {
    pub audio: FeatureMatrix,
    pub kinematic: FeatureMatrix,
}

pub fn extract_segment_features(
    audio: &AudioStream,
    kin: &KinematicStream,
    grid: &SegmentGrid,
    cfg: &FeatureConfig,
    exec: Exec,
) -> Result<ModalityFeatures> {
    Ok(ModalityFeatures {
        audio: extract_audio_features(audio, grid, cfg, exec)?,
        kinematic: extract_kinematic_features(kin, grid, cfg, exec)?,
    })
}
