//! Deterministic synthetic recordings with known activity annotations.
//!
//! The activity path alternates Major and Minor dwells with uniformly drawn
//! durations. Each modality renders a class signature:
//!
//! * audio, Major: 110 Hz harmonic stack (8 partials, 1/k amplitudes) plus
//!   800–2000 Hz band-passed noise; Minor: pink-ish noise at a quarter of
//!   the Major RMS.
//! * kinematic, Major: 8 Hz acceleration oscillation of 1.5 m/s² plus gyro
//!   jitter; Minor: low-variance drift on all axes.
//!
//! Confusability blends each signature toward a class-independent broadband
//! texture. For every chunk of 0.5–2 s the blend weight is redrawn as
//! `u^((1−c)/c)` with `u` uniform, which has mean `c`, and the texture level
//! is redrawn log-uniformly so that its loudness spans both classes. Chunks
//! with weights near one carry no class information for that modality. White
//! noise is then added at the requested SNR. Every random draw comes from
//! ChaCha streams keyed by the spec's seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::ingest::{Annotation, AnnotationTrack, AudioStream, KinematicStream};

const TAU: f64 = 2.0 * std::f64::consts::PI;

const AUDIO_MAJOR_RMS: f64 = 1.0;
const AUDIO_MINOR_RMS: f64 = 0.25;
/// Geometric mean of the class levels, so texture loudness says nothing about the class.
const AUDIO_TEXTURE_RMS: f64 = 0.5;
/// Per-chunk texture level range factor: levels are log-uniform in `[1/k, k]`.
const TEXTURE_LEVEL_SPAN: f64 = 1.5;
const ENGINE_HZ: f64 = 110.0;
const ENGINE_PARTIALS: usize = 8;
const BAND_LO_HZ: f64 = 800.0;
const BAND_HI_HZ: f64 = 2000.0;
/// Band noise level relative to the unit-RMS harmonic stack.
const BAND_MIX: f64 = 0.6;
const PEAK_TARGET: f64 = 0.9;

const GRAVITY: f64 = 9.81;
const MAJOR_ACC_HZ: f64 = 8.0;
const MAJOR_ACC_AMP: f64 = 1.5;
const MAJOR_ACC_DIR: [f64; 3] = [0.8, 0.36, 0.48];
const MAJOR_GYRO_JITTER: f64 = 0.25;
const MINOR_ACC_DRIFT_RMS: f64 = 0.1;
const MINOR_GYRO_DRIFT_RMS: f64 = 0.05;
const DRIFT_POLE: f64 = 0.98;
const TEXTURE_ACC_RMS: f64 = 0.25;
const TEXTURE_ACC_POLE: f64 = 0.6;
const TEXTURE_GYRO_RMS: f64 = 0.3;

const CHUNK_S: [f64; 2] = [0.5, 2.0];

// Independent ChaCha streams per purpose.
const STREAM_PATH: u64 = 1;
const STREAM_AUDIO_MASK: u64 = 2;
const STREAM_KIN_MASK: u64 = 3;
const STREAM_AUDIO: u64 = 4;
const STREAM_AUDIO_NOISE: u64 = 5;
const STREAM_KIN: u64 = 6;
const STREAM_KIN_NOISE: u64 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub seed: u64,
    pub major_dwell_s: [f64; 2],
    pub minor_dwell_s: [f64; 2],
    pub audio_snr_db: f64,
    pub kin_snr_db: f64,
    pub audio_confusability: f64,
    pub kin_confusability: f64,
    pub audio_rate_hz: u32,
    pub kin_rate_hz: u32,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            duration_s: 600.0,
            seed: 42,
            major_dwell_s: [5.0, 10.0],
            minor_dwell_s: [5.0, 10.0],
            audio_snr_db: 40.0,
            kin_snr_db: 40.0,
            audio_confusability: 0.0,
            kin_confusability: 0.0,
            audio_rate_hz: 44_100,
            kin_rate_hz: 100,
        }
    }
}

impl SynthSpec {
    /// The 600 s, seed 42 scenario with both modalities half confusable at 10 dB SNR.
    pub fn acceptance() -> Self {
        Self {
            audio_snr_db: 10.0,
            kin_snr_db: 10.0,
            audio_confusability: 0.55,
            kin_confusability: 0.55,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration_s)));
        }
        for (name, [lo, hi]) in [("major", self.major_dwell_s), ("minor", self.minor_dwell_s)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::invalid(format!("{name} dwell range [{lo}, {hi}] must be positive and ordered")));
            }
        }
        for (name, c) in [("audio", self.audio_confusability), ("kinematic", self.kin_confusability)] {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::invalid(format!("{name} confusability {c} outside [0, 1]")));
            }
        }
        for (name, snr) in [("audio", self.audio_snr_db), ("kinematic", self.kin_snr_db)] {
            if !snr.is_finite() {
                return Err(Error::invalid(format!("{name} SNR must be finite")));
            }
        }
        if self.audio_rate_hz == 0 || self.kin_rate_hz == 0 {
            return Err(Error::invalid("sample rates must be positive"));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecording {
    pub audio: AudioStream,
    pub kinematic: KinematicStream,
    pub annotations: AnnotationTrack,
}

fn draw(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn activity_path(spec: &SynthSpec) -> Vec<Annotation> {
    let mut rng = spec.rng(STREAM_PATH);
    let mut label = if rng.random::<bool>() { Activity::Major } else { Activity::Minor };
    let mut t = 0.0;
    let mut out = Vec::new();
    while t < spec.duration_s {
        let range = match label {
            Activity::Major => spec.major_dwell_s,
            Activity::Minor => spec.minor_dwell_s,
        };
        let end = (t + draw(&mut rng, range)).min(spec.duration_s);
        out.push(Annotation { start_s: t, end_s: end, label });
        t = end;
        label = label.other();
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Chunk {
    weight: f64,
    level: f64,
}

/// Piecewise-constant blend settings: `(chunk_end_s, chunk)`.
fn blend_chunks(spec: &SynthSpec, c: f64, stream: u64) -> Vec<(f64, Chunk)> {
    let mut rng = spec.rng(stream);
    let mut t = 0.0;
    let mut out = Vec::new();
    while t < spec.duration_s {
        t += draw(&mut rng, CHUNK_S);
        let u: f64 = rng.random();
        let w = if c <= 0.0 {
            0.0
        } else if c >= 1.0 {
            1.0
        } else {
            u.powf((1.0 - c) / c)
        };
        let span = TEXTURE_LEVEL_SPAN.ln();
        let level = rng.random_range(-span..span).exp();
        out.push((t, Chunk { weight: w, level }));
    }
    out
}

/// Forward-only lookup of piecewise-constant values by time.
struct Cursor<'a, T> {
    items: &'a [(f64, T)],
    pos: usize,
}

impl<'a, T: Copy> Cursor<'a, T> {
    fn new(items: &'a [(f64, T)]) -> Self {
        Self { items, pos: 0 }
    }

    fn at(&mut self, t: f64) -> T {
        while self.pos + 1 < self.items.len() && t >= self.items[self.pos].0 {
            self.pos += 1;
        }
        self.items[self.pos].1
    }
}

/// Direct-form biquad.
#[derive(Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
}

impl Biquad {
    /// Constant 0 dB peak band-pass between `lo` and `hi`.
    fn band_pass(lo: f64, hi: f64, fs: f64) -> Self {
        let f0 = (lo * hi).sqrt();
        let q = f0 / (hi - lo);
        let w0 = TAU * f0 / fs;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b: [alpha / a0, 0.0, -alpha / a0],
            a: [-2.0 * w0.cos() / a0, (1.0 - alpha) / a0],
            x: [0.0; 2],
            y: [0.0; 2],
        }
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.b[1] * self.x[0] + self.b[2] * self.x[1] - self.a[0] * self.y[0] - self.a[1] * self.y[1];
        self.x = [x, self.x[0]];
        self.y = [y, self.y[0]];
        y
    }
}

/// Three-pole approximation of a 1/f spectrum.
#[derive(Clone, Copy, Default)]
struct Pinking {
    s: [f64; 3],
}

impl Pinking {
    fn step(&mut self, w: f64) -> f64 {
        self.s[0] = 0.99765 * self.s[0] + w * 0.099_046_0;
        self.s[1] = 0.96300 * self.s[1] + w * 0.296_516_4;
        self.s[2] = 0.57000 * self.s[2] + w * 1.052_691_3;
        self.s[0] + self.s[1] + self.s[2] + w * 0.1848
    }
}

/// Output RMS of a linear filter driven by unit white noise: the L2 norm
/// of its impulse response.
fn white_noise_gain(mut f: impl FnMut(f64) -> f64, taps: usize) -> f64 {
    let mut e = f(1.0).powi(2);
    for _ in 1..taps {
        e += f(0.0).powi(2);
    }
    e.sqrt()
}

/// `Σ_{k=1..n} sin(kθ)/k` via the Chebyshev recurrence.
fn harmonic_stack(sin1: f64, cos1: f64, n: usize) -> f64 {
    let (mut prev, mut cur) = (0.0, sin1);
    let mut sum = sin1;
    for k in 2..=n {
        let next = 2.0 * cos1 * cur - prev;
        prev = cur;
        cur = next;
        sum += cur / k as f64;
    }
    sum
}

fn stack_rms(n: usize) -> f64 {
    (0.5 * (1..=n).map(|k| 1.0 / (k * k) as f64).sum::<f64>()).sqrt()
}

fn snr_sigma(signal_rms: f64, snr_db: f64) -> f64 {
    signal_rms / 10f64.powf(snr_db / 20.0)
}

fn render_audio(spec: &SynthSpec, path: &[(f64, Activity)]) -> Result<AudioStream> {
    let fs = spec.audio_rate_hz as f64;
    let n = (spec.duration_s * fs).round() as usize;
    let chunks = blend_chunks(spec, spec.audio_confusability, STREAM_AUDIO_MASK);
    let mut rng = spec.rng(STREAM_AUDIO);

    let band = Biquad::band_pass(BAND_LO_HZ, BAND_HI_HZ, fs);
    let band_gain = {
        let mut f = band;
        white_noise_gain(|x| f.step(x), 1 << 16)
    };
    let pink_gain = {
        let mut p = Pinking::default();
        white_noise_gain(|x| p.step(x), 1 << 18)
    };
    let engine_rms = stack_rms(ENGINE_PARTIALS);
    let major_norm = (1.0 + BAND_MIX * BAND_MIX).sqrt();

    let mut band = band;
    let mut pink = Pinking::default();
    let mut states = Cursor::new(path);
    let mut blend = Cursor::new(&chunks);
    let mut out = Vec::with_capacity(n);
    let mut energy = 0.0;
    for i in 0..n {
        let t = i as f64 / fs;
        let n_band: f64 = rng.sample(StandardNormal);
        let n_pink: f64 = rng.sample(StandardNormal);
        let n_tex: f64 = rng.sample(StandardNormal);
        let (s1, c1) = (TAU * ENGINE_HZ * t).sin_cos();
        let major = (harmonic_stack(s1, c1, ENGINE_PARTIALS) / engine_rms + BAND_MIX * band.step(n_band) / band_gain) / major_norm;
        let minor = pink.step(n_pink) / pink_gain;
        let class = match states.at(t) {
            Activity::Major => AUDIO_MAJOR_RMS * major,
            Activity::Minor => AUDIO_MINOR_RMS * minor,
        };
        let Chunk { weight: w, level } = blend.at(t);
        let x = (1.0 - w) * class + w * AUDIO_TEXTURE_RMS * level * n_tex;
        energy += x * x;
        out.push(x);
    }
    let sigma = snr_sigma((energy / n.max(1) as f64).sqrt(), spec.audio_snr_db);
    let mut noise = spec.rng(STREAM_AUDIO_NOISE);
    let mut peak: f64 = 0.0;
    for x in out.iter_mut() {
        let e: f64 = noise.sample(StandardNormal);
        *x += sigma * e;
        peak = peak.max(x.abs());
    }
    if peak > 0.0 {
        let g = PEAK_TARGET / peak;
        out.iter_mut().for_each(|x| *x *= g);
    }
    AudioStream::new(out, spec.audio_rate_hz)
}

fn render_kinematic(spec: &SynthSpec, path: &[(f64, Activity)]) -> Result<KinematicStream> {
    let fs = spec.kin_rate_hz as f64;
    let n = (spec.duration_s * fs).round() as usize;
    let chunks = blend_chunks(spec, spec.kin_confusability, STREAM_KIN_MASK);
    let mut rng = spec.rng(STREAM_KIN);
    let texture_gain = {
        let mut s = 0.0;
        white_noise_gain(
            |x| {
                s = TEXTURE_ACC_POLE * s + x;
                s
            },
            256,
        )
    };
    let drift_gain = {
        let mut s = 0.0;
        white_noise_gain(
            |x| {
                s = DRIFT_POLE * s + x;
                s
            },
            4096,
        )
    };

    let mut drift = [0.0f64; 6];
    let mut shake = [0.0f64; 3];
    let mut states = Cursor::new(path);
    let mut blend = Cursor::new(&chunks);
    let mut ch: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(n));
    let (mut acc_energy, mut gyr_energy) = (0.0, 0.0);
    for i in 0..n {
        let t = i as f64 / fs;
        let mut white = [0.0f64; 6];
        for v in white.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut jitter = [0.0f64; 3];
        for v in jitter.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut tex = [0.0f64; 6];
        for v in tex.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for (s, wn) in shake.iter_mut().zip(&tex[..3]) {
            *s = TEXTURE_ACC_POLE * *s + wn;
        }
        for (d, wn) in drift.iter_mut().zip(white) {
            *d = DRIFT_POLE * *d + wn;
        }
        let Chunk { weight: w, level } = blend.at(t);
        let major = states.at(t) == Activity::Major;
        let osc = MAJOR_ACC_AMP * (TAU * MAJOR_ACC_HZ * t).sin();
        for axis in 0..3 {
            let class_acc = if major {
                osc * MAJOR_ACC_DIR[axis]
            } else {
                MINOR_ACC_DRIFT_RMS * drift[axis] / drift_gain
            };
            let acc = (1.0 - w) * class_acc + w * level * TEXTURE_ACC_RMS * shake[axis] / texture_gain;
            let class_gyr = if major {
                MAJOR_GYRO_JITTER * jitter[axis]
            } else {
                MINOR_GYRO_DRIFT_RMS * drift[3 + axis] / drift_gain
            };
            let gyr = (1.0 - w) * class_gyr + w * level * TEXTURE_GYRO_RMS * tex[3 + axis];
            acc_energy += acc * acc;
            gyr_energy += gyr * gyr;
            ch[axis].push(acc);
            ch[3 + axis].push(gyr);
        }
    }
    let count = (3 * n).max(1) as f64;
    let sigmas = [
        snr_sigma((acc_energy / count).sqrt(), spec.kin_snr_db),
        snr_sigma((gyr_energy / count).sqrt(), spec.kin_snr_db),
    ];
    let mut noise = spec.rng(STREAM_KIN_NOISE);
    for i in 0..n {
        for (c, channel) in ch.iter_mut().enumerate() {
            let e: f64 = noise.sample(StandardNormal);
            channel[i] += sigmas[c / 3] * e;
        }
    }
    ch[2].iter_mut().for_each(|v| *v += GRAVITY);
    KinematicStream::new(ch, spec.kin_rate_hz)
}

/// Renders both modalities and the matching annotation track.
pub fn synth_recording(spec: &SynthSpec) -> Result<SynthRecording> {
    spec.validate()?;
    let intervals = activity_path(spec);
    let path: Vec<(f64, Activity)> = intervals.iter().map(|a| (a.end_s, a.label)).collect();
    Ok(SynthRecording {
        audio: render_audio(spec, &path)?,
        kinematic: render_kinematic(spec, &path)?,
        annotations: AnnotationTrack::new(intervals)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SegmentGrid;

    fn short(seed: u64) -> SynthSpec {
        SynthSpec {
            duration_s: 30.0,
            seed,
            audio_rate_hz: 8000,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let a = synth_recording(&short(5)).unwrap();
        let b = synth_recording(&short(5)).unwrap();
        assert_eq!(a, b);
        let c = synth_recording(&short(6)).unwrap();
        assert_ne!(a.audio, c.audio);
    }

    #[test]
    fn annotations_tile_the_recording() {
        let r = synth_recording(&short(1)).unwrap();
        let iv = r.annotations.intervals();
        assert_eq!(iv[0].start_s, 0.0);
        assert_eq!(iv.last().unwrap().end_s, 30.0);
        for w in iv.windows(2) {
            assert_eq!(w[0].end_s, w[1].start_s);
            assert_ne!(w[0].label, w[1].label);
        }
        for a in &iv[..iv.len() - 1] {
            let d = a.end_s - a.start_s;
            assert!((5.0..10.0).contains(&d));
        }
        assert_eq!(r.audio.len(), 240_000);
        assert_eq!(r.kinematic.len(), 3000);
        assert!(r.audio.samples().iter().all(|s| s.abs() <= 1.0));
    }

    #[test]
    fn blend_weights_have_mean_c() {
        let spec = SynthSpec { duration_s: 20_000.0, ..SynthSpec::default() };
        for c in [0.2, 0.55, 0.9] {
            let w = blend_chunks(&spec, c, 99);
            let mean = w.iter().map(|x| x.1.weight).sum::<f64>() / w.len() as f64;
            assert!((mean - c).abs() < 0.02, "c={c} mean={mean}");
        }
        assert!(blend_chunks(&spec, 0.0, 1).iter().all(|x| x.1.weight == 0.0));
    }

    #[test]
    fn harmonic_recurrence_matches_direct_sum() {
        for theta in [0.0, 0.3, 1.7, 3.0, 5.9] {
            let direct: f64 = (1..=8).map(|k| (k as f64 * theta).sin() / k as f64).sum();
            assert!((harmonic_stack(theta.sin(), theta.cos(), 8) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_envelope_follows_annotations() {
        let spec = SynthSpec {
            duration_s: 120.0,
            seed: 3,
            audio_snr_db: 30.0,
            kin_snr_db: 30.0,
            ..SynthSpec::default()
        };
        let r = synth_recording(&spec).unwrap();
        let grid = SegmentGrid::for_streams(&r.audio, &r.kinematic);
        let fs = r.audio.sample_rate_hz() as f64;
        let power: Vec<f64> = (0..grid.n_segments())
            .map(|k| {
                let a = (grid.start_s(k) * fs).round() as usize;
                let b = (grid.end_s(k) * fs).round() as usize;
                r.audio.samples()[a..b].iter().map(|x| x * x).sum::<f64>() / (b - a) as f64
            })
            .collect();
        // Majority label per segment by time share.
        let majority: Vec<Activity> = (0..grid.n_segments())
            .map(|k| r.annotations.label_at(grid.center_s(k)).unwrap())
            .collect();
        let mean_of = |l: Activity| {
            let v: Vec<f64> = power.iter().zip(&majority).filter(|p| *p.1 == l).map(|p| *p.0).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let threshold = (mean_of(Activity::Major) + mean_of(Activity::Minor)) / 2.0;
        let agree = power
            .iter()
            .zip(&majority)
            .filter(|(p, l)| (**p > threshold) == (**l == Activity::Major))
            .count();
        assert!(agree as f64 >= 0.99 * grid.n_segments() as f64, "{agree}/{}", grid.n_segments());
    }

    #[test]
    fn rejects_invalid_specs() {
        for bad in [
            SynthSpec { duration_s: 0.0, ..SynthSpec::default() },
            SynthSpec { major_dwell_s: [3.0, 1.0], ..SynthSpec::default() },
            SynthSpec { audio_confusability: 1.5, ..SynthSpec::default() },
        ] {
            assert!(synth_recording(&bad).is_err());
        }
    }
}
