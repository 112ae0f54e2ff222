//! Per-window time-domain and spectral descriptors.
//!
//! Spectral descriptors ignore the DC bin. With `m_k` the AC magnitudes
//! (bins `1..=K`) and `p_k = m_k² / Σ m²` the power distribution:
//!
//! * centroid: `Σ f_k m_k / Σ m_k`
//! * roll-off: smallest `f_j` whose cumulative power reaches `q · Σ m²`
//! * entropy: `-Σ p_k ln p_k / ln K`, in `[0, 1]`
//! * flux: `Σ (m̂_t,k − m̂_{t−1},k)²` over L1-normalized magnitudes
//!
//! An all-zero spectrum maps every descriptor to 0.

use super::spectrum::SpectrumFrame;
use crate::error::{Error, Result};

/// Mean magnitude of `n_bands` contiguous AC-bin groups, scaled so the
/// largest band is 1. Group sizes differ by at most one; the larger groups
/// come first.
pub fn stft_band_coeffs(spec: &SpectrumFrame, n_bands: usize) -> Result<Vec<f64>> {
    let ac = spec.ac();
    if n_bands == 0 || ac.len() < n_bands {
        return Err(Error::invalid(format!(
            "{} AC bins cannot be split into {n_bands} bands",
            ac.len()
        )));
    }
    let base = ac.len() / n_bands;
    let extra = ac.len() % n_bands;
    let mut bands = Vec::with_capacity(n_bands);
    let mut start = 0;
    for b in 0..n_bands {
        let size = base + usize::from(b < extra);
        bands.push(ac[start..start + size].iter().sum::<f64>() / size as f64);
        start += size;
    }
    let max = bands.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        bands.iter_mut().for_each(|v| *v /= max);
    }
    Ok(bands)
}

pub fn rms(window: &[f64]) -> f64 {
    ste(window).sqrt()
}

/// Short-time energy as mean energy, so it does not grow with window length.
pub fn ste(window: &[f64]) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    window.iter().map(|x| x * x).sum::<f64>() / window.len() as f64
}

pub fn spectral_centroid(spec: &SpectrumFrame) -> f64 {
    let ac = spec.ac();
    let total: f64 = ac.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let weighted: f64 = ac.iter().enumerate().map(|(j, m)| spec.ac_freq(j) * m).sum();
    weighted / total
}

pub fn spectral_rolloff(spec: &SpectrumFrame, q: f64) -> f64 {
    let ac = spec.ac();
    let total: f64 = ac.iter().map(|m| m * m).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let target = q * total;
    let mut cum = 0.0;
    for (j, m) in ac.iter().enumerate() {
        cum += m * m;
        if cum >= target {
            return spec.ac_freq(j);
        }
    }
    spec.ac_freq(ac.len() - 1)
}

pub fn spectral_entropy(spec: &SpectrumFrame) -> f64 {
    let ac = spec.ac();
    let total: f64 = ac.iter().map(|m| m * m).sum();
    if total <= 0.0 || ac.len() < 2 {
        return 0.0;
    }
    let h: f64 = ac
        .iter()
        .map(|m| m * m / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    (h / (ac.len() as f64).ln()).clamp(0.0, 1.0)
}

fn l1_normalized(ac: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let total: f64 = ac.iter().sum();
    let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
    ac.iter().map(move |m| m * scale)
}

/// Squared L2 distance between L1-normalized AC spectra. For the first
/// segment pass an all-zero `prev`.
pub fn spectral_flux(cur: &SpectrumFrame, prev: &SpectrumFrame) -> f64 {
    assert_eq!(
        cur.magnitudes.len(),
        prev.magnitudes.len(),
        "spectral flux needs spectra with equal bin counts"
    );
    l1_normalized(cur.ac())
        .zip(l1_normalized(prev.ac()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Fraction of adjacent pairs whose sign differs, after mean removal.
/// A zero sample carries the sign of the last nonzero sample before it;
/// zeros before the first nonzero sample carry no sign and never cross.
pub fn zcr(window: &[f64]) -> f64 {
    let n = window.len();
    if n < 2 {
        return 0.0;
    }
    let mean = window.iter().sum::<f64>() / n as f64;
    let mut sign: Option<bool> = None;
    let mut crossings = 0usize;
    for &x in window {
        let d = x - mean;
        let s = if d > 0.0 {
            Some(true)
        } else if d < 0.0 {
            Some(false)
        } else {
            sign
        };
        if let (Some(prev), Some(cur)) = (sign, s) {
            if prev != cur {
                crossings += 1;
            }
        }
        sign = s;
    }
    crossings as f64 / (n - 1) as f64
}
