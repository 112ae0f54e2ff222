use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Magnitude spectrum over bins `0..=fft_len/2`, bin `k` at `k * bin_hz` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    pub magnitudes: Vec<f64>,
    pub bin_hz: f64,
}

impl SpectrumFrame {
    pub fn zeros(n_bins: usize, bin_hz: f64) -> Self {
        Self {
            magnitudes: vec![0.0; n_bins],
            bin_hz,
        }
    }

    /// Magnitudes without the DC bin; every spectral descriptor works on these.
    pub fn ac(&self) -> &[f64] {
        self.magnitudes.get(1..).unwrap_or(&[])
    }

    /// Center frequency of AC bin `j` (0-based index into [`SpectrumFrame::ac`]).
    pub fn ac_freq(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.bin_hz
    }
}

/// Symmetric Hann window: `0.5 - 0.5 cos(2πn / (N - 1))`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos())
        .collect()
}

/// Reusable averaged-STFT front end for one `(rate, frame_len, fft_len)` setting.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    rate_hz: u32,
    frame_len: usize,
    fft_len: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer")
            .field("rate_hz", &self.rate_hz)
            .field("frame_len", &self.frame_len)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl SpectrumAnalyzer {
    pub fn new(rate_hz: u32, frame_len: usize, fft_len: usize) -> Result<Self> {
        if rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if frame_len < 2 {
            return Err(Error::invalid(format!("frame length {frame_len} must be at least 2")));
        }
        if fft_len < frame_len || !fft_len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "FFT length {fft_len} must be a power of two no smaller than the frame length {frame_len}"
            )));
        }
        Ok(Self {
            rate_hz,
            frame_len,
            fft_len,
            window: hann(frame_len),
            fft: FftPlanner::new().plan_fft_forward(fft_len),
        })
    }

    pub fn n_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn bin_hz(&self) -> f64 {
        self.rate_hz as f64 / self.fft_len as f64
    }

    pub fn hop(&self) -> usize {
        self.frame_len / 2
    }

    /// Number of half-overlapping frames that fit in `len` samples.
    pub fn n_frames(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            1 + (len - self.frame_len) / self.hop()
        }
    }

    /// Mean of the per-frame magnitude spectra of Hann-weighted,
    /// half-overlapping frames, each zero-padded to the FFT length.
    pub fn analyze(&self, window: &[f64]) -> Result<SpectrumFrame> {
        let n_frames = self.n_frames(window.len());
        if n_frames == 0 {
            return Err(Error::invalid(format!(
                "window of {} samples is shorter than one {}-sample frame",
                window.len(),
                self.frame_len
            )));
        }
        let n_bins = self.n_bins();
        let mut acc = vec![0.0; n_bins];
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for f in 0..n_frames {
            let start = f * self.hop();
            let frame = &window[start..start + self.frame_len];
            for (slot, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
                *slot = Complex::new(x * w, 0.0);
            }
            buf[self.frame_len..].fill(Complex::new(0.0, 0.0));
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (a, c) in acc.iter_mut().zip(&buf[..n_bins]) {
                *a += c.norm();
            }
        }
        let inv = 1.0 / n_frames as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
        Ok(SpectrumFrame {
            magnitudes: acc,
            bin_hz: self.bin_hz(),
        })
    }
}

pub fn avg_spectrum(window: &[f64], rate_hz: u32, frame_len: usize, fft_len: usize) -> Result<SpectrumFrame> {
    if frame_len > window.len() {
        return Err(Error::invalid(format!(
            "frame length {frame_len} exceeds window length {}",
            window.len()
        )));
    }
    SpectrumAnalyzer::new(rate_hz, frame_len, fft_len)?.analyze(window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(N·K) DFT of each Hann-weighted frame, independent of rustfft.
    fn naive_avg_spectrum(x: &[f64], rate: u32, frame_len: usize, fft_len: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..frame_len)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / (frame_len - 1) as f64).cos())
            .collect();
        let hop = frame_len / 2;
        let frames = 1 + (x.len() - frame_len) / hop;
        let mut out = vec![0.0; fft_len / 2 + 1];
        for f in 0..frames {
            for (k, o) in out.iter_mut().enumerate() {
                let (mut re, mut im) = (0.0, 0.0);
                for n in 0..frame_len {
                    let v = x[f * hop + n] * w[n];
                    let ph = -2.0 * std::f64::consts::PI * ((k * n) % fft_len) as f64 / fft_len as f64;
                    re += v * ph.cos();
                    im += v * ph.sin();
                }
                *o += (re * re + im * im).sqrt() / frames as f64;
            }
        }
        let _ = rate;
        out
    }

    #[test]
    fn hann_endpoints_and_peak() {
        let w = hann(5);
        assert_eq!(w[0], 0.0);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!(w[4].abs() < 1e-15);
    }

    #[test]
    fn sine_peaks_at_expected_bin() {
        let x: Vec<f64> = (0..5292)
            .map(|n| (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / 44_100.0).sin())
            .collect();
        let s = avg_spectrum(&x, 44_100, 1024, 1024).unwrap();
        let argmax = s
            .magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, (1000.0 / (44_100.0 / 1024.0) as f64).round() as usize);
        assert_eq!(argmax, 23);
    }

    #[test]
    fn silence_gives_zero_spectrum() {
        let s = avg_spectrum(&[0.0; 300], 100, 64, 128).unwrap();
        assert_eq!(s.magnitudes.len(), 65);
        assert!(s.magnitudes.iter().all(|&m| m == 0.0));
        assert_eq!(s.bin_hz, 100.0 / 128.0);
    }

    #[test]
    fn white_noise_matches_direct_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (len, frame, nfft) in [(1000, 256, 256), (120, 64, 128), (777, 100, 512)] {
            let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let got = avg_spectrum(&x, 8000, frame, nfft).unwrap().magnitudes;
            let want = naive_avg_spectrum(&x, 8000, frame, nfft);
            let num: f64 = got.iter().zip(&want).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let den: f64 = want.iter().map(|b| b * b).sum::<f64>();
            assert!((num / den).sqrt() < 1e-9, "relative error {}", (num / den).sqrt());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(avg_spectrum(&[0.0; 50], 100, 64, 128).is_err());
        assert!(avg_spectrum(&[0.0; 200], 100, 64, 100).is_err());
        assert!(avg_spectrum(&[0.0; 200], 100, 128, 64).is_err());
        assert!(SpectrumAnalyzer::new(100, 64, 128).unwrap().analyze(&[0.0; 63]).is_err());
    }

    #[test]
    fn frame_count() {
        let a = SpectrumAnalyzer::new(44_100, 1024, 1024).unwrap();
        assert_eq!(a.n_frames(5292), 9);
        let k = SpectrumAnalyzer::new(100, 64, 128).unwrap();
        assert_eq!(k.n_frames(120), 2);
    }
}
