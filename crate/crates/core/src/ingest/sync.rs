use serde::{Deserialize, Serialize};

use super::KinematicStream;

/// Constant clock offset between the two recorders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SyncConfig {
    /// Seconds added to kinematic timestamps so they line up with audio time zero.
    pub kinematic_offset_s: f64,
}

/// Shifts every channel by `round(offset * rate)` samples, keeping the length.
///
/// A positive offset delays the stream: the vacated head repeats the first
/// sample and the tail falls off. A negative offset advances it: the head
/// falls off and the tail repeats the last sample.
pub fn apply_sync(kin: &KinematicStream, cfg: SyncConfig) -> KinematicStream {
    let rate = kin.sample_rate_hz();
    let shift = (cfg.kinematic_offset_s * rate as f64).round();
    if shift == 0.0 || kin.is_empty() || !shift.is_finite() {
        return kin.clone();
    }
    let n = kin.len();
    let channels: [Vec<f64>; 6] = std::array::from_fn(|c| {
        let src = kin.channel(c);
        if shift > 0.0 {
            let k = (shift as usize).min(n);
            let mut out = vec![src[0]; k];
            out.extend_from_slice(&src[..n - k]);
            out
        } else {
            let k = ((-shift) as usize).min(n);
            let mut out = src[k..].to_vec();
            out.resize(n, src[n - 1]);
            out
        }
    });
    KinematicStream::new(channels, rate).expect("shifting preserves stream invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(n: usize) -> KinematicStream {
        KinematicStream::new(std::array::from_fn(|c| (0..n).map(|i| (i * 10 + c) as f64).collect()), 100)
            .unwrap()
    }

    #[test]
    fn zero_offset_is_identity() {
        let k = ramp(50);
        assert_eq!(apply_sync(&k, SyncConfig::default()), k);
    }

    #[test]
    fn positive_offset_delays() {
        let k = ramp(50);
        let s = apply_sync(&k, SyncConfig { kinematic_offset_s: 0.10 });
        assert_eq!(s.len(), 50);
        assert!(s.channel(0)[..10].iter().all(|&v| v == 0.0));
        assert_eq!(&s.channel(0)[10..], &k.channel(0)[..40]);
    }

    #[test]
    fn negative_offset_advances() {
        let k = ramp(50);
        let s = apply_sync(&k, SyncConfig { kinematic_offset_s: -0.05 });
        assert_eq!(&s.channel(3)[..45], &k.channel(3)[5..]);
        assert!(s.channel(3)[45..].iter().all(|&v| v == k.channel(3)[49]));
    }

    #[test]
    fn offset_longer_than_stream() {
        let k = ramp(5);
        let s = apply_sync(&k, SyncConfig { kinematic_offset_s: 1.0 });
        assert!(s.channel(1).iter().all(|&v| v == 1.0));
    }

    proptest! {
        #[test]
        fn shift_and_unshift_restores_center(n in 1usize..200, off in -1.5f64..1.5) {
            let k = ramp(n);
            let there = apply_sync(&k, SyncConfig { kinematic_offset_s: off });
            let back = apply_sync(&there, SyncConfig { kinematic_offset_s: -off });
            let s = (off * 100.0).round().abs() as usize;
            if s < n {
                let (lo, hi) = if off > 0.0 { (0, n - s) } else { (s, n) };
                for c in 0..6 {
                    prop_assert_eq!(&back.channel(c)[lo..hi], &k.channel(c)[lo..hi]);
                }
            }
        }
    }
}
