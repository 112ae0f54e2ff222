//! Logistic calibration of SVM decision values: `P(Major | f) = σ(a·f + b)`.
//!
//! Fitted by damped Newton iterations with backtracking on the
//! cross-entropy against Platt's smoothed targets
//! `(N₊ + 1) / (N₊ + 2)` and `1 / (N₋ + 2)`, which keeps the optimum finite
//! on separable data.

use serde::{Deserialize, Serialize};

use crate::activity::Activity;

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const GRAD_EPS: f64 = 1e-5;
const RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl PlattParams {
    /// Used when the fit is degenerate: `σ(f)`.
    pub const FALLBACK: PlattParams = PlattParams { a: 1.0, b: 0.0 };

    pub fn probability(&self, f: f64) -> f64 {
        sigmoid(self.a * f + self.b)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn loss(f: &[f64], t: &[f64], a: f64, b: f64) -> f64 {
    f.iter()
        .zip(t)
        .map(|(&fi, &ti)| {
            let z = a * fi + b;
            ti * softplus(-z) + (1.0 - ti) * softplus(z)
        })
        .sum()
}

pub fn fit_platt(f: &[f64], y: &[Activity]) -> PlattParams {
    let n_pos = y.iter().filter(|&&l| l == Activity::Major).count();
    let n_neg = y.len() - n_pos;
    let spread = f.iter().copied().fold(f64::NEG_INFINITY, f64::max) - f.iter().copied().fold(f64::INFINITY, f64::min);
    if f.len() != y.len() || n_pos == 0 || n_neg == 0 || !spread.is_finite() || spread <= 0.0 {
        return PlattParams::FALLBACK;
    }
    let hi = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let lo = 1.0 / (n_neg as f64 + 2.0);
    let t: Vec<f64> = y.iter().map(|&l| if l == Activity::Major { hi } else { lo }).collect();

    let mut a = 0.0;
    let mut b = ((n_pos as f64 + 1.0) / (n_neg as f64 + 1.0)).ln();
    let mut obj = loss(f, &t, a, b);
    for _ in 0..MAX_ITER {
        let (mut ga, mut gb) = (0.0, 0.0);
        let (mut h11, mut h12, mut h22) = (RIDGE, 0.0, RIDGE);
        for (&fi, &ti) in f.iter().zip(&t) {
            let p = sigmoid(a * fi + b);
            let d = p - ti;
            ga += d * fi;
            gb += d;
            let w = p * (1.0 - p);
            h11 += w * fi * fi;
            h12 += w * fi;
            h22 += w;
        }
        if ga.abs() < GRAD_EPS && gb.abs() < GRAD_EPS {
            break;
        }
        let det = h11 * h22 - h12 * h12;
        if !(det > 0.0) {
            break;
        }
        let da = -(h22 * ga - h12 * gb) / det;
        let db = -(-h12 * ga + h11 * gb) / det;
        let slope = ga * da + gb * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let new_obj = loss(f, &t, na, nb);
            if new_obj < obj + 1e-4 * step * slope {
                a = na;
                b = nb;
                obj = new_obj;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    if a.is_finite() && b.is_finite() {
        PlattParams { a, b }
    } else {
        PlattParams::FALLBACK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separated_scores_give_confident_probabilities() {
        let mut f = vec![10.0; 200];
        f.extend(vec![-10.0; 200]);
        let mut y = vec![Activity::Major; 200];
        y.extend(vec![Activity::Minor; 200]);
        let p = fit_platt(&f, &y);
        assert!(p.probability(10.0) >= 0.99, "{p:?}");
        assert!(p.probability(-10.0) <= 0.01);
    }

    #[test]
    fn constant_scores_fall_back() {
        let p = fit_platt(&[0.0; 10], &[Activity::Major, Activity::Minor].repeat(5));
        assert_eq!(p, PlattParams::FALLBACK);
        assert_eq!(p.probability(0.0), 0.5);
        assert_eq!(fit_platt(&[1.0, 2.0], &[Activity::Major; 2]), PlattParams::FALLBACK);
    }

    #[test]
    fn recovers_known_sigmoid() {
        let (a, b) = (2.0, -0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<Activity> = f
            .iter()
            .map(|&fi| {
                if rng.random::<f64>() < sigmoid(a * fi + b) {
                    Activity::Major
                } else {
                    Activity::Minor
                }
            })
            .collect();
        let p = fit_platt(&f, &y);
        assert!((p.a - a).abs() / a.abs() < 0.1, "{p:?}");
        assert!((p.b - b).abs() / b.abs() < 0.1, "{p:?}");
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert_eq!(softplus(800.0), 800.0);
    }
}
