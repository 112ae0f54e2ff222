//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The solver works on the dual in minimization form
//! `min ½ αᵀQα − Σα` subject to `0 ≤ α ≤ C` and `Σ yα = 0`, with
//! `Q_ij = y_i y_j K(x_i, x_j)`. Each step picks the maximal violating pair
//! (largest `−y G` over the up-set, smallest over the low-set, ties to the
//! lowest index) and solves the two-variable subproblem exactly. It stops
//! when the violation gap `m − M` falls to `tol`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::FeatureMatrix;

/// Curvature floor for degenerate pairs (duplicate points, non-PSD rounding).
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Kernel requested at training time; an RBF without `gamma` uses `1 / n_features`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelChoice {
    #[default]
    Linear,
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl KernelChoice {
    fn resolve(self, n_features: usize) -> Kernel {
        match self {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf { gamma } => Kernel::Rbf {
                gamma: gamma.unwrap_or(1.0 / n_features.max(1) as f64),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub kernel: KernelChoice,
    pub tol: f64,
    /// Iteration budget in units of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: KernelChoice::Linear,
            tol: 1e-3,
            max_passes: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelJson", try_from = "ModelJson")]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub bias: f64,
    pub platt_a: f64,
    pub platt_b: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` per support vector.
    pub dual_coefs: Vec<f64>,
    pub feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(rename = "C")]
    c: f64,
    bias: f64,
    platt_a: f64,
    platt_b: f64,
    support_vectors: Vec<Vec<f64>>,
    dual_coefs: Vec<f64>,
    feature_names: Vec<String>,
}

impl From<SvmModel> for ModelJson {
    fn from(m: SvmModel) -> Self {
        let (kernel, gamma) = match m.kernel {
            Kernel::Linear => ("linear".to_string(), None),
            Kernel::Rbf { gamma } => ("rbf".to_string(), Some(gamma)),
        };
        Self {
            kernel,
            gamma,
            c: m.c,
            bias: m.bias,
            platt_a: m.platt_a,
            platt_b: m.platt_b,
            support_vectors: m.support_vectors,
            dual_coefs: m.dual_coefs,
            feature_names: m.feature_names,
        }
    }
}

impl TryFrom<ModelJson> for SvmModel {
    type Error = String;

    fn try_from(j: ModelJson) -> std::result::Result<Self, String> {
        let kernel = match (j.kernel.as_str(), j.gamma) {
            ("linear", _) => Kernel::Linear,
            ("rbf", Some(gamma)) if gamma > 0.0 => Kernel::Rbf { gamma },
            ("rbf", _) => return Err("rbf kernel needs a positive gamma".into()),
            (other, _) => return Err(format!("unknown kernel {other:?}")),
        };
        if j.support_vectors.len() != j.dual_coefs.len() {
            return Err("support_vectors and dual_coefs differ in length".into());
        }
        if j.support_vectors.iter().any(|sv| sv.len() != j.feature_names.len()) {
            return Err("support vector length differs from feature_names".into());
        }
        Ok(Self {
            kernel,
            c: j.c,
            bias: j.bias,
            platt_a: j.platt_a,
            platt_b: j.platt_b,
            support_vectors: j.support_vectors,
            dual_coefs: j.dual_coefs,
            feature_names: j.feature_names,
        })
    }
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_support_vectors(&self) -> usize {
        self.support_vectors.len()
    }

    /// `Σ dual_coef_i K(sv_i, x) + bias`.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Primal weights `w = Σ dual_coef_i sv_i`; linear kernel only.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.n_features()];
        for (sv, c) in self.support_vectors.iter().zip(&self.dual_coefs) {
            for (wi, x) in w.iter_mut().zip(sv) {
                *wi += c * x;
            }
        }
        Some(w)
    }

    fn check_dims(&self, x: &FeatureMatrix) -> Result<()> {
        if x.n_cols() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: x.n_cols(),
            });
        }
        Ok(())
    }

    pub fn decision_values(&self, x: &FeatureMatrix, exec: Exec) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        Ok(exec.map_range(x.n_rows(), |i| self.decision_value(x.row(i))))
    }

    /// `Major` iff the decision value is non-negative.
    pub fn predict(&self, x: &FeatureMatrix, exec: Exec) -> Result<Vec<Activity>> {
        Ok(self
            .decision_values(x, exec)?
            .into_iter()
            .map(Activity::from_sign)
            .collect())
    }
}

/// Solver diagnostics returned alongside the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub converged: bool,
    pub iterations: usize,
    /// Final maximal KKT violation `m − M`.
    pub gap: f64,
    /// Dual objective `Σα − ½ αᵀQα`, sampled every `n` iterations and at the end.
    pub dual_objective: Vec<f64>,
    /// Lagrange multipliers for every training row, in input order.
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SvmModel,
    pub report: TrainReport,
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y < 0.0 && alpha < c) || (y > 0.0 && alpha > 0.0)
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
}

/// Trains on the rows of `x` (already standardized) with labels `y`.
/// Platt parameters are left at `(1, 0)`; see [`super::fit_platt`].
pub fn train_svm(x: &FeatureMatrix, y: &[Activity], params: &SvmParams, exec: Exec) -> Result<TrainOutcome> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(Error::Alignment { left: n, right: y.len() });
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", params.tol)));
    }
    let n_major = y.iter().filter(|&&l| l == Activity::Major).count();
    if n_major == 0 || n_major == n {
        let only = y.first().map_or("none".to_string(), |l| l.to_string());
        return Err(Error::SingleClass(only));
    }

    let kernel = params.kernel.resolve(x.n_cols());
    let c = params.c;
    let ys: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let q: Vec<Vec<f64>> = exec.map_range(n, |i| {
        (0..n)
            .map(|j| ys[i] * ys[j] * kernel.eval(x.row(i), x.row(j)))
            .collect()
    });

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = vec![0.0];
    let max_iter = params.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;

    loop {
        let mut i = None;
        let mut m = f64::NEG_INFINITY;
        let mut j = None;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -ys[t] * grad[t];
            if in_up(alpha[t], ys[t], c) && v > m {
                m = v;
                i = Some(t);
            }
            if in_low(alpha[t], ys[t], c) && v < big_m {
                big_m = v;
                j = Some(t);
            }
        }
        gap = m - big_m;
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if gap <= params.tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qi, qj) = (&q[i], &q[j]);
        if ys[i] != ys[j] {
            let quad = (qi[i] + qj[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qi[i] + qj[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
        iterations += 1;
        if iterations % n == 0 {
            trace.push(dual_objective(&alpha, &grad));
        }
    }
    trace.push(dual_objective(&alpha, &grad));
    if !converged {
        warn!("SMO stopped after {iterations} iterations with KKT gap {gap:.3e} > tol {}", params.tol);
    }

    let rho = offset(&alpha, &grad, &ys, c);
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(x.row(t).to_vec());
            dual_coefs.push(alpha[t] * ys[t]);
        }
    }
    Ok(TrainOutcome {
        model: SvmModel {
            kernel,
            c,
            bias: -rho,
            platt_a: 1.0,
            platt_b: 0.0,
            support_vectors,
            dual_coefs,
            feature_names: x.names().to_vec(),
        },
        report: TrainReport {
            converged,
            iterations,
            gap,
            dual_objective: trace,
            alphas: alpha,
        },
    })
}

/// Threshold `ρ` (decision offset is `−ρ`): mean of `y G` over free
/// multipliers, else the midpoint of the feasible interval.
fn offset(alpha: &[f64], grad: &[f64], ys: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum += yg;
        }
    }
    if n_free > 0 {
        sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
        let names = (0..rows[0].len()).map(|i| format!("x{i}")).collect();
        FeatureMatrix::from_rows(names, rows).unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let x = matrix(&[vec![-1.0], vec![1.0]]);
        let y = [Activity::Minor, Activity::Major];
        let params = SvmParams { c: 1000.0, ..Default::default() };
        let out = train_svm(&x, &y, &params, Exec::Sequential).unwrap();
        let m = &out.model;
        assert!(out.report.converged);
        assert!(m.bias.abs() < 1e-3);
        assert!(m.decision_value(&[1.0]) >= 1.0 - 1e-3);
        assert!(m.decision_value(&[-1.0]) <= -(1.0 - 1e-3));
        assert!(m.decision_value(&[0.0]).abs() < 1e-3);
    }

    #[test]
    fn single_class_and_mismatch_errors() {
        let x = matrix(&[vec![0.0], vec![1.0]]);
        assert!(matches!(
            train_svm(&x, &[Activity::Major; 2], &SvmParams::default(), Exec::Sequential),
            Err(Error::SingleClass(_))
        ));
        assert!(train_svm(&x, &[Activity::Major], &SvmParams::default(), Exec::Sequential).is_err());
        let m = train_svm(&x, &[Activity::Major, Activity::Minor], &SvmParams::default(), Exec::Sequential)
            .unwrap()
            .model;
        assert!(matches!(
            m.decision_values(&matrix(&[vec![0.0, 1.0]]), Exec::Sequential),
            Err(Error::Dimension { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn duplicate_points_with_opposite_labels() {
        let x = matrix(&[vec![0.5, 0.5], vec![0.5, 0.5], vec![2.0, 2.0], vec![-2.0, -2.0]]);
        let y = [Activity::Major, Activity::Minor, Activity::Major, Activity::Minor];
        let out = train_svm(&x, &y, &SvmParams::default(), Exec::Sequential).unwrap();
        assert!(out.report.converged);
        assert!(out.model.decision_values(&x, Exec::Sequential).unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn iteration_budget_reports_non_convergence() {
        let x = matrix(&[vec![-1.0], vec![-0.5], vec![0.4], vec![1.0], vec![0.1]]);
        let y = [Activity::Minor, Activity::Major, Activity::Minor, Activity::Major, Activity::Minor];
        let params = SvmParams { max_passes: 0, tol: 1e-9, ..Default::default() };
        let out = train_svm(&x, &y, &params, Exec::Sequential).unwrap();
        assert!(!out.report.converged);
        assert_eq!(out.report.iterations, 0);
    }

    #[test]
    fn model_json_layout() {
        let x = matrix(&[vec![-1.0, 0.0], vec![1.0, 0.3]]);
        let y = [Activity::Minor, Activity::Major];
        let params = SvmParams { kernel: KernelChoice::Rbf { gamma: None }, ..Default::default() };
        let m = train_svm(&x, &y, &params, Exec::Sequential).unwrap().model;
        assert_eq!(m.kernel, Kernel::Rbf { gamma: 0.5 });
        let v = serde_json::to_value(&m).unwrap();
        for key in ["kernel", "gamma", "C", "bias", "platt_a", "platt_b", "support_vectors", "dual_coefs", "feature_names"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["kernel"], "rbf");
        let back: SvmModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);

        let lin = train_svm(&x, &y, &SvmParams::default(), Exec::Sequential).unwrap().model;
        let v = serde_json::to_value(&lin).unwrap();
        assert!(v.get("gamma").is_none());
    }
}
