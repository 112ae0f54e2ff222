//! Binary soft-margin SVM over standardized segment features, with Platt
//! calibration to supply per-segment `P(Major)` for the Markov smoothing
//! stage.

mod platt;
mod selection;
mod svm;

pub use platt::{fit_platt, PlattParams};
pub use selection::{select_training_rows, Interval, TrainingSelection};
pub use svm::{train_svm, Kernel, KernelChoice, SvmModel, SvmParams, TrainOutcome, TrainReport};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::FeatureMatrix;

/// Per-segment labels with the decision values and probabilities behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSequence {
    pub labels: Vec<Activity>,
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
}

impl LabelSequence {
    pub fn new(labels: Vec<Activity>, scores: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != scores.len() || labels.len() != probs.len() {
            return Err(Error::invalid(format!(
                "label sequence parts differ in length: {} labels, {} scores, {} probs",
                labels.len(),
                scores.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self { labels, scores, probs })
    }

    /// Hard labels only: scores are ±1 and probabilities 1 or 0.
    pub fn from_labels(labels: Vec<Activity>) -> Self {
        let scores = labels.iter().map(|l| l.sign()).collect();
        let probs = labels
            .iter()
            .map(|&l| if l == Activity::Major { 1.0 } else { 0.0 })
            .collect();
        Self { labels, scores, probs }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Same scores and probabilities with replaced labels.
    pub fn with_labels(&self, labels: Vec<Activity>) -> Self {
        assert_eq!(labels.len(), self.len());
        Self {
            labels,
            scores: self.scores.clone(),
            probs: self.probs.clone(),
        }
    }
}

/// Scores every row: decision value, thresholded label, calibrated probability.
pub fn classify(model: &SvmModel, x: &FeatureMatrix, exec: Exec) -> Result<LabelSequence> {
    let scores = model.decision_values(x, exec)?;
    let platt = PlattParams {
        a: model.platt_a,
        b: model.platt_b,
    };
    let labels = scores.iter().map(|&f| Activity::from_sign(f)).collect();
    let probs = scores.iter().map(|&f| platt.probability(f)).collect();
    LabelSequence::new(labels, scores, probs)
}
