//! End-to-end training and scoring for one modality.

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::classifier::{classify, fit_platt, train_svm, SvmModel, SvmParams, TrainReport};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::features::{FeatureConfig, ModalityFeatures};
use crate::fusion::{fuse, FeatureMatrix, Standardizer};
use crate::smoothing::{
    estimate_transitions_from_runs, smooth, window_filter_labels, SmoothedStages, SmoothingConfig, TransitionModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Kinematic,
    #[default]
    Fused,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Audio, Modality::Kinematic, Modality::Fused];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Audio => "audio",
            Modality::Kinematic => "kinematic",
            Modality::Fused => "fused",
        }
    }

    pub fn select(self, f: &ModalityFeatures) -> Result<FeatureMatrix> {
        match self {
            Modality::Audio => Ok(f.audio.clone()),
            Modality::Kinematic => Ok(f.kinematic.clone()),
            Modality::Fused => fuse(&f.audio, &f.kinematic),
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "audio" => Ok(Modality::Audio),
            "kinematic" => Ok(Modality::Kinematic),
            "fused" => Ok(Modality::Fused),
            other => Err(Error::invalid(format!(
                "unknown modality {other:?} (expected audio, kinematic or fused)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub svm: SvmParams,
    pub smoothing: SmoothingConfig,
}

/// Cross-validation folds for the Platt calibration scores.
const PLATT_FOLDS: usize = 5;

/// Everything needed to label new segments of one modality.
#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub standardizer: Standardizer,
    pub model: SvmModel,
    pub transitions: TransitionModel,
    pub report: TrainReport,
}

/// Splits ascending row indices into maximal runs of consecutive rows.
fn contiguous_runs(rows: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i] != rows[i - 1] + 1 {
            if i > start {
                runs.push(start..i);
            }
            start = i;
        }
    }
    runs
}

/// Decision values for each training row from a model that did not see its
/// run. Runs go to folds round-robin. `None` when there are too few runs or
/// some fold leaves a single class behind.
fn held_out_decision_values(
    x_train: &FeatureMatrix,
    train_rows: &[usize],
    train_labels: &[Activity],
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<Option<Vec<f64>>> {
    let runs = contiguous_runs(train_rows);
    let k = PLATT_FOLDS.min(runs.len());
    if k < 2 {
        return Ok(None);
    }
    let mut fold_of = vec![0; train_rows.len()];
    for (r, run) in runs.iter().enumerate() {
        fold_of[run.clone()].iter_mut().for_each(|f| *f = r % k);
    }
    let mut f = vec![0.0; train_rows.len()];
    for fold in 0..k {
        let (inside, outside): (Vec<usize>, Vec<usize>) = (0..train_rows.len()).partition(|&i| fold_of[i] != fold);
        let y: Vec<Activity> = inside.iter().map(|&i| train_labels[i]).collect();
        if !y.contains(&Activity::Major) || !y.contains(&Activity::Minor) {
            return Ok(None);
        }
        let model = train_svm(&x_train.select_rows(&inside), &y, &cfg.svm, exec)?.model;
        let held = model.decision_values(&x_train.select_rows(&outside), exec)?;
        for (&i, v) in outside.iter().zip(held) {
            f[i] = v;
        }
    }
    Ok(Some(f))
}

/// Fits standardizer, SVM and Platt calibration on `train_rows`, then
/// estimates Viterbi transitions from the big-window-filtered predictions
/// inside the training periods.
pub fn train_pipeline(
    fm: &FeatureMatrix,
    train_rows: &[usize],
    train_labels: &[Activity],
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<TrainedPipeline> {
    if train_rows.len() != train_labels.len() {
        return Err(Error::Alignment {
            left: train_rows.len(),
            right: train_labels.len(),
        });
    }
    if train_rows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("training rows must be strictly ascending"));
    }
    let standardizer = Standardizer::fit(fm, train_rows)?;
    let z = standardizer.transform(fm)?;
    let x_train = z.select_rows(train_rows);
    let mut outcome = train_svm(&x_train, train_labels, &cfg.svm, exec)?;
    let f_train = match held_out_decision_values(&x_train, train_rows, train_labels, cfg, exec)? {
        Some(f) => f,
        None => outcome.model.decision_values(&x_train, exec)?,
    };
    let platt = fit_platt(&f_train, train_labels);
    outcome.model.platt_a = platt.a;
    outcome.model.platt_b = platt.b;

    let raw = classify(&outcome.model, &z, exec)?;
    let swf = window_filter_labels(&raw.labels, cfg.smoothing.small_window);
    let bwf = window_filter_labels(&swf, cfg.smoothing.big_window);
    let picked: Vec<Activity> = train_rows.iter().map(|&r| bwf[r]).collect();
    let runs: Vec<&[Activity]> = contiguous_runs(train_rows).into_iter().map(|r| &picked[r]).collect();
    let transitions = estimate_transitions_from_runs(&runs)?;

    Ok(TrainedPipeline {
        standardizer,
        model: outcome.model,
        transitions,
        report: outcome.report,
    })
}

impl TrainedPipeline {
    pub fn run(&self, fm: &FeatureMatrix, smoothing: &SmoothingConfig, exec: Exec) -> Result<SmoothedStages> {
        let z = self.standardizer.transform(fm)?;
        let raw = classify(&self.model, &z, exec)?;
        smooth(&raw, smoothing, &self.transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_split_on_gaps() {
        assert_eq!(contiguous_runs(&[1, 2, 3, 7, 8, 10]), vec![0..3, 3..5, 5..6]);
        assert!(contiguous_runs(&[]).is_empty());
    }

    #[test]
    fn modality_parse() {
        assert_eq!("Fused".parse::<Modality>().unwrap(), Modality::Fused);
        assert!("video".parse::<Modality>().is_err());
    }
}
