use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::features::SegmentGrid;
use crate::ingest::AnnotationTrack;
use crate::pipeline::Modality;
use crate::smoothing::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRecall {
    pub major: f64,
    pub minor: f64,
}

/// Segment-level agreement with the annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Recall of a class with no evaluable truth segments is reported as 0.
    pub per_class_recall: ClassRecall,
    /// `confusion[truth][predicted]`, index 0 = major.
    pub confusion: [[usize; 2]; 2],
    pub n_eval_segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub modality: Modality,
    pub stage: Stage,
    #[serde(flatten)]
    pub eval: Evaluation,
}

/// Scores segments fully covered by an annotation and not listed in
/// `exclude` (usually the training rows).
pub fn evaluate(pred: &[Activity], truth: &AnnotationTrack, grid: &SegmentGrid, exclude: &[usize]) -> Result<Evaluation> {
    if pred.len() != grid.n_segments() {
        return Err(Error::Alignment {
            left: grid.n_segments(),
            right: pred.len(),
        });
    }
    let mut excluded = vec![false; pred.len()];
    for &r in exclude {
        if let Some(e) = excluded.get_mut(r) {
            *e = true;
        }
    }
    let mut confusion = [[0usize; 2]; 2];
    for (k, &p) in pred.iter().enumerate() {
        if excluded[k] {
            continue;
        }
        if let Some(t) = truth.label_covering(grid.start_s(k), grid.end_s(k)) {
            confusion[t.index()][p.index()] += 1;
        }
    }
    Evaluation::from_confusion(confusion)
}

impl Evaluation {
    pub fn from_confusion(confusion: [[usize; 2]; 2]) -> Result<Self> {
        let n: usize = confusion.iter().flatten().sum();
        if n == 0 {
            return Err(Error::NoEvaluableSegments);
        }
        let recall = |i: usize| {
            let row = confusion[i][0] + confusion[i][1];
            if row == 0 {
                0.0
            } else {
                confusion[i][i] as f64 / row as f64
            }
        };
        Ok(Self {
            accuracy: (confusion[0][0] + confusion[1][1]) as f64 / n as f64,
            per_class_recall: ClassRecall {
                major: recall(0),
                minor: recall(1),
            },
            confusion,
            n_eval_segments: n,
        })
    }
}
