//! Audio-only vs kinematic-only vs fused comparison on one recording.

use std::fmt::Write as _;

use crate::classifier::{select_training_rows, TrainingSelection};
use crate::error::Result;
use crate::exec::Exec;
use crate::features::{extract_segment_features, SegmentGrid};
use crate::ingest::{AnnotationTrack, AudioStream, KinematicStream};
use crate::pipeline::{train_pipeline, Modality, PipelineConfig};
use crate::smoothing::{SmoothedStages, Stage};
use crate::timeline::write_timeline;

use super::eval::{evaluate, EvalReport};

#[derive(Debug, Clone)]
pub struct ModalityRun {
    pub modality: Modality,
    pub stages: SmoothedStages,
    pub n_support_vectors: usize,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub grid: SegmentGrid,
    pub train_rows: Vec<usize>,
    /// Modality-major, stage-minor: audio raw..mcf, kinematic raw..mcf, fused raw..mcf.
    pub reports: Vec<EvalReport>,
    pub runs: Vec<ModalityRun>,
}

/// Extracts features once, then trains and scores each modality with the
/// same training rows. Segments inside the training periods are not scored.
pub fn compare_modalities(
    audio: &AudioStream,
    kinematic: &KinematicStream,
    truth: &AnnotationTrack,
    selection: &TrainingSelection,
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<Comparison> {
    let grid = SegmentGrid::for_streams(audio, kinematic);
    selection.validate(grid.duration_s())?;
    let features = extract_segment_features(audio, kinematic, &grid, &cfg.features, exec)?;
    let (train_rows, train_labels) = select_training_rows(&grid, selection)?;

    let runs = exec.try_map_range(Modality::ALL.len(), |i| -> Result<ModalityRun> {
        let modality = Modality::ALL[i];
        let fm = modality.select(&features)?;
        let trained = train_pipeline(&fm, &train_rows, &train_labels, cfg, exec)?;
        let stages = trained.run(&fm, &cfg.smoothing, exec)?;
        Ok(ModalityRun {
            modality,
            stages,
            n_support_vectors: trained.model.n_support_vectors(),
        })
    })?;

    let mut reports = Vec::with_capacity(runs.len() * Stage::ALL.len());
    for run in &runs {
        for stage in Stage::ALL {
            let eval = evaluate(&run.stages.stage(stage).labels, truth, &grid, &train_rows)?;
            reports.push(EvalReport {
                modality: run.modality,
                stage,
                eval,
            });
        }
    }
    Ok(Comparison {
        grid,
        train_rows,
        reports,
        runs,
    })
}

impl Comparison {
    pub fn report(&self, modality: Modality, stage: Stage) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.modality == modality && r.stage == stage)
    }

    /// Accuracy for a modality and stage; panics if the pair was not run.
    pub fn accuracy(&self, modality: Modality, stage: Stage) -> f64 {
        self.report(modality, stage)
            .unwrap_or_else(|| panic!("no report for {modality}/{stage}"))
            .eval
            .accuracy
    }

    pub fn run(&self, modality: Modality) -> Option<&ModalityRun> {
        self.runs.iter().find(|r| r.modality == modality)
    }

    /// Accuracy grid with modalities as rows and stages as columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "modality");
        for s in Stage::ALL {
            let _ = write!(out, " {:>7}", s.as_str());
        }
        let _ = writeln!(out, " {:>7}", "n_eval");
        for run in &self.runs {
            let _ = write!(out, "{:<10}", run.modality.as_str());
            for s in Stage::ALL {
                let _ = write!(out, " {:>7.4}", self.accuracy(run.modality, s));
            }
            let n = self.report(run.modality, Stage::Raw).map_or(0, |r| r.eval.n_eval_segments);
            let _ = writeln!(out, " {n:>7}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("modality,stage,accuracy,recall_major,recall_minor,n_eval_segments\n");
        for r in &self.reports {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.modality,
                r.stage,
                r.eval.accuracy,
                r.eval.per_class_recall.major,
                r.eval.per_class_recall.minor,
                r.eval.n_eval_segments
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.reports)?)
    }

    pub fn timeline_csv(&self, modality: Modality, truth: Option<&AnnotationTrack>) -> Result<Option<Vec<u8>>> {
        let Some(run) = self.run(modality) else {
            return Ok(None);
        };
        let mut buf = Vec::new();
        write_timeline(&self.grid, &run.stages, truth, &mut buf)?;
        Ok(Some(buf))
    }
}
