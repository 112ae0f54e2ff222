use std::path::{Path, PathBuf};

use kinacoustic::classifier::TrainingSelection;
use kinacoustic::evalsynth::SynthSpec;
use kinacoustic::pipeline::{Modality, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// How training periods are chosen when no explicit periods are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub per_class: usize,
    pub max_len_s: f64,
    /// Explicit periods; overrides `per_class` and `max_len_s`.
    pub periods: Option<TrainingSelection>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            per_class: 4,
            max_len_s: 6.0,
            periods: None,
        }
    }
}

/// Everything a command may need. Loaded from `--config` JSON, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub audio: Option<PathBuf>,
    pub kinematic: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Directory holding `model.json`, `standardizer.json`, `transitions.json`.
    pub model: Option<PathBuf>,
    pub timeline: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub sync_offset_s: f64,
    pub modality: Modality,
    pub seed: Option<u64>,
    pub pipeline: PipelineConfig,
    pub training: TrainingConfig,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            audio: None,
            kinematic: None,
            annotations: None,
            model: None,
            timeline: None,
            out_dir: PathBuf::from("out"),
            sync_offset_s: 0.0,
            modality: Modality::Fused,
            seed: None,
            pipeline: PipelineConfig::default(),
            training: TrainingConfig::default(),
            synth: SynthSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fails with the name of the missing field, or when the path does not exist.
    pub fn require<'a>(&self, field: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        let path = value
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("missing required `{field}` path (flag --{field} or config field)")))?;
        if !path.exists() {
            return Err(CliError::Usage(format!("`{field}` path {} does not exist", path.display())));
        }
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.pipeline;
        let checks = [
            (self.sync_offset_s.is_finite(), "sync_offset_s must be finite"),
            (p.svm.c.is_finite() && p.svm.c > 0.0, "svm C must be positive"),
            (p.svm.tol.is_finite() && p.svm.tol > 0.0, "svm tol must be positive"),
            (p.svm.max_passes > 0, "svm max_passes must be positive"),
            (p.smoothing.small_window > 0, "smoothing small_window must be positive"),
            (p.smoothing.big_window > 0, "smoothing big_window must be positive"),
            (self.training.per_class > 0, "training per_class must be positive"),
            (
                self.training.max_len_s.is_finite() && self.training.max_len_s > 0.0,
                "training max_len_s must be positive",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(CliError::Usage(msg.to_string())),
            None => Ok(()),
        }
    }
}
