use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::Context;
use kinacoustic::classifier::{classify, select_training_rows, SvmModel, TrainingSelection};
use kinacoustic::evalsynth::{compare_modalities, evaluate, synth_recording, EvalReport};
use kinacoustic::features::extract_segment_features;
use kinacoustic::ingest::{
    apply_sync, decode_annotations, decode_audio, decode_kinematic, encode_annotations, encode_kinematic_csv,
    encode_wav, WavEncoding,
};
use kinacoustic::pipeline::{train_pipeline, Modality};
use kinacoustic::smoothing::{smooth, Stage, TransitionModel};
use kinacoustic::timeline::{read_timeline, write_timeline};
use kinacoustic::{AnnotationTrack, AudioStream, Exec, KinematicStream, SegmentGrid, Standardizer, SyncConfig};
use log::info;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const MODEL_FILE: &str = "model.json";
pub const STANDARDIZER_FILE: &str = "standardizer.json";
pub const TRANSITIONS_FILE: &str = "transitions.json";

/// Writes through a temp file in the target directory, then renames.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let runtime = |e: std::io::Error| CliError::Runtime(anyhow::Error::new(e).context(format!("writing {name}")));
    std::fs::create_dir_all(dir).map_err(runtime)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(runtime)?;
    tmp.write_all(bytes).map_err(runtime)?;
    tmp.as_file().sync_all().map_err(runtime)?;
    tmp.persist(dir.join(name)).map_err(|e| runtime(e.error))?;
    info!("wrote {}", dir.join(name).display());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::Usage(format!("invalid {}: {e}", path.display())))
}

struct Inputs {
    audio: AudioStream,
    kinematic: KinematicStream,
    grid: SegmentGrid,
}

fn load_streams(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let audio = decode_audio(cfg.require("audio", &cfg.audio)?)?;
    let raw = decode_kinematic(cfg.require("kinematic", &cfg.kinematic)?)?;
    let kinematic = apply_sync(
        &raw,
        SyncConfig {
            kinematic_offset_s: cfg.sync_offset_s,
        },
    );
    let grid = SegmentGrid::for_streams(&audio, &kinematic);
    info!(
        "audio {:.2} s, kinematic {:.2} s, {} segments",
        audio.duration_s(),
        kinematic.duration_s(),
        grid.n_segments()
    );
    Ok(Inputs {
        audio,
        kinematic,
        grid,
    })
}

fn load_annotations(cfg: &RunConfig) -> Result<AnnotationTrack, CliError> {
    Ok(decode_annotations(cfg.require("annotations", &cfg.annotations)?)?)
}

fn training_selection(cfg: &RunConfig, truth: &AnnotationTrack) -> Result<TrainingSelection, CliError> {
    match &cfg.training.periods {
        Some(sel) => Ok(sel.clone()),
        None => Ok(TrainingSelection::from_annotations(
            truth,
            cfg.training.per_class,
            cfg.training.max_len_s,
        )?),
    }
}

pub fn extract(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let inputs = load_streams(cfg)?;
    let features = extract_segment_features(
        &inputs.audio,
        &inputs.kinematic,
        &inputs.grid,
        &cfg.pipeline.features,
        exec,
    )?;
    for m in Modality::ALL {
        let mut buf = Vec::new();
        m.select(&features)?.write_csv(&inputs.grid, &mut buf)?;
        write_atomic(&cfg.out_dir, &format!("features_{m}.csv"), &buf)?;
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let inputs = load_streams(cfg)?;
    let truth = load_annotations(cfg)?;
    let sel = training_selection(cfg, &truth)?;
    let (rows, labels) = select_training_rows(&inputs.grid, &sel)?;
    let features = extract_segment_features(
        &inputs.audio,
        &inputs.kinematic,
        &inputs.grid,
        &cfg.pipeline.features,
        exec,
    )?;
    let fm = cfg.modality.select(&features)?;
    let trained = train_pipeline(&fm, &rows, &labels, &cfg.pipeline, exec)?;
    info!(
        "{} model: {} training rows, {} support vectors, converged {} after {} iterations",
        cfg.modality,
        rows.len(),
        trained.model.n_support_vectors(),
        trained.report.converged,
        trained.report.iterations
    );
    write_json(&cfg.out_dir, MODEL_FILE, &trained.model)?;
    write_json(&cfg.out_dir, STANDARDIZER_FILE, &trained.standardizer)?;
    write_json(&cfg.out_dir, TRANSITIONS_FILE, &trained.transitions)?;
    Ok(())
}

pub fn classify_cmd(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let model_dir = cfg.require("model", &cfg.model)?;
    let model: SvmModel = read_json(&model_dir.join(MODEL_FILE))?;
    let standardizer: Standardizer = read_json(&model_dir.join(STANDARDIZER_FILE))?;
    let transitions: TransitionModel = read_json(&model_dir.join(TRANSITIONS_FILE))?;
    let truth = match cfg.annotations {
        Some(_) => Some(load_annotations(cfg)?),
        None => None,
    };
    let inputs = load_streams(cfg)?;
    let features = extract_segment_features(
        &inputs.audio,
        &inputs.kinematic,
        &inputs.grid,
        &cfg.pipeline.features,
        exec,
    )?;
    let z = standardizer.transform(&cfg.modality.select(&features)?)?;
    let raw = classify(&model, &z, exec)?;
    let stages = smooth(&raw, &cfg.pipeline.smoothing, &transitions)?;
    let mut buf = Vec::new();
    write_timeline(&inputs.grid, &stages, truth.as_ref(), &mut buf)?;
    write_atomic(&cfg.out_dir, "timeline.csv", &buf)
}

/// Scores every stage of a timeline, leaving out the rows the training
/// selection would have used.
pub fn evaluate_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.require("timeline", &cfg.timeline)?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let timeline = read_timeline(BufReader::new(file))?;
    let truth = load_annotations(cfg)?;
    let grid = SegmentGrid::new(timeline.n_segments());
    let sel = training_selection(cfg, &truth)?;
    let (train_rows, _) = select_training_rows(&grid, &sel)?;
    let reports = Stage::ALL
        .iter()
        .map(|&stage| {
            let pred = timeline.stage(stage).expect("timeline has every stage");
            Ok(EvalReport {
                modality: cfg.modality,
                stage,
                eval: evaluate(pred, &truth, &grid, &train_rows)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    for r in &reports {
        println!("{} {}: accuracy {:.4}", r.modality, r.stage, r.eval.accuracy);
    }
    write_json(&cfg.out_dir, "report.json", &reports)
}

pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let mut spec = cfg.synth.clone();
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let rec = synth_recording(&spec)?;
    let wav = encode_wav(rec.audio.samples(), 1, rec.audio.sample_rate_hz(), WavEncoding::Float32);
    write_atomic(&cfg.out_dir, "audio.wav", &wav)?;
    let mut buf = Vec::new();
    encode_kinematic_csv(&rec.kinematic, &mut buf)?;
    write_atomic(&cfg.out_dir, "kinematic.csv", &buf)?;
    let mut buf = Vec::new();
    encode_annotations(&rec.annotations, &mut buf)?;
    write_atomic(&cfg.out_dir, "annotations.csv", &buf)
}

pub fn compare(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let inputs = load_streams(cfg)?;
    let truth = load_annotations(cfg)?;
    let sel = training_selection(cfg, &truth)?;
    let cmp = compare_modalities(&inputs.audio, &inputs.kinematic, &truth, &sel, &cfg.pipeline, exec)?;
    let text = cmp.to_text();
    print!("{text}");
    write_atomic(&cfg.out_dir, "comparison.txt", text.as_bytes())?;
    write_atomic(&cfg.out_dir, "comparison.csv", cmp.to_csv().as_bytes())?;
    let mut json = cmp.to_json()?;
    json.push('\n');
    write_atomic(&cfg.out_dir, "reports.json", json.as_bytes())?;
    for m in Modality::ALL {
        if let Some(bytes) = cmp.timeline_csv(m, Some(&truth))? {
            write_atomic(&cfg.out_dir, &format!("timeline_{m}.csv"), &bytes)?;
        }
    }
    Ok(())
}
