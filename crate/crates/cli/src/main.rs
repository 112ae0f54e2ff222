//! `kinacoustic` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime
//! failures such as an unwritable output directory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinacoustic::pipeline::Modality;
use kinacoustic::Exec;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl From<kinacoustic::Error> for CliError {
    fn from(e: kinacoustic::Error) -> Self {
        match e {
            kinacoustic::Error::Io(_) => CliError::Runtime(e.into()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "kinacoustic", version, about = "Activity recognition from fused audio and kinematic recordings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic recordings.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    modality: Option<Modality>,
    /// Seconds added to kinematic timestamps to align them with the audio.
    #[arg(long, global = true, allow_negative_numbers = true)]
    sync_offset_s: Option<f64>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Debug, Default)]
struct Streams {
    /// WAV recording.
    #[arg(long)]
    audio: Option<PathBuf>,
    /// CSV with `t,ax,ay,az,gx,gy,gz`.
    #[arg(long)]
    kinematic: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write per-segment feature CSVs for every modality.
    Extract {
        #[command(flatten)]
        streams: Streams,
    },
    /// Train the classifier and smoothing model for one modality.
    Train {
        #[command(flatten)]
        streams: Streams,
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Label every segment with a trained model and write the stage timeline.
    Classify {
        #[command(flatten)]
        streams: Streams,
        /// Directory written by `train`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Adds a truth column to the timeline.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Score a timeline against annotations, excluding training segments.
    Evaluate {
        #[arg(long)]
        timeline: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Generate a synthetic recording with annotations.
    Synth {
        #[arg(long)]
        duration_s: Option<f64>,
        /// Use the acceptance scenario instead of the configured spec.
        #[arg(long)]
        acceptance: bool,
    },
    /// Train and score audio, kinematic and fused models side by side.
    Compare {
        #[command(flatten)]
        streams: Streams,
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(m) = c.modality {
        cfg.modality = m;
    }
    if let Some(s) = c.sync_offset_s {
        cfg.sync_offset_s = s;
    }
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            *slot = v.clone();
        }
    };
    match &cli.command {
        Command::Extract { streams } => {
            set(&mut cfg.audio, &streams.audio);
            set(&mut cfg.kinematic, &streams.kinematic);
        }
        Command::Train { streams, annotations } | Command::Compare { streams, annotations } => {
            set(&mut cfg.audio, &streams.audio);
            set(&mut cfg.kinematic, &streams.kinematic);
            set(&mut cfg.annotations, annotations);
        }
        Command::Classify {
            streams,
            model,
            annotations,
        } => {
            set(&mut cfg.audio, &streams.audio);
            set(&mut cfg.kinematic, &streams.kinematic);
            set(&mut cfg.model, model);
            set(&mut cfg.annotations, annotations);
        }
        Command::Evaluate { timeline, annotations } => {
            set(&mut cfg.timeline, timeline);
            set(&mut cfg.annotations, annotations);
        }
        Command::Synth { duration_s, acceptance } => {
            if *acceptance {
                cfg.synth = kinacoustic::evalsynth::SynthSpec::acceptance();
            }
            if let Some(d) = duration_s {
                cfg.synth.duration_s = *d;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let exec = if cli.common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match cli.command {
        Command::Extract { .. } => commands::extract(&cfg, exec),
        Command::Train { .. } => commands::train(&cfg, exec),
        Command::Classify { .. } => commands::classify_cmd(&cfg, exec),
        Command::Evaluate { .. } => commands::evaluate_cmd(&cfg),
        Command::Synth { .. } => commands::synth(&cfg),
        Command::Compare { .. } => commands::compare(&cfg, exec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
