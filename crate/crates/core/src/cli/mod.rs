//! `pedfuse` command line. Exit codes: 0 success, 2 usage/config, 3 data,
//! 4 numeric (non-finite values, divergence, failed gradient check), 5 I/O.

pub mod pipeline;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{MapOverlay, MAP_FILE_NAME};
use crate::error::{Error, Result};
use crate::eval::{compare_methods, render_bev, BevForecast, PlotRole};
use crate::model::{init_parameters, model_gradient_check, predict, Checkpoint, CueConfig, FdPrecision, ModelDims};
use crate::synth::{generate_corpus, generate_scenario, ScenarioKind, ScenarioSpec};
use crate::train::TrainConfig;
use pipeline::{StageError, WithStage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pedfuse", version, about = "Pedestrian trajectory forecasting from pedestrian, vehicle and head-orientation cues")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus of crossing scenes.
    Generate(GenerateArgs),
    /// Train one model on a corpus.
    Train(TrainArgs),
    /// Evaluate checkpoints on the test split they were trained with.
    Evaluate(EvaluateArgs),
    /// Compare analytic and finite-difference gradients of a small model.
    Gradcheck(GradcheckArgs),
    /// Render a bird's-eye-view SVG of one test sample.
    Plot(PlotArgs),
    /// Train baseline, method1 and method2 with a shared seed and compare them.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scene kinds: `all` or a comma list of vehicle_yields, pedestrian_halts, independent_far.
    #[arg(long, default_value = "all")]
    pub kinds: String,
    /// Scenes per kind [count].
    #[arg(long, default_value_t = 50, value_name = "COUNT")]
    pub n: usize,
    /// Base seed; per-scene seeds derive from it [integer].
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Position noise standard deviation [m].
    #[arg(long, default_value_t = 0.03, value_name = "METERS")]
    pub noise: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Training settings. Each flag overrides the config file, which overrides
/// the built-in defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct TrainFlags {
    /// `key = value` config file; flags take precedence over it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Adam step size [1/step, dimensionless].
    #[arg(long, value_name = "RATE")]
    pub learning_rate: Option<f64>,
    /// Samples per mini-batch [count].
    #[arg(long, value_name = "COUNT")]
    pub batch_size: Option<usize>,
    /// Upper bound on training epochs [count].
    #[arg(long, value_name = "COUNT")]
    pub max_epochs: Option<usize>,
    /// Epochs without validation improvement tolerated before stopping [count].
    #[arg(long, value_name = "COUNT")]
    pub patience: Option<usize>,
    /// Seed for weight initialization and batch shuffling [integer].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hidden width of each encoder LSTM [units].
    #[arg(long, value_name = "UNITS")]
    pub encoder_hidden: Option<usize>,
    /// Hidden width of the decoder LSTM [units].
    #[arg(long, value_name = "UNITS")]
    pub decoder_hidden: Option<usize>,
    /// Global gradient-norm clip, or `none` [gradient L2 norm].
    #[arg(long, value_name = "NORM")]
    pub clip_norm: Option<String>,
    /// Seed for the track-level train/validation/test split [integer].
    #[arg(long)]
    pub split_seed: Option<u64>,
}

impl TrainFlags {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(p) => TrainConfig::from_file(p)?,
            None => TrainConfig::default(),
        };
        let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(k, &v));
        set("learning_rate", self.learning_rate.map(|v| v.to_string()))?;
        set("batch_size", self.batch_size.map(|v| v.to_string()))?;
        set("max_epochs", self.max_epochs.map(|v| v.to_string()))?;
        set("patience", self.patience.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("encoder_hidden", self.encoder_hidden.map(|v| v.to_string()))?;
        set("decoder_hidden", self.decoder_hidden.map(|v| v.to_string()))?;
        set("clip_norm", self.clip_norm.clone())?;
        set("split_seed", self.split_seed.map(|v| v.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CueArg {
    Baseline,
    Method1,
    Method2,
}

impl From<CueArg> for CueConfig {
    fn from(c: CueArg) -> Self {
        match c {
            CueArg::Baseline => CueConfig::BASELINE,
            CueArg::Method1 => CueConfig::METHOD1,
            CueArg::Method2 => CueConfig::METHOD2,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus directory of `.tracks` files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for checkpoint, history, split and resolved config.
    #[arg(long)]
    pub out: PathBuf,
    /// Input streams to use; overrides the config file's `cue`.
    #[arg(long, value_enum)]
    pub cue: Option<CueArg>,
    /// Binary sample cache; read if present, written otherwise.
    #[arg(long, value_name = "FILE")]
    pub sample_cache: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corpus directory the checkpoints were trained on.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Checkpoint files; repeat for several methods.
    #[arg(long = "checkpoint", required = true, value_name = "FILE")]
    pub checkpoints: Vec<PathBuf>,
    /// Output directory for report.txt and report.tsv.
    #[arg(long)]
    pub out: PathBuf,
    /// Binary sample cache; read if present, written otherwise.
    #[arg(long, value_name = "FILE")]
    pub sample_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum PrecisionArg {
    /// Differences of an `f64` loss.
    Double,
    /// Differences of a double-double loss from the scalar reference model.
    Extended,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Hidden width of every LSTM [units].
    #[arg(long, default_value_t = 8, value_name = "UNITS")]
    pub hidden: usize,
    /// Seed for weights and the synthetic sample [integer].
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Cue configuration to check; all three when omitted.
    #[arg(long, value_enum)]
    pub cue: Option<CueArg>,
    /// Finite-difference step [parameter units].
    #[arg(long, default_value_t = 1e-5, value_name = "STEP")]
    pub step: f64,
    /// Arithmetic used for the finite differences.
    #[arg(long, value_enum, default_value = "extended")]
    pub precision: PrecisionArg,
    /// Pass threshold on the max relative error [dimensionless].
    #[arg(long, default_value_t = 1e-4, value_name = "TOL")]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Corpus directory the checkpoints were trained on.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Fused-model checkpoint, drawn red.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Baseline checkpoint, drawn blue.
    #[arg(long, value_name = "FILE")]
    pub baseline: Option<PathBuf>,
    /// Index into the test split [count].
    #[arg(long, default_value_t = 0, value_name = "INDEX")]
    pub sample: usize,
    /// Map polygon file; defaults to the corpus's map.txt when present.
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Corpus directory of `.tracks` files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Binary sample cache; read if present, written otherwise.
    #[arg(long, value_name = "FILE")]
    pub sample_cache: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.error.exit_code()
        }
    }
}

fn require_dir(path: &Path, what: &str) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} directory {} does not exist", path.display())))
    }
}

fn parse_kinds(s: &str) -> Result<Vec<ScenarioKind>> {
    if s == "all" {
        return Ok(ScenarioKind::ALL.to_vec());
    }
    s.split(',')
        .map(|k| {
            ScenarioKind::from_token(k.trim())
                .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario kind {k:?}")))
        })
        .collect()
}

fn dispatch(cmd: Command) -> std::result::Result<i32, StageError> {
    match cmd {
        Command::Generate(a) => {
            let kinds = parse_kinds(&a.kinds).stage("arguments")?;
            if !(a.noise >= 0.0 && a.noise.is_finite()) {
                return Err(Error::InvalidArgument(format!("--noise must be a nonnegative number of metres, got {}", a.noise)))
                    .stage("arguments");
            }
            let entries = generate_corpus(&a.out, &kinds, a.n, a.seed, a.noise).stage("generate")?;
            println!("wrote {} scenes to {}", entries.len(), a.out.display());
            Ok(EXIT_OK)
        }
        Command::Train(a) => {
            let mut cfg = a.flags.resolve().stage("config")?;
            if let Some(c) = a.cue {
                cfg.cue = c.into();
            }
            require_dir(&a.corpus, "corpus").stage("arguments")?;
            let groups = pipeline::load_groups(&a.corpus, a.sample_cache.as_deref()).stage("load")?;
            let split = pipeline::split_for(&groups, &cfg).stage("split")?;
            let (ckpt, history) = pipeline::train_checkpoint(&split, &cfg).stage(format!("train {}", cfg.cue))?;
            pipeline::write_train_outputs(&a.out, &ckpt, &history, &split).stage("write")?;
            println!(
                "{}: best epoch {} of {}, checkpoint {}",
                cfg.cue,
                history.best_epoch,
                history.epochs.len(),
                ckpt.identifier()
            );
            Ok(EXIT_OK)
        }
        Command::Evaluate(a) => {
            require_dir(&a.corpus, "corpus").stage("arguments")?;
            let ckpts: Vec<Checkpoint> = a
                .checkpoints
                .iter()
                .map(|p| Checkpoint::load(p))
                .collect::<Result<_>>()
                .stage("load checkpoints")?;
            let groups = pipeline::load_groups(&a.corpus, a.sample_cache.as_deref()).stage("load")?;
            let split = pipeline::split_of_checkpoint(&groups, &ckpts[0]).stage("split")?;
            let refs: Vec<&Checkpoint> = ckpts.iter().collect();
            let report = compare_methods(&split.test, &refs).stage("evaluate")?;
            pipeline::write_report(&a.out, &report).stage("write")?;
            print!("{}", report.to_table());
            Ok(EXIT_OK)
        }
        Command::Gradcheck(a) => gradcheck(&a).stage("gradcheck"),
        Command::Plot(a) => {
            require_dir(&a.corpus, "corpus").stage("arguments")?;
            let fused = Checkpoint::load(&a.checkpoint).stage("load checkpoints")?;
            let baseline = a.baseline.as_deref().map(Checkpoint::load).transpose().stage("load checkpoints")?;
            let map_path = a.map.clone().or_else(|| Some(a.corpus.join(MAP_FILE_NAME)).filter(|p| p.exists()));
            let map = map_path.as_deref().map(MapOverlay::load).transpose().stage("load map")?;
            let groups = pipeline::load_groups(&a.corpus, None).stage("load")?;
            let split = pipeline::split_of_checkpoint(&groups, &fused).stage("split")?;
            let sample = split
                .test
                .get(a.sample)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("--sample {} out of range ({} test samples)", a.sample, split.test.len()))
                })
                .stage("arguments")?;
            let mut series = vec![BevForecast {
                label: fused.params.cue.name().to_string(),
                role: PlotRole::Fused,
                forecast: predict(sample, &fused.params).stage("predict")?,
            }];
            if let Some(b) = &baseline {
                if b.split_digest != fused.split_digest {
                    return Err(Error::Data("baseline checkpoint was trained on a different split".into())).stage("split");
                }
                series.push(BevForecast {
                    label: b.params.cue.name().to_string(),
                    role: PlotRole::Baseline,
                    forecast: predict(sample, &b.params).stage("predict")?,
                });
            }
            render_bev(sample, &series, map.as_ref(), &a.out).stage("render")?;
            println!("wrote {}", a.out.display());
            Ok(EXIT_OK)
        }
        Command::Experiment(a) => {
            let cfg = a.flags.resolve().stage("config")?;
            require_dir(&a.corpus, "corpus").stage("arguments")?;
            let groups = pipeline::load_groups(&a.corpus, a.sample_cache.as_deref()).stage("load")?;
            let outcome = pipeline::experiment(&groups, &cfg)?;
            pipeline::write_experiment(&a.out, &cfg, &outcome).stage("write")?;
            print!("{}", outcome.report.to_table());
            Ok(EXIT_OK)
        }
    }
}

/// One synthetic interacting sample from the vehicle-yields scene of `seed`.
pub fn gradcheck_sample(seed: u64) -> Result<crate::data::TrajectorySample> {
    let spec = ScenarioSpec::sample(ScenarioKind::VehicleYields, seed, 0.03);
    let (ped, veh) = generate_scenario(&spec)?;
    let samples: Vec<_> = crate::data::extract_groups(&ped, &veh)?
        .into_iter()
        .flat_map(|g| g.samples)
        .collect();
    let mid = samples.len() / 2;
    samples
        .into_iter()
        .nth(mid)
        .ok_or_else(|| Error::Data("gradcheck scene produced no samples".into()))
}

fn gradcheck(a: &GradcheckArgs) -> Result<i32> {
    if !(a.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("--tolerance must be positive, got {}", a.tolerance)));
    }
    let dims = ModelDims {
        encoder_hidden: a.hidden,
        decoder_hidden: a.hidden,
    };
    dims.validate().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let precision = match a.precision {
        PrecisionArg::Double => FdPrecision::Double,
        PrecisionArg::Extended => FdPrecision::Extended,
    };
    let cues: Vec<CueConfig> = match a.cue {
        Some(c) => vec![c.into()],
        None => CueConfig::EXPERIMENTS.to_vec(),
    };
    let sample = gradcheck_sample(a.seed)?;
    let mut worst: f64 = 0.0;
    for cue in cues {
        let params = init_parameters(dims, cue, a.seed)?;
        let r = model_gradient_check(&params, &sample, a.step, precision)?;
        println!(
            "{cue}: max relative error {:.3e} over {} parameters (worst index {})",
            r.max_relative_error,
            r.analytic.len(),
            r.worst_index
        );
        worst = worst.max(r.max_relative_error);
    }
    println!("max relative error {worst:.3e} (tolerance {:.1e})", a.tolerance);
    Ok(if worst < a.tolerance { EXIT_OK } else { EXIT_NUMERIC })
}
