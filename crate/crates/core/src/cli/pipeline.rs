//! Stage functions shared by the subcommands; usable without the argument
//! parser.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::binio::write_atomic;
use crate::data::{
    corpus_groups, load_corpus, read_sample_cache, split_dataset, write_sample_cache, DatasetSplit, SampleGroup,
    FUTURE_LEN,
};
use crate::error::{Error, Result};
use crate::eval::{compare_methods, MetricsReport};
use crate::model::{Checkpoint, CueConfig};
use crate::train::{train, TrainConfig, TrainHistory};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.tsv";
pub const CONFIG_FILE: &str = "config.txt";
pub const SPLIT_FILE: &str = "split.txt";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_TSV_FILE: &str = "report.tsv";

/// Error tagged with the pipeline stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: String,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

pub type StageResult<T> = std::result::Result<T, StageError>;

pub trait WithStage<T> {
    fn stage(self, stage: impl Into<String>) -> StageResult<T>;
}

impl<T> WithStage<T> for Result<T> {
    fn stage(self, stage: impl Into<String>) -> StageResult<T> {
        self.map_err(|error| StageError {
            stage: stage.into(),
            error,
        })
    }
}

/// Sample groups of a corpus directory. With `cache`, an existing cache file
/// is used as is; otherwise the groups are extracted and the cache written.
pub fn load_groups(corpus: &Path, cache: Option<&Path>) -> Result<Vec<SampleGroup>> {
    if let Some(c) = cache {
        if c.exists() {
            return read_sample_cache(c);
        }
    }
    let groups = corpus_groups(&load_corpus(corpus)?)?;
    if let Some(c) = cache {
        write_sample_cache(c, &groups)?;
    }
    Ok(groups)
}

pub fn split_for(groups: &[SampleGroup], cfg: &TrainConfig) -> Result<DatasetSplit> {
    split_dataset(groups, cfg.split, cfg.split_seed)
}

/// Trains one model and stamps the split digest and resolved config into
/// its checkpoint.
pub fn train_checkpoint(split: &DatasetSplit, cfg: &TrainConfig) -> Result<(Checkpoint, TrainHistory)> {
    let (params, history) = train(split, cfg)?;
    let mut ckpt = Checkpoint::new(params);
    ckpt.split_digest = split.manifest_digest();
    ckpt.metadata = cfg.to_text();
    Ok((ckpt, history))
}

/// Training config recorded in a checkpoint's metadata.
pub fn checkpoint_config(ckpt: &Checkpoint) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    cfg.apply_text(&ckpt.metadata, "checkpoint metadata")?;
    Ok(cfg)
}

/// Rebuilds the split a checkpoint was trained on and checks its digest.
pub fn split_of_checkpoint(groups: &[SampleGroup], ckpt: &Checkpoint) -> Result<DatasetSplit> {
    let cfg = checkpoint_config(ckpt)?;
    let split = split_for(groups, &cfg)?;
    if split.manifest_digest() != ckpt.split_digest {
        return Err(Error::Data(format!(
            "checkpoint {} was trained on a different corpus or split (digest {} vs {})",
            ckpt.identifier(),
            hex::encode(ckpt.split_digest),
            hex::encode(split.manifest_digest())
        )));
    }
    Ok(split)
}

pub fn write_train_outputs(out: &Path, ckpt: &Checkpoint, history: &TrainHistory, split: &DatasetSplit) -> Result<()> {
    ckpt.save(&out.join(CHECKPOINT_FILE))?;
    write_atomic(&out.join(HISTORY_FILE), history.to_tsv().as_bytes())?;
    write_atomic(&out.join(SPLIT_FILE), split.manifest_text().as_bytes())?;
    write_atomic(&out.join(CONFIG_FILE), ckpt.metadata.as_bytes())
}

/// Plain-text report: the method table followed by the per-horizon
/// displacement profile of every method.
pub fn report_text(report: &MetricsReport) -> String {
    let mut out = report.to_table();
    out.push_str("\nMean displacement by horizon (m)\n");
    let _ = write!(out, "{:<10}", "Method");
    for k in 1..=FUTURE_LEN {
        let _ = write!(out, "  {:>6}", format!("t+{k}"));
    }
    out.push('\n');
    for m in &report.methods {
        let _ = write!(out, "{:<10}", m.cue.name());
        for d in m.per_horizon {
            let _ = write!(out, "  {d:>6.3}");
        }
        out.push('\n');
    }
    let n = report.methods.first().map_or(0, |m| m.samples);
    let _ = writeln!(out, "\ntest samples: {n}");
    out
}

pub fn write_report(out: &Path, report: &MetricsReport) -> Result<()> {
    write_atomic(&out.join(REPORT_TEXT_FILE), report_text(report).as_bytes())?;
    write_atomic(&out.join(REPORT_TSV_FILE), report.to_tsv().as_bytes())
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: MetricsReport,
    pub checkpoints: Vec<Checkpoint>,
    pub histories: Vec<TrainHistory>,
    pub split: DatasetSplit,
}

/// Trains baseline, method1 and method2 with the same seed and split, then
/// evaluates all three on the shared test split. `base` supplies every
/// setting except the cue.
pub fn experiment(groups: &[SampleGroup], base: &TrainConfig) -> StageResult<ExperimentOutcome> {
    base.validate().stage("config")?;
    let split = split_for(groups, base).stage("split")?;
    if split.test.is_empty() {
        return Err(Error::Data("test split is empty; use a larger corpus or test_ratio".into())).stage("split");
    }
    let mut checkpoints = Vec::with_capacity(3);
    let mut histories = Vec::with_capacity(3);
    for cue in CueConfig::EXPERIMENTS {
        let cfg = TrainConfig { cue, ..base.clone() };
        let (ckpt, hist) = train_checkpoint(&split, &cfg).stage(format!("train {cue}"))?;
        checkpoints.push(ckpt);
        histories.push(hist);
    }
    let refs: Vec<&Checkpoint> = checkpoints.iter().collect();
    let report = compare_methods(&split.test, &refs).stage("evaluate")?;
    Ok(ExperimentOutcome {
        report,
        checkpoints,
        histories,
        split,
    })
}

/// Writes `report.txt`, `report.tsv`, `config.txt`, `split.txt` and one
/// directory per method holding its checkpoint and history.
pub fn write_experiment(out: &Path, base: &TrainConfig, outcome: &ExperimentOutcome) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (ckpt, hist) in outcome.checkpoints.iter().zip(&outcome.histories) {
        let dir = out.join(ckpt.params.cue.name());
        write_train_outputs(&dir, ckpt, hist, &outcome.split)?;
        written.push(dir);
    }
    write_atomic(&out.join(SPLIT_FILE), outcome.split.manifest_text().as_bytes())?;
    write_atomic(&out.join(CONFIG_FILE), base.to_text().as_bytes())?;
    write_report(out, &outcome.report)?;
    written.push(out.join(REPORT_TEXT_FILE));
    Ok(written)
}
