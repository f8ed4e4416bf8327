use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::config::TrainConfig;
use super::loss::mse_loss;
use crate::data::{DatasetSplit, TrajectorySample};
use crate::error::{Error, Result};
use crate::model::{backward_into, forward, init_parameters, predict, ModelParameters};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Index into `epochs` of the first minimal validation loss.
    pub best_epoch: usize,
}

pub const HISTORY_HEADER: &str = "# epoch\ttrain_loss_m2\tval_loss_m2\twall_seconds";

impl TrainHistory {
    /// Tab-separated, one row per epoch. Losses are per-coordinate MSE (m²).
    pub fn to_tsv(&self) -> String {
        let mut s = format!("{HISTORY_HEADER}\n# best_epoch\t{}\n", self.best_epoch);
        for e in &self.epochs {
            let _ = writeln!(s, "{}\t{}\t{}\t{:.3}", e.epoch, e.train_loss, e.val_loss, e.wall_seconds);
        }
        s
    }

    /// Loss trajectory and best epoch, ignoring wall-clock times.
    pub fn same_trajectory(&self, other: &TrainHistory) -> bool {
        let bits = |h: &TrainHistory| {
            h.epochs
                .iter()
                .map(|e| (e.epoch, e.train_loss.to_bits(), e.val_loss.to_bits()))
                .collect::<Vec<_>>()
        };
        self.best_epoch == other.best_epoch && bits(self) == bits(other)
    }
}

/// Mean loss and mean gradient over `batch`, summed in slice order.
pub fn batch_gradient(batch: &[&TrajectorySample], params: &ModelParameters) -> Result<(f64, ModelParameters)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut grads = params.zeros_like();
    let mut loss = 0.0;
    for s in batch {
        let (f, cache) = forward(s, params)?;
        let (l, d) = mse_loss(&f, &s.ped_future);
        loss += l;
        backward_into(&d, &cache, params, &mut grads)?;
    }
    let inv = 1.0 / batch.len() as f64;
    grads.scale(inv);
    Ok((loss * inv, grads))
}

/// Mean per-sample MSE.
pub fn evaluate_loss(samples: &[TrajectorySample], params: &ModelParameters) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty set".into()));
    }
    let mut total = 0.0;
    for s in samples {
        total += mse_loss(&predict(s, params)?, &s.ped_future).0;
    }
    Ok(total / samples.len() as f64)
}

fn clip_global_norm(grads: &mut ModelParameters, max_norm: f64) {
    let norm = grads.l2_norm();
    if norm > max_norm {
        grads.scale(max_norm / norm);
    }
}

const SHUFFLE_STREAM: u64 = 1 << 32;

fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SHUFFLE_STREAM + epoch as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx
}

pub fn train(split: &DatasetSplit, cfg: &TrainConfig) -> Result<(ModelParameters, TrainHistory)> {
    train_on(&split.train, &split.validation, cfg, |_| {})
}

/// Trains from `init_parameters(cfg.seed)` and returns the parameters of the
/// best validation epoch. Stops once `patience + 1` consecutive epochs fail
/// to improve on the best validation loss.
pub fn train_on(
    train: &[TrajectorySample],
    validation: &[TrajectorySample],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParameters, TrainHistory)> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Data(format!(
            "training needs non-empty train and validation sets (got {} / {})",
            train.len(),
            validation.len()
        )));
    }
    let adam = AdamConfig {
        learning_rate: cfg.learning_rate,
        beta1: cfg.beta1,
        beta2: cfg.beta2,
        epsilon: cfg.epsilon,
    };
    let mut params = init_parameters(cfg.dims, cfg.cue, cfg.seed)?;
    let mut state = AdamState::new(params.param_count());
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, ModelParameters)> = None;
    let mut stale = 0;
    let start = Instant::now();

    for epoch in 0..cfg.max_epochs {
        let order = epoch_order(train.len(), cfg.seed, epoch);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&TrajectorySample> = chunk.iter().map(|&i| &train[i]).collect();
            let diverged = |msg: String| Error::Divergence {
                epoch,
                batch: b,
                message: msg,
            };
            let (loss, mut grads) = batch_gradient(&batch, &params).map_err(|e| diverged(e.to_string()))?;
            if !loss.is_finite() {
                return Err(diverged(format!("loss {loss}")));
            }
            if let Some(c) = cfg.clip_norm {
                clip_global_norm(&mut grads, c);
            }
            adam_step(&mut params, &grads, &mut state, &adam).map_err(|e| diverged(e.to_string()))?;
            loss_sum += loss * chunk.len() as f64;
        }
        let val_loss = evaluate_loss(validation, &params).map_err(|e| Error::Divergence {
            epoch,
            batch: 0,
            message: format!("validation: {e}"),
        })?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        history.epochs.push(record);

        if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
            best = Some((val_loss, params.clone()));
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.patience {
                break;
            }
        }
    }
    let (_, best_params) = best.expect("at least one epoch ran");
    Ok((best_params, history))
}
