//! Mini-batch Adam on mean-squared error, with seeded shuffling,
//! early stopping on validation loss and optional global-norm clipping.

mod adam;
mod config;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use config::{TrainConfig, CONFIG_KEYS};
pub use loss::mse_loss;
pub use trainer::{batch_gradient, evaluate_loss, train, train_on, EpochRecord, TrainHistory, HISTORY_HEADER};
