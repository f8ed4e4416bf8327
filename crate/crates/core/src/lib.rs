//! Pedestrian trajectory forecasting from a moving vehicle.
//!
//! An LSTM encoder-decoder consumes one second of pedestrian positions,
//! ego-vehicle positions and pedestrian head orientation (5 steps at 5 Hz)
//! and predicts two seconds of future pedestrian positions (10 steps), all in
//! a frame centered on the pedestrian's current position. Everything from
//! the numeric kernels to the Adam optimizer is implemented here in `f64`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

mod binio;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod nncore;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
