//! Dense kernels, the LSTM cell, the linear layer and a finite-difference
//! gradient checker. All arithmetic is `f64`; every function is pure.

mod gradcheck;
mod linear;
mod lstm;
mod matrix;
pub mod real;
pub mod reference;

pub use gradcheck::{central_difference, gradient_check, relative_error};
pub use linear::{linear_backward, linear_forward, LinearGrads};
pub use lstm::{
    lstm_step_backward, lstm_step_backward_into, lstm_step_forward, Gate, LstmParams, LstmState,
    StepCache,
};
pub use matrix::{matmul, Matrix};

use crate::error::{Error, Result};

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn ensure_finite(values: &[f64], context: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}
