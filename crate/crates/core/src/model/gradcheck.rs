//! Whole-model gradient check against an independent scalar reference
//! forward pass.

use super::params::{ModelParameters, STREAM_INPUT_DIM};
use super::network::{backward, forward, VEHICLE_POSITION_SCALE};
use crate::data::{TrajectorySample, FUTURE_LEN};
use crate::error::{Error, Result};
use crate::nncore::reference::{central_difference_in, RefLstm};
use crate::nncore::real::{DoubleDouble, Real};
use crate::nncore::relative_error;

/// Arithmetic used to evaluate the loss for finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdPrecision {
    /// Plain `f64`. Absolute noise is about `ε·|L|/h`, so components far
    /// below `1e-7` cannot be resolved to a relative `1e-4`.
    Double,
    /// Double-double; roundoff is negligible next to the `O(h²)` truncation.
    Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

/// Mean squared error over all forecast components, evaluated by the scalar
/// reference implementation on the checkpoint-order flat parameter vector.
pub fn reference_loss<R: Real>(flat: &[R], params: &ModelParameters, sample: &TrajectorySample) -> R {
    let he = params.dims.encoder_hidden;
    let hd = params.dims.decoder_hidden;
    let enc_len = RefLstm::<R>::len_for(STREAM_INPUT_DIM, he);
    let mut offset = 0;
    let mut take = |n: usize| {
        let s = &flat[offset..offset + n];
        offset += n;
        s
    };
    let lift = |pts: &[[f64; 2]], scale: f64| -> Vec<Vec<R>> {
        pts.iter().map(|p| vec![R::from_f64(p[0] / scale), R::from_f64(p[1] / scale)]).collect()
    };

    let mut streams = vec![lift(&sample.ped_past, 1.0)];
    if params.cue.use_vehicle {
        streams.push(lift(&sample.veh_past, VEHICLE_POSITION_SCALE));
    }
    if params.cue.use_head {
        streams.push(
            sample
                .head_past
                .iter()
                .map(|th| vec![R::from_f64(th.cos()), R::from_f64(th.sin())])
                .collect(),
        );
    }
    let mut context = Vec::new();
    for xs in &streams {
        let enc = RefLstm {
            input_dim: STREAM_INPUT_DIM,
            hidden_dim: he,
            values: take(enc_len),
        };
        let states = enc.run(xs);
        context.extend(states.last().expect("five steps").0.iter().copied());
    }

    let dec = RefLstm {
        input_dim: context.len(),
        hidden_dim: hd,
        values: take(RefLstm::<R>::len_for(context.len(), hd)),
    };
    let proj_w = take(2 * hd);
    let proj_b = take(2);
    let decoded = dec.run(&vec![context; FUTURE_LEN]);

    let mut total = R::zero();
    for ((h, _), target) in decoded.iter().zip(&sample.ped_future) {
        for j in 0..2 {
            let mut y = proj_b[j];
            for (k, &hk) in h.iter().enumerate() {
                y = y + proj_w[j * hd + k] * hk;
            }
            let r = y - R::from_f64(target[j]);
            total = total + r * r;
        }
    }
    total / R::from_f64((2 * FUTURE_LEN) as f64)
}

/// Compares the analytic MSE gradient of `params` on `sample` with central
/// differences of step `h`.
pub fn model_gradient_check(
    params: &ModelParameters,
    sample: &TrajectorySample,
    h: f64,
    precision: FdPrecision,
) -> Result<GradientReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let (forecast, cache) = forward(sample, params)?;
    let n = (2 * FUTURE_LEN) as f64;
    let mut d = [[0.0; 2]; FUTURE_LEN];
    for (k, row) in d.iter_mut().enumerate() {
        for j in 0..2 {
            row[j] = 2.0 * (forecast.positions[k][j] - sample.ped_future[k][j]) / n;
        }
    }
    let analytic = backward(&d, &cache, params)?.to_flat();
    let flat = params.to_flat();
    let numeric = match precision {
        FdPrecision::Double => central_difference_in::<f64>(|v| reference_loss(v, params, sample), &flat, h),
        FdPrecision::Extended => {
            central_difference_in::<DoubleDouble>(|v| reference_loss(v, params, sample), &flat, h)
        }
    };
    if let Some(i) = numeric.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("finite difference at coordinate {i}")));
    }
    let (worst_index, max_relative_error) = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &b)| relative_error(a, b))
        .enumerate()
        .fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    Ok(GradientReport {
        max_relative_error,
        worst_index,
        analytic,
        numeric,
    })
}
