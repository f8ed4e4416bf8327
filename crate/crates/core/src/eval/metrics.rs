use crate::data::{Point, TrajectorySample, FUTURE_LEN};
use crate::error::{Error, Result};
use crate::model::{predict, ModelParameters};

type Horizon = [Point; FUTURE_LEN];

fn check_shapes(preds: &[Horizon], targets: &[Horizon]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    if preds.len() != targets.len() {
        return Err(Error::dim("prediction/target count", targets.len(), preds.len()));
    }
    Ok(())
}

fn sq_dist(a: Point, b: Point) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// √(mean over all N×10 points of the squared Euclidean displacement), m.
pub fn rmse(preds: &[Horizon], targets: &[Horizon]) -> Result<f64> {
    check_shapes(preds, targets)?;
    let sum: f64 = preds
        .iter()
        .zip(targets)
        .flat_map(|(p, t)| p.iter().zip(t).map(|(&a, &b)| sq_dist(a, b)))
        .sum();
    Ok((sum / (preds.len() * FUTURE_LEN) as f64).sqrt())
}

/// Mean Euclidean displacement at each horizon step, m.
pub fn per_horizon_displacement(preds: &[Horizon], targets: &[Horizon]) -> Result<[f64; FUTURE_LEN]> {
    check_shapes(preds, targets)?;
    let mut out = [0.0; FUTURE_LEN];
    for (p, t) in preds.iter().zip(targets) {
        for k in 0..FUTURE_LEN {
            out[k] += sq_dist(p[k], t[k]).sqrt();
        }
    }
    for v in &mut out {
        *v /= preds.len() as f64;
    }
    Ok(out)
}

pub fn forecast_all(params: &ModelParameters, samples: &[TrajectorySample]) -> Result<Vec<Horizon>> {
    samples.iter().map(|s| predict(s, params).map(|f| f.positions)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rmse: f64,
    pub per_horizon: [f64; FUTURE_LEN],
    pub samples: usize,
}

pub fn evaluate_params(params: &ModelParameters, samples: &[TrajectorySample]) -> Result<Evaluation> {
    let preds = forecast_all(params, samples)?;
    let targets: Vec<Horizon> = samples.iter().map(|s| s.ped_future).collect();
    Ok(Evaluation {
        rmse: rmse(&preds, &targets)?,
        per_horizon: per_horizon_displacement(&preds, &targets)?,
        samples: samples.len(),
    })
}
