use crate::data::{Point, FUTURE_LEN};
use crate::model::Forecast;

const COMPONENTS: f64 = (FUTURE_LEN * 2) as f64;

/// Mean over the 20 scalar components of the squared error, and its gradient
/// `2(pred − target)/20`.
pub fn mse_loss(pred: &Forecast, target: &[Point; FUTURE_LEN]) -> (f64, [Point; FUTURE_LEN]) {
    let mut grad = [[0.0; 2]; FUTURE_LEN];
    let mut sum = 0.0;
    for ((g, p), t) in grad.iter_mut().zip(&pred.positions).zip(target) {
        for k in 0..2 {
            let r = p[k] - t[k];
            sum += r * r;
            g[k] = 2.0 * r / COMPONENTS;
        }
    }
    (sum / COMPONENTS, grad)
}
