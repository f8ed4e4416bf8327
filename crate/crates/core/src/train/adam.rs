use crate::error::{Error, Result};
use crate::model::ModelParameters;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators over a flattened parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// One bias-corrected Adam update over parameter blocks laid end to end.
    /// Nothing is modified when any gradient is non-finite.
    pub fn update(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>, cfg: &AdamConfig) -> Result<()> {
        let n_params: usize = params.iter().map(|s| s.len()).sum();
        let n_grads: usize = grads.iter().map(|s| s.len()).sum();
        if params.len() != grads.len() || n_params != n_grads || n_params != self.m.len() {
            return Err(Error::dim(
                "adam_step",
                format!("{} values", self.m.len()),
                format!("params {n_params}, grads {n_grads}"),
            ));
        }
        if let Some(i) = grads.iter().flat_map(|g| g.iter()).position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient coordinate {i}")));
        }

        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        let mut off = 0;
        for (p, g) in params.into_iter().zip(grads) {
            let m = &mut self.m[off..off + p.len()];
            let v = &mut self.v[off..off + p.len()];
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
            off += p.len();
        }
        Ok(())
    }
}

pub fn adam_step(params: &mut ModelParameters, grads: &ModelParameters, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if !params.same_layout(grads) {
        return Err(Error::dim("adam_step layout", params.param_count(), grads.param_count()));
    }
    let g = grads.slices();
    state.update(params.slices_mut(), g, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(p: &mut [f64], g: &[f64], s: &mut AdamState, cfg: &AdamConfig) {
        s.update(vec![p], vec![g], cfg).unwrap();
    }

    #[test]
    fn zero_gradient_from_fresh_state_is_fixed_point() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(3);
        let mut p = [1.0, -2.0, 0.5];
        step(&mut p, &[0.0; 3], &mut s, &cfg);
        assert_eq!(p, [1.0, -2.0, 0.5]);
        assert_eq!(s.step, 1);
        assert!(s.m.iter().chain(&s.v).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_gradient_decays_moments() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(1);
        let mut p = [0.0];
        step(&mut p, &[2.0], &mut s, &cfg);
        let (m, v) = (s.m[0], s.v[0]);
        step(&mut p, &[0.0], &mut s, &cfg);
        assert!((s.m[0] - 0.9 * m).abs() < 1e-15);
        assert!((s.v[0] - 0.999 * v).abs() < 1e-15);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(1);
        let mut p = [0.5];
        step(&mut p, &[1.0], &mut s, &cfg);
        // m̂ = v̂ = 1 ⇒ Δ = lr · 1/(1 + ε)
        let expected = 0.5 - 1e-3 / (1.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15, "{}", p[0]);
        assert!((0.5 - p[0] - 0.001).abs() < 1e-10);
    }

    #[test]
    fn step_size_is_gradient_scale_invariant() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(2);
        let mut p = [0.0, 0.0];
        let g = 0.01;
        for _ in 0..50 {
            step(&mut p, &[g, 100.0 * g], &mut s, &cfg);
        }
        let before = p;
        step(&mut p, &[g, 100.0 * g], &mut s, &cfg);
        let (a, b) = ((p[0] - before[0]).abs(), (p[1] - before[1]).abs());
        assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
    }

    #[test]
    fn non_finite_gradient_aborts_without_change() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(2);
        let mut p = [1.0, 1.0];
        assert!(s.update(vec![&mut p], vec![&[0.1, f64::NAN]], &cfg).is_err());
        assert_eq!(p, [1.0, 1.0]);
        assert_eq!(s.step, 0);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(2);
        let mut p = [1.0, 1.0, 1.0];
        assert!(s.update(vec![&mut p], vec![&[0.0; 3]], &AdamConfig::default()).is_err());
    }

    #[test]
    fn second_moments_nonnegative() {
        let cfg = AdamConfig::default();
        let mut s = AdamState::new(4);
        let mut p = [0.0; 4];
        for k in 0..20 {
            let g = [(k as f64).sin(), -(k as f64), 0.0, 1e-3];
            step(&mut p, &g, &mut s, &cfg);
        }
        assert!(s.v.iter().all(|&v| v >= 0.0));
    }
}
