//! Scalar, allocation-heavy reference LSTM generic over [`Real`]. Shares no
//! code with the packed production kernels; used as a finite-difference
//! oracle.

use super::real::Real;

/// View of one LSTM's flat parameters: packed `4H × (D+H)` weights then `4H` bias.
pub struct RefLstm<'a, R> {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub values: &'a [R],
}

impl<R: Real> RefLstm<'_, R> {
    pub fn len_for(input_dim: usize, hidden_dim: usize) -> usize {
        4 * hidden_dim * (input_dim + hidden_dim + 1)
    }

    fn weight(&self, row: usize, col: usize) -> R {
        self.values[row * (self.input_dim + self.hidden_dim) + col]
    }

    fn bias(&self, row: usize) -> R {
        self.values[4 * self.hidden_dim * (self.input_dim + self.hidden_dim) + row]
    }

    /// One step; returns `(hidden, cell)`.
    pub fn step(&self, x: &[R], h: &[R], c: &[R]) -> (Vec<R>, Vec<R>) {
        let hd = self.hidden_dim;
        let pre = |gate: usize, j: usize| -> R {
            let row = gate * hd + j;
            let mut z = self.bias(row);
            for (k, &xk) in x.iter().enumerate() {
                z = z + self.weight(row, k) * xk;
            }
            for (k, &hk) in h.iter().enumerate() {
                z = z + self.weight(row, self.input_dim + k) * hk;
            }
            z
        };
        let mut h_next = Vec::with_capacity(hd);
        let mut c_next = Vec::with_capacity(hd);
        for j in 0..hd {
            let i = pre(0, j).sigmoid();
            let f = pre(1, j).sigmoid();
            let g = pre(2, j).tanh();
            let o = pre(3, j).sigmoid();
            let cj = f * c[j] + i * g;
            c_next.push(cj);
            h_next.push(o * cj.tanh());
        }
        (h_next, c_next)
    }

    /// Runs from a zero state; returns the hidden state after every step.
    pub fn run(&self, xs: &[Vec<R>]) -> Vec<(Vec<R>, Vec<R>)> {
        let mut h = vec![R::zero(); self.hidden_dim];
        let mut c = vec![R::zero(); self.hidden_dim];
        xs.iter()
            .map(|x| {
                let (hn, cn) = self.step(x, &h, &c);
                h = hn.clone();
                c = cn.clone();
                (hn, cn)
            })
            .collect()
    }
}

/// Central differences computed in `R` arithmetic; `loss` maps parameters in
/// `R` to a scalar in `R`.
pub fn central_difference_in<R: Real>(mut loss: impl FnMut(&[R]) -> R, params: &[f64], h: f64) -> Vec<f64> {
    let mut probe: Vec<R> = params.iter().map(|&v| R::from_f64(v)).collect();
    let step = R::from_f64(h);
    (0..params.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = loss(&probe);
            probe[i] = orig - step;
            let down = loss(&probe);
            probe[i] = orig;
            ((up - down) / (step + step)).to_f64()
        })
        .collect()
}
