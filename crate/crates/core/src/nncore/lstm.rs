use super::matrix::{axpy, dot, Matrix};
use super::{ensure_finite, sigmoid};
use crate::error::{Error, Result};

/// Gate blocks in packed order. Row block `g` of [`LstmParams::weights`]
/// (rows `g*H .. (g+1)*H`) and the matching bias block belong to gate `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Candidate = 2,
    Output = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Candidate, Gate::Output];
}

/// Single-layer LSTM cell without peepholes.
///
/// All four gate matrices are packed into one `4H × (D + H)` matrix whose
/// columns act on the concatenated input `[x; h_prev]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    input_dim: usize,
    hidden_dim: usize,
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            input_dim,
            hidden_dim,
            weights: Matrix::zeros(4 * hidden_dim, input_dim + hidden_dim),
            bias: vec![0.0; 4 * hidden_dim],
        }
    }

    pub fn from_parts(input_dim: usize, hidden_dim: usize, weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weights.shape() != (4 * hidden_dim, input_dim + hidden_dim) {
            return Err(Error::dim(
                "LstmParams weights",
                format!("{}x{}", 4 * hidden_dim, input_dim + hidden_dim),
                format!("{}x{}", weights.rows(), weights.cols()),
            ));
        }
        if bias.len() != 4 * hidden_dim {
            return Err(Error::dim("LstmParams bias", 4 * hidden_dim, bias.len()));
        }
        Ok(LstmParams {
            input_dim,
            hidden_dim,
            weights,
            bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// `4·H·(D + H + 1)`
    pub fn param_count(&self) -> usize {
        Self::count_for(self.input_dim, self.hidden_dim)
    }

    pub fn count_for(input_dim: usize, hidden_dim: usize) -> usize {
        4 * hidden_dim * (input_dim + hidden_dim + 1)
    }

    /// Row-major `H × (D + H)` block of one gate.
    pub fn gate_weights(&self, gate: Gate) -> &[f64] {
        let span = self.hidden_dim * (self.input_dim + self.hidden_dim);
        let start = gate as usize * span;
        &self.weights.data()[start..start + span]
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_dim;
        &self.bias[gate as usize * h..(gate as usize + 1) * h]
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::zeros(self.input_dim, self.hidden_dim)
    }

    pub fn slices(&self) -> [&[f64]; 2] {
        [self.weights.data(), &self.bias]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 2] {
        [self.weights.data_mut(), &mut self.bias]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            hidden: vec![0.0; hidden_dim],
            cell: vec![0.0; hidden_dim],
        }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    /// `[x; h_prev]`
    pub concat: Vec<f64>,
    pub prev_cell: Vec<f64>,
    /// Activated gates in packed order (sigmoid, sigmoid, tanh, sigmoid).
    pub gates: Vec<f64>,
    pub cell: Vec<f64>,
    pub tanh_cell: Vec<f64>,
}

impl StepCache {
    pub fn input(&self, input_dim: usize) -> &[f64] {
        &self.concat[..input_dim]
    }

    pub fn prev_hidden(&self, input_dim: usize) -> &[f64] {
        &self.concat[input_dim..]
    }
}

pub fn lstm_step_forward(x: &[f64], prev: &LstmState, p: &LstmParams) -> Result<(LstmState, StepCache)> {
    let (d, h) = (p.input_dim, p.hidden_dim);
    if x.len() != d {
        return Err(Error::dim("lstm_step_forward input", d, x.len()));
    }
    if prev.hidden.len() != h || prev.cell.len() != h {
        return Err(Error::dim(
            "lstm_step_forward state",
            h,
            format!("hidden {}, cell {}", prev.hidden.len(), prev.cell.len()),
        ));
    }
    ensure_finite(x, "lstm_step_forward input")?;
    ensure_finite(&prev.hidden, "lstm_step_forward hidden state")?;
    ensure_finite(&prev.cell, "lstm_step_forward cell state")?;

    let mut concat = Vec::with_capacity(d + h);
    concat.extend_from_slice(x);
    concat.extend_from_slice(&prev.hidden);

    let mut gates: Vec<f64> = (0..4 * h)
        .map(|r| dot(p.weights.row(r), &concat) + p.bias[r])
        .collect();
    for (k, z) in gates.iter_mut().enumerate() {
        *z = if k / h == Gate::Candidate as usize {
            z.tanh()
        } else {
            sigmoid(*z)
        };
    }

    let mut cell = vec![0.0; h];
    let mut tanh_cell = vec![0.0; h];
    let mut hidden = vec![0.0; h];
    for j in 0..h {
        let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
        cell[j] = f * prev.cell[j] + i * g;
        tanh_cell[j] = cell[j].tanh();
        hidden[j] = o * tanh_cell[j];
    }

    let cache = StepCache {
        concat,
        prev_cell: prev.cell.clone(),
        gates,
        cell: cell.clone(),
        tanh_cell,
    };
    Ok((LstmState { hidden, cell }, cache))
}

fn check_cache(cache: &StepCache, p: &LstmParams) -> Result<()> {
    let (d, h) = (p.input_dim, p.hidden_dim);
    let ok = cache.concat.len() == d + h
        && cache.prev_cell.len() == h
        && cache.gates.len() == 4 * h
        && cache.cell.len() == h
        && cache.tanh_cell.len() == h;
    if ok {
        Ok(())
    } else {
        Err(Error::dim(
            "lstm step cache",
            format!("cache for D={d}, H={h}"),
            format!("concat {}, gates {}", cache.concat.len(), cache.gates.len()),
        ))
    }
}

/// Backpropagates one step, accumulating parameter gradients into `grads`.
///
/// `d_hidden`/`d_cell` are the loss gradients w.r.t. the step's output state.
/// Returns `(d_x, d_prev)`.
pub fn lstm_step_backward_into(
    d_hidden: &[f64],
    d_cell: &[f64],
    cache: &StepCache,
    p: &LstmParams,
    grads: &mut LstmParams,
) -> Result<(Vec<f64>, LstmState)> {
    check_cache(cache, p)?;
    let (d, h) = (p.input_dim, p.hidden_dim);
    if d_hidden.len() != h || d_cell.len() != h {
        return Err(Error::dim(
            "lstm_step_backward state gradient",
            h,
            format!("hidden {}, cell {}", d_hidden.len(), d_cell.len()),
        ));
    }
    if grads.input_dim != d || grads.hidden_dim != h {
        return Err(Error::dim(
            "lstm_step_backward gradient buffer",
            format!("D={d}, H={h}"),
            format!("D={}, H={}", grads.input_dim, grads.hidden_dim),
        ));
    }

    let g = &cache.gates;
    let mut dz = vec![0.0; 4 * h];
    let mut d_prev_cell = vec![0.0; h];
    for j in 0..h {
        let (ig, fg, cg, og) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
        let tc = cache.tanh_cell[j];
        let dc = d_cell[j] + d_hidden[j] * og * (1.0 - tc * tc);
        let d_o = d_hidden[j] * tc;
        dz[j] = dc * cg * ig * (1.0 - ig);
        dz[h + j] = dc * cache.prev_cell[j] * fg * (1.0 - fg);
        dz[2 * h + j] = dc * ig * (1.0 - cg * cg);
        dz[3 * h + j] = d_o * og * (1.0 - og);
        d_prev_cell[j] = dc * fg;
    }

    grads.weights.add_outer(&dz, &cache.concat);
    axpy(1.0, &dz, &mut grads.bias);
    let mut d_concat = p.weights.matvec_transposed(&dz)?;
    let d_prev_hidden = d_concat.split_off(d);
    Ok((
        d_concat,
        LstmState {
            hidden: d_prev_hidden,
            cell: d_prev_cell,
        },
    ))
}

/// Returns `(d_x, d_prev, d_params)` for one step.
pub fn lstm_step_backward(
    d_hidden: &[f64],
    d_cell: &[f64],
    cache: &StepCache,
    p: &LstmParams,
) -> Result<(Vec<f64>, LstmState, LstmParams)> {
    let mut grads = p.zeros_like();
    let (dx, d_prev) = lstm_step_backward_into(d_hidden, d_cell, cache, p, &mut grads)?;
    Ok((dx, d_prev, grads))
}
