use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nncore::{LstmParams, Matrix};

/// Input width of each encoder: (x, y) positions and (cos θ, sin θ) heads.
pub const STREAM_INPUT_DIM: usize = 2;
pub const OUTPUT_DIM: usize = 2;

/// Which optional input streams the model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CueConfig {
    pub use_vehicle: bool,
    pub use_head: bool,
}

impl CueConfig {
    pub const BASELINE: CueConfig = CueConfig {
        use_vehicle: false,
        use_head: false,
    };
    pub const METHOD1: CueConfig = CueConfig {
        use_vehicle: true,
        use_head: false,
    };
    pub const METHOD2: CueConfig = CueConfig {
        use_vehicle: true,
        use_head: true,
    };
    pub const EXPERIMENTS: [CueConfig; 3] = [Self::BASELINE, Self::METHOD1, Self::METHOD2];

    pub fn name(self) -> &'static str {
        match (self.use_vehicle, self.use_head) {
            (false, false) => "baseline",
            (true, false) => "method1",
            (true, true) => "method2",
            (false, true) => "head_only",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "baseline" => Some(Self::BASELINE),
            "method1" => Some(Self::METHOD1),
            "method2" => Some(Self::METHOD2),
            "head_only" => Some(CueConfig {
                use_vehicle: false,
                use_head: true,
            }),
            _ => None,
        }
    }

    pub fn input_description(self) -> &'static str {
        match (self.use_vehicle, self.use_head) {
            (false, false) => "ped. pos. only",
            (true, false) => "ped. and veh. pos",
            (true, true) => "ped. and veh. pos, and head orientation",
            (false, true) => "ped. pos and head orientation",
        }
    }

    pub fn active_encoders(self) -> usize {
        1 + usize::from(self.use_vehicle) + usize::from(self.use_head)
    }
}

impl fmt::Display for CueConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    /// Hidden width of each encoder.
    pub encoder_hidden: usize,
    pub decoder_hidden: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            encoder_hidden: 64,
            decoder_hidden: 128,
        }
    }
}

impl ModelDims {
    pub fn validate(self) -> Result<()> {
        if self.encoder_hidden == 0 || self.decoder_hidden == 0 {
            return Err(Error::InvalidArgument(format!(
                "model dims must be positive, got encoder {} decoder {}",
                self.encoder_hidden, self.decoder_hidden
            )));
        }
        Ok(())
    }

    pub fn context_dim(self, cue: CueConfig) -> usize {
        cue.active_encoders() * self.encoder_hidden
    }

    /// Closed-form parameter count.
    pub fn param_count(self, cue: CueConfig) -> usize {
        let he = self.encoder_hidden;
        let hd = self.decoder_hidden;
        cue.active_encoders() * LstmParams::count_for(STREAM_INPUT_DIM, he)
            + LstmParams::count_for(self.context_dim(cue), hd)
            + OUTPUT_DIM * hd
            + OUTPUT_DIM
    }
}

/// All trainable weights of the fusion model. Also used as the gradient
/// container, since gradients share its shape exactly.
///
/// Inactive encoders are absent rather than zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub dims: ModelDims,
    pub cue: CueConfig,
    pub init_seed: u64,
    pub ped_encoder: LstmParams,
    pub veh_encoder: Option<LstmParams>,
    pub head_encoder: Option<LstmParams>,
    pub decoder: LstmParams,
    pub proj_w: Matrix,
    pub proj_b: Vec<f64>,
}

/// RNG stream per parameter block, so blocks shared by two cue configs are
/// drawn identically regardless of which other blocks exist.
#[derive(Clone, Copy)]
enum Block {
    Pedestrian = 0,
    Vehicle = 1,
    Head = 2,
    Decoder = 3,
    Projection = 4,
}

/// Uniform on `[-bound, bound)` from one ChaCha8 output: `u = (next_u64 >> 11)·2⁻⁵³`.
fn fill_uniform(values: &mut [f64], bound: f64, seed: u64, block: Block) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    for v in values {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        *v = bound * (2.0 * u - 1.0);
    }
}

fn init_lstm(input_dim: usize, hidden_dim: usize, seed: u64, block: Block) -> LstmParams {
    let mut p = LstmParams::zeros(input_dim, hidden_dim);
    let fan_in = (input_dim + hidden_dim) as f64;
    fill_uniform(p.weights.data_mut(), 1.0 / fan_in.sqrt(), seed, block);
    p
}

/// Weights ~ U(−1/√fan_in, 1/√fan_in), biases zero. Pure in `(dims, cue, seed)`.
pub fn init_parameters(dims: ModelDims, cue: CueConfig, seed: u64) -> Result<ModelParameters> {
    dims.validate()?;
    let he = dims.encoder_hidden;
    let hd = dims.decoder_hidden;
    let mut proj_w = Matrix::zeros(OUTPUT_DIM, hd);
    fill_uniform(proj_w.data_mut(), 1.0 / (hd as f64).sqrt(), seed, Block::Projection);
    Ok(ModelParameters {
        dims,
        cue,
        init_seed: seed,
        ped_encoder: init_lstm(STREAM_INPUT_DIM, he, seed, Block::Pedestrian),
        veh_encoder: cue
            .use_vehicle
            .then(|| init_lstm(STREAM_INPUT_DIM, he, seed, Block::Vehicle)),
        head_encoder: cue.use_head.then(|| init_lstm(STREAM_INPUT_DIM, he, seed, Block::Head)),
        decoder: init_lstm(dims.context_dim(cue), hd, seed, Block::Decoder),
        proj_w,
        proj_b: vec![0.0; OUTPUT_DIM],
    })
}

impl ModelParameters {
    pub fn zeros(dims: ModelDims, cue: CueConfig) -> Result<Self> {
        dims.validate()?;
        let he = dims.encoder_hidden;
        let hd = dims.decoder_hidden;
        Ok(ModelParameters {
            dims,
            cue,
            init_seed: 0,
            ped_encoder: LstmParams::zeros(STREAM_INPUT_DIM, he),
            veh_encoder: cue.use_vehicle.then(|| LstmParams::zeros(STREAM_INPUT_DIM, he)),
            head_encoder: cue.use_head.then(|| LstmParams::zeros(STREAM_INPUT_DIM, he)),
            decoder: LstmParams::zeros(dims.context_dim(cue), hd),
            proj_w: Matrix::zeros(OUTPUT_DIM, hd),
            proj_b: vec![0.0; OUTPUT_DIM],
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = ModelParameters::zeros(self.dims, self.cue).expect("dims already validated");
        z.init_seed = self.init_seed;
        z
    }

    /// Encoders in context order: pedestrian, vehicle, head.
    pub fn encoders(&self) -> impl Iterator<Item = &LstmParams> {
        std::iter::once(&self.ped_encoder)
            .chain(self.veh_encoder.as_ref())
            .chain(self.head_encoder.as_ref())
    }

    /// Parameter blocks in checkpoint order.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(10);
        for enc in self.encoders() {
            out.extend(enc.slices());
        }
        out.extend(self.decoder.slices());
        out.push(self.proj_w.data());
        out.push(&self.proj_b);
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(10);
        out.extend(self.ped_encoder.slices_mut());
        if let Some(e) = self.veh_encoder.as_mut() {
            out.extend(e.slices_mut());
        }
        if let Some(e) = self.head_encoder.as_mut() {
            out.extend(e.slices_mut());
        }
        out.extend(self.decoder.slices_mut());
        out.push(self.proj_w.data_mut());
        out.push(&mut self.proj_b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn assign_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::dim("ModelParameters::assign_flat", self.param_count(), values.len()));
        }
        let mut off = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&values[off..off + s.len()]);
            off += s.len();
        }
        Ok(())
    }

    pub fn same_layout(&self, other: &ModelParameters) -> bool {
        self.dims == other.dims && self.cue == other.cue
    }

    /// `self += alpha · other`
    pub fn add_scaled(&mut self, alpha: f64, other: &ModelParameters) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::dim(
                "ModelParameters::add_scaled",
                format!("{:?}/{}", self.dims, self.cue),
                format!("{:?}/{}", other.dims, other.cue),
            ));
        }
        for (a, b) in self.slices_mut().into_iter().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for s in self.slices_mut() {
            for x in s {
                *x *= alpha;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let d = ModelDims::default();
        let a = init_parameters(d, CueConfig::METHOD2, 42).unwrap();
        let b = init_parameters(d, CueConfig::METHOD2, 42).unwrap();
        let bits = |p: &ModelParameters| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn different_seeds_differ() {
        let d = ModelDims::default();
        let a = init_parameters(d, CueConfig::BASELINE, 1).unwrap();
        let b = init_parameters(d, CueConfig::BASELINE, 2).unwrap();
        assert_ne!(a.to_flat(), b.to_flat());
    }

    #[test]
    fn baseline_count_matches_enumeration() {
        let d = ModelDims {
            encoder_hidden: 64,
            decoder_hidden: 128,
        };
        let p = init_parameters(d, CueConfig::BASELINE, 0).unwrap();
        // encoder 4·64·(2+64+1), decoder 4·128·(64+128+1), projection 2·128 + 2
        let closed = 4 * 64 * 67 + 4 * 128 * 193 + 2 * 128 + 2;
        assert_eq!(closed, 116_226);
        assert_eq!(d.param_count(CueConfig::BASELINE), closed);
        assert_eq!(p.param_count(), closed);
        assert_eq!(p.to_flat().len(), closed);
        for cue in CueConfig::EXPERIMENTS {
            let p = init_parameters(d, cue, 0).unwrap();
            assert_eq!(p.param_count(), d.param_count(cue));
            assert_eq!(p.decoder.input_dim(), 64 * cue.active_encoders());
        }
    }

    #[test]
    fn shared_blocks_start_identically_across_cues() {
        let d = ModelDims {
            encoder_hidden: 8,
            decoder_hidden: 8,
        };
        let base = init_parameters(d, CueConfig::BASELINE, 7).unwrap();
        let m2 = init_parameters(d, CueConfig::METHOD2, 7).unwrap();
        assert_eq!(base.ped_encoder, m2.ped_encoder);
        assert_eq!(base.proj_w, m2.proj_w);
        assert!(base.veh_encoder.is_none() && m2.veh_encoder.is_some());
    }

    #[test]
    fn weights_respect_fan_in_bound_and_zero_bias() {
        let d = ModelDims {
            encoder_hidden: 16,
            decoder_hidden: 32,
        };
        let p = init_parameters(d, CueConfig::METHOD1, 3).unwrap();
        let bound = 1.0 / ((2 + 16) as f64).sqrt();
        assert!(p.ped_encoder.weights.data().iter().all(|w| w.abs() <= bound));
        assert!(p.ped_encoder.bias.iter().all(|&b| b == 0.0));
        assert!(p.proj_b.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn zero_dims_rejected() {
        let d = ModelDims {
            encoder_hidden: 0,
            decoder_hidden: 4,
        };
        assert!(init_parameters(d, CueConfig::BASELINE, 0).is_err());
    }

    #[test]
    fn cue_names_round_trip() {
        for cue in CueConfig::EXPERIMENTS {
            assert_eq!(CueConfig::from_name(cue.name()), Some(cue));
        }
        assert_eq!(CueConfig::from_name("nope"), None);
    }
}
