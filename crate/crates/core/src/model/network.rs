use super::params::{ModelParameters, OUTPUT_DIM};
use crate::data::{Point, TrajectorySample, FUTURE_LEN, PAST_LEN};
use crate::error::{Error, Result};
use crate::nncore::{linear_forward, lstm_step_backward_into, lstm_step_forward, LstmParams, LstmState, StepCache};

/// Ten future positions `t+Δt … t+10Δt` in the pedestrian-centered frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub positions: [Point; FUTURE_LEN],
}

#[derive(Debug, Clone)]
pub struct EncoderRun {
    pub final_state: LstmState,
    pub caches: Vec<StepCache>,
}

/// Intermediate values of one [`forward`] call.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// One run per active encoder, in context order.
    encoders: Vec<EncoderRun>,
    context: Vec<f64>,
    decoder: Vec<StepCache>,
    decoder_hidden: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn context(&self) -> &[f64] {
        &self.context
    }

    pub fn encoder_runs(&self) -> &[EncoderRun] {
        &self.encoders
    }
}

/// Runs an encoder over exactly [`PAST_LEN`] steps from a zero state.
pub fn encode<S: AsRef<[f64]>>(sequence: &[S], encoder: &LstmParams) -> Result<EncoderRun> {
    if sequence.len() != PAST_LEN {
        return Err(Error::dim("encode sequence length", PAST_LEN, sequence.len()));
    }
    let mut state = LstmState::zeros(encoder.hidden_dim());
    let mut caches = Vec::with_capacity(PAST_LEN);
    for x in sequence {
        let (next, cache) = lstm_step_forward(x.as_ref(), &state, encoder)?;
        caches.push(cache);
        state = next;
    }
    Ok(EncoderRun {
        final_state: state,
        caches,
    })
}

/// Vehicle offsets span tens of metres; a fixed divisor keeps the vehicle
/// encoder's gates out of saturation at initialization.
pub const VEHICLE_POSITION_SCALE: f64 = 10.0;

pub fn vehicle_features(veh: &[Point; PAST_LEN]) -> [[f64; 2]; PAST_LEN] {
    veh.map(|p| [p[0] / VEHICLE_POSITION_SCALE, p[1] / VEHICLE_POSITION_SCALE])
}

pub fn head_features(head: &[f64; PAST_LEN]) -> [[f64; 2]; PAST_LEN] {
    head.map(|th| [th.cos(), th.sin()])
}

pub fn forward(sample: &TrajectorySample, params: &ModelParameters) -> Result<(Forecast, ForwardCache)> {
    let cue = params.cue;
    // Inactive streams are never read, so they may hold anything.
    let finite = |pts: &[Point]| pts.iter().flatten().all(|v| v.is_finite());
    if !finite(&sample.ped_past)
        || (cue.use_vehicle && !finite(&sample.veh_past))
        || (cue.use_head && !sample.head_past.iter().all(|v| v.is_finite()))
    {
        return Err(Error::NonFinite("forward: sample input".into()));
    }
    if params.decoder.input_dim() != params.dims.context_dim(cue) {
        return Err(Error::dim(
            "forward decoder input",
            params.dims.context_dim(cue),
            params.decoder.input_dim(),
        ));
    }

    let mut encoders = Vec::with_capacity(3);
    encoders.push(encode(&sample.ped_past, &params.ped_encoder)?);
    if let Some(enc) = &params.veh_encoder {
        encoders.push(encode(&vehicle_features(&sample.veh_past), enc)?);
    }
    if let Some(enc) = &params.head_encoder {
        encoders.push(encode(&head_features(&sample.head_past), enc)?);
    }
    let context: Vec<f64> = encoders.iter().flat_map(|r| r.final_state.hidden.iter().copied()).collect();

    let mut state = LstmState::zeros(params.decoder.hidden_dim());
    let mut decoder = Vec::with_capacity(FUTURE_LEN);
    let mut decoder_hidden = Vec::with_capacity(FUTURE_LEN);
    let mut positions = [[0.0; 2]; FUTURE_LEN];
    for pos in positions.iter_mut() {
        let (next, cache) = lstm_step_forward(&context, &state, &params.decoder)?;
        let y = linear_forward(&next.hidden, &params.proj_w, &params.proj_b)?;
        *pos = [y[0], y[1]];
        decoder.push(cache);
        decoder_hidden.push(next.hidden.clone());
        state = next;
    }
    if !finite(&positions) {
        return Err(Error::NonFinite("forward: forecast".into()));
    }
    Ok((
        Forecast { positions },
        ForwardCache {
            encoders,
            context,
            decoder,
            decoder_hidden,
        },
    ))
}

pub fn predict(sample: &TrajectorySample, params: &ModelParameters) -> Result<Forecast> {
    forward(sample, params).map(|(f, _)| f)
}

fn encoder_backward(run: &EncoderRun, d_hidden: &[f64], enc: &LstmParams, grads: &mut LstmParams) -> Result<()> {
    let h = enc.hidden_dim();
    let mut dh = d_hidden.to_vec();
    let mut dc = vec![0.0; h];
    for cache in run.caches.iter().rev() {
        let (_, d_prev) = lstm_step_backward_into(&dh, &dc, cache, enc, grads)?;
        dh = d_prev.hidden;
        dc = d_prev.cell;
    }
    Ok(())
}

/// Accumulates the gradient of a loss whose derivative w.r.t. the forecast is
/// `d_forecast` into `grads`.
pub fn backward_into(
    d_forecast: &[Point; FUTURE_LEN],
    cache: &ForwardCache,
    params: &ModelParameters,
    grads: &mut ModelParameters,
) -> Result<()> {
    if !grads.same_layout(params) {
        return Err(Error::dim(
            "backward gradient buffer",
            format!("{:?}/{}", params.dims, params.cue),
            format!("{:?}/{}", grads.dims, grads.cue),
        ));
    }
    if cache.decoder.len() != FUTURE_LEN
        || cache.encoders.len() != params.cue.active_encoders()
        || cache.context.len() != params.decoder.input_dim()
    {
        return Err(Error::dim(
            "backward cache",
            format!("{} encoders, context {}", params.cue.active_encoders(), params.decoder.input_dim()),
            format!("{} encoders, context {}", cache.encoders.len(), cache.context.len()),
        ));
    }

    let hd = params.decoder.hidden_dim();
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    let mut d_context = vec![0.0; cache.context.len()];
    for t in (0..FUTURE_LEN).rev() {
        let dy = d_forecast[t];
        let h = &cache.decoder_hidden[t];
        grads.proj_w.add_outer(&dy, h);
        for k in 0..OUTPUT_DIM {
            grads.proj_b[k] += dy[k];
        }
        let mut dh = params.proj_w.matvec_transposed(&dy)?;
        for (a, b) in dh.iter_mut().zip(&dh_next) {
            *a += b;
        }
        let (dx, d_prev) = lstm_step_backward_into(&dh, &dc_next, &cache.decoder[t], &params.decoder, &mut grads.decoder)?;
        for (a, b) in d_context.iter_mut().zip(&dx) {
            *a += b;
        }
        dh_next = d_prev.hidden;
        dc_next = d_prev.cell;
    }

    let he = params.dims.encoder_hidden;
    let mut chunks = d_context.chunks(he).zip(&cache.encoders);
    let (d, run) = chunks.next().expect("pedestrian encoder always active");
    encoder_backward(run, d, &params.ped_encoder, &mut grads.ped_encoder)?;
    if let (Some(enc), Some(g)) = (&params.veh_encoder, grads.veh_encoder.as_mut()) {
        let (d, run) = chunks.next().expect("vehicle encoder run");
        encoder_backward(run, d, enc, g)?;
    }
    if let (Some(enc), Some(g)) = (&params.head_encoder, grads.head_encoder.as_mut()) {
        let (d, run) = chunks.next().expect("head encoder run");
        encoder_backward(run, d, enc, g)?;
    }
    Ok(())
}

pub fn backward(d_forecast: &[Point; FUTURE_LEN], cache: &ForwardCache, params: &ModelParameters) -> Result<ModelParameters> {
    let mut grads = params.zeros_like();
    backward_into(d_forecast, cache, params, &mut grads)?;
    Ok(grads)
}
