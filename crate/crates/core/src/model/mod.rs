//! Three-stream LSTM encoder-decoder: pedestrian track, vehicle track and
//! head orientation are encoded separately, their final hidden states are
//! concatenated, and a decoder LSTM fed that context at every step emits ten
//! future positions through a linear projection.

mod checkpoint;
mod gradcheck;
mod network;
mod params;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{model_gradient_check, reference_loss, FdPrecision, GradientReport};
pub use network::{
    backward, backward_into, encode, forward, head_features, predict, vehicle_features, EncoderRun, Forecast,
    ForwardCache, VEHICLE_POSITION_SCALE,
};
pub use params::{init_parameters, CueConfig, ModelDims, ModelParameters, OUTPUT_DIM, STREAM_INPUT_DIM};
