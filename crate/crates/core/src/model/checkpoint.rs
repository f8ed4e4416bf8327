//! Versioned binary checkpoint.
//!
//! ```text
//! magic           8 bytes  "PEDFUSE\0"
//! version         u32      1
//! encoder_hidden  u32
//! decoder_hidden  u32
//! use_vehicle     u8
//! use_head        u8
//! init_seed       u64
//! split_digest    32 bytes  SHA-256 of the split manifest (zeros if none)
//! metadata        u32 length + UTF-8 `key = value` lines (resolved config)
//! param_count     u64
//! params          param_count × f64
//! ```
//!
//! Parameter blocks follow [`ModelParameters::slices`]: pedestrian, vehicle
//! (if active), head (if active) and decoder LSTMs, each as the packed
//! `4H × (D+H)` weight matrix row-major with gate row blocks in the order
//! input, forget, candidate, output, then the `4H` bias; finally the 2 × H
//! projection matrix and its 2 biases. All integers and reals little-endian.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::params::{CueConfig, ModelDims, ModelParameters};
use crate::binio::{write_atomic, Reader, Writer};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PEDFUSE\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParameters,
    pub split_digest: [u8; 32],
    pub metadata: String,
}

impl Checkpoint {
    pub fn new(params: ModelParameters) -> Self {
        Checkpoint {
            params,
            split_digest: [0; 32],
            metadata: String::new(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let p = &self.params;
        let mut w = Writer::default();
        w.bytes(CHECKPOINT_MAGIC);
        w.u32(CHECKPOINT_VERSION);
        w.u32(p.dims.encoder_hidden as u32);
        w.u32(p.dims.decoder_hidden as u32);
        w.u8(u8::from(p.cue.use_vehicle));
        w.u8(u8::from(p.cue.use_head));
        w.u64(p.init_seed);
        w.bytes(&self.split_digest);
        w.str(&self.metadata);
        w.u64(p.param_count() as u64);
        for s in p.slices() {
            w.f64s(s);
        }
        w.buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "checkpoint");
        if r.bytes(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Data("checkpoint: bad magic".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Data(format!("checkpoint: unsupported version {version}")));
        }
        let dims = ModelDims {
            encoder_hidden: r.u32()? as usize,
            decoder_hidden: r.u32()? as usize,
        };
        let flag = |v: u8| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Data(format!("checkpoint: invalid cue flag {v}"))),
        };
        let cue = CueConfig {
            use_vehicle: flag(r.u8()?)?,
            use_head: flag(r.u8()?)?,
        };
        let init_seed = r.u64()?;
        let split_digest: [u8; 32] = r.bytes(32)?.try_into().unwrap();
        let metadata = r.str()?;
        let count = r.u64()? as usize;
        let mut params = ModelParameters::zeros(dims, cue).map_err(|e| Error::Data(format!("checkpoint: {e}")))?;
        params.init_seed = init_seed;
        if count != params.param_count() {
            return Err(Error::Data(format!(
                "checkpoint: header declares {count} parameters, layout needs {}",
                params.param_count()
            )));
        }
        for s in params.slices_mut() {
            r.f64s(s)?;
        }
        r.finish()?;
        Ok(Checkpoint {
            params,
            split_digest,
            metadata,
        })
    }

    /// Hex SHA-256 of the encoded checkpoint.
    pub fn identifier(&self) -> String {
        hex::encode(Sha256::digest(self.encode()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}
