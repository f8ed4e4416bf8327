//! Binary sample cache.
//!
//! Layout (all integers and reals little-endian):
//!
//! ```text
//! magic      8 bytes  "PFSCACHE"
//! version    u32      1
//! n_groups   u32
//! per group:
//!   id_len   u32, id bytes (UTF-8)
//!   phase    u8
//!   n        u32
//!   n × 48 f64: t, origin x, origin y,
//!               ped_past (5 × x,y), veh_past (5 × x,y),
//!               head_past (5), ped_future (10 × x,y)
//! ```

use std::path::Path;

use super::window::{SampleGroup, TrajectorySample};
use crate::binio::{write_atomic, Reader, Writer};
use crate::error::{Error, Result};

pub const SAMPLE_CACHE_MAGIC: &[u8; 8] = b"PFSCACHE";
pub const SAMPLE_CACHE_VERSION: u32 = 1;
const REALS_PER_SAMPLE: usize = 48;

fn sample_reals(s: &TrajectorySample) -> Vec<f64> {
    let mut v = Vec::with_capacity(REALS_PER_SAMPLE);
    v.push(s.t);
    v.extend_from_slice(&s.origin_world);
    v.extend(s.ped_past.iter().flatten());
    v.extend(s.veh_past.iter().flatten());
    v.extend_from_slice(&s.head_past);
    v.extend(s.ped_future.iter().flatten());
    v
}

fn sample_from_reals(v: &[f64]) -> TrajectorySample {
    let pts = |off: usize, out: &mut [[f64; 2]]| {
        for (k, p) in out.iter_mut().enumerate() {
            *p = [v[off + 2 * k], v[off + 2 * k + 1]];
        }
    };
    let mut s = TrajectorySample {
        ped_past: Default::default(),
        veh_past: Default::default(),
        head_past: Default::default(),
        ped_future: Default::default(),
        origin_world: [v[1], v[2]],
        t: v[0],
    };
    pts(3, &mut s.ped_past);
    pts(13, &mut s.veh_past);
    s.head_past.copy_from_slice(&v[23..28]);
    pts(28, &mut s.ped_future);
    s
}

pub fn encode_sample_cache(groups: &[SampleGroup]) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(SAMPLE_CACHE_MAGIC);
    w.u32(SAMPLE_CACHE_VERSION);
    w.u32(groups.len() as u32);
    for g in groups {
        w.str(&g.track_id);
        w.u8(g.phase);
        w.u32(g.samples.len() as u32);
        for s in &g.samples {
            w.f64s(&sample_reals(s));
        }
    }
    w.buf
}

pub fn decode_sample_cache(bytes: &[u8]) -> Result<Vec<SampleGroup>> {
    let mut r = Reader::new(bytes, "sample cache");
    if r.bytes(8)? != SAMPLE_CACHE_MAGIC {
        return Err(Error::Data("sample cache: bad magic".into()));
    }
    let version = r.u32()?;
    if version != SAMPLE_CACHE_VERSION {
        return Err(Error::Data(format!("sample cache: unsupported version {version}")));
    }
    let n_groups = r.u32()? as usize;
    let mut groups = Vec::with_capacity(n_groups.min(1 << 16));
    let mut buf = [0.0; REALS_PER_SAMPLE];
    for _ in 0..n_groups {
        let track_id = r.str()?;
        let phase = r.u8()?;
        let n = r.u32()? as usize;
        let mut samples = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            r.f64s(&mut buf)?;
            samples.push(sample_from_reals(&buf));
        }
        groups.push(SampleGroup { track_id, phase, samples });
    }
    r.finish()?;
    Ok(groups)
}

pub fn write_sample_cache(path: &Path, groups: &[SampleGroup]) -> Result<()> {
    write_atomic(path, &encode_sample_cache(groups))
}

pub fn read_sample_cache(path: &Path) -> Result<Vec<SampleGroup>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_sample_cache(&bytes)
}
