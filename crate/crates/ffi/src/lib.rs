//! C ABI over `pedfuse`.
//!
//! Every fallible function returns a [`PedfuseStatus`] and writes results
//! through out-pointers only on success. On failure the message is kept in a
//! thread-local buffer readable with [`pedfuse_last_error_message`]. Panics
//! never cross the boundary; they surface as `PEDFUSE_STATUS_PANIC`.
//!
//! Coordinates are metres in the pedestrian-centered frame, angles radians.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pedfuse::data::{looking_flag, TrajectorySample, FUTURE_LEN, PAST_LEN};
use pedfuse::eval::rmse;
use pedfuse::model::{init_parameters, predict, Checkpoint, CueConfig, ModelDims};
use pedfuse::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PedfuseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Data = 3,
    Numeric = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque model handle. Create with [`pedfuse_model_new`] or
/// [`pedfuse_model_load`], release with [`pedfuse_model_free`].
pub struct PedfuseModel {
    checkpoint: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PedfuseStatus {
    match e.exit_code() {
        2 => PedfuseStatus::InvalidArgument,
        3 => PedfuseStatus::Data,
        4 => PedfuseStatus::Numeric,
        _ => PedfuseStatus::Io,
    }
}

struct Failure(PedfuseStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PedfuseStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PedfuseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PedfuseStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PedfuseStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PedfuseStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn model_ref<'a>(m: *const PedfuseModel) -> Result<&'a PedfuseModel, Failure> {
    m.as_ref().ok_or_else(|| null("model"))
}

fn points<const N: usize>(flat: &[f64]) -> [[f64; 2]; N] {
    std::array::from_fn(|i| [flat[2 * i], flat[2 * i + 1]])
}

/// Freshly initialized model. `use_vehicle`/`use_head` are 0 or 1.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_new(
    encoder_hidden: u32,
    decoder_hidden: u32,
    use_vehicle: u8,
    use_head: u8,
    seed: u64,
    out: *mut *mut PedfuseModel,
) -> PedfuseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if use_vehicle > 1 || use_head > 1 {
            return Err(Failure(PedfuseStatus::InvalidArgument, "cue flags must be 0 or 1".into()));
        }
        let dims = ModelDims {
            encoder_hidden: encoder_hidden as usize,
            decoder_hidden: decoder_hidden as usize,
        };
        let cue = CueConfig {
            use_vehicle: use_vehicle == 1,
            use_head: use_head == 1,
        };
        let params = init_parameters(dims, cue, seed)?;
        *out = Box::into_raw(Box::new(PedfuseModel {
            checkpoint: Checkpoint::new(params),
        }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_load(path: *const c_char, out: *mut *mut PedfuseModel) -> PedfuseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let checkpoint = Checkpoint::load(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(PedfuseModel { checkpoint }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_save(model: *const PedfuseModel, path: *const c_char) -> PedfuseStatus {
    guard(|| {
        let m = model_ref(model)?;
        m.checkpoint.save(&path_arg(path)?)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_free(model: *mut PedfuseModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_param_count(model: *const PedfuseModel, out: *mut u64) -> PedfuseStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.checkpoint.params.param_count() as u64;
        Ok(())
    })
}

/// Forecasts ten future positions.
///
/// `ped_past` and `veh_past` hold 5 (x, y) pairs (10 doubles) oldest first
/// with the current pedestrian position at the origin; `head_past` holds 5
/// world-frame yaws. Streams the model does not use may be null. `out`
/// receives 10 (x, y) pairs (20 doubles).
///
/// # Safety
/// Non-null pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_model_forecast(
    model: *const PedfuseModel,
    ped_past: *const f64,
    veh_past: *const f64,
    head_past: *const f64,
    out: *mut f64,
) -> PedfuseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let cue = m.checkpoint.params.cue;
        if ped_past.is_null() {
            return Err(null("ped_past"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if cue.use_vehicle && veh_past.is_null() {
            return Err(null("veh_past"));
        }
        if cue.use_head && head_past.is_null() {
            return Err(null("head_past"));
        }
        let ped = std::slice::from_raw_parts(ped_past, 2 * PAST_LEN);
        let veh = if veh_past.is_null() {
            [[0.0; 2]; PAST_LEN]
        } else {
            points(std::slice::from_raw_parts(veh_past, 2 * PAST_LEN))
        };
        let head = if head_past.is_null() {
            [0.0; PAST_LEN]
        } else {
            std::array::from_fn(|i| *head_past.add(i))
        };
        let sample = TrajectorySample {
            ped_past: points(ped),
            veh_past: veh,
            head_past: head,
            ped_future: [[0.0; 2]; FUTURE_LEN],
            origin_world: [0.0, 0.0],
            t: 0.0,
        };
        let f = predict(&sample, &m.checkpoint.params)?;
        let dst = std::slice::from_raw_parts_mut(out, 2 * FUTURE_LEN);
        for (k, p) in f.positions.iter().enumerate() {
            dst[2 * k] = p[0];
            dst[2 * k + 1] = p[1];
        }
        Ok(())
    })
}

/// RMSE over `n_samples` forecasts, each 10 (x, y) pairs.
///
/// # Safety
/// `preds` and `targets` must hold `20 · n_samples` doubles each.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_rmse(
    preds: *const f64,
    targets: *const f64,
    n_samples: usize,
    out: *mut f64,
) -> PedfuseStatus {
    guard(|| {
        if preds.is_null() || targets.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let len = n_samples
            .checked_mul(2 * FUTURE_LEN)
            .ok_or_else(|| Failure(PedfuseStatus::InvalidArgument, "n_samples too large".into()))?;
        let to_h = |flat: &[f64]| -> Vec<[[f64; 2]; FUTURE_LEN]> {
            flat.chunks_exact(2 * FUTURE_LEN).map(points::<FUTURE_LEN>).collect()
        };
        let p = to_h(std::slice::from_raw_parts(preds, len));
        let t = to_h(std::slice::from_raw_parts(targets, len));
        *out = rmse(&p, &t)?;
        Ok(())
    })
}

/// 1 when `head_theta` is within `half_angle` of the bearing from the
/// pedestrian to the vehicle, else 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedfuse_looking_flag(
    head_theta: f64,
    ped_x: f64,
    ped_y: f64,
    veh_x: f64,
    veh_y: f64,
    half_angle: f64,
    out: *mut u8,
) -> PedfuseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = looking_flag(head_theta, [ped_x, ped_y], [veh_x, veh_y], half_angle)?;
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pedfuse_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pedfuse_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
