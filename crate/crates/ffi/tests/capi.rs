use std::ffi::{CStr, CString};
use std::ptr;

use pedfuse_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pedfuse_last_error_message()) }.to_string_lossy().into_owned()
}

fn new_model(use_vehicle: u8, use_head: u8) -> *mut PedfuseModel {
    let mut m = ptr::null_mut();
    let s = unsafe { pedfuse_model_new(4, 6, use_vehicle, use_head, 3, &mut m) };
    assert_eq!(s, PedfuseStatus::Ok);
    assert!(!m.is_null());
    m
}

fn inputs() -> ([f64; 10], [f64; 10], [f64; 5]) {
    let ped = [0.0, -1.2, 0.0, -0.9, 0.0, -0.6, 0.0, -0.3, 0.0, 0.0];
    let veh = [-20.0, 2.0, -18.4, 2.0, -16.8, 2.0, -15.2, 2.0, -13.6, 2.0];
    (ped, veh, [1.5, 1.4, 1.2, 1.0, 0.9])
}

#[test]
fn lifecycle_and_param_count() {
    let m = new_model(1, 1);
    let mut n = 0u64;
    assert_eq!(unsafe { pedfuse_model_param_count(m, &mut n) }, PedfuseStatus::Ok);
    // three encoders of 4·4·7, decoder 4·6·19, projection 2·6 + 2
    assert_eq!(n, 3 * 112 + 456 + 14);
    unsafe { pedfuse_model_free(m) };
    unsafe { pedfuse_model_free(ptr::null_mut()) };
}

#[test]
fn forecast_is_deterministic_and_honours_cues() {
    let (ped, veh, head) = inputs();
    let m = new_model(0, 0);
    let mut a = [0.0; 20];
    let mut b = [0.0; 20];
    unsafe {
        assert_eq!(pedfuse_model_forecast(m, ped.as_ptr(), ptr::null(), ptr::null(), a.as_mut_ptr()), PedfuseStatus::Ok);
        assert_eq!(pedfuse_model_forecast(m, ped.as_ptr(), veh.as_ptr(), head.as_ptr(), b.as_mut_ptr()), PedfuseStatus::Ok);
        pedfuse_model_free(m);
    }
    assert_eq!(a, b, "baseline ignores vehicle and head");
    assert!(a.iter().all(|v| v.is_finite()));

    let m = new_model(1, 0);
    let mut out = [7.0; 20];
    let s = unsafe { pedfuse_model_forecast(m, ped.as_ptr(), ptr::null(), ptr::null(), out.as_mut_ptr()) };
    assert_eq!(s, PedfuseStatus::NullPointer);
    assert!(last_error().contains("veh_past"));
    assert_eq!(out, [7.0; 20], "no partial output");
    unsafe { pedfuse_model_free(m) };
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.ckpt").to_str().unwrap()).unwrap();
    let (ped, veh, head) = inputs();
    let m = new_model(1, 1);
    let mut loaded = ptr::null_mut();
    let (mut a, mut b) = ([0.0; 20], [0.0; 20]);
    unsafe {
        assert_eq!(pedfuse_model_save(m, path.as_ptr()), PedfuseStatus::Ok);
        assert_eq!(pedfuse_model_load(path.as_ptr(), &mut loaded), PedfuseStatus::Ok);
        pedfuse_model_forecast(m, ped.as_ptr(), veh.as_ptr(), head.as_ptr(), a.as_mut_ptr());
        pedfuse_model_forecast(loaded, ped.as_ptr(), veh.as_ptr(), head.as_ptr(), b.as_mut_ptr());
        pedfuse_model_free(m);
        pedfuse_model_free(loaded);
    }
    assert_eq!(a, b);
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(pedfuse_model_new(0, 4, 0, 0, 1, &mut m), PedfuseStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(pedfuse_model_new(4, 4, 2, 0, 1, &mut m), PedfuseStatus::InvalidArgument);
        assert_eq!(pedfuse_model_new(4, 4, 0, 0, 1, ptr::null_mut()), PedfuseStatus::NullPointer);

        let missing = CString::new("/nonexistent/dir/m.ckpt").unwrap();
        assert_eq!(pedfuse_model_load(missing.as_ptr(), &mut m), PedfuseStatus::Io);
        assert!(last_error().contains("/nonexistent/dir/m.ckpt"));

        let dir = tempfile::tempdir().unwrap();
        let junk_path = dir.path().join("junk.ckpt");
        std::fs::write(&junk_path, b"not a checkpoint").unwrap();
        let junk = CString::new(junk_path.to_str().unwrap()).unwrap();
        assert_eq!(pedfuse_model_load(junk.as_ptr(), &mut m), PedfuseStatus::Data);

        let mut count = 0u64;
        assert_eq!(pedfuse_model_param_count(ptr::null(), &mut count), PedfuseStatus::NullPointer);

        let good = new_model(0, 0);
        let mut ped = inputs().0;
        ped[3] = f64::NAN;
        let mut out = [0.0; 20];
        assert_eq!(pedfuse_model_forecast(good, ped.as_ptr(), ptr::null(), ptr::null(), out.as_mut_ptr()), PedfuseStatus::Numeric);
        pedfuse_model_free(good);
        assert_eq!(pedfuse_model_param_count(ptr::null(), &mut count), PedfuseStatus::NullPointer);
    }
}

#[test]
fn success_clears_last_error() {
    let mut m = ptr::null_mut();
    unsafe {
        pedfuse_model_new(0, 0, 0, 0, 0, &mut m);
        assert!(!last_error().is_empty());
        let mut flag = 9u8;
        assert_eq!(pedfuse_looking_flag(0.0, 0.0, 0.0, 5.0, 0.0, 0.5, &mut flag), PedfuseStatus::Ok);
        assert_eq!(flag, 1);
        assert!(last_error().is_empty());
    }
}

#[test]
fn rmse_and_looking_flag() {
    let preds = [0.3, 0.4].repeat(20);
    let targets = vec![0.0; 40];
    let mut r = 0.0;
    unsafe {
        assert_eq!(pedfuse_rmse(preds.as_ptr(), targets.as_ptr(), 2, &mut r), PedfuseStatus::Ok);
        assert!((r - 0.5).abs() < 1e-15);
        assert_eq!(pedfuse_rmse(preds.as_ptr(), targets.as_ptr(), 0, &mut r), PedfuseStatus::InvalidArgument);
        assert_eq!(pedfuse_rmse(ptr::null(), targets.as_ptr(), 1, &mut r), PedfuseStatus::NullPointer);

        let mut flag = 0u8;
        assert_eq!(pedfuse_looking_flag(std::f64::consts::PI, 0.0, 0.0, 5.0, 0.0, 0.5, &mut flag), PedfuseStatus::Ok);
        assert_eq!(flag, 0);
        assert_eq!(pedfuse_looking_flag(0.0, 1.0, 1.0, 1.0, 1.0, 0.5, &mut flag), PedfuseStatus::InvalidArgument);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(pedfuse_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
