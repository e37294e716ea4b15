use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tropfan_ffi::*;

const LAMBDA2: &str = r#"{"rank": 2, "rays": [[1, 0], [-1, 0], [0, 1], [0, -1]], "cones": [[0, 2], [0, 3], [1, 2], [1, 3]]}"#;
const CROSS: &str = r#"{"rank": 2, "rays": [[1, 0], [-1, 0], [0, 1], [0, -1]], "cones": [[0], [1], [2], [3]]}"#;

fn parse(json: &str) -> *mut TfFan {
    let s = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tf_fan_from_json(s.as_ptr(), &mut out) }, TfStatus::Ok);
    out
}

fn shape(f: *const TfFan) -> (usize, usize, usize) {
    let (mut r, mut d, mut n) = (0, 0, 0);
    assert_eq!(unsafe { tf_fan_shape(f, &mut r, &mut d, &mut n) }, TfStatus::Ok);
    (r, d, n)
}

fn ranks(f: *const TfFan) -> Vec<usize> {
    let mut buf = [0usize; 8];
    let mut len = 0;
    assert_eq!(unsafe { tf_chow_ranks(f, buf.as_mut_ptr(), buf.len(), &mut len) }, TfStatus::Ok);
    buf[..len].to_vec()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tf_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn u33_chow_and_hr() {
    let mut u33 = ptr::null_mut();
    assert_eq!(unsafe { tf_bergman_uniform(3, 3, &mut u33) }, TfStatus::Ok);
    assert_eq!(shape(u33), (2, 2, 6));
    assert_eq!(ranks(u33), vec![1, 4, 1]);
    let ones = CString::new(r#"{"values": [1, 1, 1, 1, 1, 1]}"#).unwrap();
    let (mut pass, mut sig, mut len) = (false, [0i64; 4], 0);
    let s = unsafe { tf_hr_check(u33, ones.as_ptr(), &mut pass, sig.as_mut_ptr(), sig.len(), &mut len) };
    assert_eq!(s, TfStatus::Ok);
    assert!(pass);
    assert_eq!(&sig[..len], &[1, -2]);
    unsafe { tf_fan_free(u33) };
}

#[test]
fn json_round_trip() {
    let f = parse(LAMBDA2);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tf_fan_to_json(f, &mut s) }, TfStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { tf_string_free(s) };
    let g = parse(&text);
    let mut s2 = ptr::null_mut();
    assert_eq!(unsafe { tf_fan_to_json(g, &mut s2) }, TfStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(s2) }.to_str().unwrap(), text);
    unsafe {
        tf_string_free(s2);
        tf_fan_free(f);
        tf_fan_free(g);
    }
}

#[test]
fn operations() {
    let l2 = parse(LAMBDA2);
    let mut b = ptr::null_mut();
    let cone = [0usize, 2];
    assert_eq!(unsafe { tf_blowup(l2, cone.as_ptr(), cone.len(), &mut b) }, TfStatus::Ok);
    assert_eq!(ranks(b), vec![1, 3, 1]);

    let min = CString::new(r#"{"values": [0, -1, 0, -1]}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tf_tropmod(l2, min.as_ptr(), &mut m) }, TfStatus::Ok);
    assert_eq!(shape(m), (3, 2, 5));
    let mut holds = false;
    assert_eq!(unsafe { tf_pd_check(m, false, &mut holds) }, TfStatus::Ok);
    assert!(holds);

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { tf_product(l2, b, &mut p) }, TfStatus::Ok);
    // (1,2,1) convolved with (1,3,1)
    assert_eq!(ranks(p), vec![1, 5, 8, 5, 1]);
    let mut balanced = false;
    assert_eq!(unsafe { tf_is_balanced(p, &mut balanced) }, TfStatus::Ok);
    assert!(balanced);
    unsafe {
        tf_fan_free(l2);
        tf_fan_free(b);
        tf_fan_free(m);
        tf_fan_free(p);
    }
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { tf_fan_from_json(bad.as_ptr(), &mut out) }, TfStatus::Parse);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { tf_fan_from_json(ptr::null(), &mut out) }, TfStatus::NullPointer);
    let dup = CString::new(r#"{"rank": 1, "rays": [[1], [2]], "cones": [[0], [1]]}"#).unwrap();
    assert_eq!(unsafe { tf_fan_from_json(dup.as_ptr(), &mut out) }, TfStatus::InvalidFan);
    assert!(out.is_null());

    let cross = parse(CROSS);
    let mut holds = true;
    assert_eq!(unsafe { tf_pd_check(cross, false, &mut holds) }, TfStatus::Ok);
    assert!(!holds);
    let f = CString::new(r#"{"values": [1, 1, 1, 1]}"#).unwrap();
    let (mut pass, mut len) = (true, 0);
    let s = unsafe { tf_hr_check(cross, f.as_ptr(), &mut pass, ptr::null_mut(), 0, &mut len) };
    assert_eq!(s, TfStatus::PdFails);
    let mut small = [0usize; 1];
    let s = unsafe { tf_chow_ranks(cross, small.as_mut_ptr(), small.len(), &mut len) };
    assert_eq!((s, len), (TfStatus::BufferTooSmall, 2));
    let mut b = ptr::null_mut();
    let cone = [0usize, 1];
    assert_eq!(unsafe { tf_blowup(cross, cone.as_ptr(), 2, &mut b) }, TfStatus::InvalidFan);
    let mut u = ptr::null_mut();
    assert_eq!(unsafe { tf_bergman_uniform(4, 3, &mut u) }, TfStatus::InvalidMatroid);
    unsafe { tf_fan_free(cross) };
}

fn target_dir() -> PathBuf {
    // <target>/tmp
    Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf()
}

/// Compiles tests/smoke.c against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/tropfan.h");
    assert!(header.exists(), "header not generated");
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let lib = target_dir().join(profile).join("libtropfan_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("tropfan_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "smoke program failed");
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
