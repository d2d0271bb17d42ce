use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use tdho_ffi::*;

fn profile(json: &str) -> *mut TdhoProfile {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { tdho_profile_from_json(text.as_ptr(), &mut out) };
    assert_eq!(status, TdhoStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = tdho_last_error_message();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn profile_round_trip_and_evaluation() {
    let p = profile(r#"{"type":"sech_squared","alpha":2,"beta":1,"t0":0}"#);
    let mut w2 = 0.0;
    assert_eq!(unsafe { tdho_profile_omega_squared(p, 0.0, &mut w2) }, TdhoStatus::Ok);
    assert_eq!(w2, 4.0);
    assert!(tdho_last_error_message().is_null());
    unsafe { tdho_profile_free(p) };
}

#[test]
fn bad_json_sets_message() {
    let text = CString::new(r#"{"type":"nope"}"#).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { tdho_profile_from_json(text.as_ptr(), &mut out) };
    assert_eq!(status, TdhoStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().contains("invalid profile"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { tdho_profile_from_json(ptr::null(), &mut out) },
        TdhoStatus::NullPointer
    );
    assert_eq!(unsafe { tdho_bessel_j(0.0, 1.0, ptr::null_mut()) }, TdhoStatus::NullPointer);
    assert!(unsafe { tdho_pair_wronskian_drift(ptr::null()) } < 0.0);
    unsafe {
        tdho_profile_free(ptr::null_mut());
        tdho_pair_free(ptr::null_mut());
    }
}

#[test]
fn pair_matches_cos_sin() {
    let p = profile(r#"{"type":"constant","omega0":1}"#);
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { tdho_pair_solve(p, 0.0, 1.0, 1e-10, &mut pair) }, TdhoStatus::Ok);
    let mut s = TdhoPairState::default();
    assert_eq!(unsafe { tdho_pair_state(pair, 0.7, &mut s) }, TdhoStatus::Ok);
    assert!((s.u - 0.7f64.cos()).abs() < 1e-8);
    assert!((s.v - 0.7f64.sin()).abs() < 1e-8);
    assert!(unsafe { tdho_pair_wronskian_drift(pair) } <= 1e-9);
    assert_eq!(unsafe { tdho_pair_state(pair, 3.0, &mut s) }, TdhoStatus::Domain);
    unsafe {
        tdho_pair_free(pair);
        tdho_profile_free(p);
    }
}

#[test]
fn free_kernel_modulus() {
    let p = profile(r#"{"type":"constant","omega0":0}"#);
    let mut k = TdhoKernelValue::default();
    assert_eq!(
        unsafe { tdho_kernel_robust(p, 1.0, 0.0, 0.0, 0.0, 1.0, &mut k) },
        TdhoStatus::Ok
    );
    assert!((k.modulus - 0.3989422804014327).abs() < 1e-12);
    assert_eq!(k.caustic_flag, 0);
    unsafe { tdho_profile_free(p) };
}

#[test]
fn caustic_at_endpoint_is_reported() {
    let p = profile(r#"{"type":"constant","omega0":1}"#);
    let mut k = TdhoKernelValue::default();
    let status =
        unsafe { tdho_kernel_robust(p, 1.0, 0.0, 0.0, 0.0, std::f64::consts::PI, &mut k) };
    assert_eq!(status, TdhoStatus::Caustic, "{}", last_error());
    unsafe { tdho_profile_free(p) };
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { tdho_bessel_j(0.0, 0.0, &mut v) }, TdhoStatus::Ok);
    assert_eq!(v, 1.0);
    assert_eq!(unsafe { tdho_legendre_p_conical(0.7, 1.0, &mut v) }, TdhoStatus::Ok);
    assert!((v - 1.0).abs() < 1e-14);
    assert_eq!(unsafe { tdho_bessel_j(-1.0, 1.0, &mut v) }, TdhoStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { tdho_legendre_p_conical(0.7, -1.5, &mut v) }, TdhoStatus::Domain);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tdho_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tdho.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "tdho_profile_from_json",
        "tdho_pair_solve",
        "tdho_kernel_robust",
        "tdho_legendre_p_conical",
        "TDHO_STATUS_CAUSTIC",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile_dir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"tdho.h\"\nint main(void) { TdhoKernelValue k; (void)k; return TDHO_STATUS_OK; }\n",
    )
    .unwrap();
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let Ok(out) = Command::new(&compiler)
        .arg("-fsyntax-only")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!("-I{}", header.parent().unwrap().display()))
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tdho-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
