use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use histrep_ffi::*;

fn pure(dim: usize) -> *mut HrFunctional {
    let mut re = vec![0.0; dim];
    re[0] = 1.0;
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { hr_functional_pure_state(re.as_ptr(), ptr::null(), dim, &mut f) }, HrStatus::Ok);
    f
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hr_last_error()) }.to_string_lossy().into_owned()
}

fn identity_proj(dim: usize) -> Vec<f64> {
    (0..dim * dim).map(|k| if k / dim == k % dim { 1.0 } else { 0.0 }).collect()
}

#[test]
fn pure_state_round_trip() {
    let f = pure(3);
    assert_eq!(unsafe { hr_functional_dim(f) }, 3);

    let one = identity_proj(3);
    let (mut re, mut im) = (0.0, 0.0);
    let s = unsafe { hr_evaluate(f, one.as_ptr(), ptr::null(), one.as_ptr(), ptr::null(), &mut re, &mut im) };
    assert_eq!(s, HrStatus::Ok);
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);

    let mut report = HrAxiomReport::default();
    assert_eq!(unsafe { hr_check_axioms(f, 50, 1, 1e-9, &mut report) }, HrStatus::Ok);
    assert!(report.passed);

    let mut x_re = vec![0.0; 81];
    let mut x_im = vec![0.0; 81];
    let mut norm = 0.0;
    let s = unsafe { hr_extract_ils(f, x_re.as_mut_ptr(), x_im.as_mut_ptr(), 81, &mut norm) };
    assert_eq!(s, HrStatus::Ok);
    assert!((norm - 3.0).abs() < 1e-8);
    let trace: f64 = (0..9).map(|k| x_re[k * 9 + k]).sum();
    assert!((trace - 1.0).abs() < 1e-12);

    let mut small = vec![0.0; 10];
    let s = unsafe { hr_extract_ils(f, small.as_mut_ptr(), small.as_mut_ptr(), 10, ptr::null_mut()) };
    assert_eq!(s, HrStatus::BufferTooSmall);

    let mut sup = 0.0;
    assert_eq!(unsafe { hr_tracial_bound_probe(f, 500, 2, &mut sup) }, HrStatus::Ok);
    assert!(sup <= 1.0 + 1e-9);
    unsafe { hr_functional_free(f) };
}

#[test]
fn dimension_two_is_excluded_from_extraction() {
    let f = pure(2);
    let mut buf = vec![0.0; 16];
    let mut buf_im = vec![0.0; 16];
    let s = unsafe { hr_extract_ils(f, buf.as_mut_ptr(), buf_im.as_mut_ptr(), 16, ptr::null_mut()) };
    assert_eq!(s, HrStatus::DimensionExcluded);
    assert!(last_error().contains("dimension ≥ 3"));
    unsafe { hr_functional_free(f) };
}

#[test]
fn invalid_inputs() {
    let re = [1.0, 1.0, 0.0];
    let mut f = ptr::null_mut();
    let s = unsafe { hr_functional_pure_state(re.as_ptr(), ptr::null(), 3, &mut f) };
    assert_eq!(s, HrStatus::InvalidInput);
    assert!(f.is_null());
    assert!(last_error().contains("unit"));

    // Trace-two operator fails normalization.
    let n = 9;
    let mut x = vec![0.0; n * n];
    x[0] = 2.0;
    let s = unsafe { hr_functional_operator(x.as_ptr(), ptr::null(), 3, &mut f) };
    assert_eq!(s, HrStatus::Violation);
    assert!(last_error().contains("normalization"));
}

#[test]
fn scenario_and_command() {
    let text = CString::new(r#"{"dimension": 3, "functional": {"kind": "pure_state", "psi": {"re": [0, 1, 0]}}}"#).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { hr_functional_from_scenario(text.as_ptr(), &mut f) }, HrStatus::Ok);
    assert_eq!(unsafe { hr_functional_dim(f) }, 3);
    unsafe { hr_functional_free(f) };

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, text.to_bytes()).unwrap();
    let args: Vec<CString> = ["check-axioms", "--scenario", path.to_str().unwrap(), "--samples", "20"]
        .iter()
        .map(|a| CString::new(*a).unwrap())
        .collect();
    let ptrs: Vec<*const std::ffi::c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { hr_run_command(ptrs.as_ptr(), ptrs.len(), &mut out, &mut code) }, HrStatus::Ok);
    let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { hr_string_free(out) };
    assert_eq!(code, 0);
    assert!(json.starts_with(r#"{"command":"check-axioms","verdict":"pass""#), "{json}");

    let args = [CString::new("bogus").unwrap()];
    let ptrs = [args[0].as_ptr()];
    assert_eq!(unsafe { hr_run_command(ptrs.as_ptr(), 1, &mut out, &mut code) }, HrStatus::Ok);
    unsafe { hr_string_free(out) };
    assert_eq!(code, 2);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("histrep.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for sym in [
        "typedef struct HrFunctional HrFunctional;",
        "HR_STATUS_BUFFER_TOO_SMALL = 5",
        "hr_functional_from_scenario",
        "hr_functional_pure_state",
        "hr_functional_operator",
        "hr_functional_free",
        "hr_functional_dim",
        "hr_evaluate",
        "hr_check_axioms",
        "hr_extract_ils",
        "hr_tracial_bound_probe",
        "hr_run_command",
        "hr_string_free",
        "hr_last_error",
    ] {
        assert!(text.contains(sym), "missing {sym}");
    }
}

/// Compiles and runs a C program against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libhistrep_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3.000000 1.000000 0.000000");
}
