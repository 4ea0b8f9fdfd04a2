use std::ffi::{CStr, CString};
use std::ptr;

use stl_synth_ffi::*;

const REGIONS: &str = r#"{"regions": [
    {"name": "A", "xmin": 3.0, "xmax": 5.0, "ymin": 3.0, "ymax": 5.0},
    {"name": "B", "xmin": 0.0, "xmax": 1.0, "ymin": 4.0, "ymax": 6.0}
]}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(stl_last_error()) }.to_string_lossy().into_owned()
}

fn problem(spec: &str, encoding: StlEncoding) -> Result<*mut StlProblem, (StlStatus, String)> {
    let spec = CString::new(spec).unwrap();
    let regions = CString::new(REGIONS).unwrap();
    let x0 = [1.0, 1.0, 0.0, 0.0];
    let mut out = ptr::null_mut();
    let code = unsafe { stl_problem_new(spec.as_ptr(), regions.as_ptr(), x0.as_ptr(), 4, 8, encoding, true, &mut out) };
    if code == StlStatus::Ok {
        assert!(!out.is_null());
        Ok(out)
    } else {
        assert!(out.is_null());
        Err((code, last_error()))
    }
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { stl_string_free(p) };
    s
}

#[test]
fn solve_and_read_back() {
    let p = problem("F[0,8] in(A) & G[0,8] out(B)", StlEncoding::Proposed).unwrap();
    let mut counts = StlCounts::default();
    assert_eq!(unsafe { stl_problem_counts(p, &mut counts) }, StlStatus::Ok);
    // eventually over 9 steps: 4 bits; nine 4-face exits: 3 bits each
    assert_eq!(counts.binary, 31);
    assert!(counts.continuous > 0 && counts.constraints > 0);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { stl_solve(p, 0, 0, &mut r) }, StlStatus::Ok);
    let mut status = StlSolveStatus::Infeasible;
    assert_eq!(unsafe { stl_result_status(r, &mut status) }, StlStatus::Ok);
    assert_eq!(status, StlSolveStatus::Optimal);
    let mut rho = f64::NAN;
    assert_eq!(unsafe { stl_result_rho(r, &mut rho) }, StlStatus::Ok);
    assert!(rho > 0.0);

    assert_eq!(unsafe { stl_result_len(r) }, 9);
    let mut y = [0.0; 2];
    assert_eq!(unsafe { stl_result_output(r, 0, y.as_mut_ptr(), 2) }, StlStatus::Ok);
    assert_eq!(y, [1.0, 1.0]);
    assert_eq!(unsafe { stl_result_output(r, 9, y.as_mut_ptr(), 2) }, StlStatus::InvalidArgument);
    assert_eq!(unsafe { stl_result_output(r, 0, y.as_mut_ptr(), 1) }, StlStatus::InvalidArgument);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { stl_result_to_json(r, &mut json) }, StlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["counts"]["binary"], 31);

    unsafe {
        stl_result_free(r);
        stl_problem_free(p);
    }
}

#[test]
fn exported_lp_is_stable_and_reimportable() {
    let p = problem("F[0,8] (in(A) | in(B))", StlEncoding::Standard).unwrap();
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { stl_problem_export_lp(p, &mut a) }, StlStatus::Ok);
    assert_eq!(unsafe { stl_problem_export_lp(p, &mut b) }, StlStatus::Ok);
    let lp = take_string(a);
    assert_eq!(lp, take_string(b));
    assert!(lp.contains("Binaries") && lp.trim_end().ends_with("End"));

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { stl_solve(p, 0, 0, &mut r) }, StlStatus::Ok);
    let mut rho = 0.0;
    assert_eq!(unsafe { stl_result_rho(r, &mut rho) }, StlStatus::Ok);

    // a solution that puts every variable at zero violates the start state
    let bad = CString::new("rho 0\n").unwrap();
    let mut imported = ptr::null_mut();
    assert_eq!(unsafe { stl_import_solution(p, bad.as_ptr(), &mut imported) }, StlStatus::Solver);
    assert!(imported.is_null());
    assert!(!last_error().is_empty());

    unsafe {
        stl_result_free(r);
        stl_problem_free(p);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let (code, msg) = problem("F[0,8] in(Z)", StlEncoding::Proposed).unwrap_err();
    assert_eq!(code, StlStatus::Parse);
    assert!(msg.contains('Z'), "{msg}");

    let (code, _) = problem("F[0,8] in(A", StlEncoding::Proposed).unwrap_err();
    assert_eq!(code, StlStatus::Parse);

    let mut out = ptr::null_mut();
    let code = unsafe { stl_problem_new(ptr::null(), ptr::null(), ptr::null(), 0, 5, StlEncoding::Proposed, false, &mut out) };
    assert_eq!(code, StlStatus::NullPointer);

    let bytes = [0xffu8, 0];
    let regions = CString::new(REGIONS).unwrap();
    let x0 = [0.0; 4];
    let code = unsafe {
        stl_problem_new(bytes.as_ptr().cast(), regions.as_ptr(), x0.as_ptr(), 4, 5, StlEncoding::Proposed, false, &mut out)
    };
    assert_eq!(code, StlStatus::InvalidUtf8);

    let spec = CString::new("in(A)").unwrap();
    let code = unsafe { stl_problem_new(spec.as_ptr(), regions.as_ptr(), x0.as_ptr(), 3, 5, StlEncoding::Proposed, false, &mut out) };
    assert_eq!(code, StlStatus::Encode);

    assert_eq!(unsafe { stl_problem_counts(ptr::null(), &mut StlCounts::default()) }, StlStatus::NullPointer);
    unsafe {
        stl_problem_free(ptr::null_mut());
        stl_result_free(ptr::null_mut());
        stl_string_free(ptr::null_mut());
    }
}

#[test]
fn infeasible_result_has_no_robustness() {
    let p = problem("in(A) & in(B)", StlEncoding::Proposed).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { stl_solve(p, 0, 0, &mut r) }, StlStatus::Ok);
    let mut status = StlSolveStatus::Optimal;
    unsafe { stl_result_status(r, &mut status) };
    assert_eq!(status, StlSolveStatus::Infeasible);
    let mut rho = 0.0;
    assert_eq!(unsafe { stl_result_rho(r, &mut rho) }, StlStatus::NoValue);
    assert_eq!(unsafe { stl_result_len(r) }, 0);
    unsafe {
        stl_result_free(r);
        stl_problem_free(p);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stl_synth.h")).unwrap();
    for name in [
        "stl_last_error",
        "stl_problem_new",
        "stl_problem_free",
        "stl_problem_counts",
        "stl_problem_export_lp",
        "stl_solve",
        "stl_import_solution",
        "stl_result_status",
        "stl_result_rho",
        "stl_result_len",
        "stl_result_output",
        "stl_result_to_json",
        "stl_result_free",
        "stl_string_free",
        "typedef struct StlProblem StlProblem",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
