//! C interface to stl-synth.
//!
//! Problems and results are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`StlStatus`]; on failure a message is available from [`stl_last_error`]
//! until the next failing call on the same thread. Strings returned through
//! out-parameters are released with [`stl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stl_synth::encoder::{encode, EncodedProblem, EncoderConfig, Encoding};
use stl_synth::parser::{load_regions, parse, SpecSource};
use stl_synth::solver::{export_lp, import_solution, report, solve, BnBOptions, SolveResult, SolveStatus};
use stl_synth::system::LinearSystem;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Encode = 5,
    Solver = 6,
    /// No value of the requested kind, e.g. robustness of an infeasible result.
    NoValue = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlEncoding {
    Proposed = 0,
    Standard = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlSolveStatus {
    Optimal = 0,
    Infeasible = 1,
    NodeLimit = 2,
    TimeLimit = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StlCounts {
    pub binary: usize,
    pub continuous: usize,
    pub constraints: usize,
    pub leaves: usize,
}

/// An encoded synthesis problem.
pub struct StlProblem {
    inner: EncodedProblem,
}

/// A verified solve outcome together with the problem summary it came from.
pub struct StlResult {
    inner: SolveResult,
    json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (StlStatus, String)>) -> StlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StlStatus::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            StlStatus::Panic
        }
    }
}

fn null(what: &str) -> (StlStatus, String) {
    (StlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (StlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (StlStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread; empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses `spec` against the regions in `regions_json`, then encodes it for
/// the planar double integrator from `x0` (`x0_len` must be 4).
///
/// # Safety
/// `spec` and `regions_json` must be NUL-terminated strings, `x0` must point
/// to `x0_len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stl_problem_new(
    spec: *const c_char,
    regions_json: *const c_char,
    x0: *const f64,
    x0_len: usize,
    horizon: usize,
    encoding: StlEncoding,
    flatten: bool,
    out: *mut *mut StlProblem,
) -> StlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec = text(spec, "spec")?;
        let regions = text(regions_json, "regions_json")?;
        if x0.is_null() {
            return Err(null("x0"));
        }
        let x0 = std::slice::from_raw_parts(x0, x0_len);
        let regions = load_regions(regions).map_err(|e| (StlStatus::Parse, e.to_string()))?;
        let formula = parse(&SpecSource::new(spec, regions)).map_err(|e| (StlStatus::Parse, e.to_string()))?;
        let enc = match encoding {
            StlEncoding::Proposed => Encoding::Proposed,
            StlEncoding::Standard => Encoding::Standard,
        };
        let cfg = EncoderConfig::new(enc).flatten(flatten);
        let inner = encode(&formula, &LinearSystem::double_integrator(), x0, horizon, &cfg)
            .map_err(|e| (StlStatus::Encode, e.to_string()))?;
        *out = Box::into_raw(Box::new(StlProblem { inner }));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from [`stl_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stl_problem_free(problem: *mut StlProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_problem_counts(problem: *const StlProblem, out: *mut StlCounts) -> StlStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = &p.inner.stats;
        *out = StlCounts {
            binary: s.binary_count,
            continuous: s.continuous_count,
            constraints: s.constraint_count,
            leaves: s.leaf_count,
        };
        Ok(())
    })
}

/// Writes the model in LP format to a new string in `*out`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_problem_export_lp(problem: *const StlProblem, out: *mut *mut c_char) -> StlStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = to_c_string(export_lp(&p.inner.model));
        Ok(())
    })
}

fn wrap(problem: &EncodedProblem, inner: SolveResult) -> *mut StlResult {
    let json = report(problem, &inner).to_string();
    Box::into_raw(Box::new(StlResult { inner, json }))
}

/// Solves with the built-in branch-and-bound. A zero `time_limit_ms` or
/// `node_limit` means no limit and the default limit respectively.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_solve(
    problem: *const StlProblem,
    time_limit_ms: u64,
    node_limit: usize,
    out: *mut *mut StlResult,
) -> StlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let mut opts = BnBOptions::default();
        if time_limit_ms > 0 {
            opts.time_limit_ms = Some(time_limit_ms);
        }
        if node_limit > 0 {
            opts.node_limit = node_limit;
        }
        let r = solve(&p.inner, &opts).map_err(|e| (StlStatus::Solver, e.to_string()))?;
        *out = wrap(&p.inner, r);
        Ok(())
    })
}

/// Verifies a `name value` solution produced by an external solver.
///
/// # Safety
/// `problem` must be a live handle, `solution` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_import_solution(
    problem: *const StlProblem,
    solution: *const c_char,
    out: *mut *mut StlResult,
) -> StlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let text = text(solution, "solution")?;
        let r = import_solution(&p.inner, text).map_err(|e| (StlStatus::Solver, e.to_string()))?;
        *out = wrap(&p.inner, r);
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_result_status(result: *const StlResult, out: *mut StlSolveStatus) -> StlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match r.inner.status {
            SolveStatus::Optimal => StlSolveStatus::Optimal,
            SolveStatus::Infeasible => StlSolveStatus::Infeasible,
            SolveStatus::NodeLimit => StlSolveStatus::NodeLimit,
            SolveStatus::TimeLimit => StlSolveStatus::TimeLimit,
        };
        Ok(())
    })
}

/// Robustness variable of the solution; `NoValue` when there is none.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_result_rho(result: *const StlResult, out: *mut f64) -> StlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.inner.rho.ok_or((StlStatus::NoValue, "result has no solution".to_string()))?;
        Ok(())
    })
}

/// Number of trajectory samples (`T + 1`), zero without a solution.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn stl_result_len(result: *const StlResult) -> usize {
    result
        .as_ref()
        .and_then(|r| r.inner.trajectory.as_ref())
        .map_or(0, |t| t.len())
}

/// Copies the outputs at step `t` into `buf`, which holds `len` doubles.
///
/// # Safety
/// `result` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn stl_result_output(result: *const StlResult, t: usize, buf: *mut f64, len: usize) -> StlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let traj = r
            .inner
            .trajectory
            .as_ref()
            .ok_or((StlStatus::NoValue, "result has no solution".to_string()))?;
        let y = traj
            .y
            .get(t)
            .ok_or((StlStatus::InvalidArgument, format!("step {t} beyond {}", traj.len())))?;
        if len < y.len() {
            return Err((StlStatus::InvalidArgument, format!("buffer holds {len}, need {}", y.len())));
        }
        std::slice::from_raw_parts_mut(buf, y.len()).copy_from_slice(y);
        Ok(())
    })
}

/// JSON summary of the result (same shape as the CLI output).
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stl_result_to_json(result: *const StlResult, out: *mut *mut c_char) -> StlStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = to_c_string(r.json.clone());
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stl_result_free(result: *mut StlResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be a string returned by this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
