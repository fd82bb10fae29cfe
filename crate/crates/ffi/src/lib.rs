//! C ABI over `histrep`.
//!
//! Functionals live behind the opaque [`HrFunctional`] handle. Every fallible
//! call returns an [`HrStatus`]; on failure the message is available from
//! [`hr_last_error`] on the same thread. Complex arrays are passed as separate
//! real and imaginary buffers in row-major order; a null imaginary buffer
//! means all zeros.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use histrep::decoherence::check_axioms;
use histrep::harness::{parse_scenario, run_cli};
use histrep::ils::extract_ils;
use histrep::probes::tracial_bound_probe;
use histrep::{ComplexMatrix, DecoherenceFunctional, Error, Projection, Vector};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    /// The computation ran and found a violated check.
    Violation = 1,
    InvalidInput = 2,
    /// Dimension below three where the representation theorems apply.
    DimensionExcluded = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

/// Opaque decoherence functional.
pub struct HrFunctional {
    inner: DecoherenceFunctional,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HrAxiomReport {
    pub hermiticity_residual: f64,
    pub positivity_min: f64,
    pub normalization_residual: f64,
    pub orthoadditivity_residual: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> HrStatus {
    match err {
        Error::DimensionExcluded { .. } => HrStatus::DimensionExcluded,
        Error::ConditionViolation { .. } | Error::NotTraciallyBounded { .. } | Error::NonHermitianGram { .. } => {
            HrStatus::Violation
        }
        _ => HrStatus::InvalidInput,
    }
}

fn fail(err: Error) -> HrStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null(what: &str) -> HrStatus {
    set_error(&format!("null pointer: {what}"));
    HrStatus::NullPointer
}

fn guard(f: impl FnOnce() -> HrStatus) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            HrStatus::Internal
        }
    }
}

/// Reads an `n × n` row-major complex matrix.
unsafe fn read_matrix(re: *const f64, im: *const f64, n: usize) -> Result<ComplexMatrix, HrStatus> {
    if re.is_null() {
        return Err(null("real part"));
    }
    let len = n.checked_mul(n).ok_or_else(|| fail(Error::InvalidDimension(n)))?;
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
    let rows = |s: &[f64]| s.chunks(n.max(1)).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let re_rows = rows(re);
    let im_rows = im.map(rows).unwrap_or_else(|| vec![vec![0.0; n]; n]);
    ComplexMatrix::from_re_im(&re_rows, &im_rows).map_err(fail)
}

unsafe fn read_projection(re: *const f64, im: *const f64, n: usize) -> Result<Projection, HrStatus> {
    Projection::new(read_matrix(re, im, n)?).map_err(fail)
}

fn boxed(out: *mut *mut HrFunctional, inner: DecoherenceFunctional) -> HrStatus {
    // SAFETY: callers check `out` for null before calling.
    unsafe { *out = Box::into_raw(Box::new(HrFunctional { inner })) };
    HrStatus::Ok
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a functional from scenario JSON text.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hr_functional_from_scenario(json: *const c_char, out: *mut *mut HrFunctional) -> HrStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(Error::InvalidArgument("scenario is not UTF-8".into())),
        };
        match parse_scenario(text).and_then(|s| s.build()) {
            Ok(built) => boxed(out, built.functional),
            Err(e) => fail(e),
        }
    })
}

/// `d(p,q) = ⟨pψ, qψ⟩` for a unit vector `ψ` of length `dim`.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hr_functional_pure_state(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut HrFunctional,
) -> HrStatus {
    guard(|| {
        if re.is_null() {
            return null("re");
        }
        if out.is_null() {
            return null("out");
        }
        let re = std::slice::from_raw_parts(re, dim);
        let zeros = vec![0.0; dim];
        let im = if im.is_null() { &zeros[..] } else { std::slice::from_raw_parts(im, dim) };
        match Vector::from_re_im(re, im).and_then(DecoherenceFunctional::pure_state) {
            Ok(d) => boxed(out, d),
            Err(e) => fail(e),
        }
    })
}

/// `d(p,q) = tr((p⊗q)X)` for `X` of size `dim² × dim²`. The operator
/// conditions are checked; a failing operator yields `Violation`.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim⁴` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hr_functional_operator(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut HrFunctional,
) -> HrStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let x = match read_matrix(re, im, dim * dim) {
            Ok(x) => x,
            Err(s) => return s,
        };
        match histrep::ils::df_from_operator(x) {
            Ok(d) => boxed(out, d),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `f` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_functional_free(f: *mut HrFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_functional_dim(f: *const HrFunctional) -> usize {
    f.as_ref().map_or(0, |f| f.inner.dim())
}

/// `d(p,q)` for projections given as `dim × dim` row-major matrices.
///
/// # Safety
/// Matrix buffers must hold `dim²` doubles; `out_re`/`out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hr_evaluate(
    f: *const HrFunctional,
    p_re: *const f64,
    p_im: *const f64,
    q_re: *const f64,
    q_im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HrStatus {
    guard(|| {
        let Some(f) = f.as_ref() else { return null("functional") };
        if out_re.is_null() || out_im.is_null() {
            return null("out");
        }
        let n = f.inner.dim();
        let p = match read_projection(p_re, p_im, n) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let q = match read_projection(q_re, q_im, n) {
            Ok(q) => q,
            Err(s) => return s,
        };
        match f.inner.evaluate(&p, &q) {
            Ok(v) => {
                *out_re = v.re;
                *out_im = v.im;
                HrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Sampled axiom check. Returns `Violation` when any axiom fails; the report
/// is filled either way.
///
/// # Safety
/// `f` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hr_check_axioms(
    f: *const HrFunctional,
    samples: usize,
    seed: u64,
    tolerance: f64,
    out: *mut HrAxiomReport,
) -> HrStatus {
    guard(|| {
        let Some(f) = f.as_ref() else { return null("functional") };
        if out.is_null() {
            return null("out");
        }
        let r = check_axioms(&f.inner, samples, seed, tolerance);
        *out = HrAxiomReport {
            hermiticity_residual: r.hermiticity_residual,
            positivity_min: r.positivity_min,
            normalization_residual: r.normalization_residual,
            orthoadditivity_residual: r.orthoadditivity_residual,
            passed: r.passed(),
        };
        if r.passed() {
            HrStatus::Ok
        } else {
            set_error("axiom check failed");
            HrStatus::Violation
        }
    })
}

/// Writes the `dim² × dim²` ILS operator row-major into `out_re`/`out_im`
/// (each of length `len ≥ dim⁴`) and its trace norm into `trace_norm`.
///
/// # Safety
/// Output buffers must hold `len` doubles; `trace_norm` may be null.
#[no_mangle]
pub unsafe extern "C" fn hr_extract_ils(
    f: *const HrFunctional,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
    trace_norm: *mut f64,
) -> HrStatus {
    guard(|| {
        let Some(f) = f.as_ref() else { return null("functional") };
        if out_re.is_null() || out_im.is_null() {
            return null("out");
        }
        let n = f.inner.dim() * f.inner.dim();
        if len < n * n {
            set_error(&format!("buffer holds {len} entries, need {}", n * n));
            return HrStatus::BufferTooSmall;
        }
        let x = match extract_ils(&f.inner) {
            Ok(x) => x,
            Err(e) => return fail(e),
        };
        let re = std::slice::from_raw_parts_mut(out_re, n * n);
        let im = std::slice::from_raw_parts_mut(out_im, n * n);
        for r in 0..n {
            for c in 0..n {
                re[r * n + c] = x.x_op[(r, c)].re;
                im[r * n + c] = x.x_op[(r, c)].im;
            }
        }
        if !trace_norm.is_null() {
            *trace_norm = x.trace_norm;
        }
        HrStatus::Ok
    })
}

/// Sampled `sup |β(p_ξ)|` over unit vectors of the algebraic tensor product.
///
/// # Safety
/// `f` must be a live handle and `out_sup` valid.
#[no_mangle]
pub unsafe extern "C" fn hr_tracial_bound_probe(
    f: *const HrFunctional,
    samples: usize,
    seed: u64,
    out_sup: *mut f64,
) -> HrStatus {
    guard(|| {
        let Some(f) = f.as_ref() else { return null("functional") };
        if out_sup.is_null() {
            return null("out_sup");
        }
        match tracial_bound_probe(&f.inner, samples, seed) {
            Ok(p) => {
                *out_sup = p.sup;
                HrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the command-line interface with `argv` (excluding the program
/// name). The primary output is returned in `out_text`, to be released with
/// [`hr_string_free`]; the process-style exit code goes to `exit_code`.
///
/// # Safety
/// `argv` must hold `argc` valid NUL-terminated strings; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn hr_run_command(
    argv: *const *const c_char,
    argc: usize,
    out_text: *mut *mut c_char,
    exit_code: *mut i32,
) -> HrStatus {
    guard(|| {
        if out_text.is_null() || exit_code.is_null() {
            return null("out");
        }
        if argv.is_null() && argc > 0 {
            return null("argv");
        }
        let mut args = vec!["histrep".to_string()];
        for i in 0..argc {
            let a = *argv.add(i);
            if a.is_null() {
                return null("argv entry");
            }
            match CStr::from_ptr(a).to_str() {
                Ok(s) => args.push(s.to_string()),
                Err(_) => return fail(Error::InvalidArgument(format!("argument {i} is not UTF-8"))),
            }
        }
        let result = run_cli(args);
        if !result.stderr.is_empty() {
            set_error(result.stderr.trim_end());
        }
        let text = if result.stdout.is_empty() { result.stderr } else { result.stdout };
        *out_text = CString::new(text.replace('\0', " ")).unwrap_or_default().into_raw();
        *exit_code = result.exit_code;
        HrStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
