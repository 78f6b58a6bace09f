//! C ABI over `ptchain`.
//!
//! Every fallible call returns a [`PtcStatus`]; on failure a message is
//! available from [`ptc_last_error`] until the next call on the same
//! thread. Chains are opaque handles released with [`ptc_chain_free`];
//! strings returned by the library are released with [`ptc_string_free`].
//! Exact inputs are passed as strings (`"3/2"`, `"-4"`).

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ptchain::chain::{ChainSpec, TridiagonalMatrix};
use ptchain::cli::{run_job, JobConfig};
use ptchain::domain::{classify_point, VerdictClass};
use ptchain::eep::{eep_closed_form, verify_eep};
use ptchain::exactpoly::{parse_rational, Rational};
use ptchain::metric::{biorthogonal_decomposition, build_metric, eigen_numeric, unit_weights};
use ptchain::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtcStatus {
    Ok = 0,
    Usage = 1,
    Consistency = 2,
    NotConverged = 3,
    Refused = 4,
    NearDefective = 5,
    Verification = 6,
    Io = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtcVerdict {
    RealSimple = 0,
    RealDegenerate = 1,
    Complex = 2,
}

impl From<VerdictClass> for PtcVerdict {
    fn from(v: VerdictClass) -> Self {
        match v {
            VerdictClass::RealSimple => PtcVerdict::RealSimple,
            VerdictClass::RealDegenerate => PtcVerdict::RealDegenerate,
            VerdictClass::Complex => PtcVerdict::Complex,
        }
    }
}

/// Opaque chain handle.
pub struct PtcChain {
    spec: ChainSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PtcStatus {
    match e {
        Error::Usage(_) | Error::Json(_) => PtcStatus::Usage,
        Error::Consistency(_) => PtcStatus::Consistency,
        Error::NotConverged(_) => PtcStatus::NotConverged,
        Error::Refused { .. } => PtcStatus::Refused,
        Error::NearDefective { .. } => PtcStatus::NearDefective,
        Error::Verification(_) => PtcStatus::Verification,
        Error::Io(_) => PtcStatus::Io,
    }
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), (PtcStatus, String)>) -> PtcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PtcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (PtcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PtcStatus, String) {
    (PtcStatus::NullPointer, format!("{what} is null"))
}

/// Reads `len` exact values from an array of C strings.
unsafe fn read_values(items: *const *const c_char, len: usize, what: &str) -> Result<Vec<Rational>, (PtcStatus, String)> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if items.is_null() {
        return Err(null(what));
    }
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let p = *items.add(i);
        if p.is_null() {
            return Err(null(&format!("{what}[{i}]")));
        }
        let s = CStr::from_ptr(p).to_str().map_err(|_| (PtcStatus::Usage, format!("{what}[{i}] is not UTF-8")))?;
        out.push(parse_rational(s).map_err(lib_err)?);
    }
    Ok(out)
}

unsafe fn store_chain(out: *mut *mut PtcChain, spec: ChainSpec) -> Result<(), (PtcStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(PtcChain { spec }));
    Ok(())
}

/// Message of the last failed call on this thread (empty after success).
/// Owned by the library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ptc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Symmetrized chain of dimension `n` from `n / 2` coupling values listed
/// central first.
///
/// # Safety
/// `couplings` must point to `len` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_symmetrized(n: usize, couplings: *const *const c_char, len: usize, out: *mut *mut PtcChain) -> PtcStatus {
    guard(|| {
        let mut v = read_values(couplings, len, "couplings")?;
        v.reverse();
        store_chain(out, ChainSpec::symmetrized(n, v).map_err(lib_err)?)
    })
}

/// Symmetrized chain from `n / 2` squared couplings listed central first.
///
/// # Safety
/// As for [`ptc_chain_symmetrized`].
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_symmetrized_squared(n: usize, squared: *const *const c_char, len: usize, out: *mut *mut PtcChain) -> PtcStatus {
    guard(|| {
        let v = read_values(squared, len, "squared")?;
        store_chain(out, ChainSpec::symmetrized_squared(n, v).map_err(lib_err)?)
    })
}

/// General PT chain from `len` coupling values in chain order (dimension `len + 1`).
///
/// # Safety
/// As for [`ptc_chain_symmetrized`].
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_general_pt(couplings: *const *const c_char, len: usize, out: *mut *mut PtcChain) -> PtcStatus {
    guard(|| {
        let v = read_values(couplings, len, "couplings")?;
        store_chain(out, ChainSpec::general_pt(v).map_err(lib_err)?)
    })
}

/// Arbitrary tridiagonal matrix of dimension `n`: `n` diagonal entries and
/// `n - 1` super- and sub-diagonal entries.
///
/// # Safety
/// `diag` must hold `n` strings, `sup` and `sub` `n - 1` each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_tridiagonal(
    n: usize,
    diag: *const *const c_char,
    sup: *const *const c_char,
    sub: *const *const c_char,
    out: *mut *mut PtcChain,
) -> PtcStatus {
    guard(|| {
        if n < 2 {
            return Err((PtcStatus::Usage, format!("dimension {n} below 2")));
        }
        let d = read_values(diag, n, "diag")?;
        let p = read_values(sup, n - 1, "sup")?;
        let b = read_values(sub, n - 1, "sub")?;
        let t = TridiagonalMatrix::new(d, p, b).map_err(lib_err)?;
        store_chain(out, ChainSpec::general_tridiagonal(t).map_err(lib_err)?)
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must come from a `ptc_chain_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_free(chain: *mut PtcChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ptc_chain_dim(chain: *const PtcChain) -> usize {
    chain.as_ref().map_or(0, |c| c.spec.n())
}

/// Exact spectral verdict.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptc_classify(chain: *const PtcChain, out: *mut PtcVerdict) -> PtcStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = classify_point(&c.spec).class.into();
        Ok(())
    })
}

/// Numeric eigenvalues, sorted by real part; `re` and `im` must each hold
/// `cap >= dim` doubles.
///
/// # Safety
/// `re` and `im` must be writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ptc_eigenvalues(chain: *const PtcChain, re: *mut f64, im: *mut f64, cap: usize) -> PtcStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let n = c.spec.n();
        if cap < n {
            return Err((PtcStatus::BufferTooSmall, format!("need {n} slots, got {cap}")));
        }
        let ev = eigen_numeric(&c.spec.numeric_matrix()).map_err(lib_err)?;
        for (i, z) in ev.iter().enumerate() {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
        Ok(())
    })
}

/// Closed-form squared EEP couplings (central first) into `out`, which
/// must hold `cap >= n / 2` values.
///
/// # Safety
/// `out` must be writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ptc_eep_squared_couplings(n: usize, out: *mut u64, cap: usize) -> PtcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = eep_closed_form(n).map_err(lib_err)?;
        if cap < sol.half_dim {
            return Err((PtcStatus::BufferTooSmall, format!("need {} slots, got {cap}", sol.half_dim)));
        }
        for (i, x) in sol.squared_couplings.iter().enumerate() {
            *out.add(i) = u64::try_from(x).map_err(|_| (PtcStatus::Usage, format!("coupling {x} exceeds 64 bits")))?;
        }
        Ok(())
    })
}

/// Exact EEP verification; `passed` is set to 1 when every check holds.
/// A failed check is reported through `passed`, not the status.
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptc_eep_verify(n: usize, passed: *mut c_int) -> PtcStatus {
    guard(|| {
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        *passed = c_int::from(verify_eep(n).map_err(lib_err)?.passed());
        Ok(())
    })
}

/// Metric operator at a real-simple point. `weights` may be null (all
/// ones); otherwise it holds `dim` positive values. `theta` receives the
/// `dim * dim` matrix row-major; `residual` and `min_eigenvalue` may be null.
///
/// # Safety
/// Pointers must be valid for the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn ptc_metric(
    chain: *const PtcChain,
    weights: *const f64,
    theta: *mut f64,
    cap: usize,
    residual: *mut f64,
    min_eigenvalue: *mut f64,
) -> PtcStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        if theta.is_null() {
            return Err(null("theta"));
        }
        let n = c.spec.n();
        if cap < n * n {
            return Err((PtcStatus::BufferTooSmall, format!("need {} slots, got {cap}", n * n)));
        }
        let w = if weights.is_null() { unit_weights(n) } else { std::slice::from_raw_parts(weights, n).to_vec() };
        let basis = biorthogonal_decomposition(&c.spec).map_err(lib_err)?;
        let m = build_metric(&basis, &w).map_err(lib_err)?;
        for i in 0..n {
            for j in 0..n {
                *theta.add(i * n + j) = m.theta[(i, j)];
            }
        }
        if let Some(r) = residual.as_mut() {
            *r = m.residual;
        }
        if let Some(e) = min_eigenvalue.as_mut() {
            *e = m.min_eigenvalue_estimate;
        }
        Ok(())
    })
}

/// Runs a job given as a JSON configuration (the `ptchain --config`
/// schema, including `command`). The payload is returned in `out_body`
/// (release with [`ptc_string_free`]) and the command's exit code in
/// `exit_code` (0 success, 2 verification failure).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptc_run_job(config_json: *const c_char, out_body: *mut *mut c_char, exit_code: *mut c_int) -> PtcStatus {
    guard(|| {
        if config_json.is_null() || out_body.is_null() || exit_code.is_null() {
            return Err(null("argument"));
        }
        let src = CStr::from_ptr(config_json).to_str().map_err(|_| (PtcStatus::Usage, "config is not UTF-8".to_string()))?;
        let mut cfg = JobConfig::from_json(src).map_err(lib_err)?;
        cfg.out = None;
        let out = run_job(&cfg).map_err(lib_err)?;
        *exit_code = out.exit_code;
        *out_body = CString::new(out.body).map_err(|_| (PtcStatus::Consistency, "payload contains NUL".to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ptc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ptc_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}
