//! C ABI for the doubling eigensolver.
//!
//! Problems and solutions are opaque handles released with their `_free`
//! function. Every fallible call returns a [`BseStatus`]; on failure
//! [`bse_last_error_message`] describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bse_doubling::doubling::{self, RemedyPolicy, SolverConfig};
use bse_doubling::extract;
use bse_doubling::matkernel::{c64, CMatrix, STRUCTURE_TOL};
use bse_doubling::problem::{self, BseHamiltonian, GeneratorKind, GeneratorSpec};
use bse_doubling::Error;

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Structure = 5,
    Numerical = 6,
    /// The solution handle is still written and holds the partial result.
    NotConverged = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BseRemedy {
    Auto = 0,
    DctFirst = 1,
    TrirecOnly = 2,
}

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BseGeneratorKind {
    RandomComplex = 0,
    RandomReal = 1,
    DefectiveFixture = 2,
    BreakdownFixture = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BseSolverConfig {
    pub conv_tol: f64,
    pub max_iter: u32,
    pub breakdown_tol: f64,
    /// A [`BseRemedy`] value.
    pub remedy: i32,
    pub beta: f64,
    pub kappa: f64,
    pub seed: u64,
    pub rho: f64,
    /// Shift α; zero or negative selects it automatically.
    pub alpha: f64,
    /// Nonzero applies a Newton correction to the converged limit.
    pub refine: i32,
}

/// Opaque problem handle.
pub struct BseProblem(BseHamiltonian);

/// Opaque solution handle.
pub struct BseSolution {
    values: Vec<c64>,
    iterations: u32,
    converged: bool,
    alpha: f64,
    residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> BseStatus {
    match e {
        Error::Io { .. } => BseStatus::Io,
        Error::Parse { .. } => BseStatus::Parse,
        Error::StructureViolation { .. } | Error::DimensionMismatch(_) => BseStatus::Structure,
        Error::NotConverged(_) => BseStatus::NotConverged,
        Error::InvalidArgument(_)
        | Error::NonPositive { .. }
        | Error::InvalidRho(_)
        | Error::UnknownKind(_)
        | Error::NonFinite
        | Error::MissingDipoles => BseStatus::InvalidArgument,
        _ => BseStatus::Numerical,
    }
}

/// Run `f`, recording any error or panic for [`bse_last_error_message`].
fn guard(f: impl FnOnce() -> Result<BseStatus, (BseStatus, String)>) -> BseStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BseStatus::Panic
        }
    }
}

fn fail(e: Error) -> (BseStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BseStatus, String) {
    (BseStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<String, (BseStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (BseStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn read_matrix(n: usize, re: *const f64, im: *const f64, what: &str) -> Result<CMatrix, (BseStatus, String)> {
    if re.is_null() {
        return Err(null(what));
    }
    let len = n * n;
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(im, len))
    };
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let k = j * n + i;
        c64::new(re[k], im.map_or(0.0, |v| v[k]))
    }))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Build a problem from column-major `n×n` blocks. Imaginary parts may be null.
///
/// # Safety
/// Non-null array arguments must point to `n*n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_new(
    n: usize,
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    out: *mut *mut BseProblem,
) -> BseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err((BseStatus::InvalidArgument, "n must be positive".into()));
        }
        let a = read_matrix(n, a_re, a_im, "a_re")?;
        let b = read_matrix(n, b_re, b_im, "b_re")?;
        let p = problem::validate(a, b, STRUCTURE_TOL).map_err(fail)?;
        store(out, BseProblem(p));
        Ok(BseStatus::Ok)
    })
}

/// Generate a test problem of the given [`BseGeneratorKind`]. Fixture kinds
/// ignore `n`, `seed` and `gap`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_generate(
    kind: i32,
    n: usize,
    seed: u64,
    gap: f64,
    out: *mut *mut BseProblem,
) -> BseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            k if k == BseGeneratorKind::RandomComplex as i32 => GeneratorKind::RandomComplex,
            k if k == BseGeneratorKind::RandomReal as i32 => GeneratorKind::RandomReal,
            k if k == BseGeneratorKind::DefectiveFixture as i32 => GeneratorKind::DefectiveFixture,
            k if k == BseGeneratorKind::BreakdownFixture as i32 => GeneratorKind::BreakdownFixture,
            k => return Err((BseStatus::InvalidArgument, format!("unknown generator kind {k}"))),
        };
        let p = problem::generate(&GeneratorSpec::new(kind, n, seed).with_gap(gap)).map_err(fail)?;
        store(out, BseProblem(p));
        Ok(BseStatus::Ok)
    })
}

/// Load `A` and `B` from Matrix Market files.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_load_mtx(
    path_a: *const c_char,
    path_b: *const c_char,
    out: *mut *mut BseProblem,
) -> BseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (pa, pb) = (path_arg(path_a, "path_a")?, path_arg(path_b, "path_b")?);
        let p = problem::load_mtx(pa, pb, STRUCTURE_TOL).map_err(fail)?;
        store(out, BseProblem(p));
        Ok(BseStatus::Ok)
    })
}

/// Write `A` and `B` as Matrix Market files.
///
/// # Safety
/// `p` must be a live handle; paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_save_mtx(
    p: *const BseProblem,
    path_a: *const c_char,
    path_b: *const c_char,
) -> BseStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let (pa, pb) = (path_arg(path_a, "path_a")?, path_arg(path_b, "path_b")?);
        problem::save_mtx(&p.0, pa, pb, &[]).map_err(fail)?;
        Ok(BseStatus::Ok)
    })
}

/// Order `n` of the blocks, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_n(p: *const BseProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.n())
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bse_problem_free(p: *mut BseProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub extern "C" fn bse_solver_config_default() -> BseSolverConfig {
    let d = SolverConfig::default();
    BseSolverConfig {
        conv_tol: d.conv_tol,
        max_iter: d.max_iter,
        breakdown_tol: d.breakdown_tol,
        remedy: BseRemedy::Auto as i32,
        beta: d.beta,
        kappa: d.kappa,
        seed: d.seed,
        rho: d.rho,
        alpha: 0.0,
        refine: i32::from(d.refine),
    }
}

fn to_config(c: &BseSolverConfig) -> Result<SolverConfig, (BseStatus, String)> {
    let remedy = match c.remedy {
        r if r == BseRemedy::Auto as i32 => RemedyPolicy::Auto,
        r if r == BseRemedy::DctFirst as i32 => RemedyPolicy::DctFirst,
        r if r == BseRemedy::TrirecOnly as i32 => RemedyPolicy::TrirecOnly,
        r => return Err((BseStatus::InvalidArgument, format!("unknown remedy {r}"))),
    };
    Ok(SolverConfig {
        conv_tol: c.conv_tol,
        max_iter: c.max_iter,
        breakdown_tol: c.breakdown_tol,
        remedy,
        beta: c.beta,
        kappa: c.kappa,
        seed: c.seed,
        rho: c.rho,
        alpha: (c.alpha > 0.0).then_some(c.alpha),
        refine: c.refine != 0,
        ..SolverConfig::default()
    })
}

/// Solve the problem. A null `cfg` uses the defaults. On `NotConverged` the
/// handle in `out` holds the partial result and must still be freed.
///
/// # Safety
/// `p` must be a live handle; `cfg` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bse_solve(
    p: *const BseProblem,
    cfg: *const BseSolverConfig,
    out: *mut *mut BseSolution,
) -> BseStatus {
    guard(|| {
        let p = &p.as_ref().ok_or_else(|| null("problem"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = to_config(&cfg.as_ref().copied().unwrap_or_else(|| bse_solver_config_default()))?;
        let (solution, converged) = match doubling::run(p, &cfg) {
            Ok(s) => (s, true),
            Err(Error::NotConverged(s)) => (*s, false),
            Err(e) => return Err(fail(e)),
        };
        let report = &solution.report;
        let (values, residual) = match extract::eigenpairs(p, &report.f_limit) {
            Ok(r) => {
                let res = extract::residuals(p, &r, None).map_or(f64::NAN, |x| x.decomposition_residual);
                (r.full_values, res)
            }
            Err(_) => (Vec::new(), f64::NAN),
        };
        store(
            out,
            BseSolution {
                values,
                iterations: report.iterations,
                converged,
                alpha: report.alpha(),
                residual,
            },
        );
        if converged {
            Ok(BseStatus::Ok)
        } else {
            Err((
                BseStatus::NotConverged,
                format!("not converged after {} iterations", report.iterations),
            ))
        }
    })
}

/// Number of eigenvalues held (`2n`, or 0 if extraction failed).
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_len(s: *const BseSolution) -> usize {
    s.as_ref().map_or(0, |s| s.values.len())
}

/// Copy the eigenvalues into `re_out` / `im_out`, each of length `len`.
///
/// # Safety
/// `s` must be a live handle; the outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_eigenvalues(
    s: *const BseSolution,
    re_out: *mut f64,
    im_out: *mut f64,
    len: usize,
) -> BseStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if re_out.is_null() || im_out.is_null() {
            return Err(null("output buffer"));
        }
        if len < s.values.len() {
            return Err((
                BseStatus::BufferTooSmall,
                format!("need {} entries, got {len}", s.values.len()),
            ));
        }
        for (k, z) in s.values.iter().enumerate() {
            *re_out.add(k) = z.re;
            *im_out.add(k) = z.im;
        }
        Ok(BseStatus::Ok)
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_iterations(s: *const BseSolution) -> u32 {
    s.as_ref().map_or(0, |s| s.iterations)
}

/// 1 if converged, 0 otherwise.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_converged(s: *const BseSolution) -> i32 {
    s.as_ref().map_or(0, |s| i32::from(s.converged))
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_alpha(s: *const BseSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.alpha)
}

/// Relative decomposition residual; NaN if unavailable.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_residual(s: *const BseSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.residual)
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bse_solution_free(s: *mut BseSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bse_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn bse_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
