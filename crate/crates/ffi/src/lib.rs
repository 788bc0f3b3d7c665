//! C ABI for zerolab.
//!
//! Every function returns a [`ZlStatus`]; results are written through out
//! pointers. Objects are opaque handles released with their `_free`
//! function. After a non-`Ok` status, `zl_last_error` returns a message for
//! the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use zerolab::bases::{monomial_basis, szego_orthonormal_basis, Basis, WeightSpec};
use zerolab::config::{parse_ensemble, ConfigFile};
use zerolab::ensembles::EnsembleSpec;
use zerolab::experiment::{bounds_for_degree, draw_polynomial, export_all, run_sweep, ExperimentConfig, SweepResult};
use zerolab::polycore::{find_roots, mahler_measure, sup_norm_circle, Polynomial, RootSet};
use zerolab::zerostats::{erdos_turan_terms_with_sup, sector_discrepancy, AnnularSector};
use zerolab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Hypothesis = 3,
    Conditioning = 4,
    DegenerateDraw = 5,
    EndpointDegeneracy = 6,
    NonConvergence = 7,
    DegenerateEnsemble = 8,
    ErdosTuran = 9,
    Io = 10,
    BufferTooSmall = 11,
    OutOfRange = 12,
    Panic = 13,
    Other = 14,
}

pub struct ZlPolynomial(Polynomial);

pub struct ZlRootSet(RootSet);

pub struct ZlEnsemble(EnsembleSpec);

pub struct ZlBasis(Basis);

pub struct ZlSweep {
    config: ExperimentConfig,
    result: SweepResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> ZlStatus {
    match e.root_cause() {
        Error::Config(_) | Error::Parse { .. } | Error::Fit(_) => ZlStatus::InvalidArgument,
        Error::InfiniteMoment { .. } | Error::Hypothesis(_) => ZlStatus::Hypothesis,
        Error::Conditioning(_) => ZlStatus::Conditioning,
        Error::DegenerateDraw => ZlStatus::DegenerateDraw,
        Error::EndpointDegeneracy => ZlStatus::EndpointDegeneracy,
        Error::NonConvergence { .. } => ZlStatus::NonConvergence,
        Error::DegenerateEnsemble { .. } => ZlStatus::DegenerateEnsemble,
        Error::ErdosTuran { .. } => ZlStatus::ErdosTuran,
        Error::Io { .. } => ZlStatus::Io,
        Error::Trial { .. } => ZlStatus::Other,
    }
}

enum Fail {
    Status(ZlStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ZlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ZlStatus::Ok
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            ZlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(ZlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(ZlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies complex values into caller buffers of capacity `cap`, reporting the needed length in `len`.
unsafe fn write_complex(values: &[Complex64], re: *mut f64, im: *mut f64, cap: usize, len: *mut usize) -> Result<(), Fail> {
    *out(len, "len")? = values.len();
    if cap < values.len() {
        return Err(Fail::Status(
            ZlStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    for (i, v) in values.iter().enumerate() {
        *re.add(i) = v.re;
        *im.add(i) = v.im;
    }
    Ok(())
}

/// Message describing the last failure on this thread; empty after a success.
/// The pointer stays valid until the next zerolab call on the same thread.
#[no_mangle]
pub extern "C" fn zl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a polynomial from `len` coefficients `c_0..c_{len-1}`. `im` may be null for real input.
#[no_mangle]
pub unsafe extern "C" fn zl_polynomial_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    result: *mut *mut ZlPolynomial,
) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        let re = slice(re, len, "re")?;
        let coeffs: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            let im = slice(im, len, "im")?;
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
        };
        *result = boxed(ZlPolynomial(Polynomial::new(coeffs)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_polynomial_free(p: *mut ZlPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn zl_polynomial_degree(p: *const ZlPolynomial, degree: *mut usize) -> ZlStatus {
    guard(|| {
        *out(degree, "degree")? = deref(p, "polynomial")?.0.degree();
        Ok(())
    })
}

/// Copies the coefficients; `len` receives `degree + 1` even when `cap` is too small.
#[no_mangle]
pub unsafe extern "C" fn zl_polynomial_coeffs(
    p: *const ZlPolynomial,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ZlStatus {
    guard(|| write_complex(deref(p, "polynomial")?.0.coeffs(), re, im, cap, len))
}

/// Parses `family` or `family:param`, e.g. `"rademacher"` or `"bernoulli:0.3"`.
#[no_mangle]
pub unsafe extern "C" fn zl_ensemble_parse(name: *const c_char, result: *mut *mut ZlEnsemble) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = boxed(ZlEnsemble(parse_ensemble(string(name, "name")?)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_ensemble_free(e: *mut ZlEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Samples the Kac polynomial of trial `trial`, degree `n`, under `seed`, redrawing degenerate endpoints.
#[no_mangle]
pub unsafe extern "C" fn zl_sample_polynomial(
    ensemble: *const ZlEnsemble,
    n: usize,
    seed: u64,
    trial: u64,
    result: *mut *mut ZlPolynomial,
) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        let mut config = ExperimentConfig::new(deref(ensemble, "ensemble")?.0.clone());
        config.master_seed = seed;
        let draw = draw_polynomial(&config, &monomial_basis(n), n, trial)?;
        *result = boxed(ZlPolynomial(draw.polynomial));
        Ok(())
    })
}

/// Monomial basis of degree `n`.
#[no_mangle]
pub unsafe extern "C" fn zl_basis_monomial(n: usize, result: *mut *mut ZlBasis) -> ZlStatus {
    guard(|| {
        *out(result, "result")? = boxed(ZlBasis(monomial_basis(n)));
        Ok(())
    })
}

/// Orthonormal basis for `w(θ) = a_0 + Σ 2 a_j cos jθ` with `a = fourier[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn zl_basis_szego(
    fourier: *const f64,
    len: usize,
    n: usize,
    result: *mut *mut ZlBasis,
) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        let weight = WeightSpec::trig_poly(slice(fourier, len, "fourier")?.to_vec());
        *result = boxed(ZlBasis(szego_orthonormal_basis(&weight, n)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_basis_free(b: *mut ZlBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Coefficient `b_{j,k}` of `z^j` in `B_k`.
#[no_mangle]
pub unsafe extern "C" fn zl_basis_entry(
    b: *const ZlBasis,
    j: usize,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> ZlStatus {
    guard(|| {
        let b = &deref(b, "basis")?.0;
        if k > b.degree() || j > k {
            return Err(Fail::Status(ZlStatus::OutOfRange, format!("entry ({j}, {k}) outside the table")));
        }
        let v = b.entry(j, k);
        *out(re, "re")? = v.re;
        *out(im, "im")? = v.im;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_find_roots(
    p: *const ZlPolynomial,
    tol: f64,
    max_iter: usize,
    result: *mut *mut ZlRootSet,
) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = boxed(ZlRootSet(find_roots(&deref(p, "polynomial")?.0, tol, max_iter)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_roots_free(r: *mut ZlRootSet) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn zl_roots_get(
    r: *const ZlRootSet,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ZlStatus {
    guard(|| write_complex(&deref(r, "roots")?.0.roots, re, im, cap, len))
}

#[no_mangle]
pub unsafe extern "C" fn zl_roots_reconstruction_error(r: *const ZlRootSet, value: *mut f64) -> ZlStatus {
    guard(|| {
        *out(value, "value")? = deref(r, "roots")?.0.reconstruction_error;
        Ok(())
    })
}

/// Certified interval `lo ≤ ‖P‖_∞ ≤ hi` on the unit circle.
#[no_mangle]
pub unsafe extern "C" fn zl_sup_norm(p: *const ZlPolynomial, grid_factor: usize, lo: *mut f64, hi: *mut f64) -> ZlStatus {
    guard(|| {
        if grid_factor < 8 {
            return Err(Fail::Status(ZlStatus::InvalidArgument, "grid_factor must be at least 8".into()));
        }
        let s = sup_norm_circle(&deref(p, "polynomial")?.0, grid_factor);
        *out(lo, "lo")? = s.lo;
        *out(hi, "hi")? = s.hi;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_mahler_measure(p: *const ZlPolynomial, r: *const ZlRootSet, value: *mut f64) -> ZlStatus {
    guard(|| {
        *out(value, "value")? = mahler_measure(&deref(p, "polynomial")?.0, &deref(r, "roots")?.0);
        Ok(())
    })
}

/// `|N(A_r(α, β))/n − (β − α)/2π|`.
#[no_mangle]
pub unsafe extern "C" fn zl_sector_discrepancy(
    r: *const ZlRootSet,
    radius: f64,
    alpha: f64,
    beta: f64,
    value: *mut f64,
) -> ZlStatus {
    guard(|| {
        let sector = AnnularSector::new(radius, alpha, beta)?;
        *out(value, "value")? = sector_discrepancy(&deref(r, "roots")?.0, &sector);
        Ok(())
    })
}

/// Per-sample Erdős–Turán right-hand side at sector parameter `radius`.
#[no_mangle]
pub unsafe extern "C" fn zl_erdos_turan_rhs(
    p: *const ZlPolynomial,
    r: *const ZlRootSet,
    radius: f64,
    value: *mut f64,
) -> ZlStatus {
    guard(|| {
        let p = &deref(p, "polynomial")?.0;
        let hi = sup_norm_circle(p, zerolab::polycore::DEFAULT_GRID_FACTOR).hi;
        *out(value, "value")? = erdos_turan_terms_with_sup(p, &deref(r, "roots")?.0, radius, hi)?.total();
        Ok(())
    })
}

unsafe fn write_text(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Fail> {
    *out(needed, "needed")? = text.len() + 1;
    if cap < text.len() + 1 {
        return Err(Fail::Status(
            ZlStatus::BufferTooSmall,
            format!("buffer holds {cap} bytes, {} needed", text.len() + 1),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

/// Bound reports for a monomial Kac polynomial of degree `n`, one JSON object per line.
/// `needed` receives the buffer size including the terminating NUL.
#[no_mangle]
pub unsafe extern "C" fn zl_bounds_json(
    ensemble: *const ZlEnsemble,
    n: usize,
    t: f64,
    r: f64,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> ZlStatus {
    guard(|| {
        let mut config = ExperimentConfig::new(deref(ensemble, "ensemble")?.0.clone());
        config.degrees = vec![n];
        config.t = t;
        config.r = r;
        let text: String = bounds_for_degree(&config, n)?
            .reports()
            .iter()
            .map(|rep| rep.to_json() + "\n")
            .collect();
        write_text(&text, buf, cap, needed)
    })
}

/// Runs a sweep described by configuration text (the same format as the CLI's `--config` files).
/// `threads = 0` uses all cores.
#[no_mangle]
pub unsafe extern "C" fn zl_sweep_run(config_text: *const c_char, threads: usize, result: *mut *mut ZlSweep) -> ZlStatus {
    guard(|| {
        let result = out(result, "result")?;
        let config = ConfigFile::parse(string(config_text, "config_text")?)?.to_experiment()?;
        let sweep = run_sweep(&config, threads)?;
        *result = boxed(ZlSweep { config, result: sweep });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zl_sweep_free(s: *mut ZlSweep) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn zl_sweep_rows(s: *const ZlSweep, rows: *mut usize) -> ZlStatus {
    guard(|| {
        *out(rows, "rows")? = deref(s, "sweep")?.result.table.rows.len();
        Ok(())
    })
}

/// Degree, mean discrepancy and standard error of row `i`.
#[no_mangle]
pub unsafe extern "C" fn zl_sweep_row(
    s: *const ZlSweep,
    i: usize,
    n: *mut usize,
    mean: *mut f64,
    stderr: *mut f64,
) -> ZlStatus {
    guard(|| {
        let rows = &deref(s, "sweep")?.result.table.rows;
        let row = rows
            .get(i)
            .ok_or_else(|| Fail::Status(ZlStatus::OutOfRange, format!("row {i} of {}", rows.len())))?;
        *out(n, "n")? = row.n;
        *out(mean, "mean")? = row.mean_discrepancy;
        *out(stderr, "stderr")? = row.stderr;
        Ok(())
    })
}

/// Writes sweep.csv, records.csv, trials.csv and summary.json into `dir`.
#[no_mangle]
pub unsafe extern "C" fn zl_sweep_export(s: *const ZlSweep, dir: *const c_char) -> ZlStatus {
    guard(|| {
        let s = deref(s, "sweep")?;
        export_all(&s.config, &s.result, Path::new(string(dir, "dir")?))?;
        Ok(())
    })
}
