//! C ABI over the `zetagaps` library.
//!
//! Every function returns a [`ZgStatus`]; results go through out-pointers.
//! On failure the message is available from [`zg_last_error_message`] on the
//! same thread until the next call into the library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use zetagaps::error::Error;
use zetagaps::{analytic, gaps, gue, windows, xi, OrdinateTable, TextFormat};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZgStatus {
    Ok = 0,
    Domain = 1,
    Argument = 2,
    Parse = 3,
    Validation = 4,
    EmptyInput = 5,
    Coverage = 6,
    Convergence = 7,
    Numeric = 8,
    Pole = 9,
    DegenerateInterval = 10,
    Integrity = 11,
    Fetch = 12,
    Io = 13,
    NullPointer = 14,
    Panic = 15,
}

/// Opaque handle to an immutable ordinate table.
pub struct ZgTable {
    inner: OrdinateTable,
}

/// Run counts at one height.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZgRunSummary {
    pub n_total: usize,
    pub n_runs: usize,
}

/// Critical point between `γ_n` and `γ_{n+1}`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZgCriticalPoint {
    pub n: usize,
    pub gamma_star: f64,
    pub left: f64,
    pub right: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> ZgStatus {
    match err {
        Error::Domain(_) => ZgStatus::Domain,
        Error::Argument(_) => ZgStatus::Argument,
        Error::Parse { .. } => ZgStatus::Parse,
        Error::Validation(_) => ZgStatus::Validation,
        Error::EmptyInput => ZgStatus::EmptyInput,
        Error::Coverage(_) => ZgStatus::Coverage,
        Error::Convergence(_) => ZgStatus::Convergence,
        Error::Numeric(_) => ZgStatus::Numeric,
        Error::Pole { .. } => ZgStatus::Pole,
        Error::DegenerateInterval(_) => ZgStatus::DegenerateInterval,
        Error::Integrity(_) => ZgStatus::Integrity,
        Error::Fetch(_) => ZgStatus::Fetch,
        Error::Io(_) => ZgStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), ZgFailure>>(f: F) -> ZgStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZgStatus::Ok,
        Ok(Err(ZgFailure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(ZgFailure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            ZgStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic");
            ZgStatus::Panic
        }
    }
}

enum ZgFailure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for ZgFailure {
    fn from(e: Error) -> Self {
        ZgFailure::Lib(e)
    }
}

unsafe fn table_ref<'a>(table: *const ZgTable) -> Result<&'a OrdinateTable, ZgFailure> {
    table
        .as_ref()
        .map(|t| &t.inner)
        .ok_or(ZgFailure::Null("table"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), ZgFailure> {
    if out.is_null() {
        return Err(ZgFailure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn zg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a table from `n` nondecreasing positive ordinates.
///
/// # Safety
/// `ordinates` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_table_from_ordinates(
    ordinates: *const f64,
    n: usize,
    out: *mut *mut ZgTable,
) -> ZgStatus {
    guard(|| {
        if ordinates.is_null() {
            return Err(ZgFailure::Null("ordinates"));
        }
        let xs = std::slice::from_raw_parts(ordinates, n).to_vec();
        let inner = OrdinateTable::from_ordinates(xs, "ffi", 17)?;
        write_out(out, Box::into_raw(Box::new(ZgTable { inner })), "out")
    })
}

/// Loads a one-ordinate-per-line text table or a binary cache file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_table_load(path: *const c_char, out: *mut *mut ZgTable) -> ZgStatus {
    guard(|| {
        if path.is_null() {
            return Err(ZgFailure::Null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Error::Argument(format!("path is not UTF-8: {e}")))?;
        let inner = zetagaps::zeros::load_table(Path::new(p), TextFormat::Plain)?;
        write_out(out, Box::into_raw(Box::new(ZgTable { inner })), "out")
    })
}

/// Releases a table. Null is ignored.
///
/// # Safety
/// `table` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn zg_table_free(table: *mut ZgTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of ordinates; 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zg_table_len(table: *const ZgTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.len())
}

/// `N(t)`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_count_upto(table: *const ZgTable, t: f64, out: *mut usize) -> ZgStatus {
    guard(|| {
        let v = table_ref(table)?.count_upto(t)?;
        write_out(out, v, "out")
    })
}

/// `S(t) = N(t) − main term`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_s_of_t(table: *const ZgTable, t: f64, out: *mut f64) -> ZgStatus {
    guard(|| {
        let v = table_ref(table)?.s_of_t(t)?;
        write_out(out, v, "out")
    })
}

/// `N(T)` and `N_r(T, c)`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_count_runs(
    table: *const ZgTable,
    r: usize,
    c: f64,
    t: f64,
    out: *mut ZgRunSummary,
) -> ZgStatus {
    guard(|| {
        let rep = gaps::count_runs(table_ref(table)?, r, c, t)?;
        write_out(
            out,
            ZgRunSummary {
                n_total: rep.n_total,
                n_runs: rep.n_runs,
            },
            "out",
        )
    })
}

/// `|S_1|, …, |S_r|` into `out[0..r]`; `out_len` must be at least `r`.
///
/// # Safety
/// `table` must be a live handle; `out` must hold `out_len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn zg_partition_sj(
    table: *const ZgTable,
    r: usize,
    c: f64,
    t: f64,
    out: *mut usize,
    out_len: usize,
) -> ZgStatus {
    guard(|| {
        let sizes = gaps::partition_sj(table_ref(table)?, r, c, t)?;
        if out.is_null() {
            return Err(ZgFailure::Null("out"));
        }
        if out_len < sizes.len() {
            return Err(Error::Argument(format!(
                "output buffer holds {out_len}, need {}",
                sizes.len()
            ))
            .into());
        }
        ptr::copy_nonoverlapping(sizes.as_ptr(), out, sizes.len());
        Ok(())
    })
}

/// Empirical pair correlation at `c` below height `t`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_pair_correlation(
    table: *const ZgTable,
    c: f64,
    t: f64,
    out: *mut f64,
) -> ZgStatus {
    guard(|| {
        let v = gaps::empirical_pair_correlation(table_ref(table)?, c, t)?;
        write_out(out, v, "out")
    })
}

/// Fraction of `γ_n ≤ t` with `γ_{n+ell} − γ_n ≤ 2πc/log t`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_neighbor_spacing_cdf(
    table: *const ZgTable,
    ell: usize,
    c: f64,
    t: f64,
    out: *mut f64,
) -> ZgStatus {
    guard(|| {
        let v = gaps::neighbor_spacing_cdf(table_ref(table)?, ell, c, t)?;
        write_out(out, v, "out")
    })
}

/// `∫_T^{2T} (N(t + h) − N(t) − m)² dt`.
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_variance_integral(
    table: *const ZgTable,
    t: f64,
    h: f64,
    m: f64,
    out: *mut f64,
) -> ZgStatus {
    guard(|| {
        let v = windows::variance_integral(table_ref(table)?, t, h, m)?;
        write_out(out, v, "out")
    })
}

/// Critical point between `γ_n` and `γ_{n+1}` (1-based `n`).
///
/// # Safety
/// `table` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zg_find_gamma_star(
    table: *const ZgTable,
    n: usize,
    delta: f64,
    tol: f64,
    out: *mut ZgCriticalPoint,
) -> ZgStatus {
    guard(|| {
        let cfg = xi::ZeroSumConfig::new(delta, false)?;
        let cp = xi::find_gamma_star(table_ref(table)?, n, &cfg, tol)?;
        write_out(
            out,
            ZgCriticalPoint {
                n: cp.n,
                gamma_star: cp.gamma_star,
                left: cp.bracket.0,
                right: cp.bracket.1,
                residual: cp.residual,
            },
            "out",
        )
    })
}

/// Pair-correlation integral `f(alpha)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_pair_correlation_f(alpha: f64, tol: f64, out: *mut f64) -> ZgStatus {
    guard(|| {
        let v = analytic::f(alpha, tol)?.value;
        write_out(out, v, "out")
    })
}

/// `c_r` with `f(c_r) = 1/r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_solve_cr(r: u32, tol: f64, out: *mut f64) -> ZgStatus {
    guard(|| {
        let v = analytic::solve_cr(r, tol)?;
        write_out(out, v, "out")
    })
}

/// Sine-kernel gap probability `E(0; t)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_fredholm_det(t: f64, quad_order: usize, out: *mut f64) -> ZgStatus {
    guard(|| {
        let v = gue::fredholm_det(t, quad_order)?;
        write_out(out, v, "out")
    })
}

/// Sine-kernel nearest-neighbor spacing CDF at `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zg_nn_cdf(c: f64, out: *mut f64) -> ZgStatus {
    guard(|| {
        let v = gue::nn_cdf(c)?;
        write_out(out, v, "out")
    })
}
