//! C interface to `polyens`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every function returns a [`PolyensStatus`];
//! on failure [`polyens_last_error_message`] describes the problem. Results
//! are written through out-pointers only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polyens::charpoly::{moment_gap, zeros};
use polyens::config::{AnyEnsemble, EnsembleConfig};
use polyens::recurrence::TableJson;
use polyens::rng::replica_rng;
use polyens::sampler::{sample, SamplerConfig};
use polyens::variance::variance_power;
use polyens::{Error, RecurrenceTable, Scalar};

/// A recurrence coefficient table.
pub struct PolyensTable(RecurrenceTable);

/// An ensemble with its reference measure and kernel.
pub struct PolyensEnsemble(AnyEnsemble);

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyensStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Range = 3,
    Numerical = 4,
    Model = 5,
    Unsupported = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PolyensStatus {
    use PolyensStatus as S;
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::UnknownName(_)
        | Error::Parameter(_)
        | Error::InvalidInterval { .. }
        | Error::InvalidMeasure(_) => S::InvalidArgument,
        Error::OutOfRange { .. } | Error::Rank { .. } | Error::CombinatorialLimit { .. } | Error::TooFewReplicas { .. } => {
            S::Range
        }
        Error::PositivityViolation { .. }
        | Error::InvalidTilt { .. }
        | Error::NegativeDensity { .. }
        | Error::BoundViolated { .. }
        | Error::DegenerateRecurrence { .. } => S::Model,
        Error::Unsupported(_) | Error::UnsupportedPoint(_) => S::Unsupported,
        _ => S::Numerical,
    }
}

struct Failure(PolyensStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PolyensStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PolyensStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PolyensStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PolyensStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PolyensStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn polyens_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn polyens_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Classical table ("gue", "chebyshev" or "uniform-circle") with `pad`
/// coefficients beyond index N.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polyens_table_classical(
    name: *const c_char,
    n: usize,
    pad: usize,
    out: *mut *mut PolyensTable,
) -> PolyensStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let t = match name {
            "uniform-circle" => RecurrenceTable::unit_circle(n, pad)?,
            other => RecurrenceTable::classical(other, n, pad)?,
        };
        write(out, Box::into_raw(Box::new(PolyensTable(t))), "out")
    })
}

/// Table from its JSON form, e.g. `{"form":"op","N":3,"a":[...],"b":[...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polyens_table_from_json(json: *const c_char, out: *mut *mut PolyensTable) -> PolyensStatus {
    guard(|| {
        let parsed: TableJson = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        let t = RecurrenceTable::from_json(&parsed, None)?;
        write(out, Box::into_raw(Box::new(PolyensTable(t))), "out")
    })
}

/// # Safety
/// `table` must come from this library and not be freed twice; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn polyens_table_free(table: *mut PolyensTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_table_size(table: *const PolyensTable, out: *mut usize) -> PolyensStatus {
    guard(|| write(out, handle(table, "table")?.0.n(), "out"))
}

/// `(1/N) Σ_{k<N} ⟨x^l P_k, Q_k⟩`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_mean_moment(table: *const PolyensTable, l: usize, out: *mut f64) -> PolyensStatus {
    guard(|| write(out, handle(table, "table")?.0.mean_moment(l)?, "out"))
}

/// `⟨x^l P_k, Q_m⟩`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_path_sum_moment(
    table: *const PolyensTable,
    l: usize,
    k: usize,
    m: usize,
    out: *mut f64,
) -> PolyensStatus {
    guard(|| write(out, handle(table, "table")?.0.path_sum_moment(l, k, m)?, "out"))
}

/// Exact `Var[Σ x_i^l]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_variance_power(table: *const PolyensTable, l: usize, out: *mut f64) -> PolyensStatus {
    guard(|| write(out, variance_power(&handle(table, "table")?.0, l)?, "out"))
}

/// Gap between the l-th mean moment and the l-th zero moment, and its bound.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_moment_gap(
    table: *const PolyensTable,
    l: usize,
    gap: *mut f64,
    bound: *mut f64,
) -> PolyensStatus {
    guard(|| {
        let g = moment_gap(&handle(table, "table")?.0, l)?;
        if bound.is_null() {
            return Err(null("bound"));
        }
        write(gap, g.gap, "gap")?;
        write(bound, g.bound, "bound")
    })
}

/// Zeros of the average characteristic polynomial. `re` and `im` must hold
/// `len ≥ N` values.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn polyens_zeros(
    table: *const PolyensTable,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PolyensStatus {
    guard(|| {
        let t = &handle(table, "table")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        if len < t.n() {
            return Err(Failure(PolyensStatus::Range, format!("buffer holds {len} values, need {}", t.n())));
        }
        for (i, z) in zeros(t)?.zeros().iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// Ensemble from a JSON config (classical, explicit measure, or tilted).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polyens_ensemble_from_json(
    json: *const c_char,
    out: *mut *mut PolyensEnsemble,
) -> PolyensStatus {
    guard(|| {
        let e = EnsembleConfig::from_json_str(str_arg(json, "json")?)?.build()?;
        write(out, Box::into_raw(Box::new(PolyensEnsemble(e))), "out")
    })
}

/// # Safety
/// `ensemble` must come from this library and not be freed twice; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn polyens_ensemble_free(ensemble: *mut PolyensEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn polyens_ensemble_size(ensemble: *const PolyensEnsemble, out: *mut usize) -> PolyensStatus {
    guard(|| write(out, handle(ensemble, "ensemble")?.0.n(), "out"))
}

/// One exact sample from stream `replica` of `seed`, in drawing order.
/// Real ensembles write zeros to `im`.
///
/// # Safety
/// `re` and `im` must point to `len ≥ N` writable doubles; `log_density`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn polyens_sample(
    ensemble: *const PolyensEnsemble,
    seed: u64,
    replica: u64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    log_density: *mut f64,
) -> PolyensStatus {
    guard(|| {
        let e = &handle(ensemble, "ensemble")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        if len < e.n() {
            return Err(Failure(PolyensStatus::Range, format!("buffer holds {len} values, need {}", e.n())));
        }
        let cfg = SamplerConfig {
            seed,
            ..SamplerConfig::default()
        };
        let mut rng = replica_rng(seed, replica);
        let (points, ld) = match e {
            AnyEnsemble::Real(e) => {
                let s = sample(e.kernel(), &cfg, &mut rng)?;
                (s.points.iter().map(|x| x.to_complex()).collect::<Vec<_>>(), s.log_density)
            }
            AnyEnsemble::Complex(e) => {
                let s = sample(e.kernel(), &cfg, &mut rng)?;
                (s.points, s.log_density)
            }
        };
        for (i, z) in points.iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        if !log_density.is_null() {
            log_density.write(ld);
        }
        Ok(())
    })
}
