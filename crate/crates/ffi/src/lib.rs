//! C ABI over the `maxstable` library.
//!
//! Objects are opaque handles created by `msx_*_new` (or returned through an
//! out-pointer) and released with the matching `msx_*_free`. Every fallible
//! call returns an [`MsxStatus`]; on failure the message is kept per thread
//! and can be read with [`msx_last_error_message`]. Panics never cross the
//! boundary.
//!
//! # Safety
//!
//! Common to every function: handles must come from this library and not be
//! freed yet; array pointers must cover the stated number of elements (they
//! may be null when the count is zero); output pointers must be writable.
//! Null handles and outputs are detected and reported, dangling ones are not.

#![allow(clippy::missing_safety_doc)]

use maxstable::estimation::{self, EstimateOptions, EstimateReport, Estimator};
use maxstable::{Error, KernelModel, Observations, PairDependence, SimConfig, SiteSet};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsxStatus {
    Ok = 0,
    /// Null pointer, unknown enum value or bad length.
    InvalidArgument = 1,
    InvalidParameter = 2,
    Domain = 3,
    UnsupportedModel = 4,
    DimensionMismatch = 5,
    /// Quadrature, simulation budget or spectral evaluation failure.
    Numerical = 6,
    /// Tail independence, failed inversion or an unusable design.
    Estimation = 7,
    Data = 8,
    Io = 9,
    /// Output buffer too small; the required size is reported.
    BufferTooSmall = 10,
    Panic = 11,
}

/// Kernel families, passed to [`msx_model_new`] as `int32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsxFamily {
    Normal1d = 0,
    Dexp1d = 1,
    T1d = 2,
    Normal2d = 3,
    Exp2d = 4,
    T2d = 5,
    Gnormal2d = 6,
}

/// Estimators, passed to [`msx_estimate`] as `int32_t`; `Default` picks the
/// natural one for the model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsxEstimator {
    Default = 0,
    Pairwise = 1,
    Range = 2,
    Exp2d = 3,
    GeneralNormal = 4,
}

/// Opaque kernel model.
pub struct MsxModel(KernelModel);
/// Opaque site set.
pub struct MsxSites(SiteSet);
/// Opaque `n x d` sample.
pub struct MsxObservations(Observations);
/// Opaque estimation report.
pub struct MsxReport(EstimateReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MsxStatus {
    match e {
        Error::InvalidParameter { .. } | Error::Config { .. } => MsxStatus::InvalidParameter,
        Error::Domain(_) => MsxStatus::Domain,
        Error::UnsupportedModel { .. } => MsxStatus::UnsupportedModel,
        Error::DimensionMismatch { .. } => MsxStatus::DimensionMismatch,
        Error::SimulationBudget { .. }
        | Error::Quadrature { .. }
        | Error::DegenerateSpectrum
        | Error::AtomLocation { .. } => MsxStatus::Numerical,
        Error::Independence
        | Error::EstimationFailure(_)
        | Error::DesignDeficiency(_)
        | Error::InfeasibleEstimate { .. } => MsxStatus::Estimation,
        Error::Data(_) => MsxStatus::Data,
        Error::Io(_) => MsxStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Arg(&'static str),
    Buffer(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MsxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MsxStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Arg(what))) => {
            set_error(format!("invalid argument: {what}"));
            MsxStatus::InvalidArgument
        }
        Ok(Err(Fail::Buffer(msg))) => {
            set_error(msg);
            MsxStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            MsxStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Arg(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Arg(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Arg(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `text` plus a NUL into `buf` when it fits; always reports the
/// required size (including the NUL) through `needed`.
unsafe fn write_text(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    let want = text.len() + 1;
    if !needed.is_null() {
        needed.write(want);
    }
    if buf.is_null() || len < want {
        return Err(Fail::Buffer(format!("buffer of {len} bytes is too small, {want} needed")));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
    buf.add(text.len()).write(0);
    Ok(())
}

fn family_of(v: i32) -> Result<MsxFamily, Fail> {
    use MsxFamily::*;
    [Normal1d, Dexp1d, T1d, Normal2d, Exp2d, T2d, Gnormal2d]
        .into_iter()
        .find(|f| *f as i32 == v)
        .ok_or(Fail::Arg("unknown family"))
}

fn estimator_of(v: i32) -> Result<MsxEstimator, Fail> {
    use MsxEstimator::*;
    [Default, Pairwise, Range, Exp2d, GeneralNormal]
        .into_iter()
        .find(|e| *e as i32 == v)
        .ok_or(Fail::Arg("unknown estimator"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn msx_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Copies the calling thread's last error message into `buf`. Returns the
/// number of bytes needed including the NUL; nothing is written if `buf` is
/// null or `len` is too small. The message is empty after a successful call.
#[no_mangle]
pub unsafe extern "C" fn msx_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let want = msg.len() + 1;
        if !buf.is_null() && len >= want {
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), msg.len());
            buf.add(msg.len()).write(0);
        }
        want
    })
}

/// Creates a kernel model.
///
/// `params` holds, in order: `beta` for the single-scale families, followed
/// by `nu` (t1d, a positive integer) or `alpha` (t2d); `beta1, beta2, rho`
/// for gnormal2d.
#[no_mangle]
pub unsafe extern "C" fn msx_model_new(
    family: i32,
    params: *const f64,
    n_params: usize,
    out: *mut *mut MsxModel,
) -> MsxStatus {
    guard(|| {
        let family = family_of(family)?;
        let p = slice(params, n_params, "params")?;
        let need = match family {
            MsxFamily::Normal1d | MsxFamily::Dexp1d | MsxFamily::Normal2d | MsxFamily::Exp2d => 1,
            MsxFamily::T1d | MsxFamily::T2d => 2,
            MsxFamily::Gnormal2d => 3,
        };
        if p.len() != need {
            return Err(Fail::Arg("wrong number of model parameters"));
        }
        let model = match family {
            MsxFamily::Normal1d => KernelModel::normal1d(p[0]),
            MsxFamily::Dexp1d => KernelModel::dexp1d(p[0]),
            MsxFamily::T1d => {
                let nu = p[1];
                if !(nu >= 1.0 && nu.fract() == 0.0 && nu <= u32::MAX as f64) {
                    return Err(Fail::Lib(Error::InvalidParameter {
                        name: "nu",
                        value: nu,
                        reason: "must be a positive integer",
                    }));
                }
                KernelModel::t1d(p[0], nu as u32)
            }
            MsxFamily::Normal2d => KernelModel::normal2d(p[0]),
            MsxFamily::Exp2d => KernelModel::exp2d(p[0]),
            MsxFamily::T2d => KernelModel::t2d(p[0], p[1]),
            MsxFamily::Gnormal2d => KernelModel::gnormal2d(p[0], p[1], p[2]),
        }?;
        put(out, Box::into_raw(Box::new(MsxModel(model))), "out")
    })
}

/// Releases a model; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn msx_model_free(model: *mut MsxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `-log P{Z(0) <= w1, Z(t) <= w2}` for displacement `t` (length 1 or 2,
/// matching the model dimension).
#[no_mangle]
pub unsafe extern "C" fn msx_model_neg_log_cdf(
    model: *const MsxModel,
    t: *const f64,
    t_len: usize,
    w1: f64,
    w2: f64,
    out: *mut f64,
) -> MsxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let t = slice(t, t_len, "t")?;
        let v = PairDependence::new(m.0, t)?.neg_log_cdf(w1, w2)?;
        put(out, v, "out")
    })
}

/// Creates a site set from `count` points of dimension `dim` (1 or 2),
/// stored point by point in `coords`.
#[no_mangle]
pub unsafe extern "C" fn msx_sites_new(
    dim: usize,
    coords: *const f64,
    count: usize,
    out: *mut *mut MsxSites,
) -> MsxStatus {
    guard(|| {
        if dim != 1 && dim != 2 {
            return Err(Fail::Arg("dim must be 1 or 2"));
        }
        let len = count.checked_mul(dim).ok_or(Fail::Arg("count"))?;
        let c = slice(coords, len, "coords")?;
        let rows: Vec<Vec<f64>> = c.chunks(dim).map(<[f64]>::to_vec).collect();
        let sites = SiteSet::from_rows(dim, &rows)?;
        put(out, Box::into_raw(Box::new(MsxSites(sites))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn msx_sites_free(sites: *mut MsxSites) {
    if !sites.is_null() {
        drop(Box::from_raw(sites));
    }
}

/// Wraps a row-major `n x d` sample (copied).
#[no_mangle]
pub unsafe extern "C" fn msx_observations_new(
    data: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut MsxObservations,
) -> MsxStatus {
    guard(|| {
        let len = n.checked_mul(d).ok_or(Fail::Arg("n * d overflows"))?;
        let v = slice(data, len, "data")?.to_vec();
        let obs = Observations::new(d, v)?;
        put(out, Box::into_raw(Box::new(MsxObservations(obs))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn msx_observations_free(obs: *mut MsxObservations) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Reports the sample shape.
#[no_mangle]
pub unsafe extern "C" fn msx_observations_shape(obs: *const MsxObservations, n: *mut usize, d: *mut usize) -> MsxStatus {
    guard(|| {
        let o = handle(obs, "obs")?;
        put(n, o.0.n(), "n")?;
        put(d, o.0.d(), "d")
    })
}

/// Copies the sample, row-major, into `buf` of `len` values.
#[no_mangle]
pub unsafe extern "C" fn msx_observations_copy(obs: *const MsxObservations, buf: *mut f64, len: usize) -> MsxStatus {
    guard(|| {
        let o = handle(obs, "obs")?;
        let src = o.0.as_slice();
        if buf.is_null() || len < src.len() {
            return Err(Fail::Buffer(format!("buffer holds {len} values, {} needed", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Draws `n` replications of the process at `sites` with the exact mixture
/// sampler and the given seed.
#[no_mangle]
pub unsafe extern "C" fn msx_simulate(
    model: *const MsxModel,
    sites: *const MsxSites,
    n: usize,
    seed: u64,
    out: *mut *mut MsxObservations,
) -> MsxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let s = handle(sites, "sites")?;
        let obs = maxstable::simulate(&m.0, &s.0, n, &SimConfig::with_seed(seed))?;
        put(out, Box::into_raw(Box::new(MsxObservations(obs))), "out")
    })
}

/// Rank-based joint exceedance ratio for the selected columns (0-based) with
/// weights `x` and threshold count `k`.
#[no_mangle]
pub unsafe extern "C" fn msx_r_hat(
    obs: *const MsxObservations,
    columns: *const usize,
    x: *const f64,
    count: usize,
    k: usize,
    out: *mut f64,
) -> MsxStatus {
    guard(|| {
        let o = handle(obs, "obs")?;
        let cols = slice(columns, count, "columns")?;
        let x = slice(x, count, "x")?;
        put(out, estimation::r_hat(&o.0, cols, x, k)?, "out")
    })
}

/// Fits `model`'s family to the sample. Only the family of `model` is used;
/// its parameter values are ignored.
#[no_mangle]
pub unsafe extern "C" fn msx_estimate(
    obs: *const MsxObservations,
    sites: *const MsxSites,
    model: *const MsxModel,
    estimator: i32,
    k: usize,
    out: *mut *mut MsxReport,
) -> MsxStatus {
    guard(|| {
        let o = handle(obs, "obs")?;
        let s = handle(sites, "sites")?;
        let m = handle(model, "model")?;
        let est = match estimator_of(estimator)? {
            MsxEstimator::Default => Estimator::default_for(&m.0),
            MsxEstimator::Pairwise => Estimator::Pairwise,
            MsxEstimator::Range => Estimator::Range,
            MsxEstimator::Exp2d => Estimator::Exp2d,
            MsxEstimator::GeneralNormal => Estimator::GeneralNormal,
        };
        let report = estimation::estimate(&o.0, &s.0, &m.0, est, &EstimateOptions::new(k))?;
        put(out, Box::into_raw(Box::new(MsxReport(report))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn msx_report_free(report: *mut MsxReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Scalar range parameter estimate. Fails with `UnsupportedModel` for the
/// general normal fit, which has three parameters.
#[no_mangle]
pub unsafe extern "C" fn msx_report_beta_hat(report: *const MsxReport, out: *mut f64) -> MsxStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let b = r.0.beta_hat.ok_or(Error::UnsupportedModel {
            model: r.0.fitted.tag(),
            what: "the report has no scalar beta",
        })?;
        put(out, b, "out")
    })
}

/// General normal fit as `[beta1, beta2, rho]`.
#[no_mangle]
pub unsafe extern "C" fn msx_report_general_normal(report: *const MsxReport, out: *mut f64) -> MsxStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let g = r.0.general_normal.as_ref().ok_or(Error::UnsupportedModel {
            model: r.0.fitted.tag(),
            what: "the report holds no general normal fit",
        })?;
        if out.is_null() {
            return Err(Fail::Arg("out"));
        }
        ptr::copy_nonoverlapping([g.beta1, g.beta2, g.rho].as_ptr(), out, 3);
        Ok(())
    })
}

/// Writes the full report as JSON. `needed` (may be null) receives the size
/// including the NUL, also when the buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn msx_report_json(
    report: *const MsxReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MsxStatus {
    guard(|| {
        let r = handle(report, "report")?;
        write_text(&r.0.to_json(), buf, len, needed)
    })
}
