//! C ABI for `matterwave-chaos`.
//!
//! Every function returns an [`MwcStatus`] and writes results through out
//! pointers. Models are opaque heap handles created by `mwc_model_new*` and
//! released with [`mwc_model_free`]. After a failure the message is
//! available from [`mwc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use matterwave_chaos::config::RunConfig;
use matterwave_chaos::dynamics::{self, ClassificationPolicy, PhaseState, TrajectoryLabel};
use matterwave_chaos::melnikov::{self, Region};
use matterwave_chaos::montecarlo::{self, MonteCarloOptions};
use matterwave_chaos::{DimensionlessParams, Error, LatticeConfig, WaveRatio};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwcStatus {
    MwcOk = 0,
    /// A parameter is out of range.
    MwcInvalidArgument = 1,
    /// Malformed configuration text.
    MwcConfig = 2,
    /// An analytic precondition does not hold (no period, not a zero, ...).
    MwcPrecondition = 3,
    /// Quadrature or integration failure, or an escaping trajectory.
    MwcNumeric = 4,
    MwcNullPointer = 5,
    /// A Rust panic was caught at the boundary.
    MwcPanic = 6,
}

/// Opaque model: dimensionless constants, lattice and classification policy.
pub struct MwcModel {
    params: DimensionlessParams,
    lattice: LatticeConfig,
    policy: ClassificationPolicy,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwcRegion {
    MwcRegionA = 0,
    MwcRegionB = 1,
    MwcRegionBoundary = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwcLabel {
    MwcRegular = 0,
    MwcChaotic = 1,
    MwcUnbounded = 2,
}

/// Monte Carlo tally.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MwcProbability {
    pub n_trials: usize,
    pub n_chaotic: usize,
    pub n_regular: usize,
    pub n_unbounded: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MwcStatus {
    match e {
        Error::InvalidParameter { .. } => MwcStatus::MwcInvalidArgument,
        Error::Config(_) | Error::Io(_) => MwcStatus::MwcConfig,
        other => match other.exit_code() {
            3 => MwcStatus::MwcPrecondition,
            _ => MwcStatus::MwcNumeric,
        },
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MwcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MwcStatus::MwcOk
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            MwcStatus::MwcNullPointer
        }
        Err(_) => {
            set_last_error("internal panic");
            MwcStatus::MwcPanic
        }
    }
}

unsafe fn model<'a>(m: *const MwcModel) -> Result<&'a MwcModel, Failure> {
    m.as_ref().ok_or(Failure::Null("model"))
}

unsafe fn write<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

fn boxed(params: DimensionlessParams, lattice: LatticeConfig) -> *mut MwcModel {
    Box::into_raw(Box::new(MwcModel {
        params,
        lattice,
        policy: ClassificationPolicy::default(),
    }))
}

/// Model with a rational wave-vector ratio `gamma = gamma_p / gamma_q`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mwc_model_new(
    d: f64,
    g1: f64,
    v1: f64,
    v2: f64,
    k: f64,
    gamma_p: u32,
    gamma_q: u32,
    phi: f64,
    out: *mut *mut MwcModel,
) -> MwcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let params = DimensionlessParams::new(d, g1)?;
        let lattice = LatticeConfig::new(v1, v2, k, WaveRatio::rational(gamma_p, gamma_q)?, phi)?;
        write(out, boxed(params, lattice), "out")
    })
}

/// Model with an irrational ratio given by tag and value.
///
/// # Safety
/// `tag` must be a NUL-terminated string; `out` as for [`mwc_model_new`].
#[no_mangle]
pub unsafe extern "C" fn mwc_model_new_irrational(
    d: f64,
    g1: f64,
    v1: f64,
    v2: f64,
    k: f64,
    tag: *const c_char,
    gamma_value: f64,
    phi: f64,
    out: *mut *mut MwcModel,
) -> MwcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if tag.is_null() {
            return Err(Failure::Null("tag"));
        }
        let tag = CStr::from_ptr(tag)
            .to_str()
            .map_err(|_| Error::Config("tag is not UTF-8".into()))?;
        let params = DimensionlessParams::new(d, g1)?;
        let lattice = LatticeConfig::new(v1, v2, k, WaveRatio::irrational(tag, gamma_value)?, phi)?;
        write(out, boxed(params, lattice), "out")
    })
}

/// Model from TOML configuration text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` as for [`mwc_model_new`].
#[no_mangle]
pub unsafe extern "C" fn mwc_model_from_toml(
    toml: *const c_char,
    out: *mut *mut MwcModel,
) -> MwcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if toml.is_null() {
            return Err(Failure::Null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| Error::Config("configuration is not UTF-8".into()))?;
        let cfg = RunConfig::from_toml_str(text, &[])?;
        let handle = Box::into_raw(Box::new(MwcModel {
            params: cfg.params,
            lattice: cfg.lattice,
            policy: cfg.policy,
        }));
        write(out, handle, "out")
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `m` must come from a `mwc_model_new*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwc_model_free(m: *mut MwcModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Replaces the iteration count, transient and threshold of the classifier.
///
/// # Safety
/// `m` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn mwc_model_set_policy(
    m: *mut MwcModel,
    n_iters: usize,
    drop: usize,
    lambda_threshold: f64,
) -> MwcStatus {
    guard(|| {
        let m = m.as_mut().ok_or(Failure::Null("model"))?;
        let policy = ClassificationPolicy {
            n_iters,
            drop,
            lambda_threshold,
            ..m.policy
        };
        policy.validate()?;
        m.policy = policy;
        Ok(())
    })
}

/// Analytic Melnikov function at `c0`.
///
/// # Safety
/// `m` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mwc_melnikov(m: *const MwcModel, c0: f64, out: *mut f64) -> MwcStatus {
    guard(|| {
        let m = model(m)?;
        write(out, melnikov::melnikov(c0, &m.params, &m.lattice)?, "out")
    })
}

/// Region boundary `V2b(k)` for `gamma = 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwc_boundary_v2b(k: f64, d: f64, v1: f64, out: *mut f64) -> MwcStatus {
    guard(|| write(out, melnikov::boundary_v2b(k, d, v1)?, "out"))
}

/// Distinct Melnikov zeros per period. The count goes to `n`; up to
/// `capacity` zero locations are copied into `zeros`, which may be null when
/// `capacity` is 0.
///
/// # Safety
/// `m` must be a live model handle, `n` writable, and `zeros` valid for
/// `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn mwc_count_zeros(
    m: *const MwcModel,
    resolution: usize,
    n: *mut usize,
    zeros: *mut f64,
    capacity: usize,
) -> MwcStatus {
    guard(|| {
        let m = model(m)?;
        let profile = melnikov::count_zeros_per_period(&m.params, &m.lattice, resolution, None)?;
        if capacity > 0 {
            if zeros.is_null() {
                return Err(Failure::Null("zeros"));
            }
            for (i, z) in profile.zeros.iter().take(capacity).enumerate() {
                zeros.add(i).write(z.c0);
            }
        }
        write(n, profile.n, "n")
    })
}

/// Region A/B label of a `gamma = 2` model and the boundary value.
///
/// # Safety
/// `m` must be a live model handle; `region` and `v2b` writable.
#[no_mangle]
pub unsafe extern "C" fn mwc_classify_region(
    m: *const MwcModel,
    region: *mut MwcRegion,
    v2b: *mut f64,
) -> MwcStatus {
    guard(|| {
        let m = model(m)?;
        let label =
            melnikov::classify_region(&m.params, &m.lattice, melnikov::DEFAULT_BOUNDARY_TOLERANCE)?;
        let r = match label.region {
            Region::A => MwcRegion::MwcRegionA,
            Region::B => MwcRegion::MwcRegionB,
            Region::Boundary => MwcRegion::MwcRegionBoundary,
        };
        write(region, r, "region")?;
        write(v2b, label.v2b, "v2b")
    })
}

/// Labels the trajectory from `(r, rp)`; `lambda` receives NaN for
/// unbounded trajectories.
///
/// # Safety
/// `m` must be a live model handle; `label` and `lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn mwc_classify_trajectory(
    m: *const MwcModel,
    r: f64,
    rp: f64,
    label: *mut MwcLabel,
    lambda: *mut f64,
) -> MwcStatus {
    guard(|| {
        let m = model(m)?;
        let class = dynamics::classify_trajectory(
            PhaseState::new(r, rp),
            &m.params,
            &m.lattice,
            &m.policy,
        )?;
        let l = match class.label {
            TrajectoryLabel::Regular => MwcLabel::MwcRegular,
            TrajectoryLabel::Chaotic => MwcLabel::MwcChaotic,
            TrajectoryLabel::Unbounded => MwcLabel::MwcUnbounded,
        };
        write(label, l, "label")?;
        write(lambda, class.lambda.unwrap_or(f64::NAN), "lambda")
    })
}

/// Monte Carlo chaos probability over the default initial-condition box.
///
/// # Safety
/// `m` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mwc_estimate_probability(
    m: *const MwcModel,
    n_trials: usize,
    seed: u64,
    out: *mut MwcProbability,
) -> MwcStatus {
    guard(|| {
        let m = model(m)?;
        let e = montecarlo::estimate_probability(
            &m.params,
            &m.lattice,
            n_trials,
            seed,
            &m.policy,
            &MonteCarloOptions::default(),
        )?;
        write(
            out,
            MwcProbability {
                n_trials: e.n_trials,
                n_chaotic: e.n_chaotic,
                n_regular: e.n_regular,
                n_unbounded: e.n_unbounded,
                p_hat: e.p_hat,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
            },
            "out",
        )
    })
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mwc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code; unknown codes give "unknown status".
#[no_mangle]
pub extern "C" fn mwc_status_name(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"invalid argument",
        2 => c"configuration error",
        3 => c"precondition violated",
        4 => c"numerical failure",
        5 => c"null pointer",
        6 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Library version string.
#[no_mangle]
pub extern "C" fn mwc_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"unknown",
        };
    VERSION.as_ptr()
}
