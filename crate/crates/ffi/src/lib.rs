//! C ABI for the fpkern library: opaque handles, status codes, and a
//! thread-local last-error message. The header `include/fpkern.h` is
//! generated by cbindgen at build time.
//!
//! Conventions:
//! - every constructor writes its handle through an out-pointer and returns
//!   a status code; handles are freed with the matching `*_free` function;
//! - passing NULL where a handle or out-pointer is expected returns
//!   `FPK_STATUS_NULL_POINTER`;
//! - on any non-OK status, `fpk_last_error_message` returns a human-readable
//!   explanation for the calling thread.

use fpkern::data::{DensitySampleSet, DensitySnapshot, Snapshot, SnapshotSet};
use fpkern::density::DensityEstimate;
use fpkern::error::Error;
use fpkern::kernels::KernelModel;
use fpkern::regression::FitResult;
use fpkern::{density, linalg, regression};

use libc::{c_char, size_t};
use std::cell::RefCell;
use std::ffi::CString;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    NumericalError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> FpkStatus {
    match e {
        Error::TimeBelowFloor { .. }
        | Error::OutOfDomain { .. }
        | Error::StencilOutOfDomain { .. } => FpkStatus::DomainError,
        Error::InvalidParameter { .. }
        | Error::EmptyInput(_)
        | Error::DimensionMismatch { .. }
        | Error::NonIncreasingTimes { .. }
        | Error::EmptyFold { .. }
        | Error::Config(_)
        | Error::Io { .. } => FpkStatus::InvalidArgument,
        _ => FpkStatus::NumericalError,
    }
}

fn fail(e: Error) -> FpkStatus {
    let code = status_of(&e);
    set_error(e.to_string());
    code
}

fn null_pointer(what: &str) -> FpkStatus {
    set_error(format!("null pointer: {what}"));
    FpkStatus::NullPointer
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes). Returns the number of bytes copied, excluding
/// the terminator; zero when no error has occurred or `buf` is NULL/empty.
#[no_mangle]
pub unsafe extern "C" fn fpk_last_error_message(buf: *mut c_char, cap: size_t) -> size_t {
    if buf.is_null() || cap == 0 {
        return 0;
    }
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        let n = bytes.len().min(cap - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Opaque kernel model handle.
pub struct FpkModel(KernelModel);

/// Opaque snapshot container. Regression snapshots carry targets; density
/// snapshots do not. The two kinds cannot be mixed in one dataset.
pub struct FpkDataset {
    regression: Vec<Snapshot>,
    density: Vec<DensitySnapshot>,
}

/// Opaque fitted-regression handle.
pub struct FpkFit(FitResult);

/// Opaque density-estimate handle.
pub struct FpkDensity(DensityEstimate);

fn emit_model(out: *mut *mut FpkModel, model: KernelModel) -> FpkStatus {
    unsafe { *out = Box::into_raw(Box::new(FpkModel(model))) };
    FpkStatus::Ok
}

/// Heat kernel on the line with diffusion coefficient `d > 0`.
#[no_mangle]
pub unsafe extern "C" fn fpk_model_gaussian_heat(d: f64, out: *mut *mut FpkModel) -> FpkStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match KernelModel::gaussian_heat(d) {
        Ok(m) => emit_model(out, m),
        Err(e) => fail(e),
    }
}

/// Heat kernel on [0,1] with zero boundary values.
#[no_mangle]
pub unsafe extern "C" fn fpk_model_dirichlet_heat(out: *mut *mut FpkModel) -> FpkStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    emit_model(out, KernelModel::dirichlet_heat())
}

/// Heat kernel on [0,1] with zero boundary flux.
#[no_mangle]
pub unsafe extern "C" fn fpk_model_neumann_heat(out: *mut *mut FpkModel) -> FpkStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    emit_model(out, KernelModel::neumann_heat())
}

/// Ornstein-Uhlenbeck kernel with mean-reversion `theta > 0` and noise
/// `sigma > 0`.
#[no_mangle]
pub unsafe extern "C" fn fpk_model_ornstein_uhlenbeck(
    theta: f64,
    sigma: f64,
    out: *mut *mut FpkModel,
) -> FpkStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match KernelModel::ornstein_uhlenbeck(theta, sigma) {
        Ok(m) => emit_model(out, m),
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn fpk_model_free(model: *mut FpkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Kernel value K_t(x, x').
#[no_mangle]
pub unsafe extern "C" fn fpk_model_eval(
    model: *const FpkModel,
    t: f64,
    x: f64,
    xp: f64,
    out_value: *mut f64,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    if out_value.is_null() {
        return null_pointer("out_value");
    }
    match m.0.eval(t, x, xp) {
        Ok(v) => {
            *out_value = v;
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Truncation mode number used at time t.
#[no_mangle]
pub unsafe extern "C" fn fpk_model_truncation_order(
    model: *const FpkModel,
    t: f64,
    out_order: *mut size_t,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    if out_order.is_null() {
        return null_pointer("out_order");
    }
    match m.0.truncation_order(t) {
        Ok(n) => {
            *out_order = n;
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Symmetrized finite-difference residual |∂_t K - L K| at (t, x, x').
#[no_mangle]
pub unsafe extern "C" fn fpk_model_pde_residual(
    model: *const FpkModel,
    t: f64,
    x: f64,
    xp: f64,
    h_t: f64,
    h_x: f64,
    out_value: *mut f64,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    if out_value.is_null() {
        return null_pointer("out_value");
    }
    match m.0.pde_residual(t, x, xp, h_t, h_x) {
        Ok(v) => {
            *out_value = v;
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// New empty dataset.
#[no_mangle]
pub unsafe extern "C" fn fpk_dataset_new(out: *mut *mut FpkDataset) -> FpkStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    *out = Box::into_raw(Box::new(FpkDataset {
        regression: Vec::new(),
        density: Vec::new(),
    }));
    FpkStatus::Ok
}

/// Append one snapshot. `xs` must point to `len` positions; `ys` either
/// points to `len` targets (regression data) or is NULL (density samples).
/// Snapshots must be appended in strictly increasing time order and keep one
/// kind throughout.
#[no_mangle]
pub unsafe extern "C" fn fpk_dataset_add_snapshot(
    dataset: *mut FpkDataset,
    t: f64,
    xs: *const f64,
    ys: *const f64,
    len: size_t,
) -> FpkStatus {
    let Some(ds) = dataset.as_mut() else {
        return null_pointer("dataset");
    };
    if xs.is_null() {
        return null_pointer("xs");
    }
    if len == 0 {
        set_error("snapshot must contain at least one point".into());
        return FpkStatus::InvalidArgument;
    }
    let positions = std::slice::from_raw_parts(xs, len);
    if ys.is_null() {
        if !ds.regression.is_empty() {
            set_error("dataset already holds regression snapshots; ys must not be NULL".into());
            return FpkStatus::InvalidArgument;
        }
        ds.density.push(DensitySnapshot::new(t, positions.to_vec()));
    } else {
        if !ds.density.is_empty() {
            set_error("dataset already holds density snapshots; ys must be NULL".into());
            return FpkStatus::InvalidArgument;
        }
        let targets = std::slice::from_raw_parts(ys, len);
        ds.regression.push(Snapshot::new(
            t,
            positions.iter().cloned().zip(targets.iter().cloned()).collect(),
        ));
    }
    FpkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn fpk_dataset_free(dataset: *mut FpkDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

fn regression_set(ds: &FpkDataset) -> Result<SnapshotSet, Error> {
    if ds.regression.is_empty() {
        return Err(Error::EmptyInput("regression dataset"));
    }
    SnapshotSet::new(ds.regression.clone())
}

fn density_set(ds: &FpkDataset) -> Result<DensitySampleSet, Error> {
    if ds.density.is_empty() {
        return Err(Error::EmptyInput("density dataset"));
    }
    DensitySampleSet::new(ds.density.clone())
}

/// Minimum-norm least-squares fit over all snapshots. A negative `rtol`
/// selects the default max(rows, cols)·ε rank cutoff.
#[no_mangle]
pub unsafe extern "C" fn fpk_fit(
    model: *const FpkModel,
    dataset: *const FpkDataset,
    rtol: f64,
    out: *mut *mut FpkFit,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    let Some(ds) = dataset.as_ref() else {
        return null_pointer("dataset");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    let result = (|| {
        let data = regression_set(ds)?;
        let n = data.total_points();
        let rtol = if rtol < 0.0 {
            linalg::default_rtol(n, n)
        } else {
            rtol
        };
        let system = regression::assemble(&m.0, &data)?;
        regression::fit(&m.0, &system, rtol)
    })();
    match result {
        Ok(f) => {
            *out = Box::into_raw(Box::new(FpkFit(f)));
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fit with a soft initial condition at `t0` (see the library docs):
/// the initial block is evaluated at max(t0, t_epsilon) and weighted by
/// `weight` relative to the data blocks.
#[no_mangle]
pub unsafe extern "C" fn fpk_fit_with_initial(
    model: *const FpkModel,
    dataset: *const FpkDataset,
    t0: f64,
    xs: *const f64,
    ys: *const f64,
    len: size_t,
    t_epsilon: f64,
    weight: f64,
    rtol: f64,
    out: *mut *mut FpkFit,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    let Some(ds) = dataset.as_ref() else {
        return null_pointer("dataset");
    };
    if xs.is_null() || ys.is_null() {
        return null_pointer("initial xs/ys");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    let positions = std::slice::from_raw_parts(xs, len);
    let targets = std::slice::from_raw_parts(ys, len);
    let initial = Snapshot::new(
        t0,
        positions.iter().cloned().zip(targets.iter().cloned()).collect(),
    );
    let result = (|| {
        let data = regression_set(ds)?;
        let n = data.total_points() + len;
        let rtol = if rtol < 0.0 {
            linalg::default_rtol(n, n)
        } else {
            rtol
        };
        regression::fit_with_initial_weighted(&m.0, &data, &initial, t_epsilon, weight, rtol)
    })();
    match result {
        Ok(f) => {
            *out = Box::into_raw(Box::new(FpkFit(f)));
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate the fitted expansion at (x, t).
#[no_mangle]
pub unsafe extern "C" fn fpk_fit_predict(
    fit: *const FpkFit,
    x: f64,
    t: f64,
    out_value: *mut f64,
) -> FpkStatus {
    let Some(f) = fit.as_ref() else {
        return null_pointer("fit");
    };
    if out_value.is_null() {
        return null_pointer("out_value");
    }
    match f.0.predict(x, t) {
        Ok(v) => {
            *out_value = v;
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn fpk_fit_coefficient_count(fit: *const FpkFit) -> size_t {
    fit.as_ref().map_or(0, |f| f.0.coefficients.len())
}

/// Copy the coefficient vector into `buf` (must hold `fpk_fit_coefficient_count`
/// entries).
#[no_mangle]
pub unsafe extern "C" fn fpk_fit_coefficients(
    fit: *const FpkFit,
    buf: *mut f64,
    len: size_t,
) -> FpkStatus {
    let Some(f) = fit.as_ref() else {
        return null_pointer("fit");
    };
    if buf.is_null() {
        return null_pointer("buf");
    }
    if len < f.0.coefficients.len() {
        set_error(format!(
            "buffer holds {len} entries, need {}",
            f.0.coefficients.len()
        ));
        return FpkStatus::InvalidArgument;
    }
    for (i, a) in f.0.coefficients.iter().enumerate() {
        *buf.add(i) = *a;
    }
    FpkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn fpk_fit_residual_norm(fit: *const FpkFit, out_value: *mut f64) -> FpkStatus {
    let Some(f) = fit.as_ref() else {
        return null_pointer("fit");
    };
    if out_value.is_null() {
        return null_pointer("out_value");
    }
    *out_value = f.0.residual_norm;
    FpkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn fpk_fit_free(fit: *mut FpkFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Equal-weight kernel density estimator of one sample at time t.
#[no_mangle]
pub unsafe extern "C" fn fpk_kde_snapshot(
    model: *const FpkModel,
    xs: *const f64,
    len: size_t,
    t: f64,
    out: *mut *mut FpkDensity,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    if xs.is_null() {
        return null_pointer("xs");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    let sample = std::slice::from_raw_parts(xs, len);
    match density::kde_snapshot(&m.0, sample, t) {
        Ok(est) => {
            *out = Box::into_raw(Box::new(FpkDensity(est)));
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Simultaneous kernel-mean estimator over all snapshots of a density
/// dataset (snapshots added with `ys = NULL`).
#[no_mangle]
pub unsafe extern "C" fn fpk_kme_combined(
    model: *const FpkModel,
    dataset: *const FpkDataset,
    out: *mut *mut FpkDensity,
) -> FpkStatus {
    let Some(m) = model.as_ref() else {
        return null_pointer("model");
    };
    let Some(ds) = dataset.as_ref() else {
        return null_pointer("dataset");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    let result = (|| {
        let data = density_set(ds)?;
        density::kme_combined(&m.0, &data)
    })();
    match result {
        Ok(est) => {
            *out = Box::into_raw(Box::new(FpkDensity(est)));
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate a density estimate at (x, t).
#[no_mangle]
pub unsafe extern "C" fn fpk_density_evaluate(
    density: *const FpkDensity,
    x: f64,
    t: f64,
    out_value: *mut f64,
) -> FpkStatus {
    let Some(d) = density.as_ref() else {
        return null_pointer("density");
    };
    if out_value.is_null() {
        return null_pointer("out_value");
    }
    match d.0.evaluate(x, t) {
        Ok(v) => {
            *out_value = v;
            FpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn fpk_density_coefficient_count(density: *const FpkDensity) -> size_t {
    density.as_ref().map_or(0, |d| d.0.coefficients.len())
}

#[no_mangle]
pub unsafe extern "C" fn fpk_density_coefficients(
    density: *const FpkDensity,
    buf: *mut f64,
    len: size_t,
) -> FpkStatus {
    let Some(d) = density.as_ref() else {
        return null_pointer("density");
    };
    if buf.is_null() {
        return null_pointer("buf");
    }
    if len < d.0.coefficients.len() {
        set_error(format!(
            "buffer holds {len} entries, need {}",
            d.0.coefficients.len()
        ));
        return FpkStatus::InvalidArgument;
    }
    for (i, b) in d.0.coefficients.iter().enumerate() {
        *buf.add(i) = *b;
    }
    FpkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn fpk_density_free(density: *mut FpkDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}
