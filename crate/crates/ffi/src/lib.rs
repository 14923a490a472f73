//! C ABI over the permutation-invariant tests: opaque report handles, status
//! codes, and plain-old-data outputs. The matching declarations live in
//! `include/permutest.h`, which is maintained by hand alongside this file —
//! keep the two in sync when extending the surface.
//!
//! Every entry point catches panics and maps them to a status code; no
//! unwinding ever crosses the boundary.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use permutest::report::TestReport;
use permutest::testing::{
    cat_test_auto, gauss_test_auto, two_sample_test, CategoricalSample, GaussianSample,
    NullHypothesis,
};
use permutest::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutestStatus {
    Ok = 0,
    InvalidArgument = 1,
    DegenerateNodes = 2,
    LengthMismatch = 3,
    NotAProbabilityVector = 4,
    InvalidPartition = 5,
    InvalidShape = 6,
    EmptySample = 7,
    InfeasibleDistance = 8,
    Config = 9,
    NullPointer = 90,
    Panic = 99,
}

impl From<&Error> for PermutestStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DegenerateNodes { .. } => PermutestStatus::DegenerateNodes,
            Error::LengthMismatch { .. } => PermutestStatus::LengthMismatch,
            Error::NotAProbabilityVector(_) => PermutestStatus::NotAProbabilityVector,
            Error::InvalidPartition(_) => PermutestStatus::InvalidPartition,
            Error::InvalidShape(_) => PermutestStatus::InvalidShape,
            Error::EmptySample => PermutestStatus::EmptySample,
            Error::InfeasibleDistance { .. } => PermutestStatus::InfeasibleDistance,
            Error::Config(_) => PermutestStatus::Config,
            Error::InvalidArgument(_) => PermutestStatus::InvalidArgument,
        }
    }
}

/// Opaque handle over a finished test report.
pub struct PermutestReport {
    inner: TestReport,
}

fn guard(body: impl FnOnce() -> PermutestStatus) -> PermutestStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(PermutestStatus::Panic)
}

fn deliver(result: Result<TestReport, Error>, out: *mut *mut PermutestReport) -> PermutestStatus {
    match result {
        Ok(report) => {
            let boxed = Box::new(PermutestReport { inner: report });
            unsafe { *out = Box::into_raw(boxed) };
            PermutestStatus::Ok
        }
        Err(e) => PermutestStatus::from(&e),
    }
}

/// Gaussian-mean test of `x` (length `k`) against reference means `mu`
/// (length `k`) at noise precision `n`; routes to the degenerate path when
/// the reference has tied values.
///
/// # Safety
/// `x` and `mu` must point to `k` readable doubles; `out` must be a valid
/// location for a report pointer. A successful call transfers ownership of
/// `*out` to the caller, to be released with `permutest_report_free`.
#[no_mangle]
pub unsafe extern "C" fn permutest_test_gauss(
    x: *const f64,
    k: usize,
    mu: *const f64,
    n: f64,
    alpha: f64,
    out: *mut *mut PermutestReport,
) -> PermutestStatus {
    if x.is_null() || mu.is_null() || out.is_null() {
        return PermutestStatus::NullPointer;
    }
    let x = std::slice::from_raw_parts(x, k).to_vec();
    let mu = std::slice::from_raw_parts(mu, k).to_vec();
    guard(move || {
        let result = NullHypothesis::gaussian_mean(&mu)
            .and_then(|null| gauss_test_auto(&GaussianSample { values: x, n }, &null, alpha));
        deliver(result, out)
    })
}

/// Categorical test of observed `counts` (length `k`) against reference cell
/// probabilities `q` (length `k`), with automatic degeneracy routing.
///
/// # Safety
/// `counts` must point to `k` readable uint64 values, `q` to `k` readable
/// doubles; `out` as in [`permutest_test_gauss`].
#[no_mangle]
pub unsafe extern "C" fn permutest_test_cat(
    counts: *const u64,
    k: usize,
    q: *const f64,
    alpha: f64,
    out: *mut *mut PermutestReport,
) -> PermutestStatus {
    if counts.is_null() || q.is_null() || out.is_null() {
        return PermutestStatus::NullPointer;
    }
    let counts = std::slice::from_raw_parts(counts, k).to_vec();
    let q = std::slice::from_raw_parts(q, k).to_vec();
    guard(move || {
        let result = NullHypothesis::categorical(&q)
            .and_then(|null| cat_test_auto(&CategoricalSample::new(counts), &null, alpha));
        deliver(result, out)
    })
}

/// Two-sample test on count vectors `x` and `y` of length `k`. A
/// nonpositive `lambda` selects the default clustering threshold
/// (ln of each sample's size).
///
/// # Safety
/// `x` and `y` must point to `k` readable uint64 values; `out` as in
/// [`permutest_test_gauss`].
#[no_mangle]
pub unsafe extern "C" fn permutest_test_two_sample(
    x: *const u64,
    y: *const u64,
    k: usize,
    alpha: f64,
    lambda: f64,
    out: *mut *mut PermutestReport,
) -> PermutestStatus {
    if x.is_null() || y.is_null() || out.is_null() {
        return PermutestStatus::NullPointer;
    }
    let x = std::slice::from_raw_parts(x, k).to_vec();
    let y = std::slice::from_raw_parts(y, k).to_vec();
    let lambda = (lambda > 0.0).then_some(lambda);
    guard(move || deliver(two_sample_test(&x, &y, alpha, lambda), out))
}

/// 1 when the test rejected, 0 otherwise (or on a null handle).
///
/// # Safety
/// `report` must be a handle produced by this library (or null).
#[no_mangle]
pub unsafe extern "C" fn permutest_report_reject(report: *const PermutestReport) -> i32 {
    if report.is_null() {
        return 0;
    }
    i32::from((*report).inner.reject)
}

/// Named statistic value ("T", "T_f", "T_g"); NaN when absent.
///
/// # Safety
/// `report` as in [`permutest_report_reject`]; `name` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn permutest_report_statistic(
    report: *const PermutestReport,
    name: *const c_char,
) -> f64 {
    lookup(report, name, |r, key| r.statistics.get(key).copied())
}

/// Named p-value; NaN when absent.
///
/// # Safety
/// As in [`permutest_report_statistic`].
#[no_mangle]
pub unsafe extern "C" fn permutest_report_p_value(
    report: *const PermutestReport,
    name: *const c_char,
) -> f64 {
    lookup(report, name, |r, key| r.p_values.get(key).copied())
}

unsafe fn lookup(
    report: *const PermutestReport,
    name: *const c_char,
    get: impl Fn(&TestReport, &str) -> Option<f64>,
) -> f64 {
    if report.is_null() || name.is_null() {
        return f64::NAN;
    }
    match CStr::from_ptr(name).to_str() {
        Ok(key) => get(&(*report).inner, key).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

/// Full report as a JSON document; release with `permutest_string_free`.
/// Null on allocation failure or a null handle.
///
/// # Safety
/// `report` as in [`permutest_report_reject`].
#[no_mangle]
pub unsafe extern "C" fn permutest_report_json(report: *const PermutestReport) -> *mut c_char {
    if report.is_null() {
        return std::ptr::null_mut();
    }
    let json = (*report).inner.to_json();
    match CString::new(json) {
        Ok(s) => s.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Release a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be an owned handle from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn permutest_report_free(report: *mut PermutestReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Release a string returned by `permutest_report_json`. Null is a no-op.
///
/// # Safety
/// `s` must be a string returned by this library, released once.
#[no_mangle]
pub unsafe extern "C" fn permutest_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Minimax threshold for the Gaussian family: t* and its total error.
///
/// # Safety
/// `t_star` and `total_error` must be valid writable locations.
#[no_mangle]
pub unsafe extern "C" fn permutest_threshold_gauss(
    k: usize,
    delta: f64,
    t_star: *mut f64,
    total_error: *mut f64,
) -> PermutestStatus {
    threshold_impl(k, delta, t_star, total_error, false)
}

/// Minimax threshold for the categorical family.
///
/// # Safety
/// As in [`permutest_threshold_gauss`].
#[no_mangle]
pub unsafe extern "C" fn permutest_threshold_cat(
    k: usize,
    delta: f64,
    t_star: *mut f64,
    total_error: *mut f64,
) -> PermutestStatus {
    threshold_impl(k, delta, t_star, total_error, true)
}

unsafe fn threshold_impl(
    k: usize,
    delta: f64,
    t_star: *mut f64,
    total_error: *mut f64,
    categorical: bool,
) -> PermutestStatus {
    if t_star.is_null() || total_error.is_null() {
        return PermutestStatus::NullPointer;
    }
    if k < 2 || delta.is_nan() || delta <= 0.0 {
        return PermutestStatus::InvalidArgument;
    }
    guard(move || {
        let spec = if categorical {
            permutest::thresholds::optimal_threshold_cat(k, delta)
        } else {
            permutest::thresholds::optimal_threshold_gauss(k, delta)
        };
        *t_star = spec.t_star;
        *total_error = spec.total_error;
        PermutestStatus::Ok
    })
}

/// Critical value of the (non)central chi-squared: P(X <= out) = 1 - alpha.
///
/// # Safety
/// `out` must be a valid writable location.
#[no_mangle]
pub unsafe extern "C" fn permutest_chi2_critical(
    df: u32,
    noncentrality: f64,
    alpha: f64,
    out: *mut f64,
) -> PermutestStatus {
    if out.is_null() {
        return PermutestStatus::NullPointer;
    }
    if alpha.is_nan()
        || alpha <= 0.0
        || alpha >= 1.0
        || noncentrality.is_nan()
        || noncentrality < 0.0
        || df == 0
    {
        return PermutestStatus::InvalidArgument;
    }
    guard(move || {
        *out = permutest::distributions::ChiSquared::noncentral(df, noncentrality)
            .critical_value(alpha);
        PermutestStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_round_trip_through_the_c_surface() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mu = [5.0, 4.0, 3.0, 2.0, 1.0];
        let mut report: *mut PermutestReport = std::ptr::null_mut();
        let status =
            unsafe { permutest_test_gauss(x.as_ptr(), 5, mu.as_ptr(), 200.0, 0.05, &mut report) };
        assert_eq!(status, PermutestStatus::Ok);
        assert_eq!(unsafe { permutest_report_reject(report) }, 0);
        let name = std::ffi::CString::new("T").unwrap();
        let t = unsafe { permutest_report_statistic(report, name.as_ptr()) };
        assert!(t.abs() < 1e-10);
        let json = unsafe { permutest_report_json(report) };
        assert!(!json.is_null());
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .unwrap()
            .to_string();
        assert!(TestReport::from_json(&text).is_ok());
        unsafe {
            permutest_string_free(json);
            permutest_report_free(report);
        }
    }

    #[test]
    fn cat_degenerate_reference_via_c_surface() {
        let counts = [210u64, 190, 790, 810];
        let q = [0.1, 0.1, 0.4, 0.4];
        let mut report: *mut PermutestReport = std::ptr::null_mut();
        let status =
            unsafe { permutest_test_cat(counts.as_ptr(), 4, q.as_ptr(), 0.05, &mut report) };
        assert_eq!(status, PermutestStatus::Ok);
        let tf = std::ffi::CString::new("T_f").unwrap();
        let value = unsafe { permutest_report_statistic(report, tf.as_ptr()) };
        assert!(value.is_finite());
        let missing = std::ffi::CString::new("nope").unwrap();
        assert!(unsafe { permutest_report_statistic(report, missing.as_ptr()) }.is_nan());
        unsafe { permutest_report_free(report) };
    }

    #[test]
    fn error_codes_map_faithfully() {
        let mut report: *mut PermutestReport = std::ptr::null_mut();
        // Probability vector that does not sum to one.
        let counts = [10u64, 20];
        let bad_q = [0.5, 0.6];
        let status =
            unsafe { permutest_test_cat(counts.as_ptr(), 2, bad_q.as_ptr(), 0.05, &mut report) };
        assert_eq!(status, PermutestStatus::NotAProbabilityVector);
        assert!(report.is_null());

        // Empty second sample.
        let x = [5u64, 5];
        let y = [0u64, 0];
        let status =
            unsafe { permutest_test_two_sample(x.as_ptr(), y.as_ptr(), 2, 0.05, 0.0, &mut report) };
        assert_eq!(status, PermutestStatus::EmptySample);

        // Null pointers.
        let status = unsafe {
            permutest_test_gauss(
                std::ptr::null(),
                3,
                std::ptr::null(),
                1.0,
                0.05,
                &mut report,
            )
        };
        assert_eq!(status, PermutestStatus::NullPointer);
    }

    #[test]
    fn two_sample_via_c_surface() {
        let x = [200u64, 200, 800, 800];
        let mut report: *mut PermutestReport = std::ptr::null_mut();
        let status =
            unsafe { permutest_test_two_sample(x.as_ptr(), x.as_ptr(), 4, 0.05, 0.0, &mut report) };
        assert_eq!(status, PermutestStatus::Ok);
        assert_eq!(unsafe { permutest_report_reject(report) }, 0);
        unsafe { permutest_report_free(report) };
    }

    #[test]
    fn thresholds_and_quantiles_via_c_surface() {
        let mut t_star = 0.0;
        let mut total_error = 0.0;
        let status = unsafe { permutest_threshold_gauss(5, 4.0, &mut t_star, &mut total_error) };
        assert_eq!(status, PermutestStatus::Ok);
        let expect = permutest::thresholds::optimal_threshold_gauss(5, 4.0);
        assert_eq!(t_star, expect.t_star);
        assert_eq!(total_error, expect.total_error);

        let mut q = 0.0;
        let status = unsafe { permutest_chi2_critical(6, 0.0, 0.05, &mut q) };
        assert_eq!(status, PermutestStatus::Ok);
        assert!((q - 12.591587243743977).abs() < 1e-6);

        let status = unsafe { permutest_chi2_critical(6, -1.0, 0.05, &mut q) };
        assert_eq!(status, PermutestStatus::InvalidArgument);
    }
}
