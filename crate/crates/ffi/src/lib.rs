//! C ABI over the minsurf library.
//!
//! Every function returns an `MsStatus`; on failure the message is kept per
//! thread and read with `ms_last_error_message`. Handles are opaque and owned
//! by the caller, who frees them with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use minsurf::metric::{adm_mass, scalar_curvature};
use minsurf::plateau::{solve_plateau, verify_solution, ShootingProblem};
use minsurf::profile::RadialProfile;
use minsurf::{AmbientMetric, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Solver or quadrature failure.
    Numerical = 3,
    Panic = 4,
}

/// Ambient conformally flat metric.
pub struct MsMetric {
    inner: AmbientMetric,
}

/// Solved radial profile with dense output.
pub struct MsProfile {
    inner: RadialProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MsStatus {
    match e {
        Error::InvalidConfig(_) | Error::PointOutsideDomain { .. } | Error::Json(_) | Error::DomainViolation(_) => MsStatus::InvalidArgument,
        _ => MsStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status and the last error.
fn guard<F: FnOnce() -> Result<(), (MsStatus, String)>>(f: F) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MsStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside minsurf");
            MsStatus::Panic
        }
    }
}

fn lib<T>(r: minsurf::Result<T>) -> Result<T, (MsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (MsStatus, String) {
    (MsStatus::NullPointer, format!("{name} is null"))
}

fn new_metric(out: *mut *mut MsMetric, metric: AmbientMetric) -> Result<(), (MsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    lib(metric.validate())?;
    // SAFETY: `out` is non-null and the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(MsMetric { inner: metric })) };
    Ok(())
}

/// Message of the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ms_metric_flat(dim: usize, out: *mut *mut MsMetric) -> MsStatus {
    guard(|| new_metric(out, AmbientMetric::flat(dim)))
}

/// Schwarzschild metric φ^{4/(n-2)}δ with φ = 1 + (m/2)|x|^{2-n}.
#[no_mangle]
pub extern "C" fn ms_metric_schwarzschild(dim: usize, mass: f64, out: *mut *mut MsMetric) -> MsStatus {
    guard(|| new_metric(out, AmbientMetric::schwarzschild(dim, mass)))
}

/// Metric from its JSON form, e.g. `{"dim": 4, "family": "schwarzschild", "mass": 2.0}`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ms_metric_from_json(json: *const c_char, out: *mut *mut MsMetric) -> MsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: non-null and NUL-terminated by contract.
        let text = unsafe { CStr::from_ptr(json) }.to_str().map_err(|e| (MsStatus::InvalidArgument, e.to_string()))?;
        let metric: AmbientMetric = lib(serde_json::from_str(text).map_err(Error::from))?;
        new_metric(out, metric)
    })
}

/// # Safety
/// `metric` must come from an `ms_metric_*` constructor and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn ms_metric_free(metric: *mut MsMetric) {
    if !metric.is_null() {
        // SAFETY: allocated by Box::into_raw in new_metric.
        drop(unsafe { Box::from_raw(metric) });
    }
}

/// Scalar curvature at the point `x[0..len]`; `len` must equal the dimension.
///
/// # Safety
/// `metric` must be a live handle, `x` must point to `len` doubles and `out`
/// to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ms_metric_scalar_curvature(metric: *const MsMetric, x: *const f64, len: usize, out: *mut f64) -> MsStatus {
    guard(|| {
        if metric.is_null() || x.is_null() || out.is_null() {
            return Err(null("metric, x or out"));
        }
        // SAFETY: pointers checked non-null; sizes by contract.
        let (m, xs) = unsafe { (&(*metric).inner, std::slice::from_raw_parts(x, len)) };
        if len != m.dim {
            return Err((MsStatus::InvalidArgument, format!("point has {len} coordinates, metric dimension is {}", m.dim)));
        }
        let r = lib(scalar_curvature(m, xs))?;
        // SAFETY: checked non-null.
        unsafe { *out = r };
        Ok(())
    })
}

/// ADM mass extrapolated over the increasing radii `radii[0..count]`.
///
/// # Safety
/// `metric` must be a live handle, `radii` must point to `count` doubles,
/// `limit` and `error` to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_adm_mass(metric: *const MsMetric, radii: *const f64, count: usize, limit: *mut f64, error: *mut f64) -> MsStatus {
    guard(|| {
        if metric.is_null() || radii.is_null() || limit.is_null() || error.is_null() {
            return Err(null("metric, radii, limit or error"));
        }
        // SAFETY: pointers checked non-null; sizes by contract.
        let (m, rs) = unsafe { (&(*metric).inner, std::slice::from_raw_parts(radii, count)) };
        let est = lib(adm_mass(m, rs))?;
        // SAFETY: checked non-null.
        unsafe {
            *limit = est.limit;
            *error = est.error;
        }
        Ok(())
    })
}

/// Least-area rotationally symmetric graph over the disk of radius `r` with
/// boundary height `z`.
///
/// # Safety
/// `metric` must be a live handle and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn ms_plateau_solve(metric: *const MsMetric, r: f64, z: f64, out: *mut *mut MsProfile) -> MsStatus {
    guard(|| {
        if metric.is_null() || out.is_null() {
            return Err(null("metric or out"));
        }
        // SAFETY: checked non-null.
        let m = unsafe { &(*metric).inner };
        let prof = lib(solve_plateau(&ShootingProblem::new(m.clone(), r, z)))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(MsProfile { inner: prof })) };
        Ok(())
    })
}

/// # Safety
/// `profile` must come from `ms_plateau_solve` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn ms_profile_free(profile: *mut MsProfile) {
    if !profile.is_null() {
        // SAFETY: allocated by Box::into_raw in ms_plateau_solve.
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Height f(t) and slope f'(t) for t in [0, r].
///
/// # Safety
/// `profile` must be a live handle; `f` and `p` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_profile_eval(profile: *const MsProfile, t: f64, f: *mut f64, p: *mut f64) -> MsStatus {
    guard(|| {
        if profile.is_null() || f.is_null() || p.is_null() {
            return Err(null("profile, f or p"));
        }
        // SAFETY: checked non-null.
        let prof = unsafe { &(*profile).inner };
        if !(t >= prof.t_min() && t <= prof.r) {
            return Err((MsStatus::InvalidArgument, format!("t = {t} outside [{}, {}]", prof.t_min(), prof.r)));
        }
        let s = prof.eval(t);
        // SAFETY: checked non-null.
        unsafe {
            *f = s.f;
            *p = s.p;
        }
        Ok(())
    })
}

/// Number of stored samples, for sizing `ms_profile_samples` buffers.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_profile_sample_count(profile: *const MsProfile, out: *mut usize) -> MsStatus {
    guard(|| {
        if profile.is_null() || out.is_null() {
            return Err(null("profile or out"));
        }
        // SAFETY: checked non-null.
        unsafe { *out = (*profile).inner.samples.len() };
        Ok(())
    })
}

/// Copies the stored (t, f, p) samples into three buffers of length `cap`,
/// which must be at least the sample count.
///
/// # Safety
/// `profile` must be a live handle; `t`, `f`, `p` must each hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_profile_samples(profile: *const MsProfile, t: *mut f64, f: *mut f64, p: *mut f64, cap: usize) -> MsStatus {
    guard(|| {
        if profile.is_null() || t.is_null() || f.is_null() || p.is_null() {
            return Err(null("profile or buffer"));
        }
        // SAFETY: checked non-null.
        let samples = unsafe { &(*profile).inner.samples };
        if cap < samples.len() {
            return Err((MsStatus::InvalidArgument, format!("buffer holds {cap} samples, need {}", samples.len())));
        }
        // SAFETY: each buffer holds at least `cap` ≥ len doubles.
        let (ts, fs, ps) = unsafe {
            (
                std::slice::from_raw_parts_mut(t, samples.len()),
                std::slice::from_raw_parts_mut(f, samples.len()),
                std::slice::from_raw_parts_mut(p, samples.len()),
            )
        };
        for (i, s) in samples.iter().enumerate() {
            ts[i] = s.t;
            fs[i] = s.f;
            ps[i] = s.p;
        }
        Ok(())
    })
}

/// Runs the solution checks; `passed` is 1 when all pass, 0 otherwise, and
/// `failed_ids` (may be null) receives a newly allocated, comma-separated
/// list of failing check ids to release with `ms_string_free`.
///
/// # Safety
/// `profile` must be a live handle and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_profile_verify(profile: *const MsProfile, passed: *mut i32, failed_ids: *mut *mut c_char) -> MsStatus {
    guard(|| {
        if profile.is_null() || passed.is_null() {
            return Err(null("profile or passed"));
        }
        // SAFETY: checked non-null.
        let reports = verify_solution(unsafe { &(*profile).inner });
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
        // SAFETY: checked non-null; `failed_ids` only written when non-null.
        unsafe {
            *passed = i32::from(failed.is_empty());
            if !failed_ids.is_null() {
                *failed_ids = CString::new(failed.join(",")).unwrap_or_default().into_raw();
            }
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use std::ptr;

    use super::*;

    fn last_error() -> String {
        // SAFETY: the library keeps a valid NUL-terminated buffer.
        unsafe { CStr::from_ptr(ms_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn invalid_metric_sets_error() {
        let mut m = ptr::null_mut();
        assert_eq!(ms_metric_schwarzschild(4, -1.0, &mut m), MsStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(last_error().contains("mass"));
        assert_eq!(ms_metric_flat(4, ptr::null_mut()), MsStatus::NullPointer);
    }

    #[test]
    fn plateau_round_trip() {
        let mut m = ptr::null_mut();
        assert_eq!(ms_metric_schwarzschild(4, 2.0, &mut m), MsStatus::Ok);
        let mut prof = ptr::null_mut();
        unsafe {
            assert_eq!(ms_plateau_solve(m, 50.0, 1.0, &mut prof), MsStatus::Ok);
            let (mut f, mut p) = (0.0, 0.0);
            assert_eq!(ms_profile_eval(prof, 50.0, &mut f, &mut p), MsStatus::Ok);
            assert!((f - 1.0).abs() < 1e-8 && p < 0.0);
            assert_eq!(ms_profile_eval(prof, 51.0, &mut f, &mut p), MsStatus::InvalidArgument);
            let mut n = 0usize;
            assert_eq!(ms_profile_sample_count(prof, &mut n), MsStatus::Ok);
            let (mut t, mut fs, mut ps) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            assert_eq!(ms_profile_samples(prof, t.as_mut_ptr(), fs.as_mut_ptr(), ps.as_mut_ptr(), n), MsStatus::Ok);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(ms_profile_samples(prof, t.as_mut_ptr(), fs.as_mut_ptr(), ps.as_mut_ptr(), n - 1), MsStatus::InvalidArgument);
            let mut ok = 0;
            let mut ids = ptr::null_mut();
            assert_eq!(ms_profile_verify(prof, &mut ok, &mut ids), MsStatus::Ok);
            assert_eq!(ok, 1);
            assert_eq!(CStr::from_ptr(ids).to_bytes(), b"");
            ms_string_free(ids);
            ms_profile_free(prof);
            ms_metric_free(m);
        }
    }

    #[test]
    fn json_metric_and_curvature() {
        let json = CString::new(r#"{"dim": 5, "family": "schwarzschild", "mass": 2.0}"#).unwrap();
        let mut m = ptr::null_mut();
        unsafe {
            assert_eq!(ms_metric_from_json(json.as_ptr(), &mut m), MsStatus::Ok);
            let x = [1.0, 2.0, 0.5, -1.0, 3.0];
            let mut r = 1.0;
            assert_eq!(ms_metric_scalar_curvature(m, x.as_ptr(), 5, &mut r), MsStatus::Ok);
            assert!(r.abs() < 1e-10);
            assert_eq!(ms_metric_scalar_curvature(m, x.as_ptr(), 4, &mut r), MsStatus::InvalidArgument);
            let radii: Vec<f64> = (0..7).map(|k| 8.0 * 2f64.powi(k)).collect();
            let (mut lim, mut err) = (0.0, 0.0);
            assert_eq!(ms_adm_mass(m, radii.as_ptr(), radii.len(), &mut lim, &mut err), MsStatus::Ok);
            assert!((lim - 2.0).abs() < 0.02);
            ms_metric_free(m);
            let bad = CString::new("{").unwrap();
            assert_eq!(ms_metric_from_json(bad.as_ptr(), &mut m), MsStatus::InvalidArgument);
        }
        assert!(!last_error().is_empty());
    }
}
