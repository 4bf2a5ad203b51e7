//! C interface to the hypertoric pipelines. Objects cross the boundary as
//! opaque handles; every call returns an [`HtStatus`] and leaves a message
//! for [`ht_last_error`] on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hypertoric::arrangement::{enumerate_faces, ArrangementError, FacePoset, PeriodicArrangement};
use hypertoric::beilinson::Flavor;
use hypertoric::cli::{run, JobSpec, ReportBundle};
use hypertoric::cosheaf::{build_cosheaf, collapse_and_complete, global_algebra, refine_cells_auto, working_degree};
use hypertoric::skeleton::{build_skeleton, euler_characteristic};
use num_rational::BigRational;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// Bad sequence, bad dimensions or a zero denominator.
    InvalidInput = 4,
    NonGeneric = 5,
    /// A job ran but some verification did not pass.
    VerificationFailed = 6,
    ComputationFailed = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A torus arrangement together with its face poset.
pub struct HtArrangement {
    poset: FacePoset,
}

/// The outcome of a job run.
pub struct HtReport {
    bundle: ReportBundle,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn guard<F: FnOnce() -> Result<(), (HtStatus, String)>>(f: F) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HtStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HtStatus::Panic
        }
    }
}

fn null(what: &str) -> (HtStatus, String) {
    (HtStatus::NullPointer, format!("{what} is null"))
}

/// Message for the most recent failed call on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static version string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds an arrangement of `n` families on the `d`-torus. `conormals` holds
/// `n * d` integers row by row, offsets are `num[i] / den[i]`.
///
/// # Safety
/// The arrays must hold `n * d`, `n` and `n` readable entries; `out` must be
/// writable. Arrays may be null when `n == 0`.
#[no_mangle]
pub unsafe extern "C" fn ht_arrangement_new(
    d: usize,
    n: usize,
    conormals: *const i64,
    offset_num: *const i64,
    offset_den: *const i64,
    out: *mut *mut HtArrangement,
) -> HtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if n > 0 && (conormals.is_null() || offset_num.is_null() || offset_den.is_null()) {
            return Err(null("input array"));
        }
        if d == 0 {
            return Err((HtStatus::InvalidInput, "d must be positive".into()));
        }
        let mut fams = Vec::with_capacity(n);
        for i in 0..n {
            let row = std::slice::from_raw_parts(conormals.add(i * d), d).to_vec();
            let den = *offset_den.add(i);
            if den == 0 {
                return Err((HtStatus::InvalidInput, format!("zero denominator in family {i}")));
            }
            fams.push((row, BigRational::new((*offset_num.add(i)).into(), den.into())));
        }
        let arr = PeriodicArrangement::from_i64(d, &fams)
            .map_err(|e| (HtStatus::InvalidInput, e.to_string()))?;
        let poset = enumerate_faces(&arr).map_err(|e| match e {
            ArrangementError::NonGeneric(_) | ArrangementError::NonUnimodularFlat(_) => {
                (HtStatus::NonGeneric, e.to_string())
            }
            other => (HtStatus::InvalidInput, other.to_string()),
        })?;
        *out = Box::into_raw(Box::new(HtArrangement { poset }));
        Ok(())
    })
}

/// # Safety
/// `arr` must come from [`ht_arrangement_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ht_arrangement_free(arr: *mut HtArrangement) {
    if !arr.is_null() {
        drop(Box::from_raw(arr));
    }
}

/// Number of torus faces of dimension `dim`.
///
/// # Safety
/// `arr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ht_arrangement_face_count(
    arr: *const HtArrangement,
    dim: usize,
    out: *mut usize,
) -> HtStatus {
    guard(|| {
        let a = arr.as_ref().ok_or_else(|| null("arrangement"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = a.poset.faces_of_dim(dim).len();
        Ok(())
    })
}

/// Euler characteristic of the skeleton over the arrangement.
///
/// # Safety
/// `arr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ht_skeleton_euler(arr: *const HtArrangement, out: *mut i64) -> HtStatus {
    guard(|| {
        let a = arr.as_ref().ok_or_else(|| null("arrangement"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = build_skeleton(&a.poset).map_err(|e| (HtStatus::NonGeneric, e.to_string()))?;
        let cells = refine_cells_auto(&a.poset).map_err(|e| (HtStatus::ComputationFailed, e.to_string()))?;
        *out = euler_characteristic(&s, &cells);
        Ok(())
    })
}

/// Graded dimensions `0..=degree` of the collapsed global algebra, written
/// to `dims` (which must hold `degree + 1` entries). `flavor` is 0 for the
/// degenerate algebra, 1 for the full one.
///
/// # Safety
/// `arr` must be a live handle and `dims` must hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn ht_global_dims(
    arr: *const HtArrangement,
    flavor: u32,
    degree: u32,
    dims: *mut usize,
    len: usize,
) -> HtStatus {
    guard(|| {
        let a = arr.as_ref().ok_or_else(|| null("arrangement"))?;
        if dims.is_null() {
            return Err(null("dims"));
        }
        if len < degree as usize + 1 {
            return Err((HtStatus::BufferTooSmall, format!("need {} entries", degree + 1)));
        }
        let flavor = match flavor {
            0 => Flavor::B0,
            1 => Flavor::B,
            f => return Err((HtStatus::InvalidInput, format!("unknown flavor {f}"))),
        };
        let fail = |e: &dyn std::fmt::Display| (HtStatus::ComputationFailed, e.to_string());
        let sheaf = build_cosheaf(&a.poset, flavor).map_err(|e| fail(&e))?;
        let cells = refine_cells_auto(&a.poset).map_err(|e| fail(&e))?;
        let glued = global_algebra(&sheaf, &cells).map_err(|e| fail(&e))?;
        let c = collapse_and_complete(glued, working_degree(degree)).map_err(|e| fail(&e))?;
        let d = c.dims(degree).map_err(|e| fail(&e))?;
        std::slice::from_raw_parts_mut(dims, len)[..d.len()].copy_from_slice(&d);
        Ok(())
    })
}

/// Runs a JSON job. On success or verification failure `out` receives a
/// report handle; the status is `HT_STATUS_VERIFICATION_FAILED` when some
/// stage did not pass and `HT_STATUS_INVALID_INPUT` for bad input.
///
/// # Safety
/// `job_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ht_run_job(job_json: *const c_char, out: *mut *mut HtReport) -> HtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if job_json.is_null() {
            return Err(null("job"));
        }
        let text = CStr::from_ptr(job_json)
            .to_str()
            .map_err(|e| (HtStatus::InvalidUtf8, e.to_string()))?;
        let job = JobSpec::from_json(text).map_err(|e| (HtStatus::ParseError, e.to_string()))?;
        let bundle = run(&job);
        let json = CString::new(bundle.to_json()).map_err(|e| (HtStatus::ComputationFailed, e.to_string()))?;
        let code = bundle.exit_code;
        *out = Box::into_raw(Box::new(HtReport { bundle, json }));
        match code {
            0 => Ok(()),
            2 => Err((HtStatus::InvalidInput, "job input rejected; see report".into())),
            _ => Err((HtStatus::VerificationFailed, "some stage did not pass; see report".into())),
        }
    })
}

/// 0 pass, 1 verification failure, 2 input error.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ht_report_exit_code(report: *const HtReport) -> i32 {
    report.as_ref().map_or(2, |r| r.bundle.exit_code)
}

/// JSON text of the report, owned by the handle.
///
/// # Safety
/// `report` must be a live handle; the pointer dies with it.
#[no_mangle]
pub unsafe extern "C" fn ht_report_json(report: *const HtReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Human-readable summary; release with [`ht_string_free`].
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ht_report_summary(report: *const HtReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| {
        CString::new(r.bundle.summary()).map_or(ptr::null_mut(), CString::into_raw)
    })
}

/// # Safety
/// `report` must come from [`ht_run_job`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ht_report_free(report: *mut HtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ht_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
