//! C interface to `dstek`.
//!
//! Media live behind an opaque `DstekMedium` handle. Every call returns a
//! `DstekStatus`; on failure a description is kept per thread and can be
//! copied out with `dstek_last_error_message`. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dstek::radial::{self, LayeredMedium, RadialError};
use dstek::scattering::{self, DetectionMethod, Noise, ScatteringError};
use dstek::stekloff::{self, StekloffError};
use dstek::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DstekStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AssumptionViolated = 3,
    ShiftIsEigenvalue = 4,
    InteriorResonance = 5,
    NoRoot = 6,
    BufferTooSmall = 7,
    NumericalFailure = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DstekComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for DstekComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Opaque layered medium.
pub struct DstekMedium {
    inner: LayeredMedium,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(DstekStatus, String);

impl From<RadialError> for Failure {
    fn from(e: RadialError) -> Self {
        let status = match e {
            RadialError::InvalidMedium(_)
            | RadialError::InvalidWavenumber(_)
            | RadialError::ZeroDegree => DstekStatus::InvalidArgument,
            RadialError::InteriorResonance { .. } => DstekStatus::InteriorResonance,
            _ => DstekStatus::NumericalFailure,
        };
        Failure(status, e.to_string())
    }
}

impl From<StekloffError> for Failure {
    fn from(e: StekloffError) -> Self {
        let status = match &e {
            StekloffError::Radial(r) => return r.clone().into(),
            StekloffError::AssumptionViolated { .. } => DstekStatus::AssumptionViolated,
            StekloffError::ShiftIsEigenvalue { .. } => DstekStatus::ShiftIsEigenvalue,
            StekloffError::InvalidDelta(_)
            | StekloffError::InvalidShift(_)
            | StekloffError::EmptyGrid => DstekStatus::InvalidArgument,
            _ => DstekStatus::NumericalFailure,
        };
        Failure(status, e.to_string())
    }
}

impl From<ScatteringError> for Failure {
    fn from(e: ScatteringError) -> Self {
        let status = match &e {
            ScatteringError::Radial(r) => return r.clone().into(),
            ScatteringError::AssumptionViolated(_) => DstekStatus::AssumptionViolated,
            ScatteringError::InvalidDelta(_) => DstekStatus::InvalidArgument,
            ScatteringError::NoRootInWindow { .. } | ScatteringError::DegenerateMoebius(_) => {
                DstekStatus::NoRoot
            }
            _ => DstekStatus::NumericalFailure,
        };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DstekStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DstekStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DstekStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DstekStatus::NullPointer, format!("{what} is null"))
}

unsafe fn medium<'a>(handle: *const DstekMedium) -> Result<&'a LayeredMedium, Failure> {
    handle
        .as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| null("medium"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Creates a medium from `n` shells, innermost first.
///
/// # Safety
/// `radii`, `eps_re` and `eps_im` must point to `n` readable doubles and
/// `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dstek_medium_new(
    radii: *const f64,
    eps_re: *const f64,
    eps_im: *const f64,
    n: usize,
    out: *mut *mut DstekMedium,
) -> DstekStatus {
    guard(|| {
        if radii.is_null() || eps_re.is_null() || eps_im.is_null() {
            return Err(null("input array"));
        }
        if n == 0 {
            return Err(Failure(
                DstekStatus::InvalidArgument,
                "medium needs at least one shell".into(),
            ));
        }
        let r = std::slice::from_raw_parts(radii, n).to_vec();
        let re = std::slice::from_raw_parts(eps_re, n);
        let im = std::slice::from_raw_parts(eps_im, n);
        let eps = re
            .iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect();
        let inner = LayeredMedium::new(r, eps)?;
        write(out, Box::into_raw(Box::new(DstekMedium { inner })))
    })
}

/// Releases a medium. Null is ignored.
///
/// # Safety
/// `handle` must come from `dstek_medium_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dstek_medium_free(handle: *mut DstekMedium) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of shells of the medium, 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live medium.
#[no_mangle]
pub unsafe extern "C" fn dstek_medium_shell_count(handle: *const DstekMedium) -> usize {
    handle.as_ref().map_or(0, |m| m.inner.radii().len())
}

/// TE delta-Stekloff eigenvalue of degree `l`.
///
/// # Safety
/// `handle` must be a live medium and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_eigenvalue(
    handle: *const DstekMedium,
    k: f64,
    delta: f64,
    l: usize,
    out: *mut DstekComplex,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        let rec = stekloff::eigenvalue_te(med, k, delta, l)?;
        write(out, rec.lambda.into())
    })
}

/// Eigenvalues for degrees `1..=l_max`, sorted by real part, imaginary part,
/// degree. Resonant degrees are skipped. Writes up to `capacity` entries and
/// the full count to `out_len`; returns `BUFFER_TOO_SMALL` if it did not fit.
///
/// # Safety
/// `lambdas` and `degrees` must have room for `capacity` entries, `out_len`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_spectrum(
    handle: *const DstekMedium,
    k: f64,
    delta: f64,
    l_max: usize,
    lambdas: *mut DstekComplex,
    degrees: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        let spec = stekloff::spectrum(med, k, delta, l_max)?;
        write(out_len, spec.records.len())?;
        if spec.records.len() > capacity {
            return Err(Failure(
                DstekStatus::BufferTooSmall,
                format!("{} eigenvalues, capacity {capacity}", spec.records.len()),
            ));
        }
        if lambdas.is_null() || degrees.is_null() {
            return Err(null("output array"));
        }
        for (i, r) in spec.records.iter().enumerate() {
            lambdas.add(i).write(r.lambda.into());
            degrees.add(i).write(r.degree);
        }
        Ok(())
    })
}

/// Entry of the shifted solution operator on degree `l`.
///
/// # Safety
/// `handle` must be a live medium and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_t_entry(
    handle: *const DstekMedium,
    k: f64,
    delta: f64,
    z: f64,
    l: usize,
    out: *mut DstekComplex,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        write(out, stekloff::t_entry(med, k, delta, z, l)?.into())
    })
}

/// Scattering coefficients of degree `l`.
///
/// # Safety
/// `handle` must be a live medium, `te` and `tm` writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_mie_coefficients(
    handle: *const DstekMedium,
    k: f64,
    l: usize,
    te: *mut DstekComplex,
    tm: *mut DstekComplex,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        let (a, b) = scattering::mie_coefficients(med, k, l)?;
        write(te, a.into())?;
        write(tm, b.into())
    })
}

/// Eigenvalue recovered from far-field data by the closed-form Moebius fit.
/// `noise` is the relative perturbation of the measured entry (0 for none).
///
/// # Safety
/// `handle` must be a live medium and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_detect(
    handle: *const DstekMedium,
    k: f64,
    delta: f64,
    l: usize,
    noise: f64,
    seed: u64,
    out: *mut DstekComplex,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(Failure(
                DstekStatus::InvalidArgument,
                format!("noise must be >= 0, got {noise}"),
            ));
        }
        let noise = (noise > 0.0).then_some(Noise {
            magnitude: noise,
            seed,
        });
        let found =
            scattering::detect_eigenvalues(med, k, delta, l, DetectionMethod::Moebius, noise)?;
        write(out, found.lambda.into())
    })
}

/// Sets `all_clear` to whether no degree `1..=l_max` is resonant at `k`.
///
/// # Safety
/// `handle` must be a live medium and `all_clear` writable.
#[no_mangle]
pub unsafe extern "C" fn dstek_check_assumption(
    handle: *const DstekMedium,
    k: f64,
    l_max: usize,
    all_clear: *mut bool,
) -> DstekStatus {
    guard(|| {
        let med = medium(handle)?;
        let report = radial::check_assumption(med, k, l_max)?;
        write(all_clear, report.all_clear())
    })
}

/// Copies the last error of this thread, NUL-terminated and truncated to
/// `len`. Returns the untruncated length without the terminator.
///
/// # Safety
/// `buf` must be null or have room for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn dstek_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        msg.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dstek_status_str(status: DstekStatus) -> *const c_char {
    let s: &'static CStr = match status {
        DstekStatus::Ok => c"ok",
        DstekStatus::NullPointer => c"null pointer",
        DstekStatus::InvalidArgument => c"invalid argument",
        DstekStatus::AssumptionViolated => c"assumption on k violated",
        DstekStatus::ShiftIsEigenvalue => c"shift is an eigenvalue",
        DstekStatus::InteriorResonance => c"interior resonance",
        DstekStatus::NoRoot => c"no root found",
        DstekStatus::BufferTooSmall => c"buffer too small",
        DstekStatus::NumericalFailure => c"numerical failure",
        DstekStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

#[no_mangle]
pub extern "C" fn dstek_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
