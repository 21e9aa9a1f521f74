use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use dstek_ffi::*;

struct Medium(*mut DstekMedium);

impl Medium {
    fn new(radii: &[f64], eps: &[(f64, f64)]) -> Result<Self, DstekStatus> {
        let re: Vec<f64> = eps.iter().map(|e| e.0).collect();
        let im: Vec<f64> = eps.iter().map(|e| e.1).collect();
        let mut handle = ptr::null_mut();
        let status = unsafe {
            dstek_medium_new(
                radii.as_ptr(),
                re.as_ptr(),
                im.as_ptr(),
                radii.len(),
                &mut handle,
            )
        };
        if status == DstekStatus::Ok {
            Ok(Medium(handle))
        } else {
            assert!(handle.is_null());
            Err(status)
        }
    }
}

impl Drop for Medium {
    fn drop(&mut self) {
        unsafe { dstek_medium_free(self.0) };
    }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe { dstek_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn vacuum_eigenvalue_through_handle() {
    let med = Medium::new(&[1.0], &[(1.0, 0.0)]).unwrap();
    assert_eq!(unsafe { dstek_medium_shell_count(med.0) }, 1);
    let mut out = DstekComplex::default();
    let status = unsafe { dstek_eigenvalue(med.0, 1.0, 0.0, 1, &mut out) };
    assert_eq!(status, DstekStatus::Ok);
    let exact = -(1f64.cos()) / (1f64.sin() - 1f64.cos());
    assert!((out.re - exact).abs() < 1e-13 && out.im.abs() < 1e-15);
}

#[test]
fn invalid_medium_reports_reason() {
    let err = Medium::new(&[1.0, 0.5], &[(1.0, 0.0), (1.0, 0.0)]).err();
    assert_eq!(err, Some(DstekStatus::InvalidArgument));
    assert!(last_error().contains("increasing"), "{}", last_error());
    let err = Medium::new(&[1.0], &[(2.0, -0.5)]).err();
    assert_eq!(err, Some(DstekStatus::InvalidArgument));
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = DstekComplex::default();
    assert_eq!(
        unsafe { dstek_eigenvalue(ptr::null(), 1.0, 0.0, 1, &mut out) },
        DstekStatus::NullPointer
    );
    let med = Medium::new(&[1.0], &[(1.0, 0.0)]).unwrap();
    assert_eq!(
        unsafe { dstek_eigenvalue(med.0, 1.0, 0.0, 1, ptr::null_mut()) },
        DstekStatus::NullPointer
    );
    unsafe { dstek_medium_free(ptr::null_mut()) };
    assert_eq!(unsafe { dstek_medium_shell_count(ptr::null()) }, 0);
}

#[test]
fn spectrum_buffer_protocol() {
    let med = Medium::new(&[0.5, 1.0], &[(4.0, 0.0), (1.0, 0.0)]).unwrap();
    let mut len = 0usize;
    let mut small = [DstekComplex::default(); 2];
    let mut deg = [0usize; 2];
    let status = unsafe {
        dstek_spectrum(
            med.0,
            1.0,
            0.5,
            5,
            small.as_mut_ptr(),
            deg.as_mut_ptr(),
            2,
            &mut len,
        )
    };
    assert_eq!(status, DstekStatus::BufferTooSmall);
    assert_eq!(len, 5);
    let mut lambdas = vec![DstekComplex::default(); len];
    let mut degrees = vec![0usize; len];
    let status = unsafe {
        dstek_spectrum(
            med.0,
            1.0,
            0.5,
            5,
            lambdas.as_mut_ptr(),
            degrees.as_mut_ptr(),
            len,
            &mut len,
        )
    };
    assert_eq!(status, DstekStatus::Ok);
    assert!(lambdas.windows(2).all(|w| w[0].re <= w[1].re));
    for (lam, l) in lambdas.iter().zip(&degrees) {
        let mut direct = DstekComplex::default();
        unsafe { dstek_eigenvalue(med.0, 1.0, 0.5, *l, &mut direct) };
        assert_eq!(*lam, direct);
    }
}

#[test]
fn assumption_and_resonance_codes() {
    let med = Medium::new(&[1.0], &[(1.0, 0.0)]).unwrap();
    let mut clear = false;
    assert_eq!(
        unsafe { dstek_check_assumption(med.0, 1.0, 3, &mut clear) },
        DstekStatus::Ok
    );
    assert!(clear);
    assert_eq!(
        unsafe { dstek_check_assumption(med.0, 4.4934095, 1, &mut clear) },
        DstekStatus::Ok
    );
    assert!(!clear);
    let mut out = DstekComplex::default();
    let status = unsafe { dstek_spectrum(med.0, 4.4934095, 0.0, 2, &mut out, &mut 0, 1, &mut 0) };
    assert_eq!(status, DstekStatus::AssumptionViolated);
}

#[test]
fn shift_on_eigenvalue_is_flagged() {
    let med = Medium::new(&[1.0], &[(1.0, 0.0)]).unwrap();
    let mut lam = DstekComplex::default();
    unsafe { dstek_eigenvalue(med.0, 1.0, 0.0, 1, &mut lam) };
    let mut t = DstekComplex::default();
    let status = unsafe { dstek_t_entry(med.0, 1.0, 0.0, lam.re, 1, &mut t) };
    assert_eq!(status, DstekStatus::ShiftIsEigenvalue);
    assert_eq!(
        unsafe { dstek_t_entry(med.0, 1.0, 0.0, 0.0, 1, &mut t) },
        DstekStatus::Ok
    );
    assert!((t.re - 1.0 / lam.re).abs() < 1e-12);
}

#[test]
fn detection_and_mie_through_handle() {
    let med = Medium::new(&[0.5, 1.0], &[(4.0, 0.0), (1.0, 0.0)]).unwrap();
    for l in 1..=4 {
        let (mut direct, mut found) = (DstekComplex::default(), DstekComplex::default());
        unsafe { dstek_eigenvalue(med.0, 1.0, 1.0, l, &mut direct) };
        assert_eq!(
            unsafe { dstek_detect(med.0, 1.0, 1.0, l, 0.0, 0, &mut found) },
            DstekStatus::Ok
        );
        let scale = 1.0 + direct.re.hypot(direct.im);
        assert!((found.re - direct.re).hypot(found.im - direct.im) < 1e-8 * scale);
        let (mut te, mut tm) = (DstekComplex::default(), DstekComplex::default());
        assert_eq!(
            unsafe { dstek_mie_coefficients(med.0, 1.0, l, &mut te, &mut tm) },
            DstekStatus::Ok
        );
        let unit = (1.0 + 2.0 * te.re).hypot(2.0 * te.im);
        assert!((unit - 1.0).abs() < 1e-10);
    }
    let mut out = DstekComplex::default();
    assert_eq!(
        unsafe { dstek_detect(med.0, 1.0, 0.0, 1, -1.0, 0, &mut out) },
        DstekStatus::InvalidArgument
    );
}

#[test]
fn error_message_truncation() {
    let _ = Medium::new(&[1.0, 0.5], &[(1.0, 0.0), (1.0, 0.0)]);
    let full = unsafe { dstek_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [0 as std::ffi::c_char; 8];
    assert_eq!(
        unsafe { dstek_last_error_message(buf.as_mut_ptr(), buf.len()) },
        full
    );
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn static_strings() {
    let v = unsafe { CStr::from_ptr(dstek_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let s = unsafe { CStr::from_ptr(dstek_status_str(DstekStatus::NoRoot)) };
    assert_eq!(s.to_str().unwrap(), "no root found");
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dstek.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "dstek_medium_new",
        "dstek_spectrum",
        "dstek_detect",
        "DSTEK_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        return; // no C compiler available
    };
    assert!(status.success());
}
