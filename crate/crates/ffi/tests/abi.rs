use std::ffi::CStr;
use std::ptr;

use fslsense_ffi::*;

fn last_error() -> String {
    let p = fsl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handle(*mut FslModel);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { fsl_model_free(self.0) }
    }
}

fn model(n: usize, th: f64, ga: f64) -> Handle {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fsl_model_new(n, th, ga, 1.0, &mut m) }, FslStatus::Ok);
    assert!(!m.is_null());
    Handle(m)
}

#[test]
fn linear_limit_through_the_abi() {
    let m = model(100, 0.3, 0.0);
    assert_eq!(unsafe { fsl_model_n(m.0) }, 100);
    let mut f = 0.0;
    assert_eq!(unsafe { fsl_qfi(m.0, &mut f) }, FslStatus::Ok);
    assert!((f - 400.0).abs() < 400.0 * 1e-8);
    let (mut g, mut lg) = (0.0, 0.0);
    assert_eq!(unsafe { fsl_gap(m.0, &mut g, &mut lg) }, FslStatus::Ok);
    assert!((g - 1.0).abs() < 1e-10 && lg.abs() < 1e-10);
    assert!(fsl_last_error().is_null());
}

#[test]
fn zero_mode_buffer_protocol() {
    let m = model(6, 0.25, 0.4);
    let mut need = 0;
    let s = unsafe { fsl_zero_mode(m.0, ptr::null_mut(), 0, &mut need) };
    assert_eq!(s, FslStatus::BufferTooSmall);
    assert_eq!(need, 7);
    assert!(last_error().contains("7 needed"));

    let mut buf = vec![f64::NAN; need];
    assert_eq!(unsafe { fsl_zero_mode(m.0, buf.as_mut_ptr(), buf.len(), &mut need) }, FslStatus::Ok);
    let norm: f64 = buf.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-12);

    let direct = fslsense::zero_mode::solve_zero_mode(
        &fslsense::ModelParams::from_theta_over_pi(6, 0.25, 0.4).unwrap(),
    )
    .unwrap();
    assert_eq!(buf, direct.amplitudes);
}

#[test]
fn underflowing_gap_keeps_its_logarithm() {
    let m = model(2000, 0.47, 3.0);
    let (mut g, mut lg) = (1.0, 0.0);
    assert_eq!(unsafe { fsl_gap(m.0, &mut g, &mut lg) }, FslStatus::Ok);
    assert_eq!(g, 0.0);
    assert!(lg < -700.0 && lg > -1000.0, "{lg}");
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fsl_model_new(0, 0.2, 0.0, 1.0, &mut m) }, FslStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("n_excitations"));
    assert_eq!(unsafe { fsl_model_new(5, 0.2, 0.0, -1.0, &mut m) }, FslStatus::InvalidArgument);
    assert_eq!(unsafe { fsl_model_new(5, 0.2, 0.0, 1.0, ptr::null_mut()) }, FslStatus::NullPointer);

    let mut f = 0.0;
    assert_eq!(unsafe { fsl_qfi(ptr::null(), &mut f) }, FslStatus::NullPointer);
    let h = model(5, 0.5, 0.0);
    assert_eq!(unsafe { fsl_qfi(h.0, &mut f) }, FslStatus::PivotVanishes);
    assert!(last_error().contains("pivot"));
    assert_eq!(unsafe { fsl_qfi(h.0, ptr::null_mut()) }, FslStatus::PivotVanishes);
    unsafe { fsl_model_free(ptr::null_mut()) };

    let name = unsafe { CStr::from_ptr(fsl_status_name(FslStatus::BufferTooSmall)) };
    assert_eq!(name.to_str().unwrap(), "buffer too small");
}

#[test]
fn statics() {
    let v = unsafe { CStr::from_ptr(fsl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert!((fsl_theta_critical_over_pi() - 0.4443).abs() < 1e-4);
}
