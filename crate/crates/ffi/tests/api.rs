use std::ffi::{CStr, CString};
use std::ptr;

use burgers2d_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(b2d_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn grid(n: usize, periodic: bool) -> *mut B2dGrid {
    let mut g = ptr::null_mut();
    assert_eq!(b2d_grid_new(0.0, 1.0, 0.0, 1.0, n, n, periodic, &mut g), B2dStatus::Ok);
    g
}

#[test]
fn grid_errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(b2d_grid_new(0.0, 1.0, 0.0, 1.0, 0, 3, false, &mut g), B2dStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(b2d_grid_new(0.0, 1.0, 0.0, 1.0, 2, 3, false, ptr::null_mut()), B2dStatus::NullPointer);
        let g = grid(4, false);
        let (mut n1, mut n2) = (0, 0);
        assert_eq!(b2d_grid_dims(g, &mut n1, &mut n2), B2dStatus::Ok);
        assert_eq!((n1, n2), (4, 4));
        assert!(last_error().is_empty());
        b2d_grid_free(g);
        b2d_grid_free(ptr::null_mut());
    }
}

#[test]
fn step_respects_cfl() {
    unsafe {
        let g = grid(10, true);
        let vals = vec![2.0; 100];
        let mut f = ptr::null_mut();
        assert_eq!(b2d_field_from_values(g, vals.as_ptr(), vals.len(), 0.0, &mut f), B2dStatus::Ok);
        let mut dt = 0.0;
        assert_eq!(b2d_cfl_dt(f, 0.5, 1.0, &mut dt), B2dStatus::Ok);
        assert!((dt - 1.0 / 120.0).abs() < 1e-15);
        assert_eq!(b2d_step(f, dt), B2dStatus::Ok);
        assert_eq!(b2d_step(f, 1.0), B2dStatus::CflViolation);
        assert!(last_error().contains("CFL"));
        let mut out = vec![0.0; 100];
        assert_eq!(b2d_field_copy_values(f, out.as_mut_ptr(), 99), B2dStatus::BufferTooSmall);
        assert_eq!(b2d_field_copy_values(f, out.as_mut_ptr(), 100), B2dStatus::Ok);
        assert!(out.iter().all(|&v| v == 2.0));
        let mut n = 0.0;
        assert_eq!(b2d_lp_norm(f, 1.0, &mut n), B2dStatus::Ok);
        assert!((n - 2.0).abs() < 1e-14);
        assert_eq!(b2d_lp_norm(f, 0.5, &mut n), B2dStatus::InvalidArgument);
        b2d_field_free(f);
        b2d_grid_free(g);
    }
}

#[test]
fn dirac_advance_conserves_mass() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(b2d_grid_new(-1.0, 2.0, -0.5, 2.5, 48, 48, false, &mut g), B2dStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(b2d_datum_dirac(1.0, 4, &mut d), B2dStatus::Ok);
        let mut m = 0.0;
        assert_eq!(b2d_datum_mass(d, &mut m), B2dStatus::Ok);
        assert_eq!(m, 1.0);
        let mut f = ptr::null_mut();
        assert_eq!(b2d_discretize(d, g, 3, &mut f), B2dStatus::Ok);
        let mut steps = 0;
        assert_eq!(b2d_advance(f, 0.5, 0.5, &mut steps), B2dStatus::Ok);
        assert!(steps > 0);
        let (mut len, mut t) = (0, 0.0);
        assert_eq!(b2d_field_info(f, &mut len, &mut t), B2dStatus::Ok);
        assert_eq!((len, t), (48 * 48, 0.5));
        assert_eq!(b2d_field_mass(f, &mut m), B2dStatus::Ok);
        assert!((m - 1.0).abs() < 1e-12);
        assert_eq!(b2d_datum_dirac(0.0, 4, &mut d), B2dStatus::InvalidArgument);
        b2d_field_free(f);
        b2d_datum_free(d);
        b2d_grid_free(g);
    }
}

#[test]
fn line_measure_has_profile_mass() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(b2d_datum_line_measure(0.0, 1.0, 2.0, 0.1, &mut d), B2dStatus::Ok);
        let mut m = 0.0;
        assert_eq!(b2d_datum_mass(d, &mut m), B2dStatus::Ok);
        assert!((m - 2.0).abs() < 1e-12);
        b2d_datum_free(d);
    }
}

#[test]
fn fluxes_and_vss() {
    unsafe {
        let mut f = 0.0;
        assert_eq!(b2d_flux_x1(-1.0, 1.0, &mut f), B2dStatus::Ok);
        assert_eq!(f, 0.0);
        assert_eq!(b2d_flux_x1(2.0, -1.0, &mut f), B2dStatus::Ok);
        assert_eq!(f, 2.0);
        assert_eq!(b2d_flux_x2(3.0, 0.0, &mut f), B2dStatus::Ok);
        assert_eq!(f, 9.0);
        assert_eq!(b2d_flux_x1(f64::NAN, 0.0, &mut f), B2dStatus::InvalidArgument);
        let (mut u, mut found) = (0.0, false);
        assert_eq!(b2d_vss_eval(1.0, 1.0, 2.0, 1.0, &mut u, &mut found), B2dStatus::Ok);
        assert!(found);
        assert_eq!(u, 0.5);
        assert_eq!(b2d_vss_eval(2.0, 1.0, 0.0, 1.0, &mut u, &mut found), B2dStatus::Ok);
        assert!(!found);
        assert_eq!(b2d_vss_eval(1.0, 0.0, 1.0, 1.0, &mut u, &mut found), B2dStatus::InvalidArgument);
    }
}

#[test]
fn run_config_reports_config_errors() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let out = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut failed = true;
        let bad = CString::new("experiment = run\n[scheme]\ncfl = 1.5\n").unwrap();
        assert_eq!(b2d_run_config(bad.as_ptr(), out.as_ptr(), &mut failed), B2dStatus::Config);
        assert!(last_error().contains("line 3"));
        let good = CString::new("experiment = validate\n[validate]\nnwave_levels = 16, 32\nvss_levels = 8, 16\nnwave_max_error = 1\nnwave_min_order = 0\nvss_min_order = 0\n").unwrap();
        assert_eq!(b2d_run_config(good.as_ptr(), out.as_ptr(), &mut failed), B2dStatus::Ok);
        assert!(!failed);
        assert!(dir.path().join("convergence.csv").exists());
    }
}
