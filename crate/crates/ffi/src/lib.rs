//! C ABI for the `burgers2d` solver.
//!
//! Objects are opaque handles created by `b2d_*_new`/constructor functions
//! and released with the matching `b2d_*_free`. Every fallible function
//! returns a [`B2dStatus`]; on failure the message is kept per thread and
//! can be read with [`b2d_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use burgers2d::cli;
use burgers2d::data::{dirac_family, mollified_line_measure, InitialDatum, Kernel, MollifierSpec, Profile1D};
use burgers2d::grid::discretize;
use burgers2d::scheme::{cfl_dt, evolve, godunov_flux_quadratic, step, upwind_flux_cubic, BoundaryData, SchemeConfig};
use burgers2d::selfsim::{vss_eval, VSSParams};
use burgers2d::{lp_norm, Boundary, CellField, Error, Grid2D, Rect};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B2dStatus {
    Ok = 0,
    InvalidArgument = 1,
    CflViolation = 2,
    Internal = 3,
    SeriesUnavailable = 4,
    Config = 5,
    Snapshot = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
    /// Output buffer too small.
    BufferTooSmall = 10,
}

/// Mesh handle.
pub struct B2dGrid(Grid2D);

/// Cell-average field handle.
pub struct B2dField(CellField);

/// Initial datum handle.
pub struct B2dDatum(InitialDatum);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> B2dStatus {
    match e {
        Error::InvalidArgument(_) => B2dStatus::InvalidArgument,
        Error::CflViolation { .. } => B2dStatus::CflViolation,
        Error::Internal(_) => B2dStatus::Internal,
        Error::SeriesUnavailable(_) => B2dStatus::SeriesUnavailable,
        Error::Config { .. } => B2dStatus::Config,
        Error::Snapshot(_) => B2dStatus::Snapshot,
        Error::Io(_) => B2dStatus::Io,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Buffer(usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> B2dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            B2dStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            B2dStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need))) => {
            set_error(&format!("buffer too small: {need} elements needed"));
            B2dStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic");
            B2dStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn b2d_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn b2d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Uniform grid on `[x1_min, x1_max] × [x2_min, x2_max]` with `n1 × n2` cells.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn b2d_grid_new(
    x1_min: f64,
    x1_max: f64,
    x2_min: f64,
    x2_max: f64,
    n1: usize,
    n2: usize,
    periodic: bool,
    out: *mut *mut B2dGrid,
) -> B2dStatus {
    guard(|| {
        let b = if periodic { Boundary::Periodic } else { Boundary::Outflow };
        let g = Grid2D::new(Rect::new((x1_min, x1_max), (x2_min, x2_max)), n1, n2, b)?;
        put(out, Box::into_raw(Box::new(B2dGrid(g))), "out")
    })
}

/// # Safety
/// `grid` must come from [`b2d_grid_new`] and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn b2d_grid_free(grid: *mut B2dGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live handle; `n1`, `n2` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_grid_dims(grid: *const B2dGrid, n1: *mut usize, n2: *mut usize) -> B2dStatus {
    guard(|| {
        let g = &get(grid, "grid")?.0;
        put(n1, g.n1, "n1")?;
        put(n2, g.n2, "n2")
    })
}

/// Smooth nonnegative bump of mass `mass` supported in `[-1/m, 1/m]²`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_datum_dirac(mass: f64, m: u32, out: *mut *mut B2dDatum) -> B2dStatus {
    guard(|| put(out, Box::into_raw(Box::new(B2dDatum(dirac_family(mass, m)?))), "out"))
}

/// Horizontal cosine mollification of width `width` of the line measure
/// with density `height` on `x2 ∈ [g_lo, g_hi]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_datum_line_measure(
    g_lo: f64,
    g_hi: f64,
    height: f64,
    width: f64,
    out: *mut *mut B2dDatum,
) -> B2dStatus {
    guard(|| {
        let g = Profile1D::Indicator {
            lo: g_lo,
            hi: g_hi,
            height,
        };
        let d = mollified_line_measure(g, MollifierSpec::horizontal(Kernel::CosineBump, width)?)?;
        put(out, Box::into_raw(Box::new(B2dDatum(d))), "out")
    })
}

/// # Safety
/// `datum` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn b2d_datum_free(datum: *mut B2dDatum) {
    if !datum.is_null() {
        drop(Box::from_raw(datum));
    }
}

/// # Safety
/// `datum` live; `mass` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_datum_mass(datum: *const B2dDatum, mass: *mut f64) -> B2dStatus {
    guard(|| put(mass, get(datum, "datum")?.0.mass(), "mass"))
}

/// Cell averages of `datum` on `grid` by Gauss quadrature of the given order.
///
/// # Safety
/// Handles live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_discretize(
    datum: *const B2dDatum,
    grid: *const B2dGrid,
    order: usize,
    out: *mut *mut B2dField,
) -> B2dStatus {
    guard(|| {
        let f = discretize(&get(datum, "datum")?.0, &get(grid, "grid")?.0, order)?.field;
        put(out, Box::into_raw(Box::new(B2dField(f))), "out")
    })
}

/// Field from `len = n1·n2` row-major values (x1 fastest).
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_from_values(
    grid: *const B2dGrid,
    values: *const f64,
    len: usize,
    t: f64,
    out: *mut *mut B2dField,
) -> B2dStatus {
    guard(|| {
        let g = get(grid, "grid")?.0;
        if values.is_null() {
            return Err(Fail::Null("values"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        put(out, Box::into_raw(Box::new(B2dField(CellField::new(g, v, t)?))), "out")
    })
}

/// # Safety
/// `field` live or null.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_free(field: *mut B2dField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` live; `len`, `t` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_info(field: *const B2dField, len: *mut usize, t: *mut f64) -> B2dStatus {
    guard(|| {
        let f = &get(field, "field")?.0;
        put(len, f.values().len(), "len")?;
        put(t, f.time(), "t")
    })
}

/// Copies the values into `buf`, which must hold at least the field length.
///
/// # Safety
/// `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_copy_values(field: *const B2dField, buf: *mut f64, cap: usize) -> B2dStatus {
    guard(|| {
        let v = get(field, "field")?.0.values();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if cap < v.len() {
            return Err(Fail::Buffer(v.len()));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// `‖u‖_p` over the grid; `p = INFINITY` gives the maximum norm.
///
/// # Safety
/// `field` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_lp_norm(field: *const B2dField, p: f64, out: *mut f64) -> B2dStatus {
    guard(|| put(out, lp_norm(&get(field, "field")?.0, p)?, "out"))
}

/// `∫ u`.
///
/// # Safety
/// `field` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_mass(field: *const B2dField, out: *mut f64) -> B2dStatus {
    guard(|| put(out, get(field, "field")?.0.mass(), "out"))
}

/// Stable time step `cfl / (max|u|/h1 + max u²/h2)`, capped at `dt_max`.
///
/// # Safety
/// `field` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_cfl_dt(field: *const B2dField, cfl: f64, dt_max: f64, out: *mut f64) -> B2dStatus {
    guard(|| {
        SchemeConfig {
            cfl,
            dt_max,
            ..Default::default()
        }
        .validate()?;
        put(out, cfl_dt(&get(field, "field")?.0, cfl, dt_max), "out")
    })
}

/// One step of length `dt` in place. Fails with `CflViolation` when `dt`
/// exceeds the stable step.
///
/// # Safety
/// `field` live.
#[no_mangle]
pub unsafe extern "C" fn b2d_step(field: *mut B2dField, dt: f64) -> B2dStatus {
    guard(|| {
        let f = get_mut(field, "field")?;
        f.0 = step(&f.0, dt, &SchemeConfig::default())?;
        Ok(())
    })
}

/// Advances in place by `duration` with adaptive steps at the given CFL number.
///
/// # Safety
/// `field` live; `steps` writable or null.
#[no_mangle]
pub unsafe extern "C" fn b2d_advance(field: *mut B2dField, duration: f64, cfl: f64, steps: *mut usize) -> B2dStatus {
    guard(|| {
        let f = get_mut(field, "field")?;
        let cfg = SchemeConfig::new(cfl, duration, vec![])?;
        let tr = evolve(f.0.clone(), &cfg, BoundaryData::FromGrid, |_| {})?;
        if !steps.is_null() {
            steps.write(tr.steps);
        }
        f.0 = tr.snapshots.into_iter().next_back().ok_or_else(|| Error::Internal("run produced no snapshot".into()))?;
        Ok(())
    })
}

/// Godunov flux of `u²/2`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_flux_x1(ul: f64, ur: f64, out: *mut f64) -> B2dStatus {
    guard(|| put(out, godunov_flux_quadratic(ul, ur)?, "out"))
}

/// Upwind flux of `u³/3`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_flux_x2(ul: f64, ur: f64, out: *mut f64) -> B2dStatus {
    guard(|| put(out, upwind_flux_cubic(ul, ur)?, "out"))
}

/// Solves `(1 − c) t u² + c x1 u = x2` on the branch through `u = 0`.
/// `found` is set to false (and `u` left untouched) when no real root exists.
///
/// # Safety
/// `u`, `found` writable.
#[no_mangle]
pub unsafe extern "C" fn b2d_vss_eval(c: f64, t: f64, x1: f64, x2: f64, u: *mut f64, found: *mut bool) -> B2dStatus {
    guard(|| {
        if u.is_null() {
            return Err(Fail::Null("u"));
        }
        match vss_eval(VSSParams::new(c)?, t, x1, x2)?.root() {
            Some(r) => {
                u.write(r);
                put(found, true, "found")
            }
            None => put(found, false, "found"),
        }
    })
}

/// Runs an experiment from configuration text, writing artifacts to
/// `out_dir` (or the configured directory when null). `failed` receives
/// whether any enabled check failed.
///
/// # Safety
/// `config` must be a NUL-terminated UTF-8 string; `out_dir` NUL-terminated or null.
#[no_mangle]
pub unsafe extern "C" fn b2d_run_config(config: *const c_char, out_dir: *const c_char, failed: *mut bool) -> B2dStatus {
    guard(|| {
        if config.is_null() {
            return Err(Fail::Null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| Error::Config {
                line: 0,
                message: "configuration is not UTF-8".into(),
            })?;
        let mut cfg = cli::parse_config(text)?;
        if !out_dir.is_null() {
            let d = CStr::from_ptr(out_dir)
                .to_str()
                .map_err(|_| Error::InvalidArgument("output directory is not UTF-8".into()))?;
            cfg.output.dir = PathBuf::from(d);
        }
        let art = cli::execute(&cfg)?;
        put(failed, art.any_failed(), "failed")
    })
}
