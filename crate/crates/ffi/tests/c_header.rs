//! Compiles the generated header with the system C compiler and, when the
//! shared library sits next to the test binary, links and runs a smoke test.

use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(crate_dir().join("include/burgers2d.h")).unwrap();
    for name in [
        "b2d_grid_new",
        "b2d_grid_free",
        "b2d_datum_dirac",
        "b2d_discretize",
        "b2d_step",
        "b2d_advance",
        "b2d_lp_norm",
        "b2d_field_copy_values",
        "b2d_vss_eval",
        "b2d_last_error",
        "B2D_STATUS_CFL_VIOLATION",
        "typedef struct B2dGrid B2dGrid",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let inc = crate_dir().join("include");
    let src = crate_dir().join("tests/c/smoke.c");
    let st = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&inc)
        .arg(&src)
        .status()
        .unwrap();
    assert!(st.success());
    let st = Command::new(&cc)
        .args(["-x", "c++", "-fsyntax-only", "-I"])
        .arg(&inc)
        .arg(inc.join("burgers2d.h"))
        .status()
        .unwrap();
    assert!(st.success());
}

fn shared_lib_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    let found = [deps, deps.parent()?]
        .into_iter()
        .find(|d| d.join("libburgers2d_ffi.so").exists())
        .map(Path::to_path_buf);
    found
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), shared_lib_dir()) else {
        eprintln!("no C compiler or shared library; skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let st = Command::new(&cc)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-o")
        .arg(&exe)
        .arg("-L")
        .arg(&lib)
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .args(["-lburgers2d_ffi", "-lm"])
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
