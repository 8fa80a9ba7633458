use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fiberopt_ffi::*;

fn last_error() -> String {
    let n = unsafe { fo_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n + 1];
    unsafe { fo_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn echo(cfg: *const FoConfig) -> String {
    let n = unsafe { fo_config_echo(cfg, ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n + 1];
    assert_eq!(unsafe { fo_config_echo(cfg, buf.as_mut_ptr(), buf.len()) }, n);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn set(cfg: *mut FoConfig, key: &str, value: &str) -> FoStatus {
    let (k, v) = (CString::new(key).unwrap(), CString::new(value).unwrap());
    unsafe { fo_config_set(cfg, k.as_ptr(), v.as_ptr()) }
}

fn small_config(max_iters: usize) -> *mut FoConfig {
    let cfg = fo_config_new();
    assert_eq!(set(cfg, "nx", "20"), FoStatus::Ok);
    assert_eq!(set(cfg, "ny", "10"), FoStatus::Ok);
    assert_eq!(set(cfg, "max_iters", &max_iters.to_string()), FoStatus::Ok);
    cfg
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(fo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn set_updates_echo() {
    let cfg = fo_config_new();
    assert_eq!(set(cfg, "nx", "24"), FoStatus::Ok);
    assert_eq!(set(cfg, "E_back_ratio", "0.5"), FoStatus::Ok);
    let text = echo(cfg);
    assert!(text.lines().any(|l| l == "nx = 24"), "{text}");
    assert!(text.lines().any(|l| l == "E_back_ratio = 5.0000000000000000e-1"), "{text}");
    assert_eq!(last_error(), "");
    unsafe { fo_config_free(cfg) };
}

#[test]
fn rejected_values_leave_config_unchanged() {
    let cfg = fo_config_new();
    let before = echo(cfg);
    assert_eq!(set(cfg, "E_I", "-5"), FoStatus::Validation);
    assert!(last_error().contains("E_I"), "{}", last_error());
    assert_eq!(set(cfg, "no_such_key", "1"), FoStatus::Validation);
    assert_eq!(set(cfg, "nx", "many"), FoStatus::Validation);
    assert_eq!(echo(cfg), before);
    unsafe { fo_config_free(cfg) };
}

#[test]
fn null_arguments_are_reported() {
    let key = CString::new("nx").unwrap();
    assert_eq!(unsafe { fo_config_set(ptr::null_mut(), key.as_ptr(), key.as_ptr()) }, FoStatus::NullArgument);
    assert!(last_error().contains("cfg"));
    assert_eq!(unsafe { fo_run(ptr::null(), ptr::null_mut()) }, FoStatus::NullArgument);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { fo_run(ptr::null(), &mut run) }, FoStatus::NullArgument);
    assert!(run.is_null());
    assert_eq!(unsafe { fo_run_step_count(ptr::null()) }, 0);
    assert!(!unsafe { fo_run_converged(ptr::null()) });
    unsafe {
        fo_config_free(ptr::null_mut());
        fo_run_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_an_argument_error() {
    let cfg = fo_config_new();
    let bad = [0xffu8 as c_char, 0];
    let v = CString::new("1").unwrap();
    assert_eq!(unsafe { fo_config_set(cfg, bad.as_ptr(), v.as_ptr()) }, FoStatus::InvalidArgument);
    unsafe { fo_config_free(cfg) };
}

#[test]
fn load_distinguishes_missing_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ptr::null_mut();
    let missing = CString::new(dir.path().join("absent.cfg").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fo_config_load(missing.as_ptr(), &mut cfg) }, FoStatus::Io);
    assert!(cfg.is_null());

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "nx = 10\n  oops\n").unwrap();
    let bad = CString::new(bad.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fo_config_load(bad.as_ptr(), &mut cfg) }, FoStatus::Validation);
    assert!(last_error().contains(":2:3:"), "{}", last_error());

    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "nx = 30\nny = 12\n").unwrap();
    let good = CString::new(good.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fo_config_load(good.as_ptr(), &mut cfg) }, FoStatus::Ok);
    assert!(echo(cfg).contains("nx = 30"));
    unsafe { fo_config_free(cfg) };
}

#[test]
fn error_message_truncates_to_buffer() {
    let cfg = fo_config_new();
    assert_eq!(set(cfg, "E_I", "-5"), FoStatus::Validation);
    let full = last_error();
    let mut buf = [1 as c_char; 8];
    let n = unsafe { fo_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full.len());
    let short = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(short, &full[..7]);
    unsafe { fo_config_free(cfg) };
}

#[test]
fn capped_run_reports_nonconvergence_with_results() {
    let cfg = small_config(3);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { fo_run(cfg, &mut run) }, FoStatus::NonConvergence);
    assert!(!run.is_null());
    assert!(!unsafe { fo_run_converged(run) });
    assert_eq!(unsafe { fo_run_step_count(run) }, 4);

    let mut rec = FoStepRecord {
        step: 99,
        compliance: 0.0,
        weight_violation: 0.0,
        lambda: 0.0,
        integral: 0.0,
        lagrangian: 0.0,
        max_dphi: 0.0,
        wall_ms: 0.0,
    };
    assert_eq!(unsafe { fo_run_step(run, 3, &mut rec) }, FoStatus::Ok);
    assert_eq!(rec.step, 3);
    assert!(rec.compliance > 0.0);
    assert_eq!(unsafe { fo_run_step(run, 4, &mut rec) }, FoStatus::InvalidArgument);

    let n = unsafe { fo_run_element_count(run) };
    assert_eq!(n, 200);
    let mut fr = vec![0.0; 3 * n];
    assert_eq!(unsafe { fo_run_fractions(run, fr.as_mut_ptr(), fr.len() - 1) }, FoStatus::InvalidArgument);
    assert_eq!(unsafe { fo_run_fractions(run, fr.as_mut_ptr(), fr.len()) }, FoStatus::Ok);
    for f in fr.chunks(3) {
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let mut angles = vec![-1.0; n];
    assert_eq!(unsafe { fo_run_angles(run, angles.as_mut_ptr(), n) }, FoStatus::Ok);
    assert!(angles.iter().all(|t| (0.0..std::f64::consts::PI).contains(t)));

    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fo_run_write(run, out.as_ptr()) }, FoStatus::Ok);
    for f in ["config.echo", "history.csv", "final.vtk"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f} missing");
    }
    unsafe {
        fo_run_free(run);
        fo_config_free(cfg);
    }
}

#[test]
fn default_length_run_converges() {
    let cfg = small_config(400);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { fo_run(cfg, &mut run) }, FoStatus::Ok);
    assert!(unsafe { fo_run_converged(run) });
    unsafe {
        fo_run_free(run);
        fo_config_free(cfg);
    }
}

#[test]
fn header_declares_the_exported_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fiberopt.h")).unwrap();
    for name in [
        "fo_version",
        "fo_last_error_message",
        "fo_config_new",
        "fo_config_load",
        "fo_config_set",
        "fo_config_echo",
        "fo_config_free",
        "fo_run(",
        "fo_run_converged",
        "fo_run_step_count",
        "fo_run_step(",
        "fo_run_element_count",
        "fo_run_fractions",
        "fo_run_angles",
        "fo_run_write",
        "fo_run_free",
        "typedef struct FoConfig FoConfig;",
        "typedef struct FoRun FoRun;",
        "FO_STATUS_NON_CONVERGENCE = 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = artifact_dir().join("libfiberopt_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "fiberopt.h"

int main(void) {
    FoConfig *cfg = fo_config_new();
    if (fo_config_set(cfg, "nx", "12") != FO_STATUS_OK) return 10;
    if (fo_config_set(cfg, "ny", "6") != FO_STATUS_OK) return 11;
    if (fo_config_set(cfg, "max_iters", "2") != FO_STATUS_OK) return 12;
    if (fo_config_set(cfg, "E_I", "-1") != FO_STATUS_VALIDATION) return 13;
    char msg[256];
    fo_last_error_message(msg, sizeof msg);
    if (strstr(msg, "E_I") == NULL) return 14;
    FoRun *run = NULL;
    if (fo_run(cfg, &run) != FO_STATUS_NON_CONVERGENCE || run == NULL) return 15;
    FoStepRecord rec;
    if (fo_run_step(run, fo_run_step_count(run) - 1, &rec) != FO_STATUS_OK) return 16;
    printf("%zu %.6e\n", rec.step, rec.compliance);
    fo_run_free(run);
    fo_config_free(cfg);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler `cc` not found");
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("2 "), "{text}");
}
