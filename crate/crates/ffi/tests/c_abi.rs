use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use matterwave_chaos_ffi::*;

fn fig2(v2: f64) -> *mut MwcModel {
    let mut m = ptr::null_mut();
    let st = unsafe { mwc_model_new(-2.0, -0.5, 0.04, v2, 1.0, 2, 1, 0.0, &mut m) };
    assert_eq!(st, MwcStatus::MwcOk);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mwc_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn zero_counts_and_region() {
    let m = fig2(0.08);
    let mut n = 0usize;
    let mut zeros = [0.0f64; 8];
    let st = unsafe { mwc_count_zeros(m, 4096, &mut n, zeros.as_mut_ptr(), zeros.len()) };
    assert_eq!(st, MwcStatus::MwcOk);
    assert_eq!(n, 4);
    assert_eq!(zeros[0], 0.0);
    assert!((zeros[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);

    let mut region = MwcRegion::MwcRegionB;
    let mut v2b = 0.0;
    assert_eq!(
        unsafe { mwc_classify_region(m, &mut region, &mut v2b) },
        MwcStatus::MwcOk
    );
    assert_eq!(region, MwcRegion::MwcRegionA);
    assert!((v2b - 0.01 * (std::f64::consts::PI / 2f64.sqrt()).cosh()).abs() < 1e-15);
    unsafe { mwc_model_free(m) };
}

#[test]
fn melnikov_and_boundary() {
    let m = fig2(0.0);
    let mut v = f64::NAN;
    assert_eq!(unsafe { mwc_melnikov(m, 0.3, &mut v) }, MwcStatus::MwcOk);
    // 2 pi k^2 / g1 * V1 csch(pi / sqrt 2) sin(0.6)
    let expected = -4.0 * std::f64::consts::PI * 0.04 / (std::f64::consts::PI / 2f64.sqrt()).sinh()
        * 0.6f64.sin();
    assert!((v - expected).abs() < 1e-15);
    let mut b = 0.0;
    assert_eq!(
        unsafe { mwc_boundary_v2b(1.0, -2.0, 0.04, &mut b) },
        MwcStatus::MwcOk
    );
    assert!((b - 0.0466).abs() < 5e-5);
    unsafe { mwc_model_free(m) };
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    let st = unsafe { mwc_model_new(-2.0, -0.5, -1.0, 0.0, 1.0, 2, 1, 0.0, &mut m) };
    assert_eq!(st, MwcStatus::MwcInvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("V1"));

    let st = unsafe { mwc_model_new(-2.0, -0.5, 0.0, 0.0, 1.0, 2, 1, 0.0, ptr::null_mut()) };
    assert_eq!(st, MwcStatus::MwcNullPointer);

    let bad = CString::new("[lattice").unwrap();
    assert_eq!(
        unsafe { mwc_model_from_toml(bad.as_ptr(), &mut m) },
        MwcStatus::MwcConfig
    );

    let tag = CString::new("sqrt2").unwrap();
    let st = unsafe {
        mwc_model_new_irrational(
            -2.0,
            -0.5,
            0.04,
            0.01,
            1.0,
            tag.as_ptr(),
            2f64.sqrt(),
            0.0,
            &mut m,
        )
    };
    assert_eq!(st, MwcStatus::MwcOk);
    let mut n = 0usize;
    let st = unsafe { mwc_count_zeros(m, 1024, &mut n, ptr::null_mut(), 0) };
    assert_eq!(st, MwcStatus::MwcPrecondition);
    assert!(last_error().contains("irrational"));
    unsafe { mwc_model_free(m) };
    unsafe { mwc_model_free(ptr::null_mut()) };

    let name = unsafe { CStr::from_ptr(mwc_status_name(4)) };
    assert_eq!(name.to_str().unwrap(), "numerical failure");
    let name = unsafe { CStr::from_ptr(mwc_status_name(99)) };
    assert_eq!(name.to_str().unwrap(), "unknown status");
}

#[test]
fn toml_model_and_trajectory() {
    let text = CString::new(
        "[dimensionless]\nD = -2.0\ng1 = -0.5\n[lattice]\nV1 = 0.0\nV2 = 0.0\nk = 1.0\ngamma = 2\n[policy]\nn_iters = 300\ndrop = 10\n",
    )
    .unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { mwc_model_from_toml(text.as_ptr(), &mut m) },
        MwcStatus::MwcOk
    );
    let mut label = MwcLabel::MwcChaotic;
    let mut lambda = f64::NAN;
    assert_eq!(
        unsafe { mwc_classify_trajectory(m, 1.0, 0.5, &mut label, &mut lambda) },
        MwcStatus::MwcOk
    );
    assert_eq!(label, MwcLabel::MwcRegular);
    let mut p = MwcProbability::default();
    assert_eq!(
        unsafe { mwc_estimate_probability(m, 8, 3, &mut p) },
        MwcStatus::MwcOk
    );
    assert_eq!((p.n_trials, p.n_chaotic), (8, 0));
    assert_eq!(
        unsafe { mwc_model_set_policy(m, 10, 10, 0.01) },
        MwcStatus::MwcInvalidArgument
    );
    unsafe { mwc_model_free(m) };
}

/// Compiles a small C program against the generated header and the shared
/// library.
#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(header_dir.join("matterwave_chaos.h").exists());
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    if !lib_dir.join("libmatterwave_chaos_ffi.so").exists()
        && !lib_dir.join("libmatterwave_chaos_ffi.dylib").exists()
    {
        eprintln!(
            "shared library not built in {}; skipping C link check",
            lib_dir.display()
        );
        return;
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping C link check");
        return;
    };
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("mwc_smoke.c");
    let exe = tmp.join("mwc_smoke");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <math.h>
#include "matterwave_chaos.h"
int main(void) {
    MwcModel *m = NULL;
    if (mwc_model_new(-2.0, -0.5, 0.04, 0.08, 1.0, 2, 1, 0.0, &m) != MWC_OK) return 1;
    size_t n = 0;
    double zeros[8];
    if (mwc_count_zeros(m, 4096, &n, zeros, 8) != MWC_OK) return 2;
    double b = 0.0;
    if (mwc_boundary_v2b(1.0, -2.0, 0.04, &b) != MWC_OK) return 3;
    mwc_model_free(m);
    if (mwc_model_new(1.0, -0.5, -1.0, 0.0, 1.0, 2, 1, 0.0, &m) != MWC_INVALID_ARGUMENT) return 4;
    printf("%zu %.6f %s\n", n, b, mwc_last_error());
    return n == 4 && fabs(b - 0.0466) < 5e-5 ? 0 : 5;
}
"#,
    )
    .unwrap();
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lmatterwave_chaos_ffi")
        .arg("-lm")
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "C program failed: {:?}", out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("4 0.0466"), "{text}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
