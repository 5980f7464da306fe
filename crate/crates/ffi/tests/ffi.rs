use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use polyens_ffi::*;

fn last_error() -> String {
    let p = polyens_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn classical(name: &str, n: usize) -> *mut PolyensTable {
    let name = CString::new(name).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { polyens_table_classical(name.as_ptr(), n, 8, &mut t) }, PolyensStatus::Ok);
    t
}

#[test]
fn gue_table_queries() {
    let t = classical("gue", 50);
    unsafe {
        let mut n = 0;
        assert_eq!(polyens_table_size(t, &mut n), PolyensStatus::Ok);
        assert_eq!(n, 50);

        let mut v = 0.0;
        assert_eq!(polyens_variance_power(t, 1, &mut v), PolyensStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(polyens_variance_power(t, 2, &mut v), PolyensStatus::Ok);
        assert!((v - 2.0).abs() < 1e-12);

        assert_eq!(polyens_mean_moment(t, 2, &mut v), PolyensStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(polyens_path_sum_moment(t, 1, 3, 4, &mut v), PolyensStatus::Ok);
        assert!((v - (4.0f64 / 50.0).sqrt()).abs() < 1e-15);

        let (mut gap, mut bound) = (0.0, 0.0);
        assert_eq!(polyens_moment_gap(t, 4, &mut gap, &mut bound), PolyensStatus::Ok);
        assert!(gap <= bound);

        let (mut re, mut im) = (vec![0.0; 50], vec![1.0; 50]);
        assert_eq!(polyens_zeros(t, re.as_mut_ptr(), im.as_mut_ptr(), 50), PolyensStatus::Ok);
        assert!(re.windows(2).all(|w| w[0] < w[1]));
        assert!(im.iter().all(|x| x.abs() < 1e-12));
        assert!((re.iter().sum::<f64>()).abs() < 1e-10);

        assert_eq!(polyens_zeros(t, re.as_mut_ptr(), im.as_mut_ptr(), 49), PolyensStatus::Range);
        assert!(last_error().contains("need 50"));
        polyens_table_free(t);
    }
}

#[test]
fn table_from_json_and_bad_input() {
    let json = CString::new(r#"{"form":"op","N":2,"a":[1.0,1.0,1.0,1.0],"b":[0.0,0.0,0.0,0.0]}"#).unwrap();
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(polyens_table_from_json(json.as_ptr(), &mut t), PolyensStatus::Ok);
        let mut v = 0.0;
        assert_eq!(polyens_mean_moment(t, 2, &mut v), PolyensStatus::Ok);
        // (1/2)(⟨x²P_0,Q_0⟩ + ⟨x²P_1,Q_1⟩) = (1 + 2)/2
        assert!((v - 1.5).abs() < 1e-15);
        assert_eq!(polyens_mean_moment(t, 40, &mut v), PolyensStatus::Range);
        polyens_table_free(t);

        let bad = CString::new("{not json").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(polyens_table_from_json(bad.as_ptr(), &mut t), PolyensStatus::InvalidArgument);
        assert!(t.is_null());
        assert!(!last_error().is_empty());

        let name = CString::new("laguerre").unwrap();
        assert_eq!(polyens_table_classical(name.as_ptr(), 3, 1, &mut t), PolyensStatus::InvalidArgument);
        assert!(last_error().contains("laguerre"));
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(polyens_mean_moment(ptr::null(), 1, &mut v), PolyensStatus::NullPointer);
        assert!(last_error().contains("table"));
        let t = classical("chebyshev", 4);
        assert_eq!(polyens_mean_moment(t, 1, ptr::null_mut()), PolyensStatus::NullPointer);
        assert_eq!(polyens_table_classical(ptr::null(), 3, 1, &mut ptr::null_mut()), PolyensStatus::NullPointer);
        assert_eq!(polyens_moment_gap(t, 1, &mut v, ptr::null_mut()), PolyensStatus::NullPointer);
        polyens_table_free(t);
        polyens_table_free(ptr::null_mut());
        polyens_ensemble_free(ptr::null_mut());

        let t = classical("gue", 3);
        assert_eq!(polyens_mean_moment(t, 0, &mut v), PolyensStatus::Ok);
        assert!(polyens_last_error_message().is_null());
        polyens_table_free(t);
    }
}

fn ensemble(path: &str) -> *mut PolyensEnsemble {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(path)).unwrap();
    let json = CString::new(text).unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { polyens_ensemble_from_json(json.as_ptr(), &mut e) }, PolyensStatus::Ok);
    e
}

#[test]
fn sampling_is_reproducible() {
    unsafe {
        for config in ["four_atoms.json", "tilted.json", "circle.json"] {
            let e = ensemble(config);
            let mut n = 0;
            assert_eq!(polyens_ensemble_size(e, &mut n), PolyensStatus::Ok);
            let draw = |replica| {
                let (mut re, mut im, mut ld) = (vec![0.0; n], vec![0.0; n], 0.0);
                assert_eq!(
                    polyens_sample(e, 42, replica, re.as_mut_ptr(), im.as_mut_ptr(), n, &mut ld),
                    PolyensStatus::Ok,
                    "{config}: {}",
                    last_error()
                );
                assert!(ld.is_finite());
                (re, im, ld)
            };
            assert_eq!(draw(0), draw(0));
            let mut re = vec![0.0; n];
            assert_eq!(
                polyens_sample(e, 42, 0, re.as_mut_ptr(), ptr::null_mut(), n, ptr::null_mut()),
                PolyensStatus::NullPointer
            );
            if config == "circle.json" {
                let (re, im, _) = draw(3);
                assert!(re.iter().zip(&im).all(|(x, y)| (x.hypot(*y) - 1.0).abs() < 1e-12));
            }
            polyens_ensemble_free(e);
        }
    }
}

#[test]
fn invalid_tilt_is_a_model_error() {
    let json = CString::new(
        r#"{"base": {"classical": "chebyshev", "N": 2, "nodes": 16, "pad": 4}, "tilt": [[40.0], [0.0, 40.0]]}"#,
    )
    .unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { polyens_ensemble_from_json(json.as_ptr(), &mut e) }, PolyensStatus::Model);
    assert!(last_error().contains("invalid tilt"));
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(polyens_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/polyens.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    let source = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct PolyensTable PolyensTable;"));
    assert!(text.contains("POLYENS_STATUS_PANIC = 7"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "polyens.h"

int main(void) {
    PolyensTable *t = NULL;
    double v = 0.0;
    if (polyens_table_classical("gue", 20, 4, &t) != POLYENS_STATUS_OK) return 1;
    if (polyens_variance_power(t, 2, &v) != POLYENS_STATUS_OK) return 2;
    if (fabs(v - 2.0) > 1e-12) return 3;
    if (polyens_mean_moment(NULL, 1, &v) != POLYENS_STATUS_NULL_POINTER) return 4;
    if (polyens_last_error_message() == NULL) return 5;
    polyens_table_free(t);
    printf("%s\n", polyens_version());
    return 0;
}
"#;

/// Compiles and runs a C client against the header and the static library.
#[test]
fn c_client_links_against_static_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libpolyens_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), env!("CARGO_PKG_VERSION"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
