use maxstable::estimation::{self, EstimateOptions, Estimator};
use maxstable::{KernelModel, SimConfig, SiteSet};
use maxstable_ffi::*;
use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let need = unsafe { msx_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; need];
    unsafe { msx_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn model(family: MsxFamily, params: &[f64]) -> *mut MsxModel {
    let mut m = ptr::null_mut();
    let st = unsafe { msx_model_new(family as i32, params.as_ptr(), params.len(), &mut m) };
    assert_eq!(st, MsxStatus::Ok, "{}", last_error());
    m
}

fn sites(dim: usize, coords: &[f64]) -> *mut MsxSites {
    let mut s = ptr::null_mut();
    let st = unsafe { msx_sites_new(dim, coords.as_ptr(), coords.len() / dim, &mut s) };
    assert_eq!(st, MsxStatus::Ok, "{}", last_error());
    s
}

#[test]
fn neg_log_cdf_matches_library() {
    let m = model(MsxFamily::Exp2d, &[1.3]);
    let mut v = 0.0;
    let t = [0.4, -0.9];
    assert_eq!(unsafe { msx_model_neg_log_cdf(m, t.as_ptr(), 2, 0.7, 2.0, &mut v) }, MsxStatus::Ok);
    let direct = maxstable::PairDependence::new(KernelModel::exp2d(1.3).unwrap(), &t)
        .unwrap()
        .neg_log_cdf(0.7, 2.0)
        .unwrap();
    assert_eq!(v, direct);
    assert_eq!(unsafe { msx_model_neg_log_cdf(m, t.as_ptr(), 1, 0.7, 2.0, &mut v) }, MsxStatus::DimensionMismatch);
    assert!(last_error().contains("dimension"));
    unsafe { msx_model_free(m) };
}

#[test]
fn simulate_and_estimate_match_library() {
    let m = model(MsxFamily::Dexp1d, &[1.0]);
    let s = sites(1, &[0.0, 1.0, 2.5]);
    let mut obs = ptr::null_mut();
    assert_eq!(unsafe { msx_simulate(m, s, 3000, 11, &mut obs) }, MsxStatus::Ok);
    let (mut n, mut d) = (0, 0);
    assert_eq!(unsafe { msx_observations_shape(obs, &mut n, &mut d) }, MsxStatus::Ok);
    assert_eq!((n, d), (3000, 3));
    let mut data = vec![0.0; n * d];
    assert_eq!(unsafe { msx_observations_copy(obs, data.as_mut_ptr(), data.len() - 1) }, MsxStatus::BufferTooSmall);
    assert_eq!(unsafe { msx_observations_copy(obs, data.as_mut_ptr(), data.len()) }, MsxStatus::Ok);

    let lib_sites = SiteSet::new_1d(&[0.0, 1.0, 2.5]).unwrap();
    let lib_model = KernelModel::dexp1d(1.0).unwrap();
    let z = maxstable::simulate(&lib_model, &lib_sites, 3000, &SimConfig::with_seed(11)).unwrap();
    assert_eq!(z.as_slice(), &data[..]);

    let cols = [0usize, 2];
    let x = [1.0, 1.0];
    let mut r = 0.0;
    assert_eq!(unsafe { msx_r_hat(obs, cols.as_ptr(), x.as_ptr(), 2, 150, &mut r) }, MsxStatus::Ok);
    assert_eq!(r, estimation::r_hat(&z, &cols, &x, 150).unwrap());

    let mut report = ptr::null_mut();
    let st = unsafe { msx_estimate(obs, s, m, MsxEstimator::Range as i32, 150, &mut report) };
    assert_eq!(st, MsxStatus::Ok, "{}", last_error());
    let direct = estimation::estimate(&z, &lib_sites, &lib_model, Estimator::Range, &EstimateOptions::new(150)).unwrap();
    let mut b = 0.0;
    assert_eq!(unsafe { msx_report_beta_hat(report, &mut b) }, MsxStatus::Ok);
    assert_eq!(Some(b), direct.beta_hat);

    let mut need = 0;
    assert_eq!(unsafe { msx_report_json(report, ptr::null_mut(), 0, &mut need) }, MsxStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; need];
    assert_eq!(unsafe { msx_report_json(report, buf.as_mut_ptr(), buf.len(), &mut need) }, MsxStatus::Ok);
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(json, direct.to_json());
    let mut g = [0.0; 3];
    assert_eq!(unsafe { msx_report_general_normal(report, g.as_mut_ptr()) }, MsxStatus::UnsupportedModel);

    unsafe {
        msx_report_free(report);
        msx_observations_free(obs);
        msx_sites_free(s);
        msx_model_free(m);
    }
}

#[test]
fn general_normal_through_handles() {
    let truth = model(MsxFamily::Gnormal2d, &[1.0, 2.0, 0.5]);
    let s = sites(2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, -0.6]);
    let mut obs = ptr::null_mut();
    assert_eq!(unsafe { msx_simulate(truth, s, 20000, 3, &mut obs) }, MsxStatus::Ok);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { msx_estimate(obs, s, truth, MsxEstimator::Default as i32, 500, &mut report) }, MsxStatus::Ok);
    let mut g = [0.0; 3];
    assert_eq!(unsafe { msx_report_general_normal(report, g.as_mut_ptr()) }, MsxStatus::Ok);
    assert!((g[0] - 1.0).abs() < 0.3 && (g[1] - 2.0).abs() < 0.3 && (g[2] - 0.5).abs() < 0.3, "{g:?}");
    let mut b = 0.0;
    assert_eq!(unsafe { msx_report_beta_hat(report, &mut b) }, MsxStatus::UnsupportedModel);
    unsafe {
        msx_report_free(report);
        msx_observations_free(obs);
        msx_sites_free(s);
        msx_model_free(truth);
    }
}

#[test]
fn bad_arguments_are_reported() {
    let mut m = ptr::null_mut();
    let p = [1.0];
    assert_eq!(unsafe { msx_model_new(99, p.as_ptr(), 1, &mut m) }, MsxStatus::InvalidArgument);
    assert!(last_error().contains("family"));
    assert_eq!(unsafe { msx_model_new(MsxFamily::T1d as i32, p.as_ptr(), 1, &mut m) }, MsxStatus::InvalidArgument);
    let bad = [1.0, 2.5];
    assert_eq!(unsafe { msx_model_new(MsxFamily::T1d as i32, bad.as_ptr(), 2, &mut m) }, MsxStatus::InvalidParameter);
    let neg = [-1.0];
    assert_eq!(unsafe { msx_model_new(MsxFamily::Normal1d as i32, neg.as_ptr(), 1, &mut m) }, MsxStatus::InvalidParameter);
    assert_eq!(unsafe { msx_model_new(MsxFamily::Normal1d as i32, p.as_ptr(), 1, ptr::null_mut()) }, MsxStatus::InvalidArgument);
    assert!(m.is_null());

    let mut v = 0.0;
    let t = [1.0];
    assert_eq!(unsafe { msx_model_neg_log_cdf(ptr::null(), t.as_ptr(), 1, 1.0, 1.0, &mut v) }, MsxStatus::InvalidArgument);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { msx_sites_new(3, t.as_ptr(), 1, &mut s) }, MsxStatus::InvalidArgument);
    let mut obs = ptr::null_mut();
    let data = [1.0, 2.0, 3.0];
    assert_eq!(unsafe { msx_observations_new(data.as_ptr(), 1, 3, &mut obs) }, MsxStatus::Ok);
    let m = model(MsxFamily::Dexp1d, &[1.0]);
    let s = sites(1, &[0.0, 1.0, 2.0]);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { msx_estimate(obs, s, m, 7, 1, &mut report) }, MsxStatus::InvalidArgument);
    assert_eq!(unsafe { msx_estimate(obs, s, m, 0, 1, &mut report) }, MsxStatus::Domain);
    unsafe {
        msx_observations_free(obs);
        msx_sites_free(s);
        msx_model_free(m);
        msx_model_free(ptr::null_mut());
    }
    let ok = [1.0];
    let mut fine = ptr::null_mut();
    assert_eq!(unsafe { msx_model_new(MsxFamily::Normal1d as i32, ok.as_ptr(), 1, &mut fine) }, MsxStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { msx_model_free(fine) };
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(msx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/maxstable.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    for ty in ["typedef struct MsxModel MsxModel", "typedef enum MsxFamily", "typedef enum MsxEstimator"] {
        assert!(text.contains(ty), "{ty}");
    }
}

/// Directory holding the built library artifacts for this profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("cc not found; skipping the C round trip");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "maxstable.h"
#include <stdio.h>
int main(void) {
    double beta = 1.0, coords[3] = {0.0, 1.0, 2.0}, b = 0.0;
    MsxModel *m = NULL; MsxSites *s = NULL; MsxObservations *z = NULL; MsxReport *r = NULL;
    if (msx_model_new(MsxFamily_Dexp1d, &beta, 1, &m) != MsxStatus_Ok) return 1;
    if (msx_sites_new(1, coords, 3, &s) != MsxStatus_Ok) return 2;
    if (msx_simulate(m, s, 5000, 1, &z) != MsxStatus_Ok) return 3;
    if (msx_estimate(z, s, m, MsxEstimator_Pairwise, 200, &r) != MsxStatus_Ok) return 4;
    if (msx_report_beta_hat(r, &b) != MsxStatus_Ok) return 5;
    if (msx_model_new(42, &beta, 1, &m) != MsxStatus_InvalidArgument) return 6;
    char msg[128];
    msx_last_error_message(msg, sizeof msg);
    printf("%.3f %s\n", b, msg);
    msx_report_free(r); msx_observations_free(z); msx_sites_free(s); msx_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let lib = artifact_dir().join("libmaxstable_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = dir.path().join("smoke");
    let include = header().parent().unwrap().to_path_buf();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    let b: f64 = text.split_whitespace().next().unwrap().parse().unwrap();
    assert!((b - 1.0).abs() < 0.3, "{text}");
    assert!(text.contains("unknown family"));
}
