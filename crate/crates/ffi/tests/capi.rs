use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rpcscreen::{rpc_fast, standardize, DenseMatrix};
use rpcscreen_ffi::*;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn seeded(n: usize, p: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n * p).map(|_| gauss(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|i| x[i] - 0.5 * x[n + i] + gauss(&mut rng)).collect();
    (x, y)
}

fn last_error() -> String {
    let p = rpc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn dataset(x: &[f64], y: &[f64], n: usize, p: usize) -> *mut RpcDataset {
    let mut ds = ptr::null_mut();
    let st = unsafe { rpc_dataset_new(x.as_ptr(), y.as_ptr(), n, p, &mut ds) };
    assert_eq!(st, RpcStatus::Ok);
    ds
}

#[test]
fn fit_matches_library() {
    let (n, p) = (15, 40);
    let (x, y) = seeded(n, p, 1);
    let ds = dataset(&x, &y, n, p);
    assert_eq!(unsafe { (rpc_dataset_n(ds), rpc_dataset_p(ds)) }, (n, p));

    let mut fit = ptr::null_mut();
    assert_eq!(unsafe { rpc_fit_new(ds, 1.5, &mut fit) }, RpcStatus::Ok);
    let mut scores = vec![0.0; p];
    assert_eq!(
        unsafe { rpc_fit_copy(fit, RpcFitField::Scores, scores.as_mut_ptr(), p) },
        RpcStatus::Ok
    );
    let mut scalars = RpcFitScalars::default();
    assert_eq!(unsafe { rpc_fit_scalars(fit, &mut scalars) }, RpcStatus::Ok);

    let data = standardize(&DenseMatrix::from_col_major(n, p, x).unwrap(), &y).unwrap();
    let want = rpc_fast(&data, 1.5).unwrap();
    assert_eq!(scores, want.scores);
    assert_eq!(
        (scalars.lambda, scalars.v_y, scalars.s_lambda),
        (1.5, want.v_y, want.s_lambda)
    );

    let mut beta = vec![0.0; p];
    assert_eq!(unsafe { rpc_holp_scores(ds, 1.5, beta.as_mut_ptr(), p) }, RpcStatus::Ok);
    assert_eq!(beta, want.ridge_beta);

    let mut top = vec![0usize; 5];
    assert_eq!(
        unsafe { rpc_select_top_k(scores.as_ptr(), p, 5, top.as_mut_ptr(), 5) },
        RpcStatus::Ok
    );
    assert_eq!(top, rpcscreen::select_top_k(&want.scores, 5).unwrap());

    unsafe {
        rpc_fit_free(fit);
        rpc_dataset_free(ds);
    }
}

#[test]
fn sis_and_fr() {
    let (n, p) = (20, 8);
    let (x, y) = seeded(n, p, 2);
    let ds = dataset(&x, &y, n, p);
    let mut sis = vec![0.0; p];
    assert_eq!(unsafe { rpc_sis_scores(ds, sis.as_mut_ptr(), p) }, RpcStatus::Ok);
    assert!(sis.iter().all(|s| s.abs() <= 1.0));
    let mut order = vec![0usize; 3];
    assert_eq!(unsafe { rpc_fr_screen(ds, 3, order.as_mut_ptr(), 3) }, RpcStatus::Ok);
    assert_eq!(order[0], 0);
    unsafe { rpc_dataset_free(ds) };
}

#[test]
fn errors_carry_status_and_message() {
    let mut ds = ptr::null_mut();
    let st = unsafe { rpc_dataset_new(ptr::null(), ptr::null(), 3, 1, &mut ds) };
    assert_eq!(st, RpcStatus::NullPointer);
    assert!(last_error().contains("null"));

    let x = [1.0, 1.0, 1.0, 1.0, 2.0, 3.0];
    let y = [1.0, 2.0, 4.0];
    let st = unsafe { rpc_dataset_new(x.as_ptr(), y.as_ptr(), 3, 2, &mut ds) };
    assert_eq!(st, RpcStatus::InvalidData);
    assert!(last_error().contains("column 0"));

    let (x, y) = seeded(10, 4, 3);
    let ds = dataset(&x, &y, 10, 4);
    assert!(rpc_last_error_message().is_null());
    let mut fit = ptr::null_mut();
    assert_eq!(unsafe { rpc_fit_new(ds, -1.0, &mut fit) }, RpcStatus::InvalidArgument);
    let mut short = [0.0; 2];
    assert_eq!(
        unsafe { rpc_sis_scores(ds, short.as_mut_ptr(), short.len()) },
        RpcStatus::BufferTooSmall
    );
    unsafe { rpc_dataset_free(ds) };
    unsafe { rpc_dataset_free(ptr::null_mut()) };
}

#[test]
fn presets_and_simulation() {
    let mut l = RpcLambdaPresets::default();
    assert_eq!(unsafe { rpc_lambda_presets(10, 10, &mut l) }, RpcStatus::Ok);
    assert_eq!((l.rpc1, l.rpc3), (1.0, 1.0));
    assert!((l.rpc2 - 10f64.ln()).abs() < 1e-15);

    let plan = CString::new(
        r#"{"setting": {"design": "IID", "n": 20, "p": 12, "r_squared": 0.5, "seed": 4},
            "replications": 2, "k": 12, "methods": ["RPC1", "SIS"]}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rpc_simulate_json(plan.as_ptr(), &mut out) }, RpcStatus::Ok);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { rpc_string_free(out) };
    assert_eq!(json[0]["methods"][0]["cp"], 1.0);

    let bad = CString::new(r#"{"setting": {}, "replications": 1, "methods": []}"#).unwrap();
    assert_eq!(
        unsafe { rpc_simulate_json(bad.as_ptr(), &mut out) },
        RpcStatus::InvalidArgument
    );
    assert!(last_error().contains("setting"));
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(rpc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles and runs a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(header_dir.join("rpcscreen.h").is_file());
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let staticlib = profile_dir.join("librpcscreen_ffi.a");
    assert!(staticlib.is_file(), "missing {}", staticlib.display());

    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "rpcscreen.h"

int main(void) {
    double x[12] = {1, 2, 3, 4, 2, 1, 0, 1, 5, 3, 1, 0};
    double y[4] = {1.1, 2.0, 2.9, 4.2};
    RpcDataset *ds = NULL;
    if (rpc_dataset_new(x, y, 4, 3, &ds) != RPC_STATUS_OK) return 1;
    RpcFit *fit = NULL;
    if (rpc_fit_new(ds, 1.0, &fit) != RPC_STATUS_OK) return 2;
    double scores[3];
    if (rpc_fit_copy(fit, RPC_FIT_FIELD_SCORES, scores, 3) != RPC_STATUS_OK) return 3;
    size_t top[1];
    if (rpc_select_top_k(scores, 3, 1, top, 1) != RPC_STATUS_OK) return 4;
    if (rpc_fit_new(ds, 0.0, &fit) != RPC_STATUS_INVALID_ARGUMENT) return 5;
    printf("%zu %s\n", top[0], rpc_last_error_message() ? "err" : "none");
    rpc_fit_free(fit);
    rpc_dataset_free(ds);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0 err\n");
}
