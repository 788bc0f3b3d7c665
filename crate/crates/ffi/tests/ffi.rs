use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use zerolab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(zl_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn polynomial_round_trip() {
    unsafe {
        let (re, im) = ([1.0, 2.0, 3.0], [0.0, -1.0, 0.5]);
        let mut p = ptr::null_mut();
        assert_eq!(zl_polynomial_new(re.as_ptr(), im.as_ptr(), 3, &mut p), ZlStatus::Ok);
        let mut degree = 0;
        assert_eq!(zl_polynomial_degree(p, &mut degree), ZlStatus::Ok);
        assert_eq!(degree, 2);
        let (mut ore, mut oim, mut len) = ([0.0; 3], [0.0; 3], 0);
        assert_eq!(zl_polynomial_coeffs(p, ore.as_mut_ptr(), oim.as_mut_ptr(), 3, &mut len), ZlStatus::Ok);
        assert_eq!((ore, oim, len), (re, im, 3));
        zl_polynomial_free(p);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(zl_polynomial_new(ptr::null(), ptr::null(), 3, &mut p), ZlStatus::NullPointer);
        assert!(last_error().contains("re"));
        let zeros = [0.0; 4];
        assert_eq!(zl_polynomial_new(zeros.as_ptr(), ptr::null(), 4, &mut p), ZlStatus::DegenerateDraw);
        let mut lo = 0.0;
        assert_eq!(zl_sup_norm(ptr::null(), 32, &mut lo, &mut lo), ZlStatus::NullPointer);
        let mut b = ptr::null_mut();
        let weight = [0.0, 0.1];
        assert_eq!(zl_basis_szego(weight.as_ptr(), 2, 4, &mut b), ZlStatus::Conditioning);
        assert!(!last_error().is_empty());
        let ok = [1.0];
        assert_eq!(zl_polynomial_new(ok.as_ptr(), ptr::null(), 1, &mut p), ZlStatus::Ok);
        assert!(last_error().is_empty());
        zl_polynomial_free(p);
        zl_polynomial_free(ptr::null_mut());
    }
}

#[test]
fn sample_roots_and_stats() {
    unsafe {
        let name = CString::new("complex-gaussian").unwrap();
        let mut e = ptr::null_mut();
        assert_eq!(zl_ensemble_parse(name.as_ptr(), &mut e), ZlStatus::Ok);
        let mut p = ptr::null_mut();
        assert_eq!(zl_sample_polynomial(e, 32, 7, 0, &mut p), ZlStatus::Ok);
        let mut p2 = ptr::null_mut();
        assert_eq!(zl_sample_polynomial(e, 32, 7, 0, &mut p2), ZlStatus::Ok);
        let (mut a, mut b, mut len) = ([0.0; 33], [0.0; 33], 0);
        let (mut c, mut d) = ([0.0; 33], [0.0; 33]);
        zl_polynomial_coeffs(p, a.as_mut_ptr(), b.as_mut_ptr(), 33, &mut len);
        zl_polynomial_coeffs(p2, c.as_mut_ptr(), d.as_mut_ptr(), 33, &mut len);
        assert_eq!((a, b), (c, d));

        let mut roots = ptr::null_mut();
        assert_eq!(zl_find_roots(p, 1e-12, 200, &mut roots), ZlStatus::Ok);
        let mut err = 1.0;
        zl_roots_reconstruction_error(roots, &mut err);
        assert!(err <= 1e-8);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(zl_sup_norm(p, 32, &mut lo, &mut hi), ZlStatus::Ok);
        assert!(lo <= hi);
        let mut m = 0.0;
        assert_eq!(zl_mahler_measure(p, roots, &mut m), ZlStatus::Ok);
        assert!(m <= hi.ln() + 1e-9);
        let (mut disc, mut rhs) = (0.0, 0.0);
        assert_eq!(zl_sector_discrepancy(roots, 0.5, 1.0, 3.0, &mut disc), ZlStatus::Ok);
        assert_eq!(zl_erdos_turan_rhs(p, roots, 0.5, &mut rhs), ZlStatus::Ok);
        assert!(disc <= rhs);
        assert_eq!(zl_sector_discrepancy(roots, 1.5, 1.0, 3.0, &mut disc), ZlStatus::InvalidArgument);

        zl_roots_free(roots);
        zl_polynomial_free(p);
        zl_polynomial_free(p2);
        zl_ensemble_free(e);
    }
}

#[test]
fn basis_entries() {
    unsafe {
        let mut b = ptr::null_mut();
        let weight = [1.0, 0.3];
        assert_eq!(zl_basis_szego(weight.as_ptr(), 2, 4, &mut b), ZlStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(zl_basis_entry(b, 4, 4, &mut re, &mut im), ZlStatus::Ok);
        assert!(re > 0.0 && im == 0.0);
        assert_eq!(zl_basis_entry(b, 5, 4, &mut re, &mut im), ZlStatus::OutOfRange);
        zl_basis_free(b);
        assert_eq!(zl_basis_monomial(3, &mut b), ZlStatus::Ok);
        zl_basis_entry(b, 2, 2, &mut re, &mut im);
        assert_eq!((re, im), (1.0, 0.0));
        zl_basis_free(b);
    }
}

#[test]
fn sweep_through_ffi() {
    unsafe {
        let text = CString::new("[ensemble]\nfamily = \"rademacher\"\n[sweep]\ndegrees = [8, 16, 32]\ntrials = 5\n").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(zl_sweep_run(text.as_ptr(), 2, &mut s), ZlStatus::Ok);
        let mut rows = 0;
        zl_sweep_rows(s, &mut rows);
        assert_eq!(rows, 3);
        let (mut n, mut mean, mut se) = (0, 0.0, 0.0);
        assert_eq!(zl_sweep_row(s, 2, &mut n, &mut mean, &mut se), ZlStatus::Ok);
        assert_eq!(n, 32);
        assert!(mean > 0.0 && se >= 0.0);
        assert_eq!(zl_sweep_row(s, 3, &mut n, &mut mean, &mut se), ZlStatus::OutOfRange);
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(zl_sweep_export(s, path.as_ptr()), ZlStatus::Ok);
        assert!(dir.path().join("summary.json").is_file());
        zl_sweep_free(s);

        let bad = CString::new("[sweep]\nbogus = 1\n").unwrap();
        assert_eq!(zl_sweep_run(bad.as_ptr(), 1, &mut s), ZlStatus::InvalidArgument);
        assert!(last_error().contains("bogus"));
    }
}

#[test]
fn header_declares_every_export() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/zerolab.h")).unwrap();
    let source = std::fs::read_to_string(root.join("src/lib.rs")).unwrap();
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        }
    }
}

/// Compiles the C smoke test against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libzerolab_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke test exited with {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
