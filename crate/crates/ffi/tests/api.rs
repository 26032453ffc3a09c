use std::ffi::{CStr, CString};
use std::ptr;

use bse_doubling_ffi::*;

fn last_error() -> String {
    let p = bse_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scalar_problem(a: f64, b: f64) -> *mut BseProblem {
    let mut p = ptr::null_mut();
    let status = unsafe { bse_problem_new(1, &a, ptr::null(), &b, ptr::null(), &mut p) };
    assert_eq!(status, BseStatus::Ok);
    p
}

#[test]
fn scalar_solve_roundtrip() {
    let p = scalar_problem(2.0, 1.0);
    assert_eq!(unsafe { bse_problem_n(p) }, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bse_solve(p, ptr::null(), &mut s) }, BseStatus::Ok);
    assert!(bse_last_error_message().is_null());
    unsafe {
        assert_eq!(bse_solution_len(s), 2);
        assert_eq!(bse_solution_converged(s), 1);
        assert!(bse_solution_iterations(s) > 0);
        assert!(bse_solution_alpha(s) > 0.0);
        assert!(bse_solution_residual(s) < 1e-12);
        let (mut re, mut im) = ([0.0; 2], [0.0; 2]);
        assert_eq!(bse_solution_eigenvalues(s, re.as_mut_ptr(), im.as_mut_ptr(), 2), BseStatus::Ok);
        let r3 = 3f64.sqrt();
        assert!((re[0] + r3).abs() < 1e-12 && (re[1] - r3).abs() < 1e-12);
        assert_eq!(im, [0.0, 0.0]);
        assert_eq!(
            bse_solution_eigenvalues(s, re.as_mut_ptr(), im.as_mut_ptr(), 1),
            BseStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 2"));
        bse_solution_free(s);
        bse_problem_free(p);
    }
}

#[test]
fn structure_violation_is_reported() {
    // A = [[1, 2], [0, 1]] is not Hermitian.
    let a = [1.0, 0.0, 2.0, 1.0];
    let b = [0.0; 4];
    let mut p = ptr::null_mut();
    let status = unsafe { bse_problem_new(2, a.as_ptr(), ptr::null(), b.as_ptr(), ptr::null(), &mut p) };
    assert_eq!(status, BseStatus::Structure);
    assert!(p.is_null());
    assert!(last_error().contains("not Hermitian"));
}

#[test]
fn null_and_invalid_arguments() {
    unsafe {
        assert_eq!(bse_problem_new(1, ptr::null(), ptr::null(), ptr::null(), ptr::null(), ptr::null_mut()), BseStatus::NullPointer);
        let mut s = ptr::null_mut();
        assert_eq!(bse_solve(ptr::null(), ptr::null(), &mut s), BseStatus::NullPointer);
        let mut p = ptr::null_mut();
        assert_eq!(bse_problem_generate(42, 4, 0, 0.0, &mut p), BseStatus::InvalidArgument);
        assert!(last_error().contains("42"));
        assert_eq!(bse_problem_generate(BseGeneratorKind::RandomComplex as i32, 0, 0, 0.0, &mut p), BseStatus::InvalidArgument);
        assert_eq!(bse_problem_n(ptr::null()), 0);
        assert!(bse_solution_residual(ptr::null()).is_nan());
        bse_problem_free(ptr::null_mut());
        bse_solution_free(ptr::null_mut());
    }
}

#[test]
fn config_is_validated() {
    let p = scalar_problem(2.0, 1.0);
    let mut cfg = bse_solver_config_default();
    assert_eq!(cfg.remedy, BseRemedy::Auto as i32);
    assert_eq!(cfg.max_iter, 60);
    assert_eq!(cfg.alpha, 0.0);
    cfg.remedy = 9;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bse_solve(p, &cfg, &mut s) }, BseStatus::InvalidArgument);
    cfg = bse_solver_config_default();
    cfg.conv_tol = -1.0;
    assert_eq!(unsafe { bse_solve(p, &cfg, &mut s) }, BseStatus::InvalidArgument);
    assert!(s.is_null());
    unsafe { bse_problem_free(p) };
}

#[test]
fn not_converged_keeps_partial_solution() {
    let mut p = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bse_problem_generate(BseGeneratorKind::RandomComplex as i32, 6, 1, 10.0, &mut p), BseStatus::Ok);
        let mut cfg = bse_solver_config_default();
        cfg.max_iter = 1;
        assert_eq!(bse_solve(p, &cfg, &mut s), BseStatus::NotConverged);
        assert!(!s.is_null());
        assert_eq!(bse_solution_converged(s), 0);
        assert_eq!(bse_solution_iterations(s), 1);
        bse_solution_free(s);
        bse_problem_free(p);
    }
}

#[test]
fn matrix_market_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let pa = CString::new(dir.path().join("a.mtx").to_str().unwrap()).unwrap();
    let pb = CString::new(dir.path().join("b.mtx").to_str().unwrap()).unwrap();
    let mut p = ptr::null_mut();
    let mut q = ptr::null_mut();
    unsafe {
        assert_eq!(bse_problem_generate(BseGeneratorKind::DefectiveFixture as i32, 0, 0, 0.0, &mut p), BseStatus::Ok);
        assert_eq!(bse_problem_n(p), 7);
        assert_eq!(bse_problem_save_mtx(p, pa.as_ptr(), pb.as_ptr()), BseStatus::Ok);
        assert_eq!(bse_problem_load_mtx(pa.as_ptr(), pb.as_ptr(), &mut q), BseStatus::Ok);
        assert_eq!(bse_problem_n(q), 7);
        let missing = CString::new(dir.path().join("none.mtx").to_str().unwrap()).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(bse_problem_load_mtx(missing.as_ptr(), pb.as_ptr(), &mut r), BseStatus::Io);
        assert!(last_error().contains("none.mtx"));
        bse_problem_free(p);
        bse_problem_free(q);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(bse_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
