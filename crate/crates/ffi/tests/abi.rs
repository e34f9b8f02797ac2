use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use semideg_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sd_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn preset(name: &str) -> *mut SdProblem {
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sd_problem_preset(name.as_ptr(), &mut p) },
        SdStatus::Ok
    );
    p
}

#[test]
fn operator_round_trip() {
    let a = [2.0, 0.0, 0.0, 3.0];
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(
            sd_operator_new(a.as_ptr(), ptr::null(), 2, &mut op),
            SdStatus::Ok
        );
        assert_eq!(sd_operator_dim(op), 2);
        let mut omega = 0.0;
        assert_eq!(sd_operator_decay_rate(op, &mut omega), SdStatus::Ok);
        assert_eq!(omega, 2.0);
        let (y, mut x) = ([1.0, 1.0], [0.0; 2]);
        assert_eq!(
            sd_operator_resolvent_apply(op, 1.0, y.as_ptr(), x.as_mut_ptr()),
            SdStatus::Ok
        );
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 0.25).abs() < 1e-15);
        let t = 2f64.ln();
        assert_eq!(
            sd_operator_semigroup_apply(op, t, y.as_ptr(), x.as_mut_ptr()),
            SdStatus::Ok
        );
        assert!((x[0] - 0.25).abs() < 1e-14 && (x[1] - 0.125).abs() < 1e-14);
        sd_operator_free(op);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let a = [1.0, 0.0, 0.0, 1.0];
        let mut op = ptr::null_mut();
        assert_eq!(
            sd_operator_new(a.as_ptr(), ptr::null(), 2, ptr::null_mut()),
            SdStatus::NullPointer
        );
        assert_eq!(
            sd_operator_new(ptr::null(), ptr::null(), 2, &mut op),
            SdStatus::NullPointer
        );
        assert_eq!(
            sd_operator_new(a.as_ptr(), ptr::null(), 0, &mut op),
            SdStatus::InvalidArgument
        );
        let nan = [f64::NAN, 0.0, 0.0, 1.0];
        assert_eq!(
            sd_operator_new(nan.as_ptr(), ptr::null(), 2, &mut op),
            SdStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());
        // an indefinite weight is rejected by the operator
        let w = [1.0, 0.0, 0.0, -1.0];
        assert_eq!(
            sd_operator_new(a.as_ptr(), w.as_ptr(), 2, &mut op),
            SdStatus::InvalidOperator
        );
        assert!(op.is_null());

        let singular = [0.0; 4];
        assert_eq!(
            sd_operator_new(singular.as_ptr(), ptr::null(), 2, &mut op),
            SdStatus::Ok
        );
        let (y, mut x) = ([1.0, 1.0], [0.0; 2]);
        assert_eq!(
            sd_operator_resolvent_apply(op, 0.0, y.as_ptr(), x.as_mut_ptr()),
            SdStatus::Singular
        );
        assert!(last_error().contains("singular"));
        sd_operator_free(op);

        let name = CString::new("nope").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(
            sd_problem_preset(name.as_ptr(), &mut p),
            SdStatus::InvalidArgument
        );
        assert_eq!(sd_problem_dim(ptr::null()), 0);
        sd_problem_free(ptr::null_mut());
        sd_operator_free(ptr::null_mut());
    }
}

#[test]
fn problems_translate_and_carry_degree() {
    let p = preset("scalar-linear");
    unsafe {
        assert_eq!(sd_problem_dim(p), 1);
        let (mut period, mut bound) = (0.0, 0.0);
        assert_eq!(
            sd_problem_constants(p, &mut period, &mut bound),
            SdStatus::Ok
        );
        assert_eq!(bound, 1.0);
        let (x, mut y) = ([0.0], [0.0]);
        assert_eq!(
            sd_translate(p, 1.0, x.as_ptr(), 1.0, 1.0, y.as_mut_ptr()),
            SdStatus::Ok
        );
        assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-8);
        let mut deg = 0;
        assert_eq!(
            sd_degree_ball(p, ptr::null(), -1.0, 1.0, &mut deg),
            SdStatus::Ok
        );
        assert_eq!(deg, 1);
        // the equilibrium x = 1 sits outside the ball of radius 0.5 at the origin
        assert_eq!(
            sd_degree_ball(p, ptr::null(), 0.5, 1.0, &mut deg),
            SdStatus::Ok
        );
        assert_eq!(deg, 0);
        let mut passed = 0;
        assert_eq!(sd_check_hypotheses(p, &mut passed), SdStatus::Ok);
        assert_eq!(passed, 1);
        let mut op = ptr::null_mut();
        assert_eq!(sd_problem_operator(p, &mut op), SdStatus::Ok);
        assert_eq!(sd_operator_dim(op), 1);
        sd_operator_free(op);
        sd_problem_free(p);
    }
}

#[test]
fn hypothesis_failure_names_the_entry() {
    let p = preset("cubic-2d");
    let mut passed = 1;
    assert_eq!(
        unsafe { sd_check_hypotheses(p, &mut passed) },
        SdStatus::Hypothesis
    );
    assert_eq!(passed, 0);
    assert!(last_error().contains("H3b"), "{}", last_error());
    unsafe { sd_problem_free(p) };
}

#[test]
fn periodic_state_of_the_forced_scalar_problem() {
    let p = preset("scalar-forced");
    let (mut x, mut closure) = ([0.0], 1.0);
    unsafe {
        assert_eq!(
            sd_find_periodic(p, ptr::null(), -1.0, x.as_mut_ptr(), &mut closure),
            SdStatus::Ok
        );
        assert!(closure <= 1e-8);
        let mut y = [0.0];
        let mut period = 0.0;
        let mut bound = 0.0;
        sd_problem_constants(p, &mut period, &mut bound);
        assert_eq!(
            sd_translate(p, period, x.as_ptr(), 1.0, 1.0, y.as_mut_ptr()),
            SdStatus::Ok
        );
        assert!((y[0] - x[0]).abs() < 1e-7);
        sd_problem_free(p);
    }
}

/// Builds the static library into the test scratch directory; a plain
/// `cargo test` only produces the rlib.
fn static_library() -> PathBuf {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-static");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let build = Command::new(cargo)
        .args([
            "build",
            "--offline",
            "--release",
            "-p",
            "semideg-ffi",
            "--lib",
            "--target-dir",
        ])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    assert!(
        build.status.success(),
        "{}",
        String::from_utf8_lossy(&build.stderr)
    );
    target.join("release/libsemideg_ffi.a")
}

#[test]
fn c_program_links_against_the_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = static_library();
    assert!(lib.exists(), "missing {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
