//! C ABI for `semideg`.
//!
//! Problems and operators are opaque handles created by `sd_*_new` /
//! `sd_problem_preset` and released with the matching `_free`. Every fallible
//! call returns an [`SdStatus`]; on failure [`sd_last_error`] describes the
//! error for the calling thread. Vectors are caller-owned `double` arrays whose
//! length is the handle's dimension. Matrices are row-major.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use nalgebra::{DMatrix, DVector};
use semideg::cli::default_region;
use semideg::degree::Region;
use semideg::evolve::{translate, SemilinearProblem};
use semideg::linops::LinearOperator;
use semideg::periodic::{find_periodic, static_degree, HarnessOptions, PeriodicOptions};
use semideg::{problems, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidOperator = 3,
    Singular = 4,
    Inadmissible = 5,
    NoCertificate = 6,
    NotFound = 7,
    Hypothesis = 8,
    Numerical = 9,
    Panic = 10,
}

/// Opaque linear operator `A` with its weight.
pub struct SdOperator {
    inner: LinearOperator,
}

/// Opaque semilinear problem.
pub struct SdProblem {
    inner: SemilinearProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> SdStatus {
    match err {
        Error::InvalidOperator(_) => SdStatus::InvalidOperator,
        Error::SingularResolvent { .. } => SdStatus::Singular,
        Error::NoCertificate => SdStatus::NoCertificate,
        Error::NotFound { .. } => SdStatus::NotFound,
        Error::Hypothesis(_) => SdStatus::Hypothesis,
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::Io(_) => {
            SdStatus::InvalidArgument
        }
        e if e.is_inadmissible() => SdStatus::Inadmissible,
        _ => SdStatus::Numerical,
    }
}

/// Runs `body`, recording errors and converting panics.
fn guard(body: impl FnOnce() -> Result<(), SdStatus>) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SdStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SdStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SdStatus>;
}

impl<T> OrStatus<T> for semideg::Result<T> {
    fn or_status(self) -> Result<T, SdStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null() -> SdStatus {
    set_error("null pointer argument");
    SdStatus::NullPointer
}

fn invalid(msg: &str) -> SdStatus {
    set_error(msg);
    SdStatus::InvalidArgument
}

unsafe fn vector<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], SdStatus> {
    if ptr.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize) -> Result<&'a mut [f64], SdStatus> {
    if ptr.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T) -> Result<&'a T, SdStatus> {
    ptr.as_ref().ok_or_else(null)
}

fn finite(values: &[f64]) -> Result<(), SdStatus> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid("non-finite input"))
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `sd_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an operator from an `n×n` row-major matrix. `weight` may be null
/// for the identity weight.
///
/// # Safety
/// `matrix` (and `weight` when non-null) must point to `n*n` doubles and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_new(
    matrix: *const f64,
    weight: *const f64,
    n: usize,
    out: *mut *mut SdOperator,
) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let a = vector(matrix, n * n)?;
        finite(a)?;
        let a = DMatrix::from_row_slice(n, n, a);
        let op = if weight.is_null() {
            LinearOperator::new(a)
        } else {
            let w = vector(weight, n * n)?;
            finite(w)?;
            LinearOperator::with_weight(a, DMatrix::from_row_slice(n, n, w))
        }
        .or_status()?;
        *out = Box::into_raw(Box::new(SdOperator { inner: op }));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from [`sd_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_free(op: *mut SdOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Dimension of the operator, 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_dim(op: *const SdOperator) -> usize {
    op.as_ref().map_or(0, |o| o.inner.dim())
}

/// Certified decay rate `ω` with `‖e^{-tA}‖ ≤ e^{-ωt}` in the weighted norm.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_decay_rate(op: *const SdOperator, out: *mut f64) -> SdStatus {
    guard(|| {
        let op = handle(op)?;
        let out = output(out, 1)?;
        out[0] = op.inner.omega();
        Ok(())
    })
}

/// `out = e^{-tA} x`, `t ≥ 0`.
///
/// # Safety
/// `x` and `out` must hold `sd_operator_dim(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_semigroup_apply(
    op: *const SdOperator,
    t: f64,
    x: *const f64,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let op = handle(op)?;
        let n = op.inner.dim();
        let x = vector(x, n)?;
        finite(x)?;
        let y = op
            .inner
            .semigroup_apply(t, &DVector::from_column_slice(x))
            .or_status()?;
        output(out, n)?.copy_from_slice(y.as_slice());
        Ok(())
    })
}

/// `out = (νI + A)^{-1} y`.
///
/// # Safety
/// `y` and `out` must hold `sd_operator_dim(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_resolvent_apply(
    op: *const SdOperator,
    nu: f64,
    y: *const f64,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let op = handle(op)?;
        let n = op.inner.dim();
        let y = vector(y, n)?;
        finite(y)?;
        let x = op
            .inner
            .resolvent_apply(nu, &DVector::from_column_slice(y))
            .or_status()?;
        output(out, n)?.copy_from_slice(x.as_slice());
        Ok(())
    })
}

/// Built-in problem by name: `txline-default`, `heat-1d`, `scalar-linear`,
/// `scalar-forced`, `cubic-2d` or `identity`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_problem_preset(
    name: *const c_char,
    out: *mut *mut SdProblem,
) -> SdStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return Err(null());
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| invalid("name is not UTF-8"))?;
        let problem = problems::preset(name).or_status()?;
        *out = Box::into_raw(Box::new(SdProblem { inner: problem }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_problem_free(problem: *mut SdProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// State dimension, 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_problem_dim(problem: *const SdProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Period `T` and bound `K` (0 when the problem declares none).
///
/// # Safety
/// `problem` must be a live handle; `period` and `bound` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_problem_constants(
    problem: *const SdProblem,
    period: *mut f64,
    bound: *mut f64,
) -> SdStatus {
    guard(|| {
        let p = &handle(problem)?.inner;
        output(period, 1)?[0] = p.period;
        output(bound, 1)?[0] = p.bound.unwrap_or(0.0);
        Ok(())
    })
}

/// Copies the problem's linear part into a new operator handle.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_problem_operator(
    problem: *const SdProblem,
    out: *mut *mut SdOperator,
) -> SdStatus {
    guard(|| {
        let p = handle(problem)?;
        if out.is_null() {
            return Err(null());
        }
        let op = (*p.inner.operator).clone();
        *out = Box::into_raw(Box::new(SdOperator { inner: op }));
        Ok(())
    })
}

/// Translation along trajectories `out = Φ_t(x)` for `u' = λ(-Au + F(t, u, μ))`.
///
/// # Safety
/// `x` and `out` must hold `sd_problem_dim(problem)` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_translate(
    problem: *const SdProblem,
    t: f64,
    x: *const f64,
    lambda: f64,
    mu: f64,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let p = &handle(problem)?.inner;
        let n = p.dim();
        let x = vector(x, n)?;
        finite(x)?;
        if !(t >= 0.0) || !(lambda > 0.0) {
            return Err(invalid("need t >= 0 and lambda > 0"));
        }
        let y = translate(p, t, &DVector::from_column_slice(x), lambda, mu).or_status()?;
        output(out, n)?.copy_from_slice(y.as_slice());
        Ok(())
    })
}

unsafe fn ball(p: &SemilinearProblem, center: *const f64, radius: f64) -> Result<Region, SdStatus> {
    if radius <= 0.0 {
        return default_region(p).or_status();
    }
    let c = if center.is_null() {
        vec![0.0; p.dim()]
    } else {
        vector(center, p.dim())?.to_vec()
    };
    finite(&c)?;
    Region::ball_in(&p.operator, c, radius).or_status()
}

/// `Deg(-A + F, U)` on the weighted ball `U = B(center, radius)`, using the
/// time average of `F` for non-autonomous problems. A null `center` means the
/// origin; `radius ≤ 0` selects the default region for the problem.
///
/// # Safety
/// `center` must be null or hold `sd_problem_dim(problem)` doubles; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sd_degree_ball(
    problem: *const SdProblem,
    center: *const f64,
    radius: f64,
    nu: f64,
    out: *mut i64,
) -> SdStatus {
    guard(|| {
        let p = &handle(problem)?.inner;
        if out.is_null() {
            return Err(null());
        }
        let region = ball(p, center, radius)?;
        let r = static_degree(p, &region, nu, &HarnessOptions::default()).or_status()?;
        *out = r.value;
        Ok(())
    })
}

/// Locates an initial state of a `T`-periodic solution in the ball (same
/// conventions as [`sd_degree_ball`]) and writes it to `state`, with the
/// closure defect `‖Φ_T(x) − x‖` in `closure`.
///
/// # Safety
/// `center` must be null or hold `sd_problem_dim(problem)` doubles, `state`
/// must hold that many doubles and `closure` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_find_periodic(
    problem: *const SdProblem,
    center: *const f64,
    radius: f64,
    state: *mut f64,
    closure: *mut f64,
) -> SdStatus {
    guard(|| {
        let p = &handle(problem)?.inner;
        let region = ball(p, center, radius)?;
        let s = find_periodic(p, &region, 1.0, &PeriodicOptions::default()).or_status()?;
        output(state, p.dim())?.copy_from_slice(&s.initial_state);
        output(closure, 1)?[0] = s.closure_defect;
        Ok(())
    })
}

/// Sampled hypothesis check; `passed` is 1 when every entry holds.
///
/// # Safety
/// `problem` must be a live handle and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_check_hypotheses(
    problem: *const SdProblem,
    passed: *mut i32,
) -> SdStatus {
    guard(|| {
        let p = &handle(problem)?.inner;
        if passed.is_null() {
            return Err(null());
        }
        let r = problems::check_hypotheses(p);
        *passed = i32::from(r.all_passed);
        if !r.all_passed {
            let names: Vec<&str> = r.failures().map(|e| e.name.as_str()).collect();
            set_error(format!("failed: {}", names.join(", ")));
            return Err(SdStatus::Hypothesis);
        }
        Ok(())
    })
}
