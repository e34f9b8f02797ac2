//! The linear part `A` of `u' = -A u + F(t, u)`: semigroup action `e^{-tA}`,
//! resolvent `(νI + A)^{-1}` and the decay rate `ω` with
//! `‖e^{-tA}‖_E ≤ e^{-ωt}` in a weighted inner product `⟨x, y⟩_E = xᵀ W y`.
//!
//! The weight is Cholesky-factored once (`W = L Lᵀ`); every norm and log-norm
//! computation then runs in the coordinates `y = Lᵀ x`, where the weighted
//! norm is Euclidean.

pub mod expm;
pub mod krylov;

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen, LU};

use crate::{Error, Result};

/// Above this dimension `semigroup_apply` uses the Krylov action instead of
/// forming the dense exponential.
pub const KRYLOV_DIM: usize = 200;
/// Resolvents with a reciprocal condition number below this are rejected.
pub const RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LinearOperator {
    matrix: DMatrix<f64>,
    weight: DMatrix<f64>,
    /// Lower Cholesky factor of `weight`.
    chol: DMatrix<f64>,
    omega: f64,
}

impl LinearOperator {
    /// Operator with the Euclidean inner product.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::with_weight(matrix, DMatrix::identity(n, n))
    }

    pub fn with_weight(matrix: DMatrix<f64>, weight: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator(
                "matrix has non-finite entries".into(),
            ));
        }
        if weight.shape() != matrix.shape() || weight.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator(
                "weight must be a finite matrix of the operator's shape".into(),
            ));
        }
        let asym = (&weight - weight.transpose()).amax();
        if asym > 1e-12 * weight.amax().max(1.0) {
            return Err(Error::InvalidOperator("weight is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(weight.clone());
        let wmax = eig.eigenvalues.max();
        if eig.eigenvalues.min() <= 1e-12 * wmax.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidOperator(
                "weight is not positive definite".into(),
            ));
        }
        let chol = weight
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidOperator("weight Cholesky factorization failed".into()))?
            .unpack();
        let omega = log_norm_lower_bound(&matrix, &chol);
        Ok(Self {
            matrix,
            weight,
            chol,
            omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weight(&self) -> &DMatrix<f64> {
        &self.weight
    }

    /// Lower Cholesky factor `L` of the weight, `W = L Lᵀ`.
    pub fn weight_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Certified decay rate; see [`decay_rate`].
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.weight * y))
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        (self.chol.transpose() * x).norm()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// Dense `e^{-tA}`.
    pub fn semigroup(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        Ok(expm::expm(&(&self.matrix * (-t))))
    }

    /// `e^{-tA} x`.
    pub fn semigroup_apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_time(t)?;
        self.check_len(x)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        if self.dim() > KRYLOV_DIM {
            let neg = -&self.matrix;
            return Ok(krylov::expm_action(&neg, t, x, 1e-12));
        }
        Ok(self.semigroup(t)? * x)
    }

    /// Factorizes `νI + A` once for repeated solves.
    pub fn resolvent(&self, nu: f64) -> Result<Resolvent> {
        if !nu.is_finite() {
            return Err(Error::Domain(format!(
                "resolvent shift must be finite, got {nu}"
            )));
        }
        let n = self.dim();
        let shifted = &self.matrix + DMatrix::<f64>::identity(n, n) * nu;
        let lu = shifted.clone().lu();
        let rcond = match lu.try_inverse() {
            Some(inv) => {
                let c = expm::norm1(&shifted) * expm::norm1(&inv);
                if c.is_finite() {
                    1.0 / c
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        if rcond < RCOND_MIN {
            return Err(Error::SingularResolvent { nu, rcond });
        }
        Ok(Resolvent { nu, lu, rcond })
    }

    /// `(νI + A)^{-1} y`.
    pub fn resolvent_apply(&self, nu: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(y)?;
        self.resolvent(nu)?.apply(y)
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "state has length {}, operator dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("state has non-finite entries".into()));
        }
        Ok(())
    }

    /// Parses the plain-text matrix format: first line `n`, then `n` rows of
    /// `n` whitespace-separated numbers.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(parse_matrix(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// A factorized `νI + A`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    nu: f64,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rcond: f64,
}

impl Resolvent {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(y).ok_or(Error::SingularResolvent {
            nu: self.nu,
            rcond: 0.0,
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "semigroup time must be finite and nonnegative, got {t}"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the symmetric part of `Lᵀ A L^{-T}`.
fn log_norm_lower_bound(matrix: &DMatrix<f64>, chol: &DMatrix<f64>) -> f64 {
    let n = matrix.nrows();
    let lt = chol.transpose();
    let lt_inv = lt
        .clone()
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .expect("Cholesky factor has a positive diagonal");
    let transformed = &lt * matrix * lt_inv;
    let sym = (&transformed + transformed.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Decay rate `ω`: the smallest eigenvalue of the weight-symmetrized part of
/// `A`. Then `‖e^{-tA}‖_E ≤ e^{-ωt}` for all `t ≥ 0`. A value `≤ 0` means the
/// semigroup is not a strict contraction in this inner product.
pub fn decay_rate(op: &LinearOperator) -> f64 {
    op.omega()
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line_no, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::Parse(format!("line {line_no}: expected dimension, got {first:?}")))?;
    if n == 0 {
        return Err(Error::Parse(format!(
            "line {line_no}: dimension must be positive"
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (line_no, row) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} matrix rows")))?;
        let values = row
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line_no}: bad number {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(Error::Parse(format!(
                "line {line_no}: expected {n} entries, found {}",
                values.len()
            )));
        }
        data.extend(values);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse(format!(
            "line {line_no}: trailing data after matrix"
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, &data))
}

pub fn matrix_to_text(m: &DMatrix<f64>) -> String {
    let mut out = format!("{}\n", m.nrows());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, l: f64) -> DMatrix<f64> {
        let h = l / (n + 1) as f64;
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 / (h * h),
            1 => -1.0 / (h * h),
            _ => 0.0,
        })
    }

    #[test]
    fn identity_rate() {
        let op = LinearOperator::new(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(decay_rate(&op), 1.0);
    }

    #[test]
    fn diagonal_rate() {
        let op = LinearOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])))
            .unwrap();
        assert!((decay_rate(&op) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_rate_matches_eigensolver() {
        let a = laplacian(8, 1.0);
        let oracle = SymmetricEigen::new(a.clone()).eigenvalues.min();
        let closed = 4.0 * 81.0 * (std::f64::consts::PI / 18.0).sin().powi(2);
        let op = LinearOperator::new(a).unwrap();
        assert!((decay_rate(&op) - oracle).abs() < 1e-10);
        assert!((oracle - closed).abs() < 1e-10);
    }

    #[test]
    fn rate_is_invariant_under_weight_scaling() {
        let a = laplacian(5, 2.0);
        let plain = LinearOperator::new(a.clone()).unwrap();
        let scaled = LinearOperator::with_weight(a, DMatrix::identity(5, 5) * 0.3).unwrap();
        assert!((plain.omega() - scaled.omega()).abs() < 1e-10);
    }

    #[test]
    fn negative_rate_signals_growth() {
        let op =
            LinearOperator::new(DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 1.0])).unwrap();
        assert!(op.omega() < 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            LinearOperator::new(DMatrix::zeros(2, 3)),
            Err(Error::InvalidOperator(_))
        ));
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(
            LinearOperator::new(m),
            Err(Error::InvalidOperator(_))
        ));
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(LinearOperator::with_weight(DMatrix::identity(2, 2), w).is_err());
    }

    #[test]
    fn semigroup_at_zero_is_exact_identity() {
        let op = LinearOperator::new(laplacian(4, 1.0)).unwrap();
        let x = DVector::from_vec(vec![0.1, -3.0, 1e-17, 7.0]);
        assert_eq!(op.semigroup_apply(0.0, &x).unwrap(), x);
    }

    #[test]
    fn semigroup_halves_at_ln_two() {
        let op = LinearOperator::new(DMatrix::identity(2, 2)).unwrap();
        let x = DVector::from_vec(vec![4.0, -2.0]);
        let y = op.semigroup_apply(2f64.ln(), &x).unwrap();
        assert!((y - &x * 0.5).norm() < 1e-15);
    }

    #[test]
    fn negative_time_is_rejected() {
        let op = LinearOperator::new(DMatrix::identity(1, 1)).unwrap();
        assert!(matches!(
            op.semigroup_apply(-1.0, &DVector::from_element(1, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolvent_examples() {
        let id = LinearOperator::new(DMatrix::identity(2, 2)).unwrap();
        let y = DVector::from_vec(vec![0.3, -1.2]);
        assert!((id.resolvent_apply(0.0, &y).unwrap() - &y).norm() < 1e-15);
        let diag = LinearOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])))
            .unwrap();
        let r = diag
            .resolvent_apply(1.0, &DVector::from_vec(vec![1.0, 1.0]))
            .unwrap();
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-15 && (r[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn singular_resolvent_is_an_error() {
        let op = LinearOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])))
            .unwrap();
        assert!(matches!(
            op.resolvent_apply(-1.0, &DVector::from_vec(vec![1.0, 1.0])),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn krylov_path_matches_dense() {
        let n = KRYLOV_DIM + 20;
        let a = laplacian(n, 1.0) * 1e-4;
        let op = LinearOperator::new(a.clone()).unwrap();
        let x = DVector::from_fn(n, |i, _| ((i as f64) * 0.11).cos());
        let dense = expm::expm(&(&a * -0.3)) * &x;
        let krylov = op.semigroup_apply(0.3, &x).unwrap();
        assert!((dense - krylov).norm() <= 1e-9 * x.norm());
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -0.25, 1e-300, 3.5]);
        let parsed = parse_matrix(&matrix_to_text(&m)).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn matrix_text_errors_carry_line_numbers() {
        let err = parse_matrix("2\n1 2\n3 x\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(parse_matrix("2\n1 2 3\n4 5\n").is_err());
    }
}
