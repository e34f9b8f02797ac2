//! Arnoldi approximation of `e^{tM} v` with step-size control, used when the
//! state dimension is too large to form the exponential densely.

use nalgebra::{DMatrix, DVector};

use super::expm::expm;

const SUBSPACE: usize = 30;

struct Arnoldi {
    basis: Vec<DVector<f64>>,
    hessenberg: DMatrix<f64>,
    /// `h_{m+1,m}`; zero after a happy breakdown.
    tail: f64,
}

fn arnoldi(m: &DMatrix<f64>, v: &DVector<f64>, size: usize) -> Arnoldi {
    let beta = v.norm();
    let mut basis = vec![v / beta];
    let mut h = DMatrix::<f64>::zeros(size + 1, size);
    let mut dim = size;
    let mut tail = 0.0;
    for j in 0..size {
        let mut w = m * &basis[j];
        // modified Gram-Schmidt
        for (i, q) in basis.iter().enumerate() {
            let hij = q.dot(&w);
            h[(i, j)] = hij;
            w.axpy(-hij, q, 1.0);
        }
        let hn = w.norm();
        h[(j + 1, j)] = hn;
        if hn <= 1e-12 * (1.0 + h.column(j).norm()) {
            dim = j + 1;
            tail = 0.0;
            break;
        }
        tail = hn;
        if j + 1 < size {
            basis.push(w / hn);
        }
    }
    basis.truncate(dim);
    Arnoldi {
        basis,
        hessenberg: h.view((0, 0), (dim, dim)).into_owned(),
        tail,
    }
}

/// Approximates `e^{t M} v` to a relative tolerance `tol`.
pub fn expm_action(m: &DMatrix<f64>, t: f64, v: &DVector<f64>, tol: f64) -> DVector<f64> {
    let n = v.len();
    let size = SUBSPACE.min(n);
    let mut w = v.clone();
    let mut elapsed = 0.0;
    let scale = super::expm::norm1(m).max(1e-300);
    let mut tau = t.min(10.0 / scale * size as f64);
    while elapsed < t {
        let beta = w.norm();
        if beta == 0.0 {
            break;
        }
        let krylov = arnoldi(m, &w, size);
        let k = krylov.basis.len();
        loop {
            tau = tau.min(t - elapsed);
            let small = expm(&(&krylov.hessenberg * tau));
            let e1 = small.column(0);
            let err = beta * krylov.tail * e1[k - 1].abs();
            if err <= tol * beta * (tau / t).max(1e-3) || tau <= 1e-14 * t {
                let mut next = DVector::<f64>::zeros(n);
                for (j, q) in krylov.basis.iter().enumerate() {
                    next.axpy(beta * e1[j], q, 1.0);
                }
                w = next;
                elapsed += tau;
                if err < 0.1 * tol * beta {
                    tau *= 2.0;
                }
                break;
            }
            tau *= 0.5;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_exponential() {
        let n = 60;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -2.0 * 100.0;
            if i > 0 {
                m[(i, i - 1)] = 100.0;
                m[(i - 1, i)] = 100.0;
            }
        }
        let v = DVector::from_fn(n, |i, _| ((i + 1) as f64 * 0.37).sin());
        let dense = expm(&(&m * 0.05)) * &v;
        let approx = expm_action(&m, 0.05, &v, 1e-12);
        assert!((dense - approx).norm() <= 1e-9 * v.norm());
    }
}
