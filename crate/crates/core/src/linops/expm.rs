//! Dense matrix exponential (scaling and squaring with Padé approximants)
//! and the exponential-integrator φ-functions built on it.

use nalgebra::DMatrix;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub(crate) fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn solve_pade(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let p = &v + &u;
    let q = &v - &u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments")
}

fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let mut even = ident.clone() * b[0];
    let mut odd = ident * b[1];
    let mut power = a2.clone();
    let mut k = 2;
    while k < b.len() {
        even += &power * b[k];
        if k + 1 < b.len() {
            odd += &power * b[k + 1];
        }
        power = &power * &a2;
        k += 2;
    }
    solve_pade(a * odd, even)
}

fn pade13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    solve_pade(u, v)
}

/// `exp(m)` for a square matrix.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "expm needs a square matrix");
    if m.nrows() == 0 {
        return m.clone();
    }
    let nrm = norm1(m);
    for &(order, theta) in THETA.iter() {
        if nrm <= theta {
            return match order {
                3 => pade_low(m, &B3),
                5 => pade_low(m, &B5),
                7 => pade_low(m, &B7),
                _ => pade_low(m, &B9),
            };
        }
    }
    let s = (nrm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = m / 2f64.powi(s);
    let mut e = pade13(&scaled);
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// `(e^Z, φ₁(Z), φ₂(Z))` from one exponential of the augmented block matrix
/// `[[Z, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn phi_functions(z: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = z.nrows();
    let mut aug = DMatrix::<f64>::zeros(3 * n, 3 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(z);
    for i in 0..n {
        aug[(i, n + i)] = 1.0;
        aug[(n + i, 2 * n + i)] = 1.0;
    }
    let e = expm(&aug);
    (
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
        e.view((0, 2 * n), (n, n)).into_owned(),
    )
}
