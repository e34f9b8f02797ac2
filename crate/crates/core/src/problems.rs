//! Built-in problems and hypothesis checkers.
//!
//! The transmission line
//!
//! ```text
//! I_t + α V_x + β I = f(t, x, I, V)
//! V_t + γ I_x + δ V = g(t, x, I, V)
//! V(t, 0) + ρ I(t, 0) = 0
//! −I(t, l) + σ V_t(t, l) + h(V(t, l) + e(t)) + j(t) = 0
//! ```
//!
//! is written for `u = (p, q, r) = (I, V, V(·, l))` and discretized by upwind
//! differences in the characteristic variables `w± = √γ p ± √α q` on `n` cells.
//! Both boundary conditions enter through ghost values, so the discrete
//! operator satisfies `⟨Au, u⟩_E ≥ min{β, δ, a/σ} ‖u‖²_E` exactly in the
//! weighted product `γ⟨p, p⟩ + α⟨q, q⟩ + αγσ r²`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::evolve::{Nonlinearity, SemilinearProblem};
use crate::linops::LinearOperator;
use crate::sampling;
use crate::{Error, Result};

pub type PointForcing = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const PRESETS: [&str; 6] = [
    "txline-default",
    "heat-1d",
    "scalar-linear",
    "scalar-forced",
    "cubic-2d",
    "identity",
];

/// Sampled pairs used by [`check_hypotheses`].
pub const HYPOTHESIS_SAMPLES: usize = 10_000;
/// Sampling radius for problems whose constants are global.
pub const GLOBAL_SAMPLE_RADIUS: f64 = 1e3;

#[derive(Clone)]
pub struct TransmissionLineParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub rho: f64,
    pub sigma: f64,
    /// Line length.
    pub l: f64,
    /// `|h(s) − a s| ≤ b`.
    pub a: f64,
    pub b: f64,
    pub lip_f: f64,
    pub lip_g: f64,
    pub lip_h: f64,
    pub period: f64,
    /// Spatial cells.
    pub n: usize,
    /// `f(t, x, p, q)`.
    pub f: PointForcing,
    pub g: PointForcing,
    pub h: ScalarFn,
    pub e: ScalarFn,
    pub j: ScalarFn,
    /// Declared suprema of `|f|`, `|g|`, `|e|`, `|j|`.
    pub f_sup: f64,
    pub g_sup: f64,
    pub e_sup: f64,
    pub j_sup: f64,
}

impl std::fmt::Debug for TransmissionLineParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransmissionLineParams")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("delta", &self.delta)
            .field("rho", &self.rho)
            .field("sigma", &self.sigma)
            .field("l", &self.l)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("lip_f", &self.lip_f)
            .field("lip_g", &self.lip_g)
            .field("lip_h", &self.lip_h)
            .field("period", &self.period)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl Default for TransmissionLineParams {
    /// The `txline-default` constants. With `σ = 0.1`, `a = 0.12`,
    /// `h(s) = 0.12 s + 0.02 tanh s` (so `b = 0.02`, `L_h = 0.14`) and
    /// `L_f = L_g = 0.3` the contraction terms are `(0.18, 0.18, 0.68)`,
    /// below `min{β, δ}² = 1`.
    fn default() -> Self {
        let zero: PointForcing = Arc::new(|_, _, _, _| 0.0);
        let flat: ScalarFn = Arc::new(|_| 0.0);
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            rho: 1.0,
            sigma: 0.1,
            l: 1.0,
            a: 0.12,
            b: 0.02,
            lip_f: 0.3,
            lip_g: 0.3,
            lip_h: 0.14,
            period: TAU,
            n: 16,
            f: zero.clone(),
            g: zero,
            h: flat.clone(),
            e: flat.clone(),
            j: flat,
            f_sup: 0.0,
            g_sup: 0.0,
            e_sup: 0.0,
            j_sup: 0.0,
        }
        .standard_forcing()
    }
}

impl TransmissionLineParams {
    /// Replaces the forcing terms by the standard family built from the
    /// current constants:
    ///
    /// ```text
    /// f = L_f tanh((p + q)/√2) + 0.5 cos(ωt) sin(πx/l) + 0.2
    /// g = L_g sin((p − q)/√2) + 0.3 sin(ωt)
    /// h(s) = a s + b tanh s,  e = 0.1 sin(ωt),  j = 0.1 cos(ωt)
    /// ```
    ///
    /// with `ω = 2π/T`, and sets `L_h = a + b` and the matching suprema.
    pub fn standard_forcing(mut self) -> Self {
        let (a, b, lf, lg, l) = (self.a, self.b, self.lip_f, self.lip_g, self.l);
        let w = TAU / self.period;
        self.f = Arc::new(move |t, x, p, q| {
            lf * ((p + q) / 2f64.sqrt()).tanh() + 0.5 * (w * t).cos() * (PI * x / l).sin() + 0.2
        });
        self.g =
            Arc::new(move |t, _x, p, q| lg * ((p - q) / 2f64.sqrt()).sin() + 0.3 * (w * t).sin());
        self.h = Arc::new(move |s| a * s + b * s.tanh());
        self.e = Arc::new(move |t| 0.1 * (w * t).sin());
        self.j = Arc::new(move |t| 0.1 * (w * t).cos());
        self.lip_h = a + b.abs();
        self.f_sup = lf + 0.7;
        self.g_sup = lg + 0.3;
        self.e_sup = 0.1;
        self.j_sup = 0.1;
        self
    }

    pub fn with_cells(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn min_damping(&self) -> f64 {
        self.beta.min(self.delta)
    }

    /// The three terms whose maximum must stay below `min{β, δ}²`, with names.
    pub fn contraction_terms(&self) -> [(&'static str, f64); 3] {
        let (lf2, lg2) = (self.lip_f.powi(2), self.lip_g.powi(2));
        [
            (
                "L_f^2 + alpha*L_g^2/gamma",
                lf2 + self.alpha * lg2 / self.gamma,
            ),
            (
                "gamma*L_f^2/alpha + L_g^2",
                self.gamma * lf2 / self.alpha + lg2,
            ),
            (
                "2*(a^2 + L_h^2)/sigma",
                2.0 * (self.a.powi(2) + self.lip_h.powi(2)) / self.sigma,
            ),
        ]
    }

    /// `sqrt` of the largest contraction term: the declared Lipschitz constant
    /// of the nonlinearity in the weighted norm.
    pub fn lipschitz(&self) -> f64 {
        self.contraction_terms()
            .iter()
            .map(|t| t.1)
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Bound of the scalar component, `σ^{-1}(b + a max|e| + max|j|)`.
    pub fn boundary_bound(&self) -> f64 {
        (self.b + self.a * self.e_sup + self.j_sup) / self.sigma
    }

    /// `sup ‖F‖_E`.
    pub fn bound(&self) -> f64 {
        let s = self.boundary_bound();
        (self.gamma * self.l * self.f_sup.powi(2)
            + self.alpha * self.l * self.g_sup.powi(2)
            + self.alpha * self.gamma * self.sigma * s * s)
            .sqrt()
    }

    /// Cell-center abscissae.
    pub fn grid(&self) -> Vec<f64> {
        let hx = self.l / self.n as f64;
        (0..self.n).map(|i| (i as f64 + 0.5) * hx).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub name: String,
    pub passed: bool,
    /// Computed quantity (left-hand side).
    pub value: f64,
    /// Limit it is compared against (right-hand side).
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub problem: String,
    pub entries: Vec<HypothesisEntry>,
    pub all_passed: bool,
}

impl HypothesisReport {
    fn new(problem: impl Into<String>, entries: Vec<HypothesisEntry>) -> Self {
        let all_passed = entries.iter().all(|e| e.passed);
        Self {
            problem: problem.into(),
            entries,
            all_passed,
        }
    }

    pub fn entry(&self, name: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

fn entry(
    name: &str,
    passed: bool,
    value: f64,
    limit: f64,
    detail: impl Into<String>,
) -> HypothesisEntry {
    HypothesisEntry {
        name: name.into(),
        passed,
        value,
        limit,
        detail: detail.into(),
    }
}

/// Checks the structural inequalities of a transmission-line parameter set.
pub fn check_params(params: &TransmissionLineParams) -> HypothesisReport {
    let mut entries = Vec::new();
    let positive = [
        params.alpha,
        params.beta,
        params.gamma,
        params.delta,
        params.rho,
        params.sigma,
        params.l,
        params.period,
    ];
    entries.push(entry(
        "positive-constants",
        positive.iter().all(|v| *v > 0.0) && params.b >= 0.0 && params.n >= 2,
        positive.iter().copied().fold(f64::INFINITY, f64::min),
        0.0,
        "alpha, beta, gamma, delta, rho, sigma, l, T > 0; b >= 0; n >= 2",
    ));

    let s_max = 1e3;
    let samples = HYPOTHESIS_SAMPLES;
    let worst = (0..=samples)
        .map(|k| {
            let s = -s_max + 2.0 * s_max * k as f64 / samples as f64;
            ((params.h)(s) - params.a * s).abs()
        })
        .fold(0.0, f64::max);
    entries.push(entry(
        "example-1",
        worst <= params.b + 1e-12,
        worst,
        params.b,
        format!("sup |h(s) - a s| over s in [-{s_max}, {s_max}]"),
    ));

    let terms = params.contraction_terms();
    let (name, max_term) =
        terms.iter().copied().fold(
            ("", f64::NEG_INFINITY),
            |acc, t| if t.1 > acc.1 { t } else { acc },
        );
    let rhs = params.min_damping().powi(2);
    entries.push(entry(
        "example-2",
        max_term < rhs,
        max_term,
        rhs,
        format!("max term {name} = {max_term} vs min(beta, delta)^2 = {rhs}"),
    ));

    let floor = params.sigma * params.min_damping();
    entries.push(entry(
        "a-vs-sigma",
        params.a > floor,
        params.a,
        floor,
        "a > sigma * min(beta, delta)",
    ));
    HypothesisReport::new("transmission-line parameters", entries)
}

/// `-A` applied to `u = (p, q, r)`.
fn transmission_generator(params: &TransmissionLineParams, u: &DVector<f64>) -> DVector<f64> {
    let n = params.n;
    let hx = params.l / n as f64;
    let (sg, sa) = (params.gamma.sqrt(), params.alpha.sqrt());
    let c = (params.alpha * params.gamma).sqrt();
    let reflect = (sg - params.rho * sa) / (sg + params.rho * sa);
    let p = u.rows(0, n);
    let q = u.rows(n, n);
    let r = u[2 * n];
    let wp: Vec<f64> = (0..n).map(|i| sg * p[i] + sa * q[i]).collect();
    let wm: Vec<f64> = (0..n).map(|i| sg * p[i] - sa * q[i]).collect();
    // ghost values carry the boundary conditions
    let inflow_left = reflect * wm[0];
    let inflow_right = wp[n - 1] - 2.0 * sa * r;
    let mut out = DVector::zeros(2 * n + 1);
    for i in 0..n {
        let left = if i == 0 { inflow_left } else { wp[i - 1] };
        let right = if i + 1 == n { inflow_right } else { wm[i + 1] };
        let dwp = -c * (wp[i] - left) / hx;
        let dwm = c * (right - wm[i]) / hx;
        out[i] = (dwp + dwm) / (2.0 * sg) - params.beta * p[i];
        out[n + i] = (dwp - dwm) / (2.0 * sa) - params.delta * q[i];
    }
    let p_end = (wp[n - 1] - sa * r) / sg;
    out[2 * n] = (p_end - params.a * r) / params.sigma;
    out
}

/// Discrete transmission-line operator `A` and its weight matrix.
pub fn transmission_operator(params: &TransmissionLineParams) -> Result<LinearOperator> {
    let dim = 2 * params.n + 1;
    let mut a = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        a.set_column(k, &(-transmission_generator(params, &e)));
    }
    let hx = params.l / params.n as f64;
    let weight = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        if i < params.n {
            params.gamma * hx
        } else if i < 2 * params.n {
            params.alpha * hx
        } else {
            params.alpha * params.gamma * params.sigma
        }
    }));
    LinearOperator::with_weight(a, weight)
}

/// Builds the discretized transmission line; fails with the name of the first
/// violated inequality.
pub fn build_transmission_line(params: &TransmissionLineParams) -> Result<SemilinearProblem> {
    let report = check_params(params);
    if let Some(bad) = report.failures().next() {
        return Err(Error::Hypothesis(format!(
            "{} violated: {}",
            bad.name, bad.detail
        )));
    }
    assemble(params)
}

fn assemble(params: &TransmissionLineParams) -> Result<SemilinearProblem> {
    let op = transmission_operator(params)?;
    let n = params.n;
    let grid = params.grid();
    let p = params.clone();
    let nonlinearity: Nonlinearity = Arc::new(move |t, u, mu| {
        let mut out = DVector::zeros(2 * n + 1);
        for (i, &x) in grid.iter().enumerate() {
            out[i] = mu * (p.f)(t, x, u[i], u[n + i]);
            out[n + i] = mu * (p.g)(t, x, u[i], u[n + i]);
        }
        let r = u[2 * n];
        out[2 * n] = mu * (p.a * r - (p.h)(r + (p.e)(t)) - (p.j)(t)) / p.sigma;
        out
    });
    let bound = params.bound();
    Ok(
        SemilinearProblem::new(format!("txline-n{n}"), op, nonlinearity, params.period)
            .lipschitz(params.lipschitz())
            .growth(bound)
            .bound(bound),
    )
}

/// Reference decay constants of the discrete Dirichlet Laplacian on `(0, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatConstants {
    /// Smallest eigenvalue of the `n`-point second-difference matrix.
    pub omega_discrete: f64,
    /// `π² / l²`.
    pub omega_continuum: f64,
    /// `4 / d²` for a strip `|x| ≤ d`, `d = l / 2`.
    pub omega_strip_constant: f64,
}

pub fn heat_constants(l: f64, n: usize) -> HeatConstants {
    let m = (n + 1) as f64;
    let d = 0.5 * l;
    HeatConstants {
        omega_discrete: 4.0 * m * m / (l * l) * (PI / (2.0 * m)).sin().powi(2),
        omega_continuum: PI * PI / (l * l),
        omega_strip_constant: 4.0 / (d * d),
    }
}

/// Dirichlet Laplacian `A = −Δ` on `n` interior points of `(0, l)` (spacing
/// `l / (n + 1)`), discrete `L²` weight, and the given nonlinearity. Constants
/// are left at zero for the caller to set.
pub fn build_heat_strip(
    l: f64,
    n: usize,
    nonlinearity: Nonlinearity,
    period: f64,
) -> Result<SemilinearProblem> {
    if n == 0 || !(l > 0.0) {
        return Err(Error::Domain("heat strip needs n >= 1 and l > 0".into()));
    }
    let h = l / (n + 1) as f64;
    let a = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / (h * h),
        1 => -1.0 / (h * h),
        _ => 0.0,
    });
    let op = LinearOperator::with_weight(a, DMatrix::identity(n, n) * h)?;
    Ok(SemilinearProblem::new(
        format!("heat-n{n}"),
        op,
        nonlinearity,
        period,
    ))
}

/// `heat-1d`: `F(t, u)_i = 0.1 tanh(u_i) + (1 + 0.5 cos(2πt/T)) sin(π x_i / l)`
/// with `l = 1`, `T = 1`.
pub fn heat_1d(n: usize) -> Result<SemilinearProblem> {
    let l = 1.0;
    let period = 1.0;
    let h = l / (n + 1) as f64;
    let xs: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let source_norm = (xs.iter().map(|x| (PI * x / l).sin().powi(2)).sum::<f64>() * h).sqrt();
    let nl: Nonlinearity = Arc::new(move |t, u, mu| {
        let amp = 1.0 + 0.5 * (TAU * t / period).cos();
        DVector::from_fn(u.len(), |i, _| {
            mu * (0.1 * u[i].tanh() + amp * (PI * xs[i] / l).sin())
        })
    });
    let bound = 0.1 * l.sqrt() + 1.5 * source_norm;
    Ok(build_heat_strip(l, n, nl, period)?
        .lipschitz(0.1)
        .growth(bound)
        .bound(bound))
}

fn scalar_op() -> LinearOperator {
    LinearOperator::new(DMatrix::identity(1, 1)).expect("1x1 identity")
}

/// `u' = -u + 1`.
pub fn scalar_linear() -> SemilinearProblem {
    SemilinearProblem::new(
        "scalar-linear",
        scalar_op(),
        Arc::new(|_t, _x, mu| DVector::from_element(1, mu)),
        1.0,
    )
    .autonomous(true)
    .growth(1.0)
    .bound(1.0)
}

/// `u' = -u + 1 + cos(2πt/T)` with `T = 1/2`. The cosine phase makes the
/// periodic point of the `λ`-scaled problem approach the averaged zero at
/// second order in `λ`.
pub fn scalar_forced() -> SemilinearProblem {
    scalar_periodic("scalar-forced", 0.5, |w, t| (w * t).cos())
}

/// `u' = -u + 1 + sin(2πt/T)`.
pub fn scalar_sine_forced(period: f64) -> SemilinearProblem {
    scalar_periodic("scalar-sine", period, |w, t| (w * t).sin())
}

fn scalar_periodic(name: &str, period: f64, wave: fn(f64, f64) -> f64) -> SemilinearProblem {
    let w = TAU / period;
    SemilinearProblem::new(
        name,
        scalar_op(),
        Arc::new(move |t, _x, mu| DVector::from_element(1, mu * (1.0 + wave(w, t)))),
        period,
    )
    .growth(2.0)
    .bound(2.0)
}

/// `u' = -u + (2u₁ − u₁³, 0)`: equilibria `(−1, 0)`, `(0, 0)`, `(1, 0)` with
/// indices `+1, −1, +1`. Constants hold on the ball of radius 2.
pub fn cubic_2d() -> SemilinearProblem {
    SemilinearProblem::new(
        "cubic-2d",
        LinearOperator::new(DMatrix::identity(2, 2)).expect("identity"),
        Arc::new(|_t, x, mu| DVector::from_vec(vec![mu * (2.0 * x[0] - x[0].powi(3)), 0.0])),
        1.0,
    )
    .autonomous(true)
    .lipschitz(10.0)
    .growth(4.0 / 3.0)
    .bound(4.0)
    .sample_radius(2.0)
}

/// `u' = -u` in `R^dim`.
pub fn identity(dim: usize) -> SemilinearProblem {
    SemilinearProblem::new(
        format!("identity-{dim}"),
        LinearOperator::new(DMatrix::identity(dim, dim)).expect("identity"),
        Arc::new(|_t, x, _mu| DVector::zeros(x.len())),
        1.0,
    )
    .autonomous(true)
    .bound(0.0)
}

/// Looks up a built-in preset by name.
pub fn preset(name: &str) -> Result<SemilinearProblem> {
    match name {
        "txline-default" => build_transmission_line(&TransmissionLineParams::default()),
        "heat-1d" => heat_1d(16),
        "scalar-linear" => Ok(scalar_linear()),
        "scalar-forced" => Ok(scalar_forced()),
        "cubic-2d" => Ok(cubic_2d()),
        "identity" => Ok(identity(2)),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; known presets: {}",
            PRESETS.join(", ")
        ))),
    }
}

fn sample_ball<R: Rng>(problem: &SemilinearProblem, rng: &mut R, radius: f64) -> DVector<f64> {
    let n = problem.dim();
    let dir = sampling::unit_direction(rng, n);
    let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
    // map a Euclidean sphere point onto the weighted sphere
    let y = dir * r;
    problem
        .operator
        .weight_factor()
        .transpose()
        .solve_upper_triangular(&y)
        .expect("positive Cholesky diagonal")
}

/// Falsification checks of `(H1)`, `(H2)`, the Lipschitz surrogate for
/// `(H3b)`, the bound `K` and periodicity, by sampling `10⁴` pairs with the
/// fixed seed `0x5EED`.
pub fn check_hypotheses(problem: &SemilinearProblem) -> HypothesisReport {
    check_hypotheses_seeded(problem, sampling::DEFAULT_SEED)
}

pub fn check_hypotheses_seeded(problem: &SemilinearProblem, seed: u64) -> HypothesisReport {
    let mut rng = sampling::rng(seed);
    let radius = problem.sample_radius.unwrap_or(GLOBAL_SAMPLE_RADIUS);
    let omega = problem.omega();
    let mut lip = 0.0f64;
    let mut growth = 0.0f64;
    let mut sup = 0.0f64;
    for k in 0..HYPOTHESIS_SAMPLES {
        let t = rng.gen::<f64>() * problem.period;
        let mu = rng.gen::<f64>();
        let x = sample_ball(problem, &mut rng, radius);
        let y = if k % 2 == 0 {
            sample_ball(problem, &mut rng, radius)
        } else {
            let scale = radius * 10f64.powf(-rng.gen_range(2.0..6.0));
            let d = sample_ball(problem, &mut rng, scale);
            &x + d
        };
        let fx = problem.eval(t, &x, mu);
        let fy = problem.eval(t, &y, mu);
        let gap = problem.norm(&(&x - &y));
        if gap > 0.0 {
            lip = lip.max(problem.norm(&(&fx - &fy)) / gap);
        }
        let nf = problem.norm(&fx);
        growth = growth.max(nf / (1.0 + problem.norm(&x)));
        sup = sup.max(nf);
    }
    let tol = 1e-8;
    let mut entries = vec![
        entry(
            "H1",
            omega > 0.0,
            omega,
            0.0,
            "decay rate omega > 0 (log-norm certificate)",
        ),
        entry(
            "H2",
            growth <= problem.growth + tol,
            growth,
            problem.growth,
            "sampled ||F(t,x)|| / (1 + ||x||) <= c",
        ),
        entry(
            "lipschitz",
            lip <= problem.lipschitz + tol,
            lip,
            problem.lipschitz,
            "sampled Lipschitz quotient <= declared L_F",
        ),
        entry(
            "H3b",
            problem.lipschitz < omega,
            problem.lipschitz,
            omega,
            "declared L_F < omega",
        ),
    ];
    if let Some(k) = problem.bound {
        entries.push(entry(
            "bound",
            sup <= k + tol,
            sup,
            k,
            "sampled sup ||F|| <= K",
        ));
    }
    if problem.periodic {
        let mut gap = 0.0f64;
        for _ in 0..100 {
            let x = sample_ball(problem, &mut rng, radius);
            let mu = rng.gen::<f64>();
            gap = gap.max(
                problem.norm(&(problem.eval(0.0, &x, mu) - problem.eval(problem.period, &x, mu))),
            );
        }
        entries.push(entry(
            "periodic",
            gap <= 1e-10 * (1.0 + sup),
            gap,
            1e-10 * (1.0 + sup),
            "||F(0,x) - F(T,x)||",
        ));
    }
    HypothesisReport::new(problem.name.clone(), entries)
}

/// Parameter inequalities plus the sampled problem checks. The sampled part
/// runs even when an inequality fails, as long as the operator can be built.
pub fn check_transmission_line(params: &TransmissionLineParams) -> HypothesisReport {
    let mut report = check_params(params);
    match assemble(params) {
        Ok(problem) => {
            report.entries.extend(check_hypotheses(&problem).entries);
            report.problem = problem.name;
        }
        Err(e) => report
            .entries
            .push(entry("operator", false, 0.0, 0.0, e.to_string())),
    }
    report.all_passed = report.entries.iter().all(|e| e.passed);
    report
}
