//! Mild solutions of `u' = -λ A u + λ F(t, u, μ)` through the Duhamel formula,
//! the translation operator `Φ_t`, and flow-regularity estimates.
//!
//! Two parameters are kept apart: `lambda` rescales time in the whole equation
//! (the averaging family) while `mu` is handed to the nonlinearity as a
//! homotopy parameter.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::degree::Region;
use crate::linops::{expm::phi_functions, LinearOperator};
use crate::sampling;
use crate::{Error, Result};

/// `F(t, x, μ)`.
pub type Nonlinearity = Arc<dyn Fn(f64, &DVector<f64>, f64) -> DVector<f64> + Send + Sync>;

/// Norm above which a trajectory is declared to have blown up.
pub const BLOW_UP_NORM: f64 = 1e12;
/// Largest admissible `h λ L_F`.
pub const STEP_GUARD: f64 = 0.5;

/// One instance of `u' = -A u + F(t, u)` with its structural constants.
///
/// `lipschitz`, `growth` and `bound` are declared constants; they hold on the
/// ball of radius `sample_radius` (weighted norm) when that is set and on the
/// whole space otherwise. [`crate::problems::check_hypotheses`] falsifies them
/// by sampling.
#[derive(Clone)]
pub struct SemilinearProblem {
    pub name: String,
    pub operator: Arc<LinearOperator>,
    pub nonlinearity: Nonlinearity,
    pub period: f64,
    pub lipschitz: f64,
    pub growth: f64,
    pub bound: Option<f64>,
    /// `F(0, ·, μ) = F(T, ·, μ)`.
    pub periodic: bool,
    /// `F` does not depend on `t`.
    pub autonomous: bool,
    pub sample_radius: Option<f64>,
}

impl fmt::Debug for SemilinearProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("omega", &self.operator.omega())
            .field("period", &self.period)
            .field("lipschitz", &self.lipschitz)
            .field("growth", &self.growth)
            .field("bound", &self.bound)
            .field("periodic", &self.periodic)
            .field("autonomous", &self.autonomous)
            .finish()
    }
}

impl SemilinearProblem {
    /// A problem with all constants zeroed; set them with the builder methods.
    pub fn new(
        name: impl Into<String>,
        operator: LinearOperator,
        nonlinearity: Nonlinearity,
        period: f64,
    ) -> Self {
        Self {
            name: name.into(),
            operator: Arc::new(operator),
            nonlinearity,
            period,
            lipschitz: 0.0,
            growth: 0.0,
            bound: None,
            periodic: true,
            autonomous: false,
            sample_radius: None,
        }
    }

    pub fn lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn growth(mut self, c: f64) -> Self {
        self.growth = c;
        self
    }

    pub fn bound(mut self, k: f64) -> Self {
        self.bound = Some(k);
        self
    }

    pub fn autonomous(mut self, yes: bool) -> Self {
        self.autonomous = yes;
        if yes {
            self.periodic = true;
        }
        self
    }

    pub fn periodic(mut self, yes: bool) -> Self {
        self.periodic = yes;
        self
    }

    pub fn sample_radius(mut self, r: f64) -> Self {
        self.sample_radius = Some(r);
        self
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn omega(&self) -> f64 {
        self.operator.omega()
    }

    pub fn eval(&self, t: f64, x: &DVector<f64>, mu: f64) -> DVector<f64> {
        (self.nonlinearity)(t, x, mu)
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.operator.norm(x)
    }

    /// `-A x + F(t, x, μ)`.
    pub fn vector_field(&self, t: f64, x: &DVector<f64>, mu: f64) -> DVector<f64> {
        self.eval(t, x, mu) - self.operator.apply(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Bound on the relative Duhamel defect per step.
    pub tolerance: f64,
    /// Steps per period for the first refinement level.
    pub steps_per_period: usize,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            steps_per_period: 256,
            min_steps: 8,
            max_steps: 1 << 16,
        }
    }
}

impl IntegratorOptions {
    fn initial_steps(&self, horizon: f64, period: f64) -> usize {
        let per = (self.steps_per_period as f64 * horizon / period).ceil();
        (per as usize).clamp(self.min_steps, self.max_steps)
    }
}

/// Sampled mild solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Largest relative one-step defect against two half steps.
    pub residual: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Trajectory {
    pub fn initial_state(&self) -> &DVector<f64> {
        &self.states[0]
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Gronwall a priori bound `sup_t ‖u(t)‖_E` for this trajectory's initial
    /// state, horizon and parameters.
    pub fn apriori_bound(&self, problem: &SemilinearProblem) -> f64 {
        let horizon = *self.times.last().expect("nonempty");
        let x0 = problem.norm(self.initial_state());
        let growth_rate = (-problem.omega()).max(0.0) * self.lambda;
        let lc = self.lambda * problem.growth;
        let semigroup = (growth_rate * horizon).exp();
        semigroup * (x0 + lc * horizon) * (lc * semigroup * horizon).exp()
    }

    /// CSV with header `t,x_1,...,x_n` and shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x_{i}"));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:?}"));
            for v in s.iter() {
                out.push_str(&format!(",{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the CSV written by [`Trajectory::to_csv`]. Residual and
    /// parameters are not stored in the file and come back as zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t")
            || cols
                .iter()
                .skip(1)
                .enumerate()
                .any(|(i, c)| *c != format!("x_{}", i + 1))
        {
            return Err(Error::Parse(format!("line 1: bad CSV header {header:?}")));
        }
        let n = cols.len() - 1;
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (i, line) in lines {
            let values = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad number {c:?}", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != n + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns",
                    i + 1,
                    n + 1
                )));
            }
            times.push(values[0]);
            states.push(DVector::from_row_slice(&values[1..]));
        }
        if times.is_empty() {
            return Err(Error::Parse("CSV has no rows".into()));
        }
        Ok(Self {
            times,
            states,
            residual: 0.0,
            lambda: 0.0,
            mu: 0.0,
        })
    }
}

/// One ETD2 step `u ↦ u'` of size `h` for `L = -λA`, `N = λF`:
///
/// ```text
/// a  = e^{hL} u + h φ₁(hL) N(t, u)
/// u' = a + h φ₂(hL) (N(t + h, a) − N(t, u))
/// ```
#[derive(Debug, Clone)]
struct Stepper {
    h: f64,
    lambda: f64,
    propagator: DMatrix<f64>,
    hphi1: DMatrix<f64>,
    hphi2: DMatrix<f64>,
}

impl Stepper {
    fn new(op: &LinearOperator, h: f64, lambda: f64) -> Self {
        let z = op.matrix() * (-h * lambda);
        let (e, p1, p2) = phi_functions(&z);
        Self {
            h,
            lambda,
            propagator: e,
            hphi1: p1 * h,
            hphi2: p2 * h,
        }
    }

    fn step(&self, problem: &SemilinearProblem, t: f64, u: &DVector<f64>, mu: f64) -> DVector<f64> {
        if self.lambda == 0.0 {
            return u.clone();
        }
        let n0 = problem.eval(t, u, mu) * self.lambda;
        let a = &self.propagator * u + &self.hphi1 * &n0;
        let n1 = problem.eval(t + self.h, &a, mu) * self.lambda;
        &a + &self.hphi2 * (n1 - n0)
    }
}

/// The translation operator `Φ_t(·) = u(t; 0, ·)` at fixed horizon, time scale
/// and homotopy parameter, with a fixed step count and cached propagators.
#[derive(Debug, Clone)]
pub struct Flow {
    problem: SemilinearProblem,
    horizon: f64,
    lambda: f64,
    mu: f64,
    steps: usize,
    coarse: Stepper,
    fine: Stepper,
}

impl Flow {
    pub fn with_steps(
        problem: &SemilinearProblem,
        horizon: f64,
        lambda: f64,
        mu: f64,
        steps: usize,
    ) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon must be finite and nonnegative, got {horizon}"
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("mu must lie in [0, 1], got {mu}")));
        }
        if steps == 0 {
            return Err(Error::Config("step count must be positive".into()));
        }
        let h = horizon / steps as f64;
        if h * lambda * problem.lipschitz > STEP_GUARD {
            return Err(Error::Config(format!(
                "step guard violated: h λ L_F = {:.3} > {STEP_GUARD} (h = {h:e}, {steps} steps)",
                h * lambda * problem.lipschitz
            )));
        }
        Ok(Self {
            problem: problem.clone(),
            horizon,
            lambda,
            mu,
            steps,
            coarse: Stepper::new(&problem.operator, h, lambda),
            fine: Stepper::new(&problem.operator, 0.5 * h, lambda),
        })
    }

    /// Doubles the step count from the default until every probe trajectory
    /// meets `opts.tolerance`.
    pub fn calibrated(
        problem: &SemilinearProblem,
        horizon: f64,
        lambda: f64,
        mu: f64,
        probes: &[DVector<f64>],
        opts: &IntegratorOptions,
    ) -> Result<Self> {
        let mut steps = opts.initial_steps(horizon, problem.period);
        // respect the step guard before the first attempt
        let guard = horizon * lambda * problem.lipschitz / STEP_GUARD;
        while (steps as f64) < guard && steps < opts.max_steps {
            steps *= 2;
        }
        loop {
            let flow = Self::with_steps(problem, horizon, lambda, mu, steps)?;
            let mut worst = 0.0f64;
            for x in probes {
                worst = worst.max(flow.trajectory(x)?.residual);
            }
            if worst <= opts.tolerance {
                return Ok(flow);
            }
            if steps * 2 > opts.max_steps {
                return Err(Error::Refinement {
                    tolerance: opts.tolerance,
                    residual: worst,
                    max_steps: opts.max_steps,
                });
            }
            steps *= 2;
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn problem(&self) -> &SemilinearProblem {
        &self.problem
    }

    fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.problem.dim() {
            return Err(Error::Domain(format!(
                "state has length {}, problem dimension is {}",
                x.len(),
                self.problem.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial state has non-finite entries".into()));
        }
        Ok(())
    }

    fn guard(&self, t: f64, u: &DVector<f64>) -> Result<()> {
        let norm = self.problem.norm(u);
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            return Err(Error::BlowUp { time: t, norm });
        }
        Ok(())
    }

    /// `Φ_t(x)` without defect bookkeeping.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_state(x)?;
        if self.horizon == 0.0 {
            return Ok(x.clone());
        }
        let h = self.coarse.h;
        let mut u = x.clone();
        for k in 0..self.steps {
            let t = k as f64 * h;
            u = self.coarse.step(&self.problem, t, &u, self.mu);
            self.guard(t + h, &u)?;
        }
        Ok(u)
    }

    /// Full trajectory with the Duhamel defect of each step measured against
    /// two half steps.
    pub fn trajectory(&self, x: &DVector<f64>) -> Result<Trajectory> {
        self.check_state(x)?;
        let h = self.coarse.h;
        let mut times = Vec::with_capacity(self.steps + 1);
        let mut states = Vec::with_capacity(self.steps + 1);
        times.push(0.0);
        states.push(x.clone());
        let mut residual = 0.0f64;
        if self.horizon > 0.0 {
            for k in 0..self.steps {
                let t = k as f64 * h;
                let u = states.last().expect("nonempty");
                let next = self.coarse.step(&self.problem, t, u, self.mu);
                self.guard(t + h, &next)?;
                let mid = self.fine.step(&self.problem, t, u, self.mu);
                let fine = self.fine.step(&self.problem, t + 0.5 * h, &mid, self.mu);
                let defect = self.problem.norm(&(&next - &fine)) / (1.0 + self.problem.norm(&next));
                residual = residual.max(defect);
                times.push(if k + 1 == self.steps {
                    self.horizon
                } else {
                    t + h
                });
                states.push(next);
            }
        }
        Ok(Trajectory {
            times,
            states,
            residual,
            lambda: self.lambda,
            mu: self.mu,
        })
    }
}

/// Fixed-step mild solution over `[0, horizon]`.
pub fn integrate_mild(
    problem: &SemilinearProblem,
    x0: &DVector<f64>,
    horizon: f64,
    lambda: f64,
    mu: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Flow::with_steps(problem, horizon, lambda, mu, steps)?.trajectory(x0)
}

/// Mild solution with the step count doubled until the residual meets the
/// tolerance.
pub fn integrate_refined(
    problem: &SemilinearProblem,
    x0: &DVector<f64>,
    horizon: f64,
    lambda: f64,
    mu: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let flow = Flow::calibrated(problem, horizon, lambda, mu, std::slice::from_ref(x0), opts)?;
    flow.trajectory(x0)
}

/// `Φ_t(x)`, integrated with the default refinement policy.
pub fn translate(
    problem: &SemilinearProblem,
    t: f64,
    x: &DVector<f64>,
    lambda: f64,
    mu: f64,
) -> Result<DVector<f64>> {
    if t == 0.0 {
        if x.len() != problem.dim() {
            return Err(Error::Domain("state length does not match problem".into()));
        }
        return Ok(x.clone());
    }
    Ok(
        integrate_refined(problem, x, t, lambda, mu, &IntegratorOptions::default())?
            .final_state()
            .clone(),
    )
}

/// Horizon `ρ / (4K)` on which trajectories started in `V̄` stay within
/// `V̄ + B(0, ρ/2)` when `‖-Ax + F(x)‖ ≤ K` there.
pub fn local_existence_horizon(bound: f64, rho: f64) -> Result<f64> {
    if !(bound > 0.0) || !(rho > 0.0) || !bound.is_finite() || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "horizon needs positive K and rho, got K = {bound}, rho = {rho}"
        )));
    }
    Ok(rho / (4.0 * bound))
}

/// Largest sampled quotient `‖Φ_t(x) − Φ_t(y)‖_E / ‖x − y‖_E` over `pairs`
/// random pairs in the region; half the pairs are close (`y` a small
/// perturbation of `x`). The exact flow satisfies the Gronwall bound
/// `e^{λ (L_F − ω) t}`.
pub fn flow_lipschitz_estimate(
    problem: &SemilinearProblem,
    t: f64,
    region: &Region,
    pairs: usize,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::Domain("need at least one sample pair".into()));
    }
    if region.dim() != problem.dim() {
        return Err(Error::Domain(
            "region dimension does not match problem".into(),
        ));
    }
    if t == 0.0 || lambda == 0.0 {
        return Ok(1.0);
    }
    let flow = Flow::calibrated(
        problem,
        t,
        lambda,
        mu,
        &[region.center()],
        &IntegratorOptions::default(),
    )?;
    let mut rng = sampling::rng(sampling::DEFAULT_SEED);
    let mut worst = 0.0f64;
    for k in 0..pairs {
        let x = region.sample_interior(&mut rng);
        let y = if k % 2 == 0 {
            region.sample_interior(&mut rng)
        } else {
            let dir = sampling::unit_direction(&mut rng, x.len());
            let eps = 1e-3 * region.diameter() * rng.gen_range(0.1..1.0);
            &x + dir * eps
        };
        let gap = problem.norm(&(&x - &y));
        if gap <= 0.0 {
            continue;
        }
        let q = problem.norm(&(flow.apply(&x)? - flow.apply(&y)?)) / gap;
        worst = worst.max(q);
    }
    Ok(worst)
}

/// The Gronwall rate `e^{λ (L_F − ω) t}` bounding the flow's Lipschitz constant.
pub fn flow_lipschitz_bound(problem: &SemilinearProblem, t: f64, lambda: f64) -> f64 {
    (lambda * (problem.lipschitz - problem.omega()) * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn scalar(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
    ) -> SemilinearProblem {
        SemilinearProblem::new(
            "scalar",
            LinearOperator::new(DMatrix::identity(1, 1)).unwrap(),
            Arc::new(move |t, x, mu| DVector::from_element(1, mu * f(t, x[0]))),
            1.0,
        )
        .lipschitz(lipschitz)
    }

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn homogeneous_linear_flow() {
        let p = problems::identity(2);
        let tr = integrate_mild(&p, &dv(&[1.0, 0.0]), 1.0, 1.0, 1.0, 16).unwrap();
        assert!((tr.final_state()[0] - (-1f64).exp()).abs() < 1e-14);
        assert_eq!(tr.final_state()[1], 0.0);
        assert_eq!(tr.times[0], 0.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn zero_lambda_freezes_the_state() {
        let p = problems::cubic_2d();
        let x0 = dv(&[0.3, -0.7]);
        let tr = integrate_mild(&p, &x0, 2.0, 0.0, 1.0, 10).unwrap();
        assert!(tr.states.iter().all(|s| *s == x0));
    }

    #[test]
    fn constant_forcing_closed_form() {
        let p = problems::scalar_linear();
        let exact = 1.0 - (-1f64).exp();
        let tr = integrate_refined(
            &p,
            &dv(&[0.0]),
            1.0,
            1.0,
            1.0,
            &IntegratorOptions::default(),
        )
        .unwrap();
        assert!((tr.final_state()[0] - exact).abs() < 1e-8);
        assert!(tr.residual <= 1e-8);
        assert!((translate(&p, 1.0, &dv(&[0.0]), 1.0, 1.0).unwrap()[0] - exact).abs() < 1e-8);
    }

    #[test]
    fn translate_at_zero_is_identity() {
        let p = problems::cubic_2d();
        let x = dv(&[0.1, 0.2]);
        assert_eq!(translate(&p, 0.0, &x, 1.0, 1.0).unwrap(), x);
    }

    #[test]
    fn semiflow_law() {
        let p = scalar(|_, u| 0.5 * u.sin() + 0.3, 0.5).autonomous(true);
        let x = dv(&[1.7]);
        let (s, t) = (0.4, 0.9);
        let direct = translate(&p, s + t, &x, 1.0, 1.0).unwrap();
        let composed =
            translate(&p, s, &translate(&p, t, &x, 1.0, 1.0).unwrap(), 1.0, 1.0).unwrap();
        assert!((direct - composed).amax() < 1e-7);
    }

    #[test]
    fn second_order_against_richardson_reference() {
        let p = scalar(|t, u| 0.5 * u.sin() + (3.0 * t).cos(), 0.5);
        let x0 = dv(&[0.2]);
        let run = |n| {
            integrate_mild(&p, &x0, 2.0, 1.0, 1.0, n)
                .unwrap()
                .final_state()[0]
        };
        let (a, b) = (run(4096), run(8192));
        let reference = b + (b - a) / 3.0;
        // coarser grids are still pre-asymptotic (ratio 2.95 at n = 32)
        for n in [128, 256, 512] {
            let ratio = (run(n) - reference).abs() / (run(2 * n) - reference).abs();
            assert!((3.5..=4.5).contains(&ratio), "n={n}: {ratio}");
        }
    }

    #[test]
    fn horizon_formula() {
        assert_eq!(local_existence_horizon(1.0, 4.0).unwrap(), 1.0);
        assert_eq!(local_existence_horizon(2.0, 2.0).unwrap(), 0.25);
        assert!(
            local_existence_horizon(1.0, 1e-3).unwrap()
                < local_existence_horizon(1.0, 1e-2).unwrap()
        );
        assert!(matches!(
            local_existence_horizon(0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            local_existence_horizon(1.0, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn flow_lipschitz_examples() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let lin = problems::identity(2);
        let e = flow_lipschitz_estimate(&lin, 1.0, &ball, 50, 1.0, 1.0).unwrap();
        assert!(e <= (-1f64).exp() + 1e-6);
        assert_eq!(
            flow_lipschitz_estimate(&lin, 1.0, &ball, 50, 0.0, 1.0).unwrap(),
            1.0
        );

        let p = scalar(|_, u| 0.5 * u.sin(), 0.5).autonomous(true);
        let interval = Region::cube(vec![-3.0], vec![3.0]).unwrap();
        let e = flow_lipschitz_estimate(&p, 1.0, &interval, 400, 1.0, 1.0).unwrap();
        assert!(e <= (-0.5f64).exp() + 1e-6, "{e}");
        assert!(e > (-1.5f64).exp());
    }

    #[test]
    fn step_guard_and_blow_up() {
        let stiff = scalar(|_, u| 10.0 * u.sin(), 10.0);
        assert!(matches!(
            integrate_mild(&stiff, &dv(&[1.0]), 1.0, 1.0, 1.0, 4),
            Err(Error::Config(_))
        ));
        let explosive = scalar(|_, u| 10.0 * u * u, 0.0);
        match integrate_mild(&explosive, &dv(&[1.0]), 1.0, 1.0, 1.0, 2000) {
            Err(Error::BlowUp { time, norm }) => {
                assert!(time > 0.0 && time < 1.0);
                assert!(norm > BLOW_UP_NORM || !norm.is_finite());
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
        let p = problems::scalar_linear();
        assert!(matches!(
            integrate_mild(&p, &dv(&[f64::NAN]), 1.0, 1.0, 1.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(integrate_mild(&p, &dv(&[0.0]), 1.0, 1.0, 2.0, 4).is_err());
    }

    #[test]
    fn apriori_bound_holds() {
        let p = problems::heat_1d(8).unwrap();
        let x0 = DVector::from_fn(8, |i, _| (i as f64 - 3.5) * 0.4);
        let tr = integrate_refined(&p, &x0, 3.0, 1.0, 1.0, &IntegratorOptions::default()).unwrap();
        let bound = tr.apriori_bound(&p);
        assert!(tr.states.iter().all(|s| p.norm(s) <= bound + 1e-6));
    }

    #[test]
    fn csv_round_trip() {
        let p = problems::cubic_2d();
        let tr = integrate_mild(&p, &dv(&[0.3, -0.1]), 1.0, 1.0, 1.0, 64).unwrap();
        let text = tr.to_csv();
        assert!(text.starts_with("t,x_1,x_2\n"));
        let back = Trajectory::from_csv(&text).unwrap();
        assert_eq!(back.times.len(), tr.times.len());
        for (a, b) in back.states.iter().zip(&tr.states) {
            assert!((a - b).amax() <= 1e-12);
        }
    }

    #[test]
    fn calibration_doubles_until_tolerance() {
        let p = scalar(|t, u| 0.5 * u.sin() + (20.0 * t).cos(), 0.5);
        let opts = IntegratorOptions {
            steps_per_period: 8,
            ..IntegratorOptions::default()
        };
        let flow = Flow::calibrated(&p, 1.0, 1.0, 1.0, &[dv(&[0.0])], &opts).unwrap();
        assert!(flow.steps() > 8);
        assert!(flow.trajectory(&dv(&[0.0])).unwrap().residual <= 1e-8);
        let tight = IntegratorOptions {
            tolerance: 1e-30,
            max_steps: 64,
            ..opts
        };
        assert!(matches!(
            Flow::calibrated(&p, 1.0, 1.0, 1.0, &[dv(&[0.0])], &tight),
            Err(Error::Refinement { .. })
        ));
    }
}
