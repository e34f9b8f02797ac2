//! Time averages `F̂(x) = (1/T) ∫₀ᵀ F(t, x) dt` of periodic nonlinearities by
//! composite Gauss–Legendre quadrature.

use std::sync::Arc;

use nalgebra::DVector;

use crate::evolve::SemilinearProblem;

/// Nodes per Gauss–Legendre panel.
pub const PANEL_NODES: usize = 8;
/// Default total node count (8 panels of 8 nodes).
pub const DEFAULT_NODES: usize = 64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule on `[0, T]` with weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRule {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MeanRule {
    pub fn new(period: f64, nodes: usize) -> Self {
        let (panels, per) = if nodes <= PANEL_NODES {
            (1, nodes.max(1))
        } else {
            (nodes.div_ceil(PANEL_NODES), PANEL_NODES)
        };
        let (x, w) = gauss_legendre(per);
        let width = period / panels as f64;
        let mut times = Vec::with_capacity(panels * per);
        let mut weights = Vec::with_capacity(panels * per);
        for p in 0..panels {
            let a = p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                times.push(a + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * wi / panels as f64);
            }
        }
        Self { times, weights }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `F̂` as an evaluator, carrying its quadrature metadata.
#[derive(Debug, Clone)]
pub struct AveragedField {
    problem: SemilinearProblem,
    rule: MeanRule,
    /// `‖F̂_N(0) − F̂_{2N}(0)‖` at the probe point `x = 0`, `μ = 1`.
    pub error_estimate: f64,
}

impl AveragedField {
    pub fn eval(&self, x: &DVector<f64>, mu: f64) -> DVector<f64> {
        average_with(&self.problem, &self.rule, x, mu)
    }

    pub fn nodes(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &MeanRule {
        &self.rule
    }
}

fn average_with(
    problem: &SemilinearProblem,
    rule: &MeanRule,
    x: &DVector<f64>,
    mu: f64,
) -> DVector<f64> {
    let mut acc = DVector::zeros(x.len());
    for (t, w) in rule.times.iter().zip(&rule.weights) {
        acc.axpy(*w, &problem.eval(*t, x, mu), 1.0);
    }
    acc
}

/// Quadrature of `(1/T) ∫₀ᵀ F(t, x, μ) dt` with `nodes ≥ 2` nodes.
pub fn average_field(problem: &SemilinearProblem, nodes: usize) -> AveragedField {
    let nodes = nodes.max(2);
    let rule = MeanRule::new(problem.period, nodes);
    let fine = MeanRule::new(problem.period, 2 * nodes);
    let probe = DVector::zeros(problem.dim());
    let error_estimate = (average_with(problem, &rule, &probe, 1.0)
        - average_with(problem, &fine, &probe, 1.0))
    .norm();
    AveragedField {
        problem: problem.clone(),
        rule,
        error_estimate,
    }
}

/// The autonomous problem `u' = -A u + F̂(u)`. Lipschitz, growth and bound
/// constants carry over since averaging cannot increase uniform-in-time
/// constants. Autonomous inputs are returned unchanged.
pub fn averaged_problem(problem: &SemilinearProblem) -> SemilinearProblem {
    averaged_problem_with(problem, DEFAULT_NODES)
}

pub fn averaged_problem_with(problem: &SemilinearProblem, nodes: usize) -> SemilinearProblem {
    if problem.autonomous {
        return problem.clone();
    }
    let field = Arc::new(average_field(problem, nodes));
    let mut out = problem.clone();
    out.name = format!("{}-averaged", problem.name);
    out.nonlinearity = Arc::new(move |_t, x, mu| field.eval(x, mu));
    out.autonomous = true;
    out.periodic = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg + 1) as f64
                };
                assert!((q - exact).abs() < 1e-14, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn mean_rule_weights_sum_to_one() {
        for nodes in [2, 5, 8, 64, 100] {
            let r = MeanRule::new(3.0, nodes);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(r.times.iter().all(|t| (0.0..3.0).contains(t)));
        }
    }
}
