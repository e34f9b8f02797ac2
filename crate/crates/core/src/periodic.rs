//! Degree formulas for the translation operator and the search for
//! `T`-periodic solutions.
//!
//! Both formula harnesses compare an integer computed from the flow,
//! `deg(I − Φ, V)`, with the static degree `Deg(−A + F, V)` of the generator.
//! Equality is exact; any uncertified degree turns the verdict into a failure.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{average_field, averaged_problem_with, DEFAULT_NODES};
use crate::degree::{
    brouwer_degree, degree_resolvent, fd_jacobian, DegreeOptions, DegreeResult, Region,
};
use crate::evolve::{
    local_existence_horizon, Flow, IntegratorOptions, SemilinearProblem, Trajectory,
};
use crate::sampling;
use crate::{Error, Result};

/// Label carried by boundary scans: sampling can refute the boundary
/// hypothesis but never prove it.
pub const SCAN_LABEL: &str = "falsification scan";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inadmissible,
}

/// Which identity a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `deg(I − Φ_t, V) = Deg(−A + F, V)` for small `t`.
    KrasnoselskiiFormula,
    /// `deg(I − Φ_T^λ, U) = Deg(−A + F̂, U)` for small `λ`.
    AveragingFormula,
    /// Periodic solution in `Ū` when the degree is nonzero.
    ContinuationPrinciple,
    /// Periodic points collapse onto zeros of `−A + F̂` as `λ → 0⁺`.
    BranchingPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaReport {
    pub theorem: Claim,
    /// `t` values or `λ` values.
    pub schedule: Vec<f64>,
    /// `deg(I − Φ)` per schedule entry; `None` where it could not be computed.
    pub degrees_flow: Vec<Option<i64>>,
    /// `min ‖Φ(x) − x‖` over the sampled boundary per entry.
    pub margins: Vec<Option<f64>>,
    pub degree_static: Option<i64>,
    pub static_margin: Option<f64>,
    pub verdict: Verdict,
    /// Parameter at which a boundary fixed point was detected.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inadmissible_at: Option<f64>,
    /// Whether `F` was replaced by its time average.
    pub averaged: bool,
    pub nu: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessOptions {
    pub degree: DegreeOptions,
    pub integrator: IntegratorOptions,
    pub averaging_nodes: usize,
    /// Boundary points used as integrator probes during step calibration.
    pub probes: usize,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            degree: DegreeOptions::default(),
            integrator: IntegratorOptions::default(),
            averaging_nodes: DEFAULT_NODES,
            probes: 4,
        }
    }
}

/// `2^{-j}`, `j = 2, …, 7`.
pub fn default_lambda_schedule() -> Vec<f64> {
    (2..=7).map(|j| 2f64.powi(-j)).collect()
}

/// `t̄ 2^{-j}`, `j = 0, …, 4`.
pub fn default_t_schedule(t_bar: f64) -> Vec<f64> {
    (0..=4).map(|j| t_bar * 2f64.powi(-j)).collect()
}

/// `sup ‖−Ax‖ + ‖F(x)‖` over the safety region (the region inflated by two),
/// sampled on its boundary and interior.
pub fn safety_bound(problem: &SemilinearProblem, region: &Region) -> f64 {
    let safety = region.scaled(2.0);
    let mut rng = sampling::rng(sampling::DEFAULT_SEED);
    let mut pts = safety.boundary_points(8);
    pts.extend((0..256).map(|_| safety.sample_interior(&mut rng)));
    pts.par_iter()
        .map(|x| {
            problem.norm(&problem.operator.apply(x)) + problem.norm(&problem.eval(0.0, x, 1.0))
        })
        .reduce(|| 0.0, f64::max)
}

/// The anchor `t̄ = ρ / (4K)` with `ρ` the inradius of `region` (its distance
/// to the safety region) and `K` from [`safety_bound`].
pub fn horizon_anchor(problem: &SemilinearProblem, region: &Region) -> Result<f64> {
    local_existence_horizon(safety_bound(problem, region), region.inradius())
}

fn check_dims(problem: &SemilinearProblem, region: &Region) -> Result<()> {
    if problem.dim() != region.dim() {
        return Err(Error::Domain(format!(
            "region has dimension {}, problem has {}",
            region.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

fn check_schedule(schedule: &[f64], what: &str) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Domain(format!("{what} schedule is empty")));
    }
    if schedule.iter().any(|v| !(v.is_finite() && *v > 0.0))
        || schedule.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::Domain(format!(
            "{what} schedule must be positive and strictly decreasing"
        )));
    }
    Ok(())
}

fn probes(region: &Region, count: usize) -> Vec<DVector<f64>> {
    let mut out = vec![region.center()];
    let boundary = region.boundary_points(1);
    let stride = (boundary.len() / count.max(1)).max(1);
    out.extend(boundary.into_iter().step_by(stride).take(count));
    out
}

/// Static side: `Deg(−A + F̂, U)` through the resolvent reduction.
pub fn static_degree(
    problem: &SemilinearProblem,
    region: &Region,
    nu: f64,
    opts: &HarnessOptions,
) -> Result<DegreeResult> {
    check_dims(problem, region)?;
    if problem.autonomous {
        let f = |x: &DVector<f64>| problem.eval(0.0, x, 1.0);
        degree_resolvent(&problem.operator, &f, region, nu, &opts.degree)
    } else {
        let avg = average_field(problem, opts.averaging_nodes);
        let f = |x: &DVector<f64>| avg.eval(x, 1.0);
        degree_resolvent(&problem.operator, &f, region, nu, &opts.degree)
    }
}

struct Side {
    degree: Option<i64>,
    margin: Option<f64>,
    error: Option<Error>,
}

fn flow_side(flow: &Flow, region: &Region, opts: &DegreeOptions) -> Side {
    let field = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(x - flow.apply(x)?) };
    match brouwer_degree(&field, region, opts) {
        Ok(r) => Side {
            degree: Some(r.value),
            margin: Some(r.boundary_margin),
            error: None,
        },
        Err(e) => Side {
            degree: None,
            margin: None,
            error: Some(e),
        },
    }
}

fn assemble(
    theorem: Claim,
    schedule: &[f64],
    sides: Vec<Side>,
    static_side: Result<DegreeResult>,
    averaged: bool,
    nu: f64,
) -> FormulaReport {
    let mut diagnostics = Vec::new();
    let mut verdict = Verdict::Pass;
    let mut inadmissible_at = None;
    let (degree_static, static_margin) = match static_side {
        Ok(r) => (Some(r.value), Some(r.boundary_margin)),
        Err(e) => {
            verdict = if e.is_inadmissible() {
                Verdict::Inadmissible
            } else {
                Verdict::Fail
            };
            diagnostics.push(format!("static degree: {e}"));
            (None, None)
        }
    };
    let mut degrees_flow = Vec::with_capacity(sides.len());
    let mut margins = Vec::with_capacity(sides.len());
    for (&p, side) in schedule.iter().zip(sides) {
        if let Some(e) = side.error {
            if e.is_inadmissible() {
                if inadmissible_at.is_none() {
                    inadmissible_at = Some(p);
                }
                verdict = Verdict::Inadmissible;
            } else if verdict == Verdict::Pass {
                verdict = Verdict::Fail;
            }
            diagnostics.push(format!("flow degree at {p:e}: {e}"));
        } else if side.degree != degree_static && verdict == Verdict::Pass {
            verdict = Verdict::Fail;
            diagnostics.push(format!(
                "flow degree {:?} at {p:e} differs from static degree {:?}",
                side.degree, degree_static
            ));
        }
        degrees_flow.push(side.degree);
        margins.push(side.margin);
    }
    FormulaReport {
        theorem,
        schedule: schedule.to_vec(),
        degrees_flow,
        margins,
        degree_static,
        static_margin,
        verdict,
        inadmissible_at,
        averaged,
        nu,
        diagnostics,
    }
}

/// Compares `deg(I − Φ_t, V)` with `Deg(−A + F, V)` along `t_schedule`
/// (default `t̄ 2^{-j}`, see [`horizon_anchor`]). Non-autonomous problems must
/// be averaged first.
pub fn verify_krasnoselskii(
    problem: &SemilinearProblem,
    region: &Region,
    t_schedule: Option<&[f64]>,
    nu: f64,
    opts: &HarnessOptions,
) -> Result<FormulaReport> {
    check_dims(problem, region)?;
    if !problem.autonomous {
        return Err(Error::Domain(format!(
            "problem {} is not autonomous; average it first",
            problem.name
        )));
    }
    let schedule = match t_schedule {
        Some(s) => s.to_vec(),
        None => default_t_schedule(horizon_anchor(problem, region)?),
    };
    check_schedule(&schedule, "t")?;
    let static_side = static_degree(problem, region, nu, opts);
    let probe = probes(region, opts.probes);
    let sides: Vec<Side> = schedule
        .par_iter()
        .map(
            |&t| match Flow::calibrated(problem, t, 1.0, 1.0, &probe, &opts.integrator) {
                Ok(flow) => flow_side(&flow, region, &opts.degree),
                Err(e) => Side {
                    degree: None,
                    margin: None,
                    error: Some(e),
                },
            },
        )
        .collect();
    Ok(assemble(
        Claim::KrasnoselskiiFormula,
        &schedule,
        sides,
        static_side,
        false,
        nu,
    ))
}

/// Compares `deg(I − Φ_T^λ, U)` with `Deg(−A + F̂, U)` along `lambda_schedule`
/// (default `2^{-2}, …, 2^{-7}`).
pub fn verify_averaging(
    problem: &SemilinearProblem,
    region: &Region,
    lambda_schedule: Option<&[f64]>,
    nu: f64,
    opts: &HarnessOptions,
) -> Result<FormulaReport> {
    check_dims(problem, region)?;
    if !problem.periodic {
        return Err(Error::Domain(format!(
            "problem {} is not marked periodic",
            problem.name
        )));
    }
    let schedule = lambda_schedule.map_or_else(default_lambda_schedule, <[f64]>::to_vec);
    check_schedule(&schedule, "lambda")?;
    let static_side = static_degree(problem, region, nu, opts);
    let probe = probes(region, opts.probes);
    let sides: Vec<Side> = schedule
        .par_iter()
        .map(|&lambda| {
            match Flow::calibrated(
                problem,
                problem.period,
                lambda,
                1.0,
                &probe,
                &opts.integrator,
            ) {
                Ok(flow) => flow_side(&flow, region, &opts.degree),
                Err(e) => Side {
                    degree: None,
                    margin: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    Ok(assemble(
        Claim::AveragingFormula,
        &schedule,
        sides,
        static_side,
        !problem.autonomous,
        nu,
    ))
}

/// Krasnosel'skii harness applied to the averaged problem `−A + F̂`.
pub fn verify_krasnoselskii_averaged(
    problem: &SemilinearProblem,
    region: &Region,
    t_schedule: Option<&[f64]>,
    nu: f64,
    opts: &HarnessOptions,
) -> Result<FormulaReport> {
    let averaged = averaged_problem_with(problem, opts.averaging_nodes);
    let mut report = verify_krasnoselskii(&averaged, region, t_schedule, nu, opts)?;
    report.averaged = !problem.autonomous;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub label: String,
    pub min_defect: f64,
    pub argmin_state: Vec<f64>,
    pub argmin_lambda: f64,
    pub threshold: f64,
    /// A boundary point with `Φ_T^λ(x) ≈ x` was found.
    pub flagged: bool,
    pub samples: usize,
    pub lambda_grid: Vec<f64>,
}

/// Samples `min ‖Φ_T^λ(x) − x‖` over `∂U × lambda_grid`. The flag is raised
/// when the minimum drops below `10^{-6} (1 + max ‖x‖)`. A clean scan is
/// evidence, not proof, that no periodic point sits on the boundary.
pub fn scan_boundary_periodic_points(
    problem: &SemilinearProblem,
    region: &Region,
    lambda_grid: &[f64],
    boundary_samples: usize,
    opts: &HarnessOptions,
) -> Result<ScanReport> {
    check_dims(problem, region)?;
    if !problem.periodic {
        return Err(Error::Domain(format!(
            "problem {} is not marked periodic",
            problem.name
        )));
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return Err(Error::Domain(
            "lambda grid must be nonempty within (0, 1]".into(),
        ));
    }
    if boundary_samples == 0 {
        return Err(Error::Domain("need at least one boundary sample".into()));
    }
    let n = region.dim();
    let density = boundary_samples.div_ceil(2 * n * n).max(1);
    let mut pts = region.boundary_points(density);
    if pts.len() > boundary_samples {
        let stride = pts.len() as f64 / boundary_samples as f64;
        pts = (0..boundary_samples)
            .map(|k| pts[(k as f64 * stride) as usize].clone())
            .collect();
    }
    let probe = probes(region, opts.probes);
    let scale = pts.iter().map(|x| problem.norm(x)).fold(0.0, f64::max);
    let threshold = 1e-6 * (1.0 + scale);
    let mut best = (f64::INFINITY, DVector::zeros(n), lambda_grid[0]);
    for &lambda in lambda_grid {
        let flow = Flow::calibrated(
            problem,
            problem.period,
            lambda,
            1.0,
            &probe,
            &opts.integrator,
        )?;
        let defects = pts
            .par_iter()
            .map(|x| Ok(problem.norm(&(flow.apply(x)? - x))))
            .collect::<Result<Vec<f64>>>()?;
        for (x, d) in pts.iter().zip(defects) {
            if d < best.0 {
                best = (d, x.clone(), lambda);
            }
        }
    }
    Ok(ScanReport {
        label: SCAN_LABEL.into(),
        min_defect: best.0,
        argmin_state: best.1.iter().copied().collect(),
        argmin_lambda: best.2,
        threshold,
        flagged: best.0 <= threshold,
        samples: pts.len(),
        lambda_grid: lambda_grid.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Picard,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOptions {
    pub harness: HarnessOptions,
    /// Integrator tolerance for the period map used by the solver.
    pub tolerance: f64,
    /// Solver stopping defect `‖Φ_T(x) − x‖`.
    pub target_defect: f64,
    /// Picard is used when `e^{λ (L_F − ω) T}` is at most this.
    pub picard_rate: f64,
    pub newton_starts: usize,
    pub newton_max_iter: usize,
    /// Boundary scan run before solving; `None` skips it.
    pub scan: Option<(Vec<f64>, usize)>,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            harness: HarnessOptions::default(),
            tolerance: 1e-11,
            target_defect: 1e-10,
            picard_rate: 0.5,
            newton_starts: 16,
            newton_max_iter: 40,
            scan: Some((vec![0.25, 0.5, 0.75, 1.0], 256)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSolution {
    pub theorem: Claim,
    pub initial_state: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
    /// `‖u(T) − u(0)‖_E`.
    pub closure_defect: f64,
    pub degree_certificate: DegreeResult,
    pub solver: Solver,
    pub iterations: usize,
    /// Solver defects, one per iterate.
    pub defect_history: Vec<f64>,
    /// `e^{λ (L_F − ω) T}`.
    pub contraction_rate: f64,
    /// Largest ratio of consecutive Picard defects above round-off.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub observed_rate: Option<f64>,
    pub steps: usize,
    pub residual: f64,
    /// `‖Φ_T(x) − x‖_E` with the step count doubled.
    pub reintegration_defect: f64,
    pub state_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub norm_bound: Option<f64>,
    pub norm_bound_ok: bool,
    pub in_region: bool,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scan: Option<ScanReport>,
}

/// Outcome of one fixed-point solve of the period map.
struct FixedPoint {
    state: DVector<f64>,
    defect: f64,
    solver: Solver,
    iterations: usize,
    history: Vec<f64>,
    observed_rate: Option<f64>,
}

fn picard(flow: &Flow, start: &DVector<f64>, rate: f64, target: f64) -> Result<FixedPoint> {
    let problem = flow.problem();
    let mut x = start.clone();
    let mut history = Vec::new();
    let budget = 20
        + (target.ln() / rate.max(1e-300).ln())
            .abs()
            .ceil()
            .min(2000.0) as usize;
    let mut observed: Option<f64> = None;
    for k in 0..budget {
        let next = flow.apply(&x)?;
        let d = problem.norm(&(&next - &x));
        if let Some(&prev) = history.last() {
            // ratios below round-off say nothing about the contraction
            if prev > 1e3 * target {
                let r = d / prev;
                observed = Some(observed.map_or(r, |o: f64| o.max(r)));
            }
        }
        history.push(d);
        x = next;
        if d <= target {
            let defect = problem.norm(&(flow.apply(&x)? - &x));
            return Ok(FixedPoint {
                state: x,
                defect,
                solver: Solver::Picard,
                iterations: k + 1,
                history,
                observed_rate: observed,
            });
        }
    }
    Err(Error::NotFound {
        best_defect: history.last().copied().unwrap_or(f64::INFINITY),
    })
}

fn newton(
    flow: &Flow,
    starts: &[DVector<f64>],
    target: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    let problem = flow.problem();
    let g = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(x - flow.apply(x)?) };
    let mut best: Option<FixedPoint> = None;
    for start in starts {
        let mut x = start.clone();
        let mut gx = match g(&x) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let mut d = problem.norm(&gx);
        let mut history = vec![d];
        let mut iters = 0;
        while d > target && iters < max_iter {
            iters += 1;
            let jac = match fd_jacobian(&g, &x) {
                Ok(j) => j,
                Err(_) => break,
            };
            let Some(step) = jac.lu().solve(&gx) else {
                break;
            };
            let mut damping = 1.0;
            let mut moved = false;
            while damping > 1e-4 {
                let trial = &x - &step * damping;
                if let Ok(gt) = g(&trial) {
                    let dt = problem.norm(&gt);
                    if dt < d {
                        x = trial;
                        gx = gt;
                        d = dt;
                        moved = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            history.push(d);
            if !moved {
                break;
            }
        }
        let better = best.as_ref().is_none_or(|b| d < b.defect);
        if better {
            best = Some(FixedPoint {
                state: x,
                defect: d,
                solver: Solver::Newton,
                iterations: iters,
                history,
                observed_rate: None,
            });
        }
        if d <= target {
            break;
        }
    }
    match best {
        Some(b) if b.defect <= target => Ok(b),
        Some(b) => Err(Error::NotFound {
            best_defect: b.defect,
        }),
        None => Err(Error::NotFound {
            best_defect: f64::INFINITY,
        }),
    }
}

fn solve_period_map(
    flow: &Flow,
    starts: &[DVector<f64>],
    rate: f64,
    opts: &PeriodicOptions,
) -> Result<FixedPoint> {
    if rate <= opts.picard_rate {
        picard(flow, &starts[0], rate, opts.target_defect)
    } else {
        newton(flow, starts, opts.target_defect, opts.newton_max_iter)
    }
}

fn calibrated_period_map(
    problem: &SemilinearProblem,
    lambda: f64,
    probes: &[DVector<f64>],
    opts: &PeriodicOptions,
) -> Result<Flow> {
    let integrator = IntegratorOptions {
        tolerance: opts.tolerance,
        ..opts.harness.integrator
    };
    Flow::calibrated(problem, problem.period, lambda, 1.0, probes, &integrator)
}

/// Finds `x` with `Φ_T^λ(x) = x` in the region, certified by a nonzero
/// `Deg(−A + F̂, U)`.
pub fn find_periodic_at(
    problem: &SemilinearProblem,
    region: &Region,
    lambda: f64,
    nu: f64,
    opts: &PeriodicOptions,
) -> Result<PeriodicSolution> {
    check_dims(problem, region)?;
    if !problem.periodic {
        return Err(Error::Domain(format!(
            "problem {} is not marked periodic",
            problem.name
        )));
    }
    let scan = match &opts.scan {
        Some((grid, samples)) => {
            let report =
                scan_boundary_periodic_points(problem, region, grid, *samples, &opts.harness)?;
            if report.flagged {
                return Err(Error::BoundaryPeriodicPoint {
                    defect: report.min_defect,
                    lambda: report.argmin_lambda,
                });
            }
            Some(report)
        }
        None => None,
    };
    let certificate = static_degree(problem, region, nu, &opts.harness)?;
    if certificate.value == 0 {
        return Err(Error::NoCertificate);
    }
    let rate = (lambda * (problem.lipschitz - problem.omega()) * problem.period).exp();
    let mut starts = region.seeds(opts.newton_starts.max(1));
    // the zero of the averaged field is the natural first guess
    if let Some(z) = certificate.zeros.first() {
        starts.insert(0, DVector::from_vec(z.location.clone()));
    }
    let mut flow = calibrated_period_map(problem, lambda, &starts[..1], opts)?;
    let mut fp = solve_period_map(&flow, &starts, rate, opts)?;
    let mut trajectory = flow.trajectory(&fp.state)?;
    if trajectory.residual > opts.tolerance {
        flow = calibrated_period_map(problem, lambda, std::slice::from_ref(&fp.state), opts)?;
        fp = solve_period_map(&flow, &[fp.state.clone()], rate, opts)?;
        trajectory = flow.trajectory(&fp.state)?;
    }
    finish(
        problem,
        region,
        lambda,
        flow,
        fp,
        trajectory,
        rate,
        certificate,
        scan,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &SemilinearProblem,
    region: &Region,
    lambda: f64,
    flow: Flow,
    fp: FixedPoint,
    trajectory: Trajectory,
    rate: f64,
    certificate: DegreeResult,
    scan: Option<ScanReport>,
) -> Result<PeriodicSolution> {
    let x = &fp.state;
    let state_norm = problem.norm(x);
    let closure_defect = problem.norm(&(trajectory.final_state() - x));
    if closure_defect > 1e-8 * (1.0 + state_norm) {
        return Err(Error::NotFound {
            best_defect: closure_defect,
        });
    }
    let fine = Flow::with_steps(problem, problem.period, lambda, 1.0, 2 * flow.steps())?;
    let reintegration_defect = problem.norm(&(fine.apply(x)? - x));
    let norm_bound = problem.bound.map(|k| k / problem.omega());
    Ok(PeriodicSolution {
        theorem: Claim::ContinuationPrinciple,
        initial_state: x.iter().copied().collect(),
        closure_defect,
        degree_certificate: certificate,
        solver: fp.solver,
        iterations: fp.iterations,
        defect_history: fp.history,
        contraction_rate: rate,
        observed_rate: fp.observed_rate,
        steps: flow.steps(),
        residual: trajectory.residual,
        reintegration_defect,
        state_norm,
        norm_bound,
        norm_bound_ok: norm_bound.is_none_or(|b| state_norm <= b + 1e-6),
        in_region: region.contains(x) || region.excess(x) == 0.0,
        lambda,
        scan,
        trajectory: Some(trajectory),
    })
}

/// [`find_periodic_at`] for the unscaled problem (`λ = 1`).
pub fn find_periodic(
    problem: &SemilinearProblem,
    region: &Region,
    nu: f64,
    opts: &PeriodicOptions,
) -> Result<PeriodicSolution> {
    find_periodic_at(problem, region, 1.0, nu, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub state: Vec<f64>,
    /// `‖−Ax + F̂(x)‖_E`.
    pub residual: f64,
    pub closure_defect: f64,
    pub solver: Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingReport {
    pub theorem: Claim,
    pub points: Vec<BranchPoint>,
    /// Residuals non-increasing along the schedule up to 10% slack.
    pub monotone: bool,
    /// Final residual at most `10^{-4} (initial residual + 1)`.
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lost_at: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Follows `T`-periodic points of the `λ`-scaled problem as `λ → 0⁺` and
/// records the averaged-field residual along the way.
pub fn track_branching(
    problem: &SemilinearProblem,
    region: &Region,
    lambda_schedule: Option<&[f64]>,
    opts: &PeriodicOptions,
) -> Result<BranchingReport> {
    check_dims(problem, region)?;
    if !problem.periodic {
        return Err(Error::Domain(format!(
            "problem {} is not marked periodic",
            problem.name
        )));
    }
    let schedule = lambda_schedule.map_or_else(default_lambda_schedule, <[f64]>::to_vec);
    check_schedule(&schedule, "lambda")?;
    let avg = average_field(problem, opts.harness.averaging_nodes);
    let residual = |x: &DVector<f64>| problem.norm(&(avg.eval(x, 1.0) - problem.operator.apply(x)));
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut lost_at = None;
    let seeds = region.seeds(opts.newton_starts.max(1));
    for &lambda in &schedule {
        let mut starts = Vec::new();
        if let Some(p) = points.last() {
            starts.push(DVector::from_vec(p.state.clone()));
        }
        starts.extend(seeds.iter().cloned());
        let rate = (lambda * (problem.lipschitz - problem.omega()) * problem.period).exp();
        let attempt = calibrated_period_map(problem, lambda, &starts[..1], opts)
            .and_then(|flow| solve_period_map(&flow, &starts, rate, opts));
        match attempt {
            Ok(fp) => {
                points.push(BranchPoint {
                    lambda,
                    residual: residual(&fp.state),
                    state: fp.state.iter().copied().collect(),
                    closure_defect: fp.defect,
                    solver: fp.solver,
                });
            }
            Err(e) => {
                diagnostics.push(format!("fixed point lost at lambda = {lambda:e}: {e}"));
                lost_at = Some(lambda);
                break;
            }
        }
    }
    let monotone = points
        .windows(2)
        .all(|w| w[1].residual <= 1.1 * w[0].residual + 1e-14);
    let converged = lost_at.is_none()
        && match (points.first(), points.last()) {
            (Some(a), Some(b)) => b.residual <= 1e-4 * (a.residual + 1.0),
            _ => false,
        };
    Ok(BranchingReport {
        theorem: Claim::BranchingPoints,
        points,
        monotone,
        converged,
        lost_at,
        diagnostics,
    })
}
