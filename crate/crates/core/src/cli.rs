//! Batch front end: loads a TOML run configuration, dispatches one command
//! and writes `report.json`, `meta.json` and, where a trajectory exists,
//! `trajectory.csv` into the output directory.
//!
//! Exit status: 0 pass or found, 1 fail or not found (diagnostics in the
//! report), 2 configuration or admissibility error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::degree::{DegreeOptions, Region};
use crate::evolve::{
    integrate_mild, integrate_refined, IntegratorOptions, Nonlinearity, SemilinearProblem,
};
use crate::linops::{parse_matrix, LinearOperator};
use crate::periodic::{
    find_periodic, scan_boundary_periodic_points, static_degree, track_branching, verify_averaging,
    verify_krasnoselskii, verify_krasnoselskii_averaged, HarnessOptions, PeriodicOptions, Verdict,
};
use crate::problems::{self, TransmissionLineParams};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Error = 2,
}

#[derive(Parser, Debug)]
#[command(
    name = "semideg",
    version,
    about = "Degree and periodic-solution toolkit for u' = -Au + F(t, u)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fixed step count (integrate) or steps per period (other commands).
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Integrate one mild solution.
    Integrate,
    /// Deg(-A + F, U) through the resolvent reduction.
    Degree,
    /// deg(I - Φ_t, V) against Deg(-A + F, V).
    VerifyFormula,
    /// deg(I - Φ_T^λ, U) against Deg(-A + F̂, U).
    VerifyAveraging,
    /// Search the boundary for periodic points.
    ScanBoundary,
    /// Find a T-periodic solution.
    FindPeriodic,
    /// Track periodic points as λ → 0.
    Branching,
    /// Sampled hypothesis checks.
    CheckHypotheses,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Degree => "degree",
            Command::VerifyFormula => "verify-formula",
            Command::VerifyAveraging => "verify-averaging",
            Command::ScanBoundary => "scan-boundary",
            Command::FindPeriodic => "find-periodic",
            Command::Branching => "branching",
            Command::CheckHypotheses => "check-hypotheses",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub schedules: Schedules,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrate: Option<IntegrateConfig>,
}

fn default_nu() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("semideg-out")
}

fn default_seed() -> u64 {
    crate::sampling::DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Built-in preset name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Grid size for `txline-default` and `heat-1d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    /// Matrix file for an inline problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Transmission-line constants; forcing terms follow the standard family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission_line: Option<TxlineConfig>,
}

/// Inline nonlinearities, all scaled by the homotopy parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Zero,
    /// `F = c`.
    Constant {
        value: Vec<f64>,
    },
    /// `F_i = s tanh(x_i) + c_i`.
    Tanh {
        scale: f64,
        offset: Vec<f64>,
    },
    /// `F = c + a sin(2πt/T)`.
    SineForcing {
        constant: Vec<f64>,
        amplitude: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TxlineConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub l: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lip_f: Option<f64>,
    pub lip_g: Option<f64>,
    pub period: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionConfig {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        /// Measure the radius in the operator's weighted norm.
        #[serde(default)]
        weighted: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Schedules {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub integrator: f64,
    pub degree_margin: f64,
    pub closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrator: 1e-8,
            degree_margin: 1e-6,
            closure: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateConfig {
    pub x0: Vec<f64>,
    /// Defaults to the period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn preset(name: &str) -> Self {
        Self {
            problem: ProblemConfig {
                preset: Some(name.into()),
                cells: None,
                operator: None,
                weight: None,
                nonlinearity: None,
                period: None,
                transmission_line: None,
            },
            region: None,
            schedules: Schedules::default(),
            nu: default_nu(),
            tolerances: Tolerances::default(),
            output: default_output(),
            seed: default_seed(),
            integrate: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Parse(format_toml_error(text, &e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}:{msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("integrator", t.integrator),
            ("degree_margin", t.degree_margin),
            ("closure", t.closure),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        for (name, s) in [("t", &self.schedules.t), ("lambda", &self.schedules.lambda)] {
            if let Some(s) = s {
                if s.is_empty()
                    || s.iter().any(|v| !(*v > 0.0))
                    || s.windows(2).any(|w| !(w[1] < w[0]))
                {
                    return Err(Error::Config(format!(
                        "schedule {name} must be nonempty, positive and strictly decreasing"
                    )));
                }
            }
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!(
                "nu must be nonnegative, got {}",
                self.nu
            )));
        }
        let p = &self.problem;
        let sources = [
            p.preset.is_some(),
            p.operator.is_some(),
            p.transmission_line.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if sources != 1 {
            return Err(Error::Config(
                "problem needs exactly one of preset, operator or transmission_line".into(),
            ));
        }
        if let Some(r) = &self.region {
            match r {
                RegionConfig::Box { lower, upper } => {
                    Region::cube(lower.clone(), upper.clone())?;
                }
                RegionConfig::Ball { center, radius, .. } => {
                    Region::ball(center.clone(), *radius)?;
                }
            }
        }
        Ok(())
    }

    /// Builds the problem, resolving operator paths relative to `base`.
    pub fn build_problem(&self, base: &Path) -> Result<SemilinearProblem> {
        let p = &self.problem;
        if let Some(name) = &p.preset {
            return match (name.as_str(), p.cells) {
                ("txline-default", Some(n)) => problems::build_transmission_line(
                    &TransmissionLineParams::default().with_cells(n),
                ),
                ("heat-1d", Some(n)) => problems::heat_1d(n),
                (other, _) => problems::preset(other),
            };
        }
        if let Some(tx) = &p.transmission_line {
            return problems::build_transmission_line(&self.txline_params(tx));
        }
        let path = p.operator.as_ref().expect("validated");
        let a = parse_matrix(&fs::read_to_string(base.join(path))?)?;
        let op = match &p.weight {
            Some(w) => {
                LinearOperator::with_weight(a, parse_matrix(&fs::read_to_string(base.join(w))?)?)?
            }
            None => LinearOperator::new(a)?,
        };
        inline_problem(
            op,
            p.nonlinearity.as_ref().unwrap_or(&NonlinearityConfig::Zero),
            p.period.unwrap_or(1.0),
        )
    }

    pub fn txline_params(&self, tx: &TxlineConfig) -> TransmissionLineParams {
        let d = TransmissionLineParams::default();
        TransmissionLineParams {
            alpha: tx.alpha.unwrap_or(d.alpha),
            beta: tx.beta.unwrap_or(d.beta),
            gamma: tx.gamma.unwrap_or(d.gamma),
            delta: tx.delta.unwrap_or(d.delta),
            rho: tx.rho.unwrap_or(d.rho),
            sigma: tx.sigma.unwrap_or(d.sigma),
            l: tx.l.unwrap_or(d.l),
            a: tx.a.unwrap_or(d.a),
            b: tx.b.unwrap_or(d.b),
            lip_f: tx.lip_f.unwrap_or(d.lip_f),
            lip_g: tx.lip_g.unwrap_or(d.lip_g),
            period: tx.period.unwrap_or(d.period),
            n: tx.n.unwrap_or(d.n),
            ..d
        }
        .standard_forcing()
    }

    pub fn build_region(&self, problem: &SemilinearProblem) -> Result<Region> {
        // a single value stands for every coordinate
        let fit = |v: &[f64]| match v {
            [x] => vec![*x; problem.dim()],
            _ => v.to_vec(),
        };
        let region = match &self.region {
            Some(RegionConfig::Box { lower, upper }) => Region::cube(fit(lower), fit(upper))?,
            Some(RegionConfig::Ball {
                center,
                radius,
                weighted: true,
            }) => Region::ball_in(&problem.operator, fit(center), *radius)?,
            Some(RegionConfig::Ball { center, radius, .. }) => Region::ball(fit(center), *radius)?,
            None => default_region(problem)?,
        };
        if region.dim() != problem.dim() {
            return Err(Error::Config(format!(
                "region dimension {} does not match problem dimension {}",
                region.dim(),
                problem.dim()
            )));
        }
        Ok(region)
    }
}

fn format_toml_error(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {}", e.message())
        }
        None => e.message().to_string(),
    }
}

fn inline_problem(
    op: LinearOperator,
    nl: &NonlinearityConfig,
    period: f64,
) -> Result<SemilinearProblem> {
    let n = op.dim();
    let check = |v: &[f64], what: &str| -> Result<DVector<f64>> {
        if v.len() != n {
            return Err(Error::Config(format!(
                "{what} has length {}, operator dimension is {n}",
                v.len()
            )));
        }
        Ok(DVector::from_column_slice(v))
    };
    let (f, lip, bound, autonomous): (Nonlinearity, f64, Option<f64>, bool) = match nl {
        NonlinearityConfig::Zero => (
            Arc::new(move |_t, _x, _mu| DVector::zeros(n)),
            0.0,
            Some(0.0),
            true,
        ),
        NonlinearityConfig::Constant { value } => {
            let c = check(value, "constant")?;
            let k = op.norm(&c);
            (Arc::new(move |_t, _x, mu| &c * mu), 0.0, Some(k), true)
        }
        NonlinearityConfig::Tanh { scale, offset } => {
            let c = check(offset, "offset")?;
            let s = *scale;
            // |tanh| ≤ 1 componentwise, so ‖s tanh(x)‖ ≤ |s| ‖1‖
            let k = s.abs() * op.norm(&DVector::from_element(n, 1.0)) + op.norm(&c);
            // the weighted Lipschitz constant picks up the metric distortion
            let stretch = op.weight_factor().norm()
                * op.weight_factor()
                    .clone()
                    .try_inverse()
                    .map_or(1.0, |m| m.norm());
            (
                Arc::new(move |_t, x, mu| (x.map(f64::tanh) * s + &c) * mu),
                s.abs() * stretch,
                Some(k),
                true,
            )
        }
        NonlinearityConfig::SineForcing {
            constant,
            amplitude,
        } => {
            let c = check(constant, "constant")?;
            let a = check(amplitude, "amplitude")?;
            let k = op.norm(&c) + op.norm(&a);
            let w = std::f64::consts::TAU / period;
            (
                Arc::new(move |t, _x, mu| (&c + &a * (w * t).sin()) * mu),
                0.0,
                Some(k),
                false,
            )
        }
    };
    let mut p = SemilinearProblem::new("inline", op, f, period).lipschitz(lip);
    if let Some(k) = bound {
        p = p.growth(k).bound(k);
    }
    Ok(p.autonomous(autonomous).periodic(true))
}

/// Region used when the configuration gives none: the interval `[1/2, 3/2]`
/// for the scalar presets, the ball of radius 2 for `cubic-2d`, otherwise the
/// weighted ball of radius `2K/ω` (radius 1 when `K = 0`).
pub fn default_region(problem: &SemilinearProblem) -> Result<Region> {
    match problem.name.as_str() {
        "scalar-linear" | "scalar-forced" => return Region::cube(vec![0.5], vec![1.5]),
        "cubic-2d" => return Region::ball(vec![0.0, 0.0], 2.0),
        _ => {}
    }
    let n = problem.dim();
    let radius = match problem.bound {
        Some(k) if k > 0.0 => 2.0 * k / problem.omega(),
        _ => 1.0,
    };
    let radius = problem.sample_radius.map_or(radius, |r| radius.min(r));
    Region::ball_in(&problem.operator, vec![0.0; n], radius)
}

struct Outcome {
    problem: String,
    status: ExitStatus,
    report: Value,
    trajectory: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn harness(cfg: &RunConfig, steps: Option<usize>) -> HarnessOptions {
    let mut opts = HarnessOptions {
        degree: DegreeOptions {
            admissibility: cfg.tolerances.degree_margin,
            ..DegreeOptions::default()
        },
        integrator: IntegratorOptions {
            tolerance: cfg.tolerances.integrator,
            ..IntegratorOptions::default()
        },
        ..HarnessOptions::default()
    };
    if let Some(s) = steps {
        opts.integrator.steps_per_period = s;
    }
    opts
}

fn verdict_status(v: Verdict) -> ExitStatus {
    match v {
        Verdict::Pass => ExitStatus::Pass,
        Verdict::Fail => ExitStatus::Fail,
        Verdict::Inadmissible => ExitStatus::Error,
    }
}

fn execute(
    command: Command,
    cfg: &RunConfig,
    base: &Path,
    steps: Option<usize>,
) -> Result<Outcome> {
    if command == Command::CheckHypotheses {
        return check_hypotheses_command(cfg, base);
    }
    let problem = cfg.build_problem(base)?;
    let opts = harness(cfg, steps);
    let nu = cfg.nu;
    let outcome = match command {
        Command::Integrate => {
            let ic = cfg.integrate.as_ref().ok_or_else(|| {
                Error::Config("integrate needs an [integrate] table with x0".into())
            })?;
            if ic.x0.len() != problem.dim() {
                return Err(Error::Config(format!(
                    "x0 has length {}, problem dimension is {}",
                    ic.x0.len(),
                    problem.dim()
                )));
            }
            let x0 = DVector::from_column_slice(&ic.x0);
            let horizon = ic.horizon.unwrap_or(problem.period);
            let traj = match steps {
                Some(s) => integrate_mild(&problem, &x0, horizon, ic.lambda, ic.mu, s)?,
                None => {
                    integrate_refined(&problem, &x0, horizon, ic.lambda, ic.mu, &opts.integrator)?
                }
            };
            let bound = traj.apriori_bound(&problem);
            let max_norm = traj
                .states
                .iter()
                .map(|s| problem.norm(s))
                .fold(0.0, f64::max);
            let within = traj.residual <= cfg.tolerances.integrator || steps.is_some();
            Outcome {
                problem: String::new(),
                status: if within {
                    ExitStatus::Pass
                } else {
                    ExitStatus::Fail
                },
                report: json!({
                    "theorem": "mild-solution",
                    "final_state": traj.final_state().iter().copied().collect::<Vec<f64>>(),
                    "steps": traj.steps(),
                    "residual": traj.residual,
                    "horizon": horizon,
                    "lambda": ic.lambda,
                    "mu": ic.mu,
                    "max_norm": max_norm,
                    "apriori_bound": bound,
                    "within_apriori_bound": max_norm <= bound * (1.0 + 1e-9) + 1e-12,
                }),
                trajectory: Some(traj.to_csv()),
            }
        }
        Command::Degree => {
            let region = cfg.build_region(&problem)?;
            let r = static_degree(&problem, &region, nu, &opts)?;
            let mut report = to_value(&r);
            report["theorem"] = json!("resolvent-degree");
            report["averaged"] = json!(!problem.autonomous);
            Outcome {
                problem: String::new(),
                status: ExitStatus::Pass,
                report,
                trajectory: None,
            }
        }
        Command::VerifyFormula => {
            let region = cfg.build_region(&problem)?;
            let sched = cfg.schedules.t.as_deref();
            let r = if problem.autonomous {
                verify_krasnoselskii(&problem, &region, sched, nu, &opts)?
            } else {
                verify_krasnoselskii_averaged(&problem, &region, sched, nu, &opts)?
            };
            Outcome {
                problem: String::new(),
                status: verdict_status(r.verdict),
                report: to_value(&r),
                trajectory: None,
            }
        }
        Command::VerifyAveraging => {
            let region = cfg.build_region(&problem)?;
            let r = verify_averaging(
                &problem,
                &region,
                cfg.schedules.lambda.as_deref(),
                nu,
                &opts,
            )?;
            Outcome {
                problem: String::new(),
                status: verdict_status(r.verdict),
                report: to_value(&r),
                trajectory: None,
            }
        }
        Command::ScanBoundary => {
            let region = cfg.build_region(&problem)?;
            let grid = cfg
                .schedules
                .lambda
                .clone()
                .unwrap_or_else(|| vec![1.0, 0.75, 0.5, 0.25]);
            let r = scan_boundary_periodic_points(&problem, &region, &grid, 256, &opts)?;
            let mut report = to_value(&r);
            report["theorem"] = json!("continuation-principle");
            Outcome {
                problem: String::new(),
                status: if r.flagged {
                    ExitStatus::Fail
                } else {
                    ExitStatus::Pass
                },
                report,
                trajectory: None,
            }
        }
        Command::FindPeriodic => {
            let region = cfg.build_region(&problem)?;
            let popts = PeriodicOptions {
                harness: opts,
                target_defect: cfg.tolerances.closure,
                ..PeriodicOptions::default()
            };
            match find_periodic(&problem, &region, nu, &popts) {
                Ok(s) => {
                    let csv = s.trajectory.as_ref().map(|t| t.to_csv());
                    let ok = s.norm_bound_ok;
                    Outcome {
                        problem: String::new(),
                        status: if ok {
                            ExitStatus::Pass
                        } else {
                            ExitStatus::Fail
                        },
                        report: to_value(&s),
                        trajectory: csv,
                    }
                }
                Err(
                    e @ (Error::NoCertificate
                    | Error::NotFound { .. }
                    | Error::BoundaryPeriodicPoint { .. }),
                ) => Outcome {
                    problem: String::new(),
                    status: ExitStatus::Fail,
                    report: json!({
                        "theorem": "continuation-principle",
                        "found": false,
                        "diagnostics": [e.to_string()],
                    }),
                    trajectory: None,
                },
                Err(e) => return Err(e),
            }
        }
        Command::Branching => {
            let region = cfg.build_region(&problem)?;
            let popts = PeriodicOptions {
                harness: opts,
                target_defect: cfg.tolerances.closure,
                scan: None,
                ..PeriodicOptions::default()
            };
            let r = track_branching(&problem, &region, cfg.schedules.lambda.as_deref(), &popts)?;
            let ok = r.monotone && r.converged && r.lost_at.is_none();
            Outcome {
                problem: String::new(),
                status: if ok {
                    ExitStatus::Pass
                } else {
                    ExitStatus::Fail
                },
                report: to_value(&r),
                trajectory: None,
            }
        }
        Command::CheckHypotheses => unreachable!("handled above"),
    };
    Ok(Outcome {
        problem: problem.name.clone(),
        ..outcome
    })
}

/// Runs without the hypothesis gate so violated constants produce a report.
fn check_hypotheses_command(cfg: &RunConfig, base: &Path) -> Result<Outcome> {
    let (r, name) = match (
        &cfg.problem.transmission_line,
        cfg.problem.preset.as_deref(),
    ) {
        (Some(tx), _) => (
            problems::check_transmission_line(&cfg.txline_params(tx)),
            "txline".to_string(),
        ),
        (None, Some("txline-default")) => (
            problems::check_transmission_line(
                &TransmissionLineParams::default().with_cells(cfg.problem.cells.unwrap_or(16)),
            ),
            "txline-default".to_string(),
        ),
        _ => {
            let problem = cfg.build_problem(base)?;
            (
                problems::check_hypotheses_seeded(&problem, cfg.seed),
                problem.name,
            )
        }
    };
    let mut report = to_value(&r);
    report["theorem"] = json!("hypotheses");
    Ok(Outcome {
        problem: name,
        status: if r.all_passed {
            ExitStatus::Pass
        } else {
            ExitStatus::Fail
        },
        report,
        trajectory: None,
    })
}

fn write_outputs(
    dir: &Path,
    command: Command,
    problem: &str,
    outcome: &Outcome,
    config: Option<&Path>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut report = Map::new();
    report.insert("schema".into(), json!(SCHEMA_VERSION));
    report.insert("command".into(), json!(command.name()));
    report.insert("problem".into(), json!(problem));
    report.insert("status".into(), json!(outcome.status as i32));
    if let Value::Object(body) = &outcome.report {
        for (k, v) in body {
            report.insert(k.clone(), v.clone());
        }
    }
    let text = serde_json::to_string_pretty(&Value::Object(report)).expect("json");
    fs::write(dir.join("report.json"), text + "\n")?;
    if let Some(csv) = &outcome.trajectory {
        fs::write(dir.join("trajectory.csv"), csv)?;
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "schema": SCHEMA_VERSION,
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": stamp,
        "config": config.map(|p| p.display().to_string()),
    });
    fs::write(
        dir.join("meta.json"),
        serde_json::to_string_pretty(&meta).expect("json") + "\n",
    )?;
    Ok(())
}

/// Parses arguments and runs one command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitStatus::Error as i32
            } else {
                0
            };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(status) => status as i32,
        Err(e) => {
            eprintln!("semideg: {e}");
            ExitStatus::Error as i32
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<ExitStatus> {
    let (mut cfg, base) = match &cli.config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => {
            return Err(Error::Config("--config <path> is required".into()));
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.output {
        cfg.output = out.clone();
    }
    let outcome = execute(cli.command, &cfg, &base, cli.steps)?;
    let problem = outcome.problem.clone();
    write_outputs(
        &cfg.output,
        cli.command,
        &problem,
        &outcome,
        cli.config.as_deref(),
    )?;
    if !cli.quiet {
        let status = match outcome.status {
            ExitStatus::Pass => "pass",
            ExitStatus::Fail => "fail",
            ExitStatus::Error => "inadmissible",
        };
        println!(
            "{} {}: {status} ({})",
            cli.command.name(),
            problem,
            cfg.output.join("report.json").display()
        );
    }
    Ok(outcome.status)
}

/// Matrix helper for inline configurations written by tests and tools.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    fs::write(path, crate::linops::matrix_to_text(m))?;
    Ok(())
}
