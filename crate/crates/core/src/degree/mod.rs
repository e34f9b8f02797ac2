//! Brouwer degree of vector fields on boxes and balls, the condensing-limit
//! degree, and the resolvent-reduced degree
//! `Deg(-A + F, U) = deg(I − (νI + A)^{-1}(νI + F), U)`.
//!
//! Degrees are computed by enumerating zeros with multistart damped Newton and
//! summing Jacobian signs. In dimensions one and two the sum is cross-checked
//! against a boundary count (sign change or winding number). The method is
//! reliable for smooth fields with nondegenerate zeros; in dimensions above
//! ten the seed budget, not the method, limits what is found.

mod region;
mod winding;

pub use region::{Metric, Region};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linops::LinearOperator;
use crate::{Error, Result};

/// A field `x ↦ f(x)` whose evaluation may fail (e.g. a flow that blows up).
pub type Field<'a> = dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMethod {
    ZeroSum,
    BoundaryIntegral,
    CondensingLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub location: Vec<f64>,
    pub sign: i8,
    pub log10_abs_det: f64,
    pub rcond: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub value: i64,
    pub boundary_margin: f64,
    pub field_scale: f64,
    pub threshold: f64,
    pub zeros: Vec<ZeroRecord>,
    pub method: DegreeMethod,
    pub certified: bool,
    pub boundary_samples: usize,
    pub seeds: usize,
    /// Boundary count in dimensions one and two.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    /// Condensing-limit schedule and the degree at each entry.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub schedule: Vec<(f64, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeOptions {
    /// Newton seeds; `None` uses [`default_seed_count`].
    pub seeds: Option<usize>,
    /// Boundary points per face (box) or sphere (ball), per dimension.
    pub boundary_density: usize,
    /// Zero deduplication radius relative to the region diameter.
    pub dedup_radius: f64,
    /// Boundary margin must exceed `admissibility · (1 + field scale)`.
    pub admissibility: f64,
    /// Smallest acceptable reciprocal condition number of a zero's Jacobian.
    pub rcond_min: f64,
    pub newton_max_iter: usize,
    pub cross_check: bool,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self {
            seeds: None,
            boundary_density: 128,
            dedup_radius: 1e-6,
            admissibility: 1e-6,
            rcond_min: 1e-10,
            newton_max_iter: 60,
            cross_check: true,
        }
    }
}

/// `64 · 2^dim` seeds up to dimension six, 4096 up to dimension ten and 16
/// beyond that.
pub fn default_seed_count(dim: usize) -> usize {
    match dim {
        0..=6 => 64 << dim,
        7..=10 => 4096,
        _ => 16,
    }
}

/// Boundary margin statistics of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMargin {
    pub margin: f64,
    pub scale: f64,
    pub threshold: f64,
    pub samples: usize,
    pub argmin: DVector<f64>,
}

/// Samples `‖f‖` on the boundary, doubling the density once when the margin is
/// within a factor ten of the admissibility threshold. Errors when the margin
/// falls below the threshold.
pub fn boundary_margin(
    field: &Field<'_>,
    region: &Region,
    opts: &DegreeOptions,
) -> Result<BoundaryMargin> {
    let mut density = opts.boundary_density.max(1);
    let mut refined = false;
    loop {
        let pts = region.boundary_points(density);
        let norms = pts
            .par_iter()
            .map(|x| field(x).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let (imin, margin) =
            norms
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        let scale = norms.iter().copied().fold(0.0, f64::max);
        let threshold = opts.admissibility * (1.0 + scale);
        if !refined && margin < 10.0 * threshold {
            density *= 2;
            refined = true;
            continue;
        }
        if !(margin >= threshold) {
            return Err(Error::Inadmissible {
                margin,
                threshold,
                location: pts[imin].iter().copied().collect(),
            });
        }
        return Ok(BoundaryMargin {
            margin,
            scale,
            threshold,
            samples: pts.len(),
            argmin: pts[imin].clone(),
        });
    }
}

/// Central-difference Jacobian with step `cbrt(eps) (1 + ‖x‖)`.
pub fn fd_jacobian(field: &Field<'_>, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = x.len();
    let h = f64::EPSILON.cbrt() * (1.0 + x.norm());
    let cols = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            Ok((field(&xp)? - field(&xm)?) / (2.0 * h))
        })
        .collect::<Result<Vec<DVector<f64>>>>()?;
    let mut jac = DMatrix::zeros(field(x)?.len(), n);
    for (j, c) in cols.iter().enumerate() {
        jac.set_column(j, c);
    }
    Ok(jac)
}

/// Sign, `log10 |det|` and reciprocal condition number of a square matrix.
pub fn jacobian_stats(j: &DMatrix<f64>) -> (i8, f64, f64) {
    let lu = j.clone().lu();
    let u = lu.u();
    let mut sign: i8 = if lu.p().determinant::<f64>() < 0.0 {
        -1
    } else {
        1
    };
    let mut log = 0.0;
    for d in u.diagonal().iter() {
        if *d == 0.0 {
            return (0, f64::NEG_INFINITY, 0.0);
        }
        if *d < 0.0 {
            sign = -sign;
        }
        log += d.abs().log10();
    }
    let sv = j.clone().singular_values();
    let smax = sv.max();
    let rcond = if smax > 0.0 { sv.min() / smax } else { 0.0 };
    (sign, log, rcond)
}

enum Newton {
    Zero(DVector<f64>, f64),
    Known,
    Failed,
}

fn newton(
    field: &Field<'_>,
    start: &DVector<f64>,
    region: &Region,
    opts: &DegreeOptions,
    scale: f64,
    known: &[DVector<f64>],
) -> Newton {
    let diam = region.diameter();
    let ftol = 1e-12 * (1.0 + scale);
    let merge = 1e-3 * diam;
    let mut x = start.clone();
    let mut fx = match field(&x) {
        Ok(v) => v,
        Err(_) => return Newton::Failed,
    };
    let mut fnorm = fx.norm();
    for _ in 0..opts.newton_max_iter {
        if fnorm <= ftol {
            return Newton::Zero(x, fnorm);
        }
        let jac = match fd_jacobian(field, &x) {
            Ok(j) => j,
            Err(_) => return Newton::Failed,
        };
        let step = match jac.lu().solve(&(-&fx)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return Newton::Failed,
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = &x + &step * alpha;
            if region.excess(&trial) > 0.25 * diam {
                alpha *= 0.5;
                continue;
            }
            if let Ok(ft) = field(&trial) {
                let nt = ft.norm();
                if nt < (1.0 - 1e-4 * alpha) * fnorm {
                    accepted = Some((trial, ft, nt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fxn, nn)) = accepted else {
            // stalled: accept only if already at working precision
            return if fnorm <= 1e-9 && step.norm() <= 1e-10 * (1.0 + x.norm()) {
                Newton::Zero(x, fnorm)
            } else {
                Newton::Failed
            };
        };
        let small_step = step.norm() * alpha;
        x = xn;
        fx = fxn;
        fnorm = nn;
        if small_step <= 1e-14 * (1.0 + x.norm()) && fnorm <= 1e-9 {
            return Newton::Zero(x, fnorm);
        }
        if alpha == 1.0 && small_step < merge && known.iter().any(|z| (z - &x).norm() < merge) {
            return Newton::Known;
        }
    }
    if fnorm <= ftol {
        Newton::Zero(x, fnorm)
    } else {
        Newton::Failed
    }
}

const SEED_BATCH: usize = 16;
const SIGN_PROBES: usize = 4;

/// A nondegenerate zero keeps its Jacobian sign on a small ball around it;
/// a fold or cusp does not.
fn sign_is_stable(field: &Field<'_>, z: &DVector<f64>, sign: i8, radius: f64) -> Result<bool> {
    let mut rng = crate::sampling::rng(crate::sampling::DEFAULT_SEED);
    for _ in 0..SIGN_PROBES {
        let p = z + crate::sampling::unit_direction(&mut rng, z.len()) * radius;
        let (s, _, _) = jacobian_stats(&fd_jacobian(field, &p)?);
        if s != sign {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Degree of `field` on the open region, as a signed count of its zeros.
pub fn brouwer_degree(
    field: &Field<'_>,
    region: &Region,
    opts: &DegreeOptions,
) -> Result<DegreeResult> {
    let bm = boundary_margin(field, region, opts)?;
    let n = region.dim();
    let seeds = region.seeds(opts.seeds.unwrap_or_else(|| default_seed_count(n)));
    let diam = region.diameter();

    let mut zeros: Vec<(DVector<f64>, f64)> = Vec::new();
    // the center runs alone so later batches can merge into its zero early
    let (head, rest) = seeds.split_at(1.min(seeds.len()));
    for batch in std::iter::once(head).chain(rest.chunks(SEED_BATCH)) {
        let known: Vec<DVector<f64>> = zeros.iter().map(|z| z.0.clone()).collect();
        let outcomes: Vec<Newton> = batch
            .par_iter()
            .map(|s| newton(field, s, region, opts, bm.scale, &known))
            .collect();
        for out in outcomes {
            if let Newton::Zero(z, res) = out {
                if !region.contains(&z) {
                    continue;
                }
                if zeros
                    .iter()
                    .all(|(w, _)| (w - &z).norm() > opts.dedup_radius * diam)
                {
                    zeros.push((z, res));
                }
            }
        }
    }

    let mut records = Vec::with_capacity(zeros.len());
    let mut degenerate: Option<(Vec<f64>, f64)> = None;
    for (z, residual) in &zeros {
        let jac = fd_jacobian(field, z)?;
        let (sign, log10_abs_det, rcond) = jacobian_stats(&jac);
        let location: Vec<f64> = z.iter().copied().collect();
        let unstable = rcond >= opts.rcond_min && !sign_is_stable(field, z, sign, 1e-4 * diam)?;
        if (rcond < opts.rcond_min || unstable) && degenerate.is_none() {
            degenerate = Some((location.clone(), rcond));
        }
        records.push(ZeroRecord {
            location,
            sign,
            log10_abs_det,
            rcond,
            residual: *residual,
        });
    }
    let value: i64 = records.iter().map(|r| r.sign as i64).sum();

    let cross_check = if opts.cross_check && n <= 2 {
        winding::boundary_degree(field, region)?
    } else {
        None
    };

    let mut result = DegreeResult {
        value,
        boundary_margin: bm.margin,
        field_scale: bm.scale,
        threshold: bm.threshold,
        zeros: records,
        method: DegreeMethod::ZeroSum,
        certified: degenerate.is_none(),
        boundary_samples: bm.samples,
        seeds: seeds.len(),
        cross_check,
        nu: None,
        schedule: Vec::new(),
    };
    if let Some((location, rcond)) = degenerate {
        result.certified = false;
        return Err(Error::DegenerateZero {
            location,
            rcond,
            result: Box::new(result),
        });
    }
    if let Some(b) = cross_check {
        if b != value {
            return Err(Error::CrossCheck {
                zero_sum: value,
                boundary: b,
            });
        }
    }
    Ok(result)
}

/// Degree of a planar or one-dimensional field from its boundary values only.
pub fn boundary_degree(
    field: &Field<'_>,
    region: &Region,
    opts: &DegreeOptions,
) -> Result<DegreeResult> {
    let bm = boundary_margin(field, region, opts)?;
    let value = winding::boundary_degree(field, region)?.ok_or_else(|| {
        Error::Domain(
            "boundary degree needs a one- or two-dimensional region with a resolvable winding"
                .into(),
        )
    })?;
    Ok(DegreeResult {
        value,
        boundary_margin: bm.margin,
        field_scale: bm.scale,
        threshold: bm.threshold,
        zeros: Vec::new(),
        method: DegreeMethod::BoundaryIntegral,
        certified: true,
        boundary_samples: bm.samples,
        seeds: 0,
        cross_check: Some(value),
        nu: None,
        schedule: Vec::new(),
    })
}

/// Default condensing-limit schedule `2^-3, …, 2^-8`.
pub fn default_condensing_schedule() -> Vec<f64> {
    (3..=8).map(|j| 2f64.powi(-j)).collect()
}

/// `lim_{λ→0⁺} deg(I − (1 − λ)F, U)`, evaluated along a decreasing schedule
/// and accepted when the last three values agree.
pub fn degree_condensing_limit(
    field_f: &Field<'_>,
    region: &Region,
    schedule: &[f64],
    opts: &DegreeOptions,
) -> Result<DegreeResult> {
    if schedule.len() < 3 {
        return Err(Error::Domain(
            "condensing schedule needs at least three values".into(),
        ));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0]))
        || schedule.iter().any(|&l| !(l > 0.0 && l < 1.0))
    {
        return Err(Error::Domain(
            "condensing schedule must decrease within (0, 1)".into(),
        ));
    }
    let base = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(x - field_f(x)?) };
    boundary_margin(&base, region, opts)?;

    let mut values = Vec::with_capacity(schedule.len());
    let mut last = None;
    for &lambda in schedule {
        let shrunk = move |x: &DVector<f64>| -> Result<DVector<f64>> {
            Ok(x - field_f(x)? * (1.0 - lambda))
        };
        let r = brouwer_degree(&shrunk, region, opts).map_err(|e| {
            if e.is_inadmissible() {
                Error::InadmissibleAt {
                    lambda,
                    source: Box::new(e),
                }
            } else {
                e
            }
        })?;
        values.push((lambda, r.value));
        last = Some(r);
    }
    let tail: Vec<i64> = values.iter().rev().take(3).map(|v| v.1).collect();
    if tail.iter().any(|&v| v != tail[0]) {
        return Err(Error::LimitUnstable {
            values: values.iter().map(|v| v.1).collect(),
        });
    }
    let mut result = last.expect("schedule is nonempty");
    result.method = DegreeMethod::CondensingLimit;
    result.schedule = values;
    Ok(result)
}

/// `Deg(-A + F, U) = deg(I − R(ν:−A)(νI + F), U)` with `R(ν:−A) = (νI + A)^{-1}`.
///
/// Admissibility is checked on `-A + F` itself before the reduced field is
/// formed.
pub fn degree_resolvent(
    op: &LinearOperator,
    nonlinear: &(dyn Fn(&DVector<f64>) -> DVector<f64> + Sync),
    region: &Region,
    nu: f64,
    opts: &DegreeOptions,
) -> Result<DegreeResult> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "nu must be finite and nonnegative, got {nu}"
        )));
    }
    if region.dim() != op.dim() {
        return Err(Error::Domain(
            "region dimension does not match operator".into(),
        ));
    }
    let generator = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(nonlinear(x) - op.apply(x)) };
    boundary_margin(&generator, region, opts)?;
    let resolvent = op.resolvent(nu)?;
    let reduced = |x: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(x - resolvent.apply(&(x * nu + nonlinear(x)))?)
    };
    let mut result = brouwer_degree(&reduced, region, opts)?;
    result.nu = Some(nu);
    Ok(result)
}
