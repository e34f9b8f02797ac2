use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::linops::LinearOperator;
use crate::sampling::{self, Halton};
use crate::{Error, Result};

/// Inner-product metric `‖x‖ = ‖Lᵀ x‖` for ellipsoidal balls.
#[derive(Debug, Clone)]
pub struct Metric {
    chol: DMatrix<f64>,
    /// `Lᵀ⁻¹`, mapping the Euclidean unit ball onto the metric unit ball.
    inv_lt: DMatrix<f64>,
    /// Largest Euclidean length of a metric-unit vector.
    stretch: f64,
}

impl Metric {
    pub fn from_weight(weight: &DMatrix<f64>) -> Result<Self> {
        let chol = weight
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Domain("metric weight must be positive definite".into()))?
            .unpack();
        Ok(Self::from_factor(chol))
    }

    fn from_factor(chol: DMatrix<f64>) -> Self {
        let n = chol.nrows();
        let inv_lt = chol
            .transpose()
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .expect("positive Cholesky diagonal");
        let weight = &chol * chol.transpose();
        let stretch = 1.0 / SymmetricEigen::new(weight).eigenvalues.min().sqrt();
        Self {
            chol,
            inv_lt,
            stretch,
        }
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        (self.chol.transpose() * x).norm()
    }
}

/// Open bounded region: an axis-aligned box or a ball, optionally in a
/// weighted norm.
#[derive(Debug, Clone)]
pub enum Region {
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    Ball {
        center: DVector<f64>,
        radius: f64,
        metric: Option<Metric>,
    },
}

impl Region {
    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Domain(
                "box bounds must be nonempty and of equal length".into(),
            ));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::Domain(
                "box needs finite bounds with upper > lower".into(),
            ));
        }
        Ok(Region::Box {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
        })
    }

    /// Symmetric box `center ± half_width` in every coordinate.
    pub fn cube_around(center: &[f64], half_width: f64) -> Result<Self> {
        Self::cube(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
        )
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(
                "ball needs a nonempty center and positive radius".into(),
            ));
        }
        Ok(Region::Ball {
            center: DVector::from_vec(center),
            radius,
            metric: None,
        })
    }

    /// Ball in the operator's weighted norm.
    pub fn ball_in(op: &LinearOperator, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() != op.dim() {
            return Err(Error::Domain(
                "ball center does not match operator dimension".into(),
            ));
        }
        let mut r = Self::ball(center, radius)?;
        if let Region::Ball { metric, .. } = &mut r {
            *metric = Some(Metric::from_factor(op.weight_factor().clone()));
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lower, .. } => lower.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> DVector<f64> {
        match self {
            Region::Box { lower, upper } => (lower + upper) * 0.5,
            Region::Ball { center, .. } => center.clone(),
        }
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            Region::Box { lower, upper } => (upper - lower).norm(),
            Region::Ball { radius, metric, .. } => {
                2.0 * radius * metric.as_ref().map_or(1.0, |m| m.stretch)
            }
        }
    }

    /// Distance from the boundary to the largest concentric inflation that is
    /// still the same shape scaled by two (half-width or radius).
    pub fn inradius(&self) -> f64 {
        match self {
            Region::Box { lower, upper } => (upper - lower).min() * 0.5,
            Region::Ball { radius, .. } => *radius,
        }
    }

    /// Concentric copy scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Region {
        match self {
            Region::Box { lower, upper } => {
                let c = (lower + upper) * 0.5;
                let half = (upper - lower) * (0.5 * factor);
                Region::Box {
                    lower: &c - &half,
                    upper: &c + &half,
                }
            }
            Region::Ball {
                center,
                radius,
                metric,
            } => Region::Ball {
                center: center.clone(),
                radius: radius * factor,
                metric: metric.clone(),
            },
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| v > l && v < u),
            Region::Ball {
                center,
                radius,
                metric,
            } => self.ball_norm(metric, &(x - center)) < *radius,
        }
    }

    /// Distance-like slack: how far `x` lies outside, relative to the diameter.
    pub fn excess(&self, x: &DVector<f64>) -> f64 {
        match self {
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(v, (l, u))| (l - v).max(v - u).max(0.0))
                .fold(0.0, f64::max),
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                (self.ball_norm(metric, &(x - center)) - radius).max(0.0)
                    * metric.as_ref().map_or(1.0, |m| m.stretch)
            }
        }
    }

    fn ball_norm(&self, metric: &Option<Metric>, v: &DVector<f64>) -> f64 {
        metric.as_ref().map_or_else(|| v.norm(), |m| m.norm(v))
    }

    /// Maps a point of the unit ball (Euclidean) into the region's ball.
    fn ball_point(
        center: &DVector<f64>,
        radius: f64,
        metric: &Option<Metric>,
        z: &DVector<f64>,
    ) -> DVector<f64> {
        match metric {
            Some(m) => center + &m.inv_lt * z * radius,
            None => center + z * radius,
        }
    }

    /// Maps `u ∈ [0,1]^n` into the closed region (cube-to-ball radial squeeze
    /// for balls).
    pub fn from_unit_cube(&self, u: &[f64]) -> DVector<f64> {
        match self {
            Region::Box { lower, upper } => {
                DVector::from_fn(lower.len(), |i, _| lower[i] + u[i] * (upper[i] - lower[i]))
            }
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                let z = DVector::from_fn(u.len(), |i, _| 2.0 * u[i] - 1.0);
                let l2 = z.norm();
                let z = if l2 > 0.0 { &z * (z.amax() / l2) } else { z };
                Self::ball_point(center, *radius, metric, &z)
            }
        }
    }

    /// Newton seeds: the center followed by Halton points.
    pub fn seeds(&self, count: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(count.max(1));
        out.push(self.center());
        out.extend(
            Halton::new(self.dim())
                .take(count.saturating_sub(1))
                .map(|u| self.from_unit_cube(&u)),
        );
        out
    }

    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let u: Vec<f64> = (0..self.dim()).map(|_| rng.gen::<f64>()).collect();
        match self {
            Region::Box { .. } => self.from_unit_cube(&u),
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                let dir = sampling::unit_direction(rng, self.dim());
                let r = rng.gen::<f64>().powf(1.0 / self.dim() as f64);
                Self::ball_point(center, *radius, metric, &(dir * r))
            }
        }
    }

    /// Boundary sample points, `density · dim` per face (box) or on the
    /// sphere (ball).
    pub fn boundary_points(&self, density: usize) -> Vec<DVector<f64>> {
        let n = self.dim();
        let per = (density * n).max(1);
        match self {
            Region::Box { lower, upper } => {
                let mut out = Vec::new();
                for axis in 0..n {
                    for side in [lower[axis], upper[axis]] {
                        if n == 1 {
                            out.push(DVector::from_element(1, side));
                            continue;
                        }
                        for u in Halton::new(n - 1).take(per) {
                            let mut x = DVector::zeros(n);
                            let mut k = 0;
                            for i in 0..n {
                                if i == axis {
                                    x[i] = side;
                                } else {
                                    x[i] = lower[i] + u[k] * (upper[i] - lower[i]);
                                    k += 1;
                                }
                            }
                            out.push(x);
                        }
                    }
                }
                out
            }
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                let dirs: Vec<DVector<f64>> = match n {
                    1 => vec![
                        DVector::from_element(1, -1.0),
                        DVector::from_element(1, 1.0),
                    ],
                    2 => (0..per)
                        .map(|k| {
                            let a = std::f64::consts::TAU * k as f64 / per as f64;
                            DVector::from_vec(vec![a.cos(), a.sin()])
                        })
                        .collect(),
                    _ => {
                        let mut rng = sampling::rng(sampling::DEFAULT_SEED);
                        let mut d: Vec<DVector<f64>> = (0..n)
                            .flat_map(|i| {
                                [-1.0, 1.0].map(|s| {
                                    let mut e = DVector::zeros(n);
                                    e[i] = s;
                                    e
                                })
                            })
                            .collect();
                        while d.len() < per {
                            d.push(sampling::unit_direction(&mut rng, n));
                        }
                        d
                    }
                };
                dirs.iter()
                    .map(|z| Self::ball_point(center, *radius, metric, z))
                    .collect()
            }
        }
    }

    /// Counter-clockwise parametrization of a planar boundary, `s ∈ [0, 1)`.
    pub(crate) fn boundary_curve(&self, s: f64) -> DVector<f64> {
        match self {
            Region::Box { lower, upper } => {
                let (x0, y0, x1, y1) = (lower[0], lower[1], upper[0], upper[1]);
                let (w, h) = (x1 - x0, y1 - y0);
                let mut d = s.rem_euclid(1.0) * 2.0 * (w + h);
                if d < w {
                    return DVector::from_vec(vec![x0 + d, y0]);
                }
                d -= w;
                if d < h {
                    return DVector::from_vec(vec![x1, y0 + d]);
                }
                d -= h;
                if d < w {
                    return DVector::from_vec(vec![x1 - d, y1]);
                }
                d -= w;
                DVector::from_vec(vec![x0, y1 - d])
            }
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                let a = std::f64::consts::TAU * s;
                Self::ball_point(
                    center,
                    *radius,
                    metric,
                    &DVector::from_vec(vec![a.cos(), a.sin()]),
                )
            }
        }
    }

    /// Endpoints `(a, b)` of a one-dimensional region.
    pub(crate) fn interval(&self) -> Option<(f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        let pts = match self {
            Region::Box { lower, upper } => (lower[0], upper[0]),
            Region::Ball {
                center,
                radius,
                metric,
            } => {
                let s = metric.as_ref().map_or(1.0, |m| m.stretch);
                (center[0] - radius * s, center[0] + radius * s)
            }
        };
        Some(pts)
    }
}
