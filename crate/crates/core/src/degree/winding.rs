//! Boundary-only degree: sign change in one dimension, winding number in two.

use nalgebra::DVector;

use super::{Field, Region};
use crate::Result;

const INITIAL_SEGMENTS: usize = 256;
const MAX_DEPTH: usize = 30;
const MAX_TURN: f64 = std::f64::consts::FRAC_PI_4;

fn angle(v: &DVector<f64>) -> f64 {
    v[1].atan2(v[0])
}

fn wrap(mut d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    while d > PI {
        d -= TAU;
    }
    while d <= -PI {
        d += TAU;
    }
    d
}

/// `None` when the region is not one- or two-dimensional or the boundary
/// curve cannot be resolved.
pub(super) fn boundary_degree(field: &Field<'_>, region: &Region) -> Result<Option<i64>> {
    match region.dim() {
        1 => {
            let (a, b) = region.interval().expect("one-dimensional");
            let fa = field(&DVector::from_element(1, a))?[0];
            let fb = field(&DVector::from_element(1, b))?[0];
            Ok(Some(((fb.signum() - fa.signum()) / 2.0).round() as i64))
        }
        2 => winding_number(field, region),
        _ => Ok(None),
    }
}

fn winding_number(field: &Field<'_>, region: &Region) -> Result<Option<i64>> {
    let eval = |s: f64| -> Result<f64> { Ok(angle(&field(&region.boundary_curve(s))?)) };
    let mut total = 0.0;
    let mut s0 = 0.0;
    let mut a0 = eval(0.0)?;
    for k in 1..=INITIAL_SEGMENTS {
        let s1 = k as f64 / INITIAL_SEGMENTS as f64;
        let a1 = eval(s1)?;
        match turn(&eval, s0, a0, s1, a1, 0)? {
            Some(d) => total += d,
            None => return Ok(None),
        }
        s0 = s1;
        a0 = a1;
    }
    Ok(Some((total / std::f64::consts::TAU).round() as i64))
}

/// Angle swept on `[s0, s1]`, bisecting until each piece turns less than
/// `MAX_TURN`.
fn turn(
    eval: &dyn Fn(f64) -> Result<f64>,
    s0: f64,
    a0: f64,
    s1: f64,
    a1: f64,
    depth: usize,
) -> Result<Option<f64>> {
    let d = wrap(a1 - a0);
    if d.abs() < MAX_TURN {
        return Ok(Some(d));
    }
    if depth >= MAX_DEPTH {
        return Ok(None);
    }
    let sm = 0.5 * (s0 + s1);
    let am = eval(sm)?;
    let left = turn(eval, s0, a0, sm, am, depth + 1)?;
    let right = turn(eval, sm, am, s1, a1, depth + 1)?;
    Ok(match (left, right) {
        (Some(l), Some(r)) => Some(l + r),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_of_power_maps() {
        // z ↦ z^k has winding k around the unit circle, z ↦ conj(z)^k has −k
        let disk = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        for k in 1..4i32 {
            let f = move |x: &DVector<f64>| {
                let (r, t) = (x.norm(), x[1].atan2(x[0]));
                Ok(DVector::from_vec(vec![
                    r.powi(k) * (k as f64 * t).cos(),
                    r.powi(k) * (k as f64 * t).sin(),
                ]))
            };
            assert_eq!(boundary_degree(&f, &disk).unwrap(), Some(k as i64));
            let g = move |x: &DVector<f64>| {
                let (r, t) = (x.norm(), x[1].atan2(x[0]));
                Ok(DVector::from_vec(vec![
                    r.powi(k) * (k as f64 * t).cos(),
                    -r.powi(k) * (k as f64 * t).sin(),
                ]))
            };
            assert_eq!(boundary_degree(&g, &disk).unwrap(), Some(-(k as i64)));
        }
    }

    #[test]
    fn zero_outside_box_gives_zero() {
        let b = Region::cube(vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
        let f = |x: &DVector<f64>| Ok(x.clone());
        assert_eq!(boundary_degree(&f, &b).unwrap(), Some(0));
    }
}
