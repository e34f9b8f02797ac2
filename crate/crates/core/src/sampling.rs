//! Deterministic point sets: Halton sequences and seeded pseudo-random draws.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seed used for every reproducible sampling pass unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The first `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| !candidate.is_multiple_of(p))
        {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    value
}

/// Halton points in `[0, 1)^dim`. Index 0 (the origin) is skipped.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    next: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        Self {
            bases: primes(dim),
            next: 1,
        }
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        self.bases
            .iter()
            .map(|&b| radical_inverse(index, b))
            .collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let p = self.point(self.next);
        self.next += 1;
        Some(p)
    }
}

/// Uniformly distributed direction on the Euclidean unit sphere.
pub fn unit_direction<R: rand::Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
