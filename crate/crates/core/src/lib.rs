//! Topological degree tools for semilinear evolution equations `u' = -A u + F(t, u)`
//! on finite-dimensional state spaces.
//!
//! The crate covers the full chain used to locate and certify periodic
//! solutions by the translation-along-trajectories method:
//!
//! * [`linops`]: the linear part `A`, its semigroup `e^{-tA}`, resolvent and a
//!   log-norm decay certificate in a weighted inner product.
//! * [`evolve`]: a second-order exponential integrator for mild solutions and
//!   the translation operator `Φ_t`.
//! * [`degree`]: Brouwer degree on boxes and balls, the condensing-limit degree
//!   and the resolvent-reduced degree `Deg(-A + F, U)`.
//! * [`averaging`]: time averages of periodic nonlinearities.
//! * [`periodic`]: degree-formula harnesses, boundary scans, the periodic
//!   solution finder and branching-point tracking.
//! * [`problems`]: built-in problems (transmission line, heat strip, scalar and
//!   planar test problems) with hypothesis checkers.
//! * [`cli`]: configuration loading and the batch front end used by the
//!   `semideg` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod averaging;
pub mod cli;
pub mod degree;
pub mod error;
pub mod evolve;
pub mod linops;
pub mod periodic;
pub mod problems;
pub mod sampling;

pub use error::{Error, Result};

/// State vectors are dense column vectors.
pub type State = nalgebra::DVector<f64>;
