use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular resolvent at nu = {nu}: reciprocal condition {rcond:e}")]
    SingularResolvent { nu: f64, rcond: f64 },

    #[error("solution blew up at t = {time} (state norm {norm:e})")]
    BlowUp { time: f64, norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrator did not reach residual {tolerance:e} within {max_steps} steps (last residual {residual:e})")]
    Refinement {
        tolerance: f64,
        residual: f64,
        max_steps: usize,
    },

    #[error("field is not admissible: boundary margin {margin:e} below threshold {threshold:e} near {location:?}")]
    Inadmissible {
        margin: f64,
        threshold: f64,
        location: Vec<f64>,
    },

    #[error("degenerate zero near {location:?}: reciprocal condition {rcond:e}")]
    DegenerateZero {
        location: Vec<f64>,
        rcond: f64,
        result: Box<crate::degree::DegreeResult>,
    },

    #[error("degree cross-check mismatch: zero sum {zero_sum} but boundary count {boundary}")]
    CrossCheck { zero_sum: i64, boundary: i64 },

    #[error("condensing-limit degree did not stabilize: {values:?}")]
    LimitUnstable { values: Vec<i64> },

    #[error("field inadmissible at lambda = {lambda}: {source}")]
    InadmissibleAt {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degree of the averaged field is zero: existence not certified")]
    NoCertificate,

    #[error("boundary scan found a near-periodic point (defect {defect:e}) at lambda = {lambda}")]
    BoundaryPeriodicPoint { defect: f64, lambda: f64 },

    #[error("periodic point not found (best defect {best_defect:e})")]
    NotFound { best_defect: f64 },

    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal a boundary-admissibility failure.
    pub fn is_inadmissible(&self) -> bool {
        matches!(
            self,
            Error::Inadmissible { .. }
                | Error::InadmissibleAt { .. }
                | Error::BoundaryPeriodicPoint { .. }
        )
    }
}
