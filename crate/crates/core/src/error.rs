use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("point ({x}, {y}, {z}) is not in the open positive octant")]
    OutsideDomain { x: f64, y: f64, z: f64 },

    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("overflow evaluating {what}")]
    Overflow { what: &'static str },

    #[error("finite-difference stencil leaves the domain at coordinate {axis} (value {value}, step {step})")]
    StencilOutsideDomain { axis: usize, value: f64, step: f64 },

    #[error("F'({t}) = {derivative} vanishes or is not finite; the family is not strictly monotone here")]
    NotStrictlyMonotone { t: f64, derivative: f64 },

    #[error("invalid monotone family: {0}")]
    InvalidFamily(String),

    #[error(
        "reduced form is degenerate at alpha = {alpha}: det = {det:e} (tolerance {tolerance:e})"
    )]
    Degenerate {
        alpha: f64,
        det: f64,
        tolerance: f64,
    },

    #[error("ray coefficient <D²u p, Du> = {coefficient:e} is below tolerance {tolerance:e}")]
    VanishingRayCoefficient { coefficient: f64, tolerance: f64 },

    #[error("perturbed curvature has no witness of one sign above tolerance")]
    NoSignChange,

    #[error("not convexifiable: {reason}")]
    NotConvexifiable { reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}
