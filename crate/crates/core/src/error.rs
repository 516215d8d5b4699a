//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometric and numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Heisenberg dimension n = {0} outside the supported range 1..=8")]
    UnsupportedDimension(usize),

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("characteristic point: |P_H(nu)| = {p_h_norm:.3e} <= tolerance {tol:.3e}")]
    CharacteristicPoint { p_h_norm: f64, tol: f64 },

    #[error("degenerate gradient: |grad f| = {0:.3e}")]
    DegenerateGradient(f64),

    #[error("point off the surface: f = {value:.3e} exceeds level tolerance {tol:.3e}")]
    OffSurface { value: f64, tol: f64 },

    #[error("pole of the gauge sphere: distance to the t-axis r = {0:.3e}")]
    Pole(f64),

    #[error("input vector is not tangent: <z, nu_h> = {0:.3e}")]
    NonTangent(f64),

    #[error("point on the vertical axis: |xi_H| = {0:.3e}")]
    AxisPoint(f64),

    #[error(
        "curvature routes disagree: tangent-frame sum {tangent:.12e} vs full-frame sum {full:.12e}"
    )]
    CurvatureRouteMismatch { tangent: f64, full: f64 },

    #[error("horizontal tangent basis completion failed at pair {0}")]
    BasisCompletion(usize),

    #[error("surface sampling failed: {0}")]
    SamplingFailure(String),

    #[error("no interior anchor known for this surface spec")]
    NoInteriorAnchor,

    #[error(
        "no positive root on the tracked branch (cos_theta = {cos_theta:.6e}, phi0 = {phi0:.6e})"
    )]
    NoRoot { cos_theta: f64, phi0: f64 },

    #[error("multiple positive radii are compatible; a previous radius is required for branch continuation")]
    AmbiguousRoot,

    #[error("conservation law violated: residual {residual:.3e} exceeds bound {bound:.3e}")]
    ConservationViolation { residual: f64, bound: f64 },

    #[error("step size underflow at s = {0:.6e}")]
    StepSizeUnderflow(f64),

    #[error("surface drift {drift:.3e} exceeds bound {bound:.3e} at s = {s:.6e}")]
    DriftExceeded { drift: f64, bound: f64, s: f64 },

    #[error("quadrature failed to converge: error estimate {0:.3e}")]
    QuadratureNonConvergence(f64),

    #[error("the curvature prescription requires c > 0, got c = {0}")]
    NonPositiveCurvatureFactor(f64),

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("invalid surface specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
