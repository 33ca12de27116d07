//! Error types shared across the solver.

use thiserror::Error;

/// Invalid geometric input: out-of-range radii, angles, dimensions or grids.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curvature sign must be -1 or +1, got {0}")]
    CurvatureSign(i64),
    #[error("geodesic radius R = {radius} is outside {range}")]
    Radius { radius: f64, range: &'static str },
    #[error("contact angle theta = {0} is outside (0, pi)")]
    Angle(f64),
    #[error("dimension n = {0} must be at least 2")]
    Dimension(usize),
    #[error("grid needs an even number of intervals >= 16, got {0}")]
    Grid(usize),
    #[error("{0}")]
    Domain(String),
}

/// Failures of the evolution loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("non-finite value at node {node} (t = {t})")]
    NumericalFailure { node: usize, t: f64 },
    #[error("invariant violated: {invariant}: {detail}")]
    InvariantViolation {
        invariant: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The sphere-equation least-squares fit has no real sphere.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("degenerate cap fit: rhat^2 = {0} is not positive")]
    Degenerate(f64),
    #[error("fitted sphere does not cross the boundary plane (|c| = {c} >= rhat = {rhat})")]
    NoContact { c: f64, rhat: f64 },
}

/// Problems reading or validating a run configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(
        "angle restriction violated: |cos theta| = {cos_theta:.6} >= (3n+1)/(5n-1) = {bound:.6} for n = {n}"
    )]
    AngleRestriction { cos_theta: f64, bound: f64, n: usize },
}
