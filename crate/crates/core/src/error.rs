//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vertex with zero weighted degree makes the normalized Laplacian
    /// undefined there.
    #[error("vertex {vertex} has zero weighted degree in the {family} graph; \
             connect it (for proximity weights, enlarge cutoff_radius)")]
    IsolatedVertex { family: &'static str, vertex: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in {field} at vertex {vertex}, component {component}")]
    StateCorruption {
        field: &'static str,
        vertex: usize,
        component: usize,
    },

    #[error("transport CFL violation: dt = {dt} exceeds the stable bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("step rejected at t = {t}: state went negative (minimum entry {min:.3e}); \
             the step size is too large for the dynamics")]
    StepRejected { t: f64, min: f64 },

    #[error("step size underflow at t = {t}: the step was still rejected at dt_min = {dt_min}; \
             the system is stiffer than the configuration allows (lower dt_min, or revisit the \
             fast amyloid time scale epsilon)")]
    StepSizeUnderflow { t: f64, dt_min: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
