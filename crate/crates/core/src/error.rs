use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("pole of {func} at s = {at}")]
    Pole { func: &'static str, at: Complex64 },
    #[error("contour of radius {radius} around {center} reaches a singularity at distance {distance}")]
    Contour {
        center: Complex64,
        radius: f64,
        distance: f64,
    },
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("capacity exceeded: {requested} values requested, limit is {limit}")]
    Capacity { requested: u64, limit: u64 },
    #[error("overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
