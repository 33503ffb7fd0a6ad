use thiserror::Error;

use crate::net::ExactScalar;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected} {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cannot invert zero")]
    ZeroInverse,

    #[error("cannot parse exact rational from {0:?}")]
    ParseScalar(String),

    #[error("gamma = {0} is not 1/S for an integer S; use memory sharing")]
    UnsupportedDirectPlacement(ExactScalar),

    #[error("gamma = {0} is not of the form 1/(2x+1); use memory sharing")]
    UnsupportedGamma(ExactScalar),

    #[error("network too small: K = {k}, scheme needs at least {needed}")]
    NetworkTooSmall { k: usize, needed: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),
}
