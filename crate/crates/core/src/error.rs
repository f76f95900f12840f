use thiserror::Error;

use crate::variance::VarianceResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {arg} outside the supported range of {function}")]
    Range { function: &'static str, arg: f64 },

    #[error("{function} has a pole at {arg}")]
    Pole { function: &'static str, arg: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point or window outside the kernel domain: {0}")]
    Domain(String),

    #[error("accuracy target {target:e} not reached within the evaluation budget (estimated error {reached:e})")]
    Budget {
        target: f64,
        reached: f64,
        partial: Box<VarianceResult>,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("discretization too coarse: eigenvalues clipped by {clip:e}")]
    DiscretizationQuality { clip: f64 },

    #[error("sampler produced a negative conditional density {value:e}")]
    SamplerConsistency { value: f64 },

    #[error("window of {sites} sites exceeds the enumeration limit of {limit}")]
    Size { sites: usize, limit: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
