use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative input {value} where a non-negative value is required")]
    NegativeInput { value: f64 },

    #[error("invalid parameter {name} = {value}: must be finite and strictly positive")]
    InvalidParam { name: &'static str, value: f64 },

    #[error("density has a logarithmic singularity at s = 0 for this protocol")]
    SingularAtZero,

    #[error("pole multiset must contain at least {needed} nodes, got {got}")]
    TooFewPoles { needed: usize, got: usize },

    #[error("node value {value} appears more than once; merge multiplicities instead")]
    DuplicateNodeValue { value: f64 },

    #[error("node value {value} has zero multiplicity")]
    ZeroMultiplicity { value: f64 },

    #[error("poles must be pairwise distinct for the simple-pole formula (value {value})")]
    CoincidentPoles { value: f64 },

    #[error("combinatorial coefficient does not fit in f64 (K and q are too large)")]
    CoefficientOverflow,

    #[error("approximation used outside its validity regime: {detail}")]
    InvalidRegime { detail: String },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
