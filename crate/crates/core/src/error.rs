use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for a space with {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("facility subset is empty")]
    EmptyFacilitySet,

    #[error("unbalanced problem: supplies sum to {supply}, demands sum to {demand}")]
    Unbalanced { supply: f64, demand: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("enumeration ceiling exceeded: {needed} evaluations needed, ceiling is {ceiling}")]
    CeilingExceeded { needed: u128, ceiling: u128 },

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("assignment does not conserve weight of point {point}: assigned {assigned}, weight {weight}")]
    WeightConservation { point: usize, assigned: f64, weight: f64 },

    #[error("instance has no labels")]
    MissingLabels,

    #[error("incompatible input: {0}")]
    Incompatible(String),

    #[error("solver did not converge: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::InvalidInstance(_)
            | Error::InvalidConstraint(_)
            | Error::InvalidProfile(_)
            | Error::WeightConservation { .. }
            | Error::MissingLabels
            | Error::Incompatible(_)
            | Error::Dimension(_)
            | Error::IndexOutOfRange { .. }
            | Error::Unbalanced { .. }
            | Error::NonFinite(_)
            | Error::EmptyFacilitySet
            | Error::Json(_) => 3,
            Error::CeilingExceeded { .. } | Error::TooLarge(_) => 4,
            _ => 1,
        }
    }
}
