use thiserror::Error;

use crate::fitness::Semantics;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid problem size n={0}: n must be at least 8 and divisible by 4")]
    InvalidSize(u32),

    #[error("sector index {index} out of range for n={n}")]
    RegionOutOfRange { index: u32, n: u32 },

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("enumeration budget exceeded: effective block count {count} > cap {cap}")]
    BudgetExceeded { count: u32, cap: u32 },

    #[error("cannot compare {0:?} fitness with {1:?} fitness")]
    MixedSemantics(Semantics, Semantics),

    #[error("insufficient data for regression: {0}")]
    InsufficientPoints(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
