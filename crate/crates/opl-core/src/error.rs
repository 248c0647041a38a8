use num_bigint::BigUint;
use thiserror::Error;

/// Errors shared across the engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vertex pair ({i}, {j}) for n = {n}: need 0 <= i < j < n")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("vertex {v} out of range for n = {n}")]
    InvalidVertex { v: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Complete enumeration would need more configurations than the caller allows.
    #[error("budget refused: enumeration needs {base}^{exponent} = {required} configurations, cap is {cap}")]
    BudgetExceeded {
        base: u32,
        exponent: u32,
        required: BigUint,
        cap: u128,
    },

    /// Path enumeration would explode combinatorially.
    #[error("path enumeration refused for n = {n} (guard {guard}): roughly {estimated} paths")]
    PathGuard {
        n: usize,
        guard: usize,
        estimated: BigUint,
    },

    #[error("path endpoints do not match the fixed vertex roles: {0}")]
    EndpointMismatch(String),

    #[error("class constraint violated: {0}")]
    Constraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
