//! Benchmark-only crate; see `benches/engines.rs`.
//!
//! Shared helpers for the benches live here so the bench file stays small.

use opl_core::{rational, Params};

/// Parameter sets the benches agree on, so numbers stay comparable across
/// runs and machines.
pub fn sparse_params(n: usize) -> Params {
    Params::from_scaled(n, rational(1, 2)).unwrap()
}

pub fn dense_params(n: usize) -> Params {
    Params::new(n, rational(1, 2)).unwrap()
}
