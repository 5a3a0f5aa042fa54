//! Shared fixtures for the benchmarks.

use kawastar_core::{ParameterSet, StarGraphSpec};

/// The uniform graph and table parameter rule at size `(k, m)`.
pub fn table_point(k: usize, m: usize) -> (StarGraphSpec, ParameterSet) {
    (StarGraphSpec::uniform(k, m), ParameterSet::table_rule(k, m))
}
