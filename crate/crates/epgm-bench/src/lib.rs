//! Shared fixtures for the benchmark targets.

use epgm::{cl_from_degrees, EdgeProbModel};

/// A heavy-tailed expected-degree sequence with a handful of distinct values,
/// so class aggregation has something to aggregate.
pub fn skewed_cl(n: usize) -> EdgeProbModel {
    let degrees: Vec<f64> = (0..n)
        .map(|i| {
            let rank = (i + 1) as f64;
            (60.0 / rank.sqrt()).ceil().min(n as f64 / 4.0)
        })
        .collect();
    cl_from_degrees(degrees)
}
