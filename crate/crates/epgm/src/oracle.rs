//! Independent reference computations: Monte Carlo estimates through the
//! real samplers and a naive all-triples count, used to validate the closed
//! forms and the class aggregation.

use crate::binding::{sample, BindingParams, Scheme};
use crate::counts::{triple_spec, triple_wedges, ExpectedCounts};
use crate::error::{Error, Result};
use crate::model::EdgeProbModel;
use crate::motif::{motif3, TripleSpec, EDGE_NODES};
use crate::rng::RngSpec;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl OracleEstimate {
    fn from_frequency(hits: u64, trials: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / trials as f64).sqrt(),
        }
    }
}

/// A triple spec as a 3-node model: singleton blocks with the pair marginals
/// as block probabilities. Routing through the real model type means the MC
/// estimate exercises the production samplers rather than a re-derivation.
fn triple_model(t: &TripleSpec) -> (EdgeProbModel, BindingParams) {
    let p = vec![
        vec![0.0, t.p[0], t.p[1]],
        vec![t.p[0], 0.0, t.p[2]],
        vec![t.p[1], t.p[2], 0.0],
    ];
    let m = EdgeProbModel::Sb {
        block_of: vec![0, 1, 2],
        block_sizes: vec![1, 1, 1],
        p_block: p,
    };
    let b = match t.scheme {
        Scheme::EdgeIndependent => BindingParams::eigm(),
        Scheme::LocalBinding => BindingParams::local(t.g.to_vec(), t.rounds),
        Scheme::ParallelBinding => {
            BindingParams::parallel(t.g.to_vec(), t.rounds, t.residual)
        }
    };
    (m, b)
}

/// Monte Carlo estimate of the labeled 3-motif distribution by repeated
/// sampling. Returns per-outcome estimates indexed by edge mask.
pub fn mc_motif3(t: &TripleSpec, trials: u64, spec: &RngSpec) -> Result<[OracleEstimate; 8]> {
    let (m, b) = triple_model(t);
    let mut hits = [0u64; 8];
    for i in 0..trials {
        let g = sample(&m, &b, &spec.child("mc", i))?;
        let mut mask = 0usize;
        for (e, &(u, v)) in EDGE_NODES.iter().enumerate() {
            if g.has_edge(u as u32, v as u32) {
                mask |= 1 << e;
            }
        }
        hits[mask] += 1;
    }
    Ok(hits.map(|h| OracleEstimate::from_frequency(h, trials)))
}

/// Expected counts by direct iteration over all node triples. Quadratic in
/// memory-free form but cubic in time, so capped.
pub fn naive_expected_counts(m: &EdgeProbModel, b: &BindingParams) -> Result<ExpectedCounts> {
    b.validate(m)?;
    let n = m.node_count();
    if n > 60 {
        return Err(Error::Numerical(format!(
            "naive triple enumeration capped at 60 nodes, got {n}"
        )));
    }
    let g_node: Vec<f64> = if b.scheme == Scheme::EdgeIndependent {
        vec![0.0; n]
    } else {
        b.node_g(m)
    };
    let mut triangles = 0.0;
    let mut wedges = 0.0;
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            for w in (v + 1)..n as u32 {
                let p = [m.prob(u, v), m.prob(u, w), m.prob(v, w)];
                let g = [
                    g_node[u as usize],
                    g_node[v as usize],
                    g_node[w as usize],
                ];
                let d = motif3(&triple_spec(p, g, b));
                triangles += d.triangle();
                wedges += triple_wedges(&d);
            }
        }
    }
    Ok(ExpectedCounts { triangles, wedges })
}

/// Monte Carlo estimate of every pair marginal `Pr[(u, v) in E]`.
pub fn mc_marginals(
    m: &EdgeProbModel,
    b: &BindingParams,
    trials: u64,
    spec: &RngSpec,
) -> Result<Vec<Vec<OracleEstimate>>> {
    let n = m.node_count();
    let mut hits = vec![vec![0u64; n]; n];
    for i in 0..trials {
        let g = sample(m, b, &spec.child("mc", i))?;
        for &(u, v) in g.edges() {
            hits[u as usize][v as usize] += 1;
        }
    }
    Ok(hits
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|h| OracleEstimate::from_frequency(h, trials))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binding::ResidualCoupling;
    use crate::motif::motif3_local;

    #[test]
    fn mc_agrees_with_closed_form_local() {
        let t = TripleSpec::local([0.3, 0.6, 0.8], [0.7, 0.5, 0.9], 3);
        let exact = motif3_local(&t);
        let est = mc_motif3(&t, 20_000, &RngSpec::new(11)).unwrap();
        for mask in 0..8 {
            let tol = 4.0 * est[mask].std_error + 1e-9;
            assert!(
                (est[mask].mean - exact.prob[mask]).abs() < tol,
                "mask {mask}: {} vs {}",
                est[mask].mean,
                exact.prob[mask]
            );
        }
    }

    #[test]
    fn mc_agrees_with_closed_form_parallel() {
        for residual in [ResidualCoupling::Shared, ResidualCoupling::Independent] {
            let t = TripleSpec::parallel([0.4, 0.7, 0.2], [0.8, 0.6, 0.4], 4, residual);
            let exact = motif3(&t);
            let est = mc_motif3(&t, 20_000, &RngSpec::new(12)).unwrap();
            for mask in 0..8 {
                let tol = 4.0 * est[mask].std_error + 1e-9;
                assert!(
                    (est[mask].mean - exact.prob[mask]).abs() < tol,
                    "{residual:?} mask {mask}"
                );
            }
        }
    }

    #[test]
    fn naive_cap() {
        let m = EdgeProbModel::Er { n: 61, p0: 0.5 };
        assert!(naive_expected_counts(&m, &BindingParams::eigm()).is_err());
    }

    #[test]
    fn mc_marginals_preserved_by_binding() {
        let m = crate::model::cl_from_degrees(vec![1.0, 2.0, 3.0, 2.0]);
        let b = BindingParams::local(vec![0.8, 0.5, 0.9], 4);
        let est = mc_marginals(&m, &b, 20_000, &RngSpec::new(3)).unwrap();
        for u in 0..4u32 {
            for v in (u + 1)..4 {
                let e = &est[u as usize][v as usize];
                let tol = 4.0 * e.std_error + 1e-9;
                assert!(
                    (e.mean - m.prob(u, v)).abs() < tol,
                    "({u},{v}): {} vs {}",
                    e.mean,
                    m.prob(u, v)
                );
            }
        }
    }
}
