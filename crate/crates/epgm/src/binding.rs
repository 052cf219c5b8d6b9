//! Realization: sampling graphs from an edge-probability model under the
//! edge-independent scheme, local binding, and parallel binding.
//!
//! All schemes preserve every marginal edge probability `p(u, v)`; the
//! binding schemes add positive dependence by deciding groups of pairs with
//! one shared uniform draw `s` (a pair becomes an edge iff `p >= s`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::EdgeProbModel;
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "eigm")]
    EdgeIndependent,
    #[serde(rename = "local")]
    LocalBinding,
    #[serde(rename = "parallel")]
    ParallelBinding,
}

/// How the residual probabilities of parallel binding are realized: one
/// shared uniform draw for all pairs (as in the pseudocode) or an
/// independent draw per pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualCoupling {
    Shared,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingParams {
    pub scheme: Scheme,
    #[serde(rename = "R")]
    pub rounds: u32,
    /// Node-sampling probability per equivalence class.
    pub g: Vec<f64>,
    pub residual_coupling: ResidualCoupling,
}

pub const DEFAULT_ROUNDS_LOCAL: u32 = 1000;
pub const DEFAULT_ROUNDS_PARALLEL: u32 = 32;

impl BindingParams {
    pub fn eigm() -> Self {
        Self {
            scheme: Scheme::EdgeIndependent,
            rounds: 0,
            g: Vec::new(),
            residual_coupling: ResidualCoupling::Shared,
        }
    }

    pub fn local(g: Vec<f64>, rounds: u32) -> Self {
        Self {
            scheme: Scheme::LocalBinding,
            rounds,
            g,
            residual_coupling: ResidualCoupling::Shared,
        }
    }

    pub fn parallel(g: Vec<f64>, rounds: u32, residual_coupling: ResidualCoupling) -> Self {
        Self {
            scheme: Scheme::ParallelBinding,
            rounds,
            g,
            residual_coupling,
        }
    }

    pub fn validate(&self, m: &EdgeProbModel) -> Result<()> {
        if self.g.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidBinding(
                "node-sampling probabilities must lie in [0, 1]".into(),
            ));
        }
        let num_classes = m.class_structure().num_classes();
        if self.scheme != Scheme::EdgeIndependent && self.g.len() != num_classes {
            return Err(Error::InvalidBinding(format!(
                "expected {} per-class g values, got {}",
                num_classes,
                self.g.len()
            )));
        }
        if self.scheme == Scheme::ParallelBinding && self.rounds == 0 {
            return Err(Error::InvalidBinding(
                "parallel binding needs R >= 1 (1/R is undefined otherwise)".into(),
            ));
        }
        Ok(())
    }

    /// Per-node g expanded through the model's class structure.
    pub fn node_g(&self, m: &EdgeProbModel) -> Vec<f64> {
        m.class_structure()
            .class_of
            .iter()
            .map(|&c| self.g[c])
            .collect()
    }
}

/// Binding-parameter file: binding configuration plus the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BindingFile {
    #[serde(flatten)]
    pub params: BindingParams,
    pub seed: u64,
}

/// One binding group: all pairs whose probability is at least the shared
/// uniform draw `s` become edges.
pub fn bind_group<F>(p_hat: F, pairs: &[(u32, u32)], s: f64) -> Vec<(u32, u32)>
where
    F: Fn(u32, u32) -> f64,
{
    pairs
        .iter()
        .copied()
        .filter(|&(u, v)| p_hat(u, v) >= s)
        .collect()
}

/// Per-round probability `r(u, v)` of parallel binding; `gg = g(u) g(v)`.
pub fn parallel_round_prob(p: f64, gg: f64, rounds: u32) -> f64 {
    if gg <= 0.0 {
        // The pair is never covered by a round; the value is unused.
        return 0.0;
    }
    ((1.0 - (1.0 - p).powf(1.0 / rounds as f64)) / gg).min(1.0)
}

/// Residual probability `p_rem(u, v)` of parallel binding.
pub fn parallel_residual_prob(p: f64, gg: f64, rounds: u32) -> f64 {
    let den = (1.0 - gg).powi(rounds as i32);
    if den <= 0.0 {
        // g(u) g(v) = 1: every round covers the pair and the unclamped r
        // already realizes the full marginal.
        return 0.0;
    }
    (1.0 - (1.0 - p) / den).max(0.0)
}

/// Dispatch on the configured scheme.
pub fn sample(m: &EdgeProbModel, b: &BindingParams, spec: &RngSpec) -> Result<Graph> {
    b.validate(m)?;
    match b.scheme {
        Scheme::EdgeIndependent => Ok(sample_eigm(m, spec)),
        Scheme::LocalBinding => sample_local_binding(m, b, spec),
        Scheme::ParallelBinding => sample_parallel_binding(m, b, spec, 1),
    }
}

/// Edge-independent realization. Uses geometric skip sampling per class pair
/// for ER/CL/SB; KR falls back to full pair iteration.
pub fn sample_eigm(m: &EdgeProbModel, spec: &RngSpec) -> Graph {
    let n = m.node_count();
    let mut rng = spec.stream("eigm", 0);
    let mut edges = Vec::new();
    match m.class_view() {
        Some(view) => {
            for a in 0..view.members.len() {
                let ma = &view.members[a];
                within_class_skip(ma, view.p[a][a], &mut rng, &mut edges);
                for b in (a + 1)..view.members.len() {
                    cross_class_skip(ma, &view.members[b], view.p[a][b], &mut rng, &mut edges);
                }
            }
        }
        None => {
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.random::<f64>() < m.prob(u, v) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    Graph::from_oriented_edges(n, edges)
}

/// Emit every index in `0..count` independently with probability `q`, by
/// geometric skipping. Distributionally identical to `count` Bernoulli draws.
fn skip_sample(count: u64, q: f64, rng: &mut impl Rng, mut emit: impl FnMut(u64)) {
    if q <= 0.0 || count == 0 {
        return;
    }
    if q >= 1.0 {
        for i in 0..count {
            emit(i);
        }
        return;
    }
    let log1q = (1.0 - q).ln();
    let mut i: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log1q).floor();
        if !skip.is_finite() || skip >= (count - i) as f64 {
            return;
        }
        i += skip as u64;
        emit(i);
        i += 1;
        if i >= count {
            return;
        }
    }
}

fn within_class_skip(
    members: &[u32],
    q: f64,
    rng: &mut impl Rng,
    edges: &mut Vec<(u32, u32)>,
) {
    let na = members.len() as u64;
    if na < 2 {
        return;
    }
    let count = na * (na - 1) / 2;
    // Emitted indices are increasing, so a running row pointer decodes them.
    let mut row: u64 = 0;
    let mut row_base: u64 = 0;
    skip_sample(count, q, rng, |t| {
        while t >= row_base + (na - 1 - row) {
            row_base += na - 1 - row;
            row += 1;
        }
        let col = row + 1 + (t - row_base);
        let (u, v) = (members[row as usize], members[col as usize]);
        edges.push((u.min(v), u.max(v)));
    });
}

fn cross_class_skip(
    ma: &[u32],
    mb: &[u32],
    q: f64,
    rng: &mut impl Rng,
    edges: &mut Vec<(u32, u32)>,
) {
    let nb = mb.len() as u64;
    let count = ma.len() as u64 * nb;
    skip_sample(count, q, rng, |t| {
        let (u, v) = (ma[(t / nb) as usize], mb[(t % nb) as usize]);
        edges.push((u.min(v), u.max(v)));
    });
}

#[inline]
fn pair_index(n: u64, u: u64, v: u64) -> u64 {
    debug_assert!(u < v);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

fn pair_prob_fn(m: &EdgeProbModel) -> impl Fn(u32, u32) -> f64 + '_ {
    let lookup = m.class_view().map(|view| (m.class_structure().class_of, view.p));
    move |u: u32, v: u32| match &lookup {
        Some((class_of, p)) => p[class_of[u as usize]][class_of[v as usize]],
        None => m.prob(u, v),
    }
}

/// Local binding: R sequential rounds of node-set sampling; ungrouped pairs
/// inside the sampled set form one group decided by a fresh shared `s`;
/// pairs still ungrouped after the rounds are realized independently.
pub fn sample_local_binding(
    m: &EdgeProbModel,
    b: &BindingParams,
    spec: &RngSpec,
) -> Result<Graph> {
    b.validate(m)?;
    let n = m.node_count();
    let n64 = n as u64;
    let total_pairs = n64 * n64.saturating_sub(1) / 2;
    let g_node = b.node_g(m);
    let prob = pair_prob_fn(m);

    let mut rng = spec.stream("local-binding", 0);
    let mut grouped = vec![false; total_pairs as usize];
    let mut grouped_count: u64 = 0;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut sampled: Vec<u32> = Vec::new();

    for _round in 0..b.rounds {
        if grouped_count == total_pairs {
            break; // Pairs exhausted
        }
        sampled.clear();
        for v in 0..n {
            if rng.random::<f64>() < g_node[v] {
                sampled.push(v as u32);
            }
        }
        let s: f64 = rng.random();
        for (i, &u) in sampled.iter().enumerate() {
            for &v in &sampled[(i + 1)..] {
                let idx = pair_index(n64, u as u64, v as u64) as usize;
                if !grouped[idx] {
                    grouped[idx] = true;
                    grouped_count += 1;
                    if prob(u, v) >= s {
                        edges.push((u, v));
                    }
                }
            }
        }
    }

    // Remaining pairs become singleton groups, each with its own draw.
    if grouped_count < total_pairs {
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                let idx = pair_index(n64, u as u64, v as u64) as usize;
                if !grouped[idx] {
                    let s: f64 = rng.random();
                    if prob(u, v) >= s {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    Ok(Graph::from_oriented_edges(n, edges))
}

/// Parallel binding: R probabilistically identical rounds with per-round
/// probabilities `r`, plus a residual pass with probabilities `p_rem`.
/// Rounds own derived RNG streams and merge by set union, so the output is
/// identical for any thread count.
pub fn sample_parallel_binding(
    m: &EdgeProbModel,
    b: &BindingParams,
    spec: &RngSpec,
    threads: usize,
) -> Result<Graph> {
    b.validate(m)?;
    if b.scheme != Scheme::ParallelBinding {
        return Err(Error::InvalidBinding(
            "sample_parallel_binding requires the parallel scheme".into(),
        ));
    }
    let n = m.node_count();
    let rounds = b.rounds;
    let g_node = b.node_g(m);
    let view = m.class_view();
    let class_of = m.class_structure().class_of;

    // r and p_rem depend on p and g only through classes; precompute per
    // class pair where possible.
    let (r_class, p_rem_class) = match &view {
        Some(view) => {
            let c = view.sizes.len();
            let mut r = vec![vec![0.0; c]; c];
            let mut p_rem = vec![vec![0.0; c]; c];
            for a in 0..c {
                for bb in 0..c {
                    let gg = b.g[a] * b.g[bb];
                    r[a][bb] = parallel_round_prob(view.p[a][bb], gg, rounds);
                    p_rem[a][bb] = parallel_residual_prob(view.p[a][bb], gg, rounds);
                }
            }
            (Some(r), Some(p_rem))
        }
        None => (None, None),
    };
    let r_of = |u: u32, v: u32| match &r_class {
        Some(r) => r[class_of[u as usize]][class_of[v as usize]],
        None => {
            let gg = g_node[u as usize] * g_node[v as usize];
            parallel_round_prob(m.prob(u, v), gg, rounds)
        }
    };

    let round_edges = |round: u32| -> Vec<(u32, u32)> {
        let mut rng = spec.stream("pb-round", round as u64);
        let mut sampled: Vec<u32> = Vec::new();
        for v in 0..n {
            if rng.random::<f64>() < g_node[v] {
                sampled.push(v as u32);
            }
        }
        let s: f64 = rng.random();
        let mut out = Vec::new();
        for (i, &u) in sampled.iter().enumerate() {
            for &v in &sampled[(i + 1)..] {
                if r_of(u, v) >= s {
                    out.push((u, v));
                }
            }
        }
        out
    };

    let mut edges: Vec<(u32, u32)> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..rounds)
                .into_par_iter()
                .map(round_edges)
                .reduce(Vec::new, |mut a, mut b| {
                    a.append(&mut b);
                    a
                })
        })
    } else {
        let mut all = Vec::new();
        for round in 0..rounds {
            all.append(&mut round_edges(round));
        }
        all
    };

    // Residual pass.
    let mut rng = spec.stream("pb-residual", 0);
    match (&view, b.residual_coupling) {
        (Some(view), ResidualCoupling::Shared) => {
            let s: f64 = rng.random();
            let p_rem = p_rem_class.as_ref().unwrap();
            for a in 0..view.members.len() {
                if p_rem[a][a] >= s {
                    push_all_within(&view.members[a], &mut edges);
                }
                for bb in (a + 1)..view.members.len() {
                    if p_rem[a][bb] >= s {
                        push_all_cross(&view.members[a], &view.members[bb], &mut edges);
                    }
                }
            }
        }
        (Some(view), ResidualCoupling::Independent) => {
            let p_rem = p_rem_class.as_ref().unwrap();
            for a in 0..view.members.len() {
                within_class_skip(&view.members[a], p_rem[a][a], &mut rng, &mut edges);
                for bb in (a + 1)..view.members.len() {
                    cross_class_skip(
                        &view.members[a],
                        &view.members[bb],
                        p_rem[a][bb],
                        &mut rng,
                        &mut edges,
                    );
                }
            }
        }
        (None, coupling) => {
            let shared_s: f64 = if coupling == ResidualCoupling::Shared {
                rng.random()
            } else {
                0.0
            };
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    let gg = g_node[u as usize] * g_node[v as usize];
                    let p_rem = parallel_residual_prob(m.prob(u, v), gg, rounds);
                    let hit = match coupling {
                        ResidualCoupling::Shared => p_rem >= shared_s,
                        ResidualCoupling::Independent => rng.random::<f64>() < p_rem,
                    };
                    if hit {
                        edges.push((u, v));
                    }
                }
            }
        }
    }

    Ok(Graph::from_oriented_edges(n, edges))
}

fn push_all_within(members: &[u32], edges: &mut Vec<(u32, u32)>) {
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[(i + 1)..] {
            edges.push((u.min(v), u.max(v)));
        }
    }
}

fn push_all_cross(ma: &[u32], mb: &[u32], edges: &mut Vec<(u32, u32)>) {
    for &u in ma {
        for &v in mb {
            edges.push((u.min(v), u.max(v)));
        }
    }
}

/// Generate `count` independent graphs, one derived stream each.
pub fn generate_batch(
    m: &EdgeProbModel,
    b: &BindingParams,
    count: usize,
    spec: &RngSpec,
    threads: usize,
) -> Result<Vec<Graph>> {
    b.validate(m)?;
    let one = |i: usize| -> Result<Graph> {
        let child = spec.child("graph", i as u64);
        sample(m, b, &child)
    };
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        pool.install(|| (0..count).into_par_iter().map(one).collect())
    } else {
        (0..count).map(one).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cl_from_degrees, EdgeProbModel};

    #[test]
    fn bind_group_threshold() {
        let pairs = vec![(0, 1), (0, 2)];
        let p = |u: u32, v: u32| if (u, v) == (0, 1) { 0.2 } else { 0.7 };
        assert_eq!(bind_group(p, &pairs, 0.5), vec![(0, 2)]);
        assert_eq!(bind_group(p, &pairs, 0.0), pairs);
        assert_eq!(bind_group(|_, _| 0.0, &pairs, 0.1), vec![]);
    }

    #[test]
    fn eigm_extremes() {
        let full = EdgeProbModel::Er { n: 6, p0: 1.0 };
        let g = sample_eigm(&full, &RngSpec::new(1));
        assert_eq!(g.edge_count(), 15);
        let empty = EdgeProbModel::Er { n: 6, p0: 0.0 };
        assert_eq!(sample_eigm(&empty, &RngSpec::new(1)).edge_count(), 0);
    }

    #[test]
    fn eigm_er_mean_edges() {
        let m = EdgeProbModel::Er { n: 1000, p0: 0.01 };
        let spec = RngSpec::new(42);
        let mut total = 0usize;
        let trials = 100;
        for i in 0..trials {
            total += sample_eigm(&m, &spec.child("t", i)).edge_count();
        }
        let mean = total as f64 / trials as f64;
        let expect = 499_500.0 * 0.01;
        let sigma = (499_500.0 * 0.01 * 0.99 / trials as f64).sqrt();
        assert!(
            (mean - expect).abs() < 4.0 * sigma,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn local_binding_maximal_g_prefix_law() {
        // g = 1, R >= 1: edge set is {(u,v): p >= s} for one shared s, so the
        // edge set is always one of the nested prefix sets.
        let m = cl_from_degrees(vec![1.0, 2.0, 3.0]);
        let b = BindingParams::local(vec![1.0; 3], 5);
        for i in 0..200 {
            let g = sample_local_binding(&m, &b, &RngSpec::new(i)).unwrap();
            let mut probs: Vec<f64> = (0..3u32)
                .flat_map(|u| ((u + 1)..3).map(move |v| (u, v)))
                .filter(|&(u, v)| g.has_edge(u, v))
                .map(|(u, v)| m.prob(u, v))
                .collect();
            probs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Every absent pair must have probability <= every present pair.
            for u in 0..3u32 {
                for v in (u + 1)..3 {
                    if !g.has_edge(u, v) {
                        assert!(probs.iter().all(|&q| m.prob(u, v) <= q + 1e-15));
                    }
                }
            }
        }
    }

    #[test]
    fn local_binding_early_exit_is_noop() {
        let m = EdgeProbModel::Er { n: 8, p0: 0.4 };
        let b1 = BindingParams::local(vec![1.0], 1);
        let b50 = BindingParams::local(vec![1.0], 50);
        for seed in 0..20 {
            let spec = RngSpec::new(seed);
            let a = sample_local_binding(&m, &b1, &spec).unwrap();
            let c = sample_local_binding(&m, &b50, &spec).unwrap();
            assert_eq!(a, c);
        }
    }

    #[test]
    fn parallel_round_and_residual_examples() {
        // Hand-evaluated values.
        let r = parallel_round_prob(0.96, 0.64, 2);
        assert_eq!(r, 1.0); // 1 - 0.04^(1/2) = 0.8 > 0.64, clamps
        let p_rem = parallel_residual_prob(0.96, 0.64, 2);
        assert!((p_rem - (1.0 - 0.04 / (0.36 * 0.36))).abs() < 1e-12);

        let r2 = parallel_round_prob(0.75, 1.0, 2);
        assert!((r2 - 0.5).abs() < 1e-12);
        assert_eq!(parallel_residual_prob(0.75, 1.0, 2), 0.0);

        assert_eq!(parallel_round_prob(0.3, 0.0, 4), 0.0);
        assert!((parallel_residual_prob(0.3, 0.0, 4) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn parallel_binding_marginal_identity() {
        // 1 - (1 - gg*r)^R * (1 - p_rem) = p on both clamp branches.
        let mut worst: f64 = 0.0;
        for &rounds in &[1u32, 2, 8, 32] {
            for pi in 1..100 {
                let p = pi as f64 / 100.0;
                for ggi in 0..=10 {
                    let gg = if ggi == 10 {
                        1.0 - 1e-9
                    } else {
                        ggi as f64 / 10.0
                    };
                    let r = parallel_round_prob(p, gg, rounds);
                    let p_rem = parallel_residual_prob(p, gg, rounds);
                    let back = 1.0 - (1.0 - gg * r).powi(rounds as i32) * (1.0 - p_rem);
                    worst = worst.max((back - p).abs());
                }
            }
        }
        assert!(worst < 1e-12, "worst deviation {worst}");
    }

    #[test]
    fn parallel_binding_rejects_zero_rounds() {
        let m = EdgeProbModel::Er { n: 4, p0: 0.5 };
        let b = BindingParams::parallel(vec![0.5], 0, ResidualCoupling::Shared);
        assert!(sample_parallel_binding(&m, &b, &RngSpec::new(0), 1).is_err());
    }

    #[test]
    fn parallel_binding_thread_count_invariance() {
        let m = cl_from_degrees(vec![2.0, 3.0, 1.0, 2.0, 4.0, 2.0]);
        let b = BindingParams::parallel(
            vec![0.4; 4],
            8,
            ResidualCoupling::Independent,
        );
        let spec = RngSpec::new(99);
        let g1 = sample_parallel_binding(&m, &b, &spec, 1).unwrap();
        let g8 = sample_parallel_binding(&m, &b, &spec, 8).unwrap();
        assert_eq!(g1, g8);
    }

    #[test]
    fn batch_is_deterministic() {
        let m = EdgeProbModel::Er { n: 20, p0: 0.2 };
        let b = BindingParams::local(vec![0.3], 10);
        let spec = RngSpec::new(5);
        let a = generate_batch(&m, &b, 4, &spec, 1).unwrap();
        let c = generate_batch(&m, &b, 4, &spec, 1).unwrap();
        assert_eq!(a, c);
        // Different graphs within the batch.
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn binding_file_json_shape() {
        let f = BindingFile {
            params: BindingParams::parallel(vec![0.5, 0.25], 32, ResidualCoupling::Shared),
            seed: 7,
        };
        let text = serde_json::to_string(&f).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["scheme"], "parallel");
        assert_eq!(v["R"], 32);
        assert_eq!(v["residual_coupling"], "shared");
        assert_eq!(v["seed"], 7);
        let back: BindingFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.params, f.params);
    }
}
