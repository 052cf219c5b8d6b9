//! Closed-form labeled 3-motif probabilities under each realization scheme.
//!
//! A node triple `{1, 2, 3}` has three pairs, indexed `e12 = 0`, `e13 = 1`,
//! `e23 = 2`; a labeled motif outcome is a bitmask over these. All formulas
//! are generic over [`Scalar`] so the fitting engine can evaluate them on
//! dual numbers.

use crate::binding::{ResidualCoupling, Scheme};
use crate::scalar::Scalar;

/// Pair endpoints (node indices within the triple) per edge index.
pub const EDGE_NODES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// One node triple under a realization scheme: marginal edge probabilities,
/// node-sampling probabilities, round count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleSpec {
    pub p: [f64; 3],
    pub g: [f64; 3],
    pub rounds: u32,
    pub scheme: Scheme,
    pub residual: ResidualCoupling,
}

impl TripleSpec {
    pub fn eigm(p: [f64; 3]) -> Self {
        Self {
            p,
            g: [0.0; 3],
            rounds: 0,
            scheme: Scheme::EdgeIndependent,
            residual: ResidualCoupling::Shared,
        }
    }

    pub fn local(p: [f64; 3], g: [f64; 3], rounds: u32) -> Self {
        Self {
            p,
            g,
            rounds,
            scheme: Scheme::LocalBinding,
            residual: ResidualCoupling::Shared,
        }
    }

    pub fn parallel(p: [f64; 3], g: [f64; 3], rounds: u32, residual: ResidualCoupling) -> Self {
        Self {
            p,
            g,
            rounds,
            scheme: Scheme::ParallelBinding,
            residual,
        }
    }
}

/// Probabilities of the 8 labeled edge subsets of a node triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotifDistribution3 {
    pub prob: [f64; 8],
}

impl MotifDistribution3 {
    pub fn triangle(&self) -> f64 {
        self.prob[0b111]
    }

    /// `Pr[e and e']` by marginalizing the distribution.
    pub fn pairwise_joint(&self, e: usize, e2: usize) -> f64 {
        let mask = (1u8 << e) | (1u8 << e2);
        (0..8u8)
            .filter(|a| a & mask == mask)
            .map(|a| self.prob[a as usize])
            .sum()
    }

    pub fn marginal(&self, e: usize) -> f64 {
        let bit = 1u8 << e;
        (0..8u8)
            .filter(|a| a & bit != 0)
            .map(|a| self.prob[a as usize])
            .sum()
    }
}

pub fn motif3(t: &TripleSpec) -> MotifDistribution3 {
    let prob = match t.scheme {
        Scheme::EdgeIndependent => eigm_law(to_s::<f64>(&t.p)),
        Scheme::LocalBinding => local_law(to_s::<f64>(&t.p), to_s::<f64>(&t.g), t.rounds),
        Scheme::ParallelBinding => {
            parallel_law(to_s::<f64>(&t.p), to_s::<f64>(&t.g), t.rounds, t.residual)
        }
    };
    MotifDistribution3 { prob }
}

pub fn motif3_eigm(t: &TripleSpec) -> MotifDistribution3 {
    MotifDistribution3 {
        prob: eigm_law(to_s::<f64>(&t.p)),
    }
}

/// All pairs in one group: a single shared draw, so only nested subsets of
/// the probability ordering occur.
pub fn motif3_maximal(t: &TripleSpec) -> MotifDistribution3 {
    MotifDistribution3 {
        prob: maximal_law(to_s::<f64>(&t.p)),
    }
}

pub fn motif3_local(t: &TripleSpec) -> MotifDistribution3 {
    MotifDistribution3 {
        prob: local_law(to_s::<f64>(&t.p), to_s::<f64>(&t.g), t.rounds),
    }
}

pub fn motif3_parallel(t: &TripleSpec) -> MotifDistribution3 {
    MotifDistribution3 {
        prob: parallel_law(to_s::<f64>(&t.p), to_s::<f64>(&t.g), t.rounds, t.residual),
    }
}

pub fn pairwise_joint(t: &TripleSpec, e: usize, e2: usize) -> f64 {
    motif3(t).pairwise_joint(e, e2)
}

fn to_s<S: Scalar>(x: &[f64; 3]) -> [S; 3] {
    [S::constant(x[0]), S::constant(x[1]), S::constant(x[2])]
}

pub fn eigm_law<S: Scalar>(p: [S; 3]) -> [S; 8] {
    let one = S::constant(1.0);
    let mut out = [S::constant(0.0); 8];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut prob = one;
        for (e, &pe) in p.iter().enumerate() {
            prob = prob * if a & (1 << e) != 0 { pe } else { one - pe };
        }
        *slot = prob;
    }
    out
}

/// Exact-outcome probability for a set of pairs bound in one group:
/// `max(0, min_{e in present} p_e - max_{e in group \ present} p_e)`.
fn group_prefix_law<S: Scalar>(p: &[S; 3], group: u8, present: u8) -> S {
    debug_assert_eq!(present & !group, 0);
    let zero = S::constant(0.0);
    let one = S::constant(1.0);
    let mut lo = one; // min over present
    let mut hi = zero; // max over absent
    for (e, &pe) in p.iter().enumerate() {
        let bit = 1u8 << e;
        if group & bit == 0 {
            continue;
        }
        if present & bit != 0 {
            lo = lo.smin(pe);
        } else {
            hi = hi.smax(pe);
        }
    }
    (lo - hi).smax(zero)
}

pub fn maximal_law<S: Scalar>(p: [S; 3]) -> [S; 8] {
    let mut out = [S::constant(0.0); 8];
    for (a, slot) in out.iter_mut().enumerate() {
        *slot = group_prefix_law(&p, 0b111, a as u8);
    }
    out
}

/// `sum_{t=0}^{rounds-1} x^t`, stable near `x = 1`.
fn geometric_sum<S: Scalar>(x: S, rounds: u32) -> S {
    let one = S::constant(1.0);
    let r = rounds as f64;
    if (1.0 - x.value()).abs() < 1e-9 {
        // Series around x = 1: R + R(R-1)/2 (x - 1).
        S::constant(r) + (x - one) * S::constant(r * (r - 1.0) / 2.0)
    } else {
        (one - x.powi(rounds)) / (one - x)
    }
}

/// Terminal pair-partition probabilities of local binding on one triple.
///
/// Returned as `[all_bound, split(0), split(1), split(2), all_single]` where
/// `split(h)` has the two pairs other than `e_h` bound together and `e_h`
/// on its own. The derivation: per round the triple's marginal process sees
/// "all three nodes sampled" with probability `a = g1 g2 g3` (all currently
/// ungrouped pairs merge into one group) or "exactly the endpoints of `e_h`"
/// with probability `b_h` (`e_h` becomes a singleton); everything is frozen
/// after the first `a` event, so the partition depends only on which `b`
/// events precede the first `a`.
pub fn local_partition_probs<S: Scalar>(g: [S; 3], rounds: u32) -> [S; 5] {
    let one = S::constant(1.0);
    let a = g[0] * g[1] * g[2];
    let b: [S; 3] = [
        g[0] * g[1] * (one - g[2]),
        g[0] * g[2] * (one - g[1]),
        g[1] * g[2] * (one - g[0]),
    ];
    let b_total = b[0] + b[1] + b[2];
    let x_all = one - a - b_total;
    let s_all = geometric_sum(x_all, rounds);
    let p_all = a * s_all;
    let mut out = [S::constant(0.0); 5];
    out[0] = p_all;
    let mut rest = p_all;
    for h in 0..3 {
        // No a and no b for the two bound pairs before the first a; at least
        // one b_h must have occurred, hence the difference of sums.
        let split = a * (geometric_sum(x_all + b[h], rounds) - s_all);
        out[1 + h] = split;
        rest = rest + split;
    }
    out[4] = one - rest;
    out
}

pub fn local_law<S: Scalar>(p: [S; 3], g: [S; 3], rounds: u32) -> [S; 8] {
    let pi = local_partition_probs(g, rounds);
    let one = S::constant(1.0);
    let mut out = [S::constant(0.0); 8];
    for (a_mask, slot) in out.iter_mut().enumerate() {
        let a_mask = a_mask as u8;
        // All three pairs in one group.
        let mut total = pi[0] * group_prefix_law(&p, 0b111, a_mask);
        // Two pairs bound, e_h independent.
        for h in 0..3 {
            let bit = 1u8 << h;
            let group = 0b111 & !bit;
            let single = if a_mask & bit != 0 {
                p[h]
            } else {
                one - p[h]
            };
            total = total + pi[1 + h] * group_prefix_law(&p, group, a_mask & group) * single;
        }
        // All singletons: independent.
        let mut indep = pi[4];
        for (e, &pe) in p.iter().enumerate() {
            indep = indep * if a_mask & (1 << e) != 0 { pe } else { one - pe };
        }
        *slot = total + indep;
    }
    out
}

fn round_prob_s<S: Scalar>(p: S, gg: S, rounds: u32) -> S {
    let one = S::constant(1.0);
    if gg.value() <= 0.0 {
        return S::constant(0.0);
    }
    (((one - (one - p).powf(1.0 / rounds as f64)) / gg).smin(one)).smax(S::constant(0.0))
}

fn residual_prob_s<S: Scalar>(p: S, gg: S, rounds: u32) -> S {
    let one = S::constant(1.0);
    let den = (one - gg).powi(rounds);
    if den.value() <= 0.0 {
        return S::constant(0.0);
    }
    (one - (one - p) / den).smax(S::constant(0.0))
}

pub fn parallel_law<S: Scalar>(
    p: [S; 3],
    g: [S; 3],
    rounds: u32,
    residual: ResidualCoupling,
) -> [S; 8] {
    let one = S::constant(1.0);
    let zero = S::constant(0.0);
    let mut r = [zero; 3];
    let mut p_rem = [zero; 3];
    for e in 0..3 {
        let (i, j) = EDGE_NODES[e];
        let gg = g[i] * g[j];
        r[e] = round_prob_s(p[e], gg, rounds);
        p_rem[e] = residual_prob_s(p[e], gg, rounds);
    }

    // Pr[every node of mask sampled / unsampled] per node subset, and the
    // pairs covered by that subset.
    let mut q = [one; 8]; // q[t] = Pr[no pair of t gets an edge]
    for t in 1u8..8 {
        // One round adds no edge of t iff the shared s exceeds the largest
        // per-round probability among the covered pairs of t.
        let mut no_add = zero;
        for node_mask in 0u8..8 {
            let mut pr = one;
            for (node, &gn) in g.iter().enumerate() {
                pr = pr * if node_mask & (1 << node) != 0 {
                    gn
                } else {
                    one - gn
                };
            }
            let mut max_r = zero;
            for e in 0..3 {
                let (i, j) = EDGE_NODES[e];
                let covered = node_mask & (1 << i) != 0 && node_mask & (1 << j) != 0;
                if covered && t & (1 << e) != 0 {
                    max_r = max_r.smax(r[e]);
                }
            }
            no_add = no_add + pr * (one - max_r);
        }
        let resid = match residual {
            ResidualCoupling::Shared => {
                let mut max_rem = zero;
                for e in 0..3 {
                    if t & (1 << e) != 0 {
                        max_rem = max_rem.smax(p_rem[e]);
                    }
                }
                one - max_rem
            }
            ResidualCoupling::Independent => {
                let mut prod = one;
                for e in 0..3 {
                    if t & (1 << e) != 0 {
                        prod = prod * (one - p_rem[e]);
                    }
                }
                prod
            }
        };
        q[t as usize] = no_add.powi(rounds) * resid;
    }

    // Inclusion-exclusion: Pr[exactly A] = sum_{B subset A} (-1)^|B| q[~A | B].
    let mut out = [zero; 8];
    for (a_mask, slot) in out.iter_mut().enumerate() {
        let a_mask = a_mask as u8;
        let absent = !a_mask & 0b111;
        let mut total = zero;
        let mut b_mask = a_mask;
        loop {
            let term = q[(absent | b_mask) as usize];
            if (b_mask.count_ones() & 1) == 0 {
                total = total + term;
            } else {
                total = total - term;
            }
            if b_mask == 0 {
                break;
            }
            b_mask = (b_mask - 1) & a_mask;
        }
        *slot = total;
    }
    out
}

/// Reference computation of the terminal partition probabilities by
/// iterating the per-round transition over explicit partition states, kept
/// as an independent check of the closed form in
/// [`local_partition_probs`].
pub fn local_partition_probs_by_iteration(g: [f64; 3], rounds: u32) -> [f64; 5] {
    use std::collections::HashMap;

    // State: (ungrouped pair mask, sorted group masks).
    type State = (u8, Vec<u8>);
    let a = g[0] * g[1] * g[2];
    let b = [
        g[0] * g[1] * (1.0 - g[2]),
        g[0] * g[2] * (1.0 - g[1]),
        g[1] * g[2] * (1.0 - g[0]),
    ];
    let stay = 1.0 - a - b[0] - b[1] - b[2];

    let mut dist: HashMap<State, f64> = HashMap::new();
    dist.insert((0b111, Vec::new()), 1.0);
    for _ in 0..rounds {
        let mut next: HashMap<State, f64> = HashMap::new();
        for ((ungrouped, groups), pr) in dist {
            *next
                .entry((ungrouped, groups.clone()))
                .or_insert(0.0) += pr * stay;
            // All three nodes sampled: ungrouped pairs merge.
            let merged = if ungrouped != 0 {
                let mut gs = groups.clone();
                gs.push(ungrouped);
                gs.sort_unstable();
                (0u8, gs)
            } else {
                (ungrouped, groups.clone())
            };
            *next.entry(merged).or_insert(0.0) += pr * a;
            // Exactly the endpoints of e_h sampled.
            for h in 0..3 {
                let bit = 1u8 << h;
                let state = if ungrouped & bit != 0 {
                    let mut gs = groups.clone();
                    gs.push(bit);
                    gs.sort_unstable();
                    (ungrouped & !bit, gs)
                } else {
                    (ungrouped, groups.clone())
                };
                *next.entry(state).or_insert(0.0) += pr * b[h];
            }
        }
        dist = next;
    }

    let mut out = [0.0; 5];
    for ((_, groups), pr) in dist {
        // Leftover ungrouped pairs become singletons: only multi-pair groups
        // decide the category.
        match groups.iter().find(|gm| gm.count_ones() >= 2) {
            Some(&gm) if gm.count_ones() == 3 => out[0] += pr,
            Some(&gm) => {
                let single = (!gm & 0b111).trailing_zeros() as usize;
                out[1 + single] += pr;
            }
            None => out[4] += pr,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E12: usize = 0;
    const E13: usize = 1;
    const E23: usize = 2;

    fn dist_sums_to_one(d: &MotifDistribution3) {
        let total: f64 = d.prob.iter().sum();
        assert!((total - 1.0).abs() < 1e-10, "sum {total}");
        assert!(d.prob.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn eigm_examples() {
        let d = motif3_eigm(&TripleSpec::eigm([0.5; 3]));
        assert!((d.triangle() - 0.125).abs() < 1e-15);
        let d2 = motif3_eigm(&TripleSpec::eigm([1.0, 1.0, 0.0]));
        assert_eq!(d2.prob[0b011], 1.0);
        let d3 = motif3_eigm(&TripleSpec::eigm([0.2, 0.5, 0.7]));
        assert!((d3.prob[0] - 0.8 * 0.5 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn maximal_prefix_law() {
        let t = TripleSpec::eigm([0.2, 0.5, 0.7]);
        let d = motif3_maximal(&t);
        assert!((d.prob[0b000] - 0.3).abs() < 1e-15);
        assert!((d.prob[1 << E23] - 0.2).abs() < 1e-15);
        assert!((d.prob[(1 << E23) | (1 << E13)] - 0.3).abs() < 1e-15);
        assert!((d.triangle() - 0.2).abs() < 1e-15);
        dist_sums_to_one(&d);

        let d2 = motif3_maximal(&TripleSpec::eigm([0.4; 3]));
        assert!((d2.triangle() - 0.4).abs() < 1e-15);
        assert!((d2.prob[0] - 0.6).abs() < 1e-15);
        for a in 1..7 {
            if a != 0b111 {
                assert!(d2.prob[a].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn local_reduces_to_eigm_at_zero_g() {
        let p = [0.3, 0.6, 0.9];
        let a = motif3_local(&TripleSpec::local(p, [0.0; 3], 17));
        let b = motif3_eigm(&TripleSpec::eigm(p));
        for i in 0..8 {
            assert!((a.prob[i] - b.prob[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn local_reduces_to_maximal_at_full_g() {
        let p = [0.3, 0.6, 0.9];
        let a = motif3_local(&TripleSpec::local(p, [1.0; 3], 1));
        let b = motif3_maximal(&TripleSpec::eigm(p));
        for i in 0..8 {
            assert!((a.prob[i] - b.prob[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn local_single_round_case_analysis() {
        // g = 0.5, R = 1, p = 0.5: Pr[tri] = g^3 min(p) + (1 - g^3) p^3.
        let d = motif3_local(&TripleSpec::local([0.5; 3], [0.5; 3], 1));
        assert!((d.triangle() - 0.171875).abs() < 1e-12);
    }

    #[test]
    fn local_partition_closed_form_matches_iteration() {
        let configs = [
            ([0.5, 0.5, 0.5], 1),
            ([0.3, 0.7, 0.2], 2),
            ([0.9, 0.1, 0.6], 5),
            ([1.0, 1.0, 1.0], 3),
            ([0.0, 0.8, 0.8], 4),
            ([0.25, 0.25, 0.25], 20),
        ];
        for (g, rounds) in configs {
            let closed = local_partition_probs::<f64>(
                [g[0], g[1], g[2]],
                rounds,
            );
            let iter = local_partition_probs_by_iteration(g, rounds);
            for i in 0..5 {
                assert!(
                    (closed[i] - iter[i]).abs() < 1e-12,
                    "g={g:?} R={rounds} slot {i}: {} vs {}",
                    closed[i],
                    iter[i]
                );
            }
        }
    }

    #[test]
    fn partition_zero_g_node_isolates_its_pairs() {
        // g3 = 0: pairs touching node 3 (e13, e23) can never merge with
        // anything, so only the all-singleton outcome and splits are... in
        // fact a = 0 means no merging at all.
        let pr = local_partition_probs::<f64>([0.6, 0.7, 0.0], 10);
        assert!(pr[0].abs() < 1e-15);
        assert!(pr[1].abs() < 1e-15);
        assert!(pr[2].abs() < 1e-15);
        assert!(pr[3].abs() < 1e-15);
        assert!((pr[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_reduces_to_maximal_at_one_round_full_g() {
        let p = [0.3, 0.6, 0.9];
        let a = motif3_parallel(&TripleSpec::parallel(
            p,
            [1.0; 3],
            1,
            ResidualCoupling::Shared,
        ));
        let b = motif3_maximal(&TripleSpec::eigm(p));
        for i in 0..8 {
            assert!((a.prob[i] - b.prob[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_marginals_recover_p() {
        let t = TripleSpec::parallel(
            [0.15, 0.5, 0.85],
            [0.7, 0.4, 0.9],
            4,
            ResidualCoupling::Shared,
        );
        let d = motif3_parallel(&t);
        dist_sums_to_one(&d);
        for e in 0..3 {
            assert!((d.marginal(e) - t.p[e]).abs() < 1e-12);
        }
        let ti = TripleSpec::parallel(t.p, t.g, 4, ResidualCoupling::Independent);
        let di = motif3_parallel(&ti);
        dist_sums_to_one(&di);
        for e in 0..3 {
            assert!((di.marginal(e) - t.p[e]).abs() < 1e-12);
        }
    }

    #[test]
    fn pairwise_joint_examples() {
        let p = [0.2, 0.5, 0.7];
        let d = motif3_eigm(&TripleSpec::eigm(p));
        assert!((d.pairwise_joint(E12, E13) - 0.1).abs() < 1e-12);
        let m = motif3_maximal(&TripleSpec::eigm(p));
        assert!((m.pairwise_joint(E12, E23) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn triangle_dominance_over_product() {
        let configs = [
            ([0.2, 0.5, 0.7], [0.3, 0.9, 0.5], 2),
            ([0.9, 0.9, 0.1], [0.5, 0.5, 0.5], 1),
            ([0.4, 0.4, 0.4], [0.8, 0.2, 0.6], 5),
        ];
        for (p, g, rounds) in configs {
            let product = p[0] * p[1] * p[2];
            let l = motif3_local(&TripleSpec::local(p, g, rounds));
            assert!(l.triangle() >= product - 1e-12);
            for residual in [ResidualCoupling::Shared, ResidualCoupling::Independent] {
                let pb = motif3_parallel(&TripleSpec::parallel(p, g, rounds, residual));
                assert!(pb.triangle() >= product - 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn motif_distributions_are_valid(
            p in proptest::array::uniform3(0.0f64..=1.0),
            g in proptest::array::uniform3(0.0f64..=1.0),
            rounds in 1u32..6,
            scheme_pick in 0usize..4,
        ) {
            let t = match scheme_pick {
                0 => TripleSpec::eigm(p),
                1 => TripleSpec::local(p, g, rounds),
                2 => TripleSpec::parallel(p, g, rounds, ResidualCoupling::Shared),
                _ => TripleSpec::parallel(p, g, rounds, ResidualCoupling::Independent),
            };
            let d = motif3(&t);
            let total: f64 = d.prob.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            for &x in &d.prob {
                prop_assert!(x >= -1e-10 && x <= 1.0 + 1e-10);
            }
            for e in 0..3 {
                prop_assert!((d.marginal(e) - p[e]).abs() < 1e-10);
            }
        }

        #[test]
        fn pairwise_joint_positive_association(
            p in proptest::array::uniform3(0.01f64..=0.99),
            g in proptest::array::uniform3(0.0f64..=1.0),
            rounds in 1u32..6,
        ) {
            for t in [
                TripleSpec::local(p, g, rounds),
                TripleSpec::parallel(p, g, rounds, ResidualCoupling::Shared),
            ] {
                let d = motif3(&t);
                for (e, f) in [(E12, E13), (E12, E23), (E13, E23)] {
                    prop_assert!(d.pairwise_joint(e, f) >= p[e] * p[f] - 1e-12);
                }
            }
        }
    }
}
