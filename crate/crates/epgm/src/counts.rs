//! Expected triangle and wedge counts, aggregated over node-equivalence
//! classes instead of iterating all `O(n^3)` triples, plus the analytic
//! expected edge overlap between independent samples.

use crate::binding::{BindingParams, Scheme};
use crate::error::{Error, Result};
use crate::model::EdgeProbModel;
use crate::motif::{motif3, TripleSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedCounts {
    pub triangles: f64,
    pub wedges: f64,
}

/// One class multiset `{a <= b <= c}` with the number of node triples
/// realizing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTriple {
    pub classes: [usize; 3],
    pub weight: f64,
}

/// All class multisets with their triple counts.
pub fn class_triples(sizes: &[usize]) -> Vec<ClassTriple> {
    let choose2 = |n: f64| n * (n - 1.0) / 2.0;
    let choose3 = |n: f64| n * (n - 1.0) * (n - 2.0) / 6.0;
    let mut out = Vec::new();
    for a in 0..sizes.len() {
        let na = sizes[a] as f64;
        out.push(ClassTriple {
            classes: [a, a, a],
            weight: choose3(na),
        });
        for b in (a + 1)..sizes.len() {
            let nb = sizes[b] as f64;
            out.push(ClassTriple {
                classes: [a, a, b],
                weight: choose2(na) * nb,
            });
            out.push(ClassTriple {
                classes: [a, b, b],
                weight: na * choose2(nb),
            });
            for c in (b + 1)..sizes.len() {
                out.push(ClassTriple {
                    classes: [a, b, c],
                    weight: na * nb * sizes[c] as f64,
                });
            }
        }
    }
    out
}

/// Triple realization spec from per-pair marginals and per-node g under the
/// configured scheme.
pub fn triple_spec(p: [f64; 3], g: [f64; 3], b: &BindingParams) -> TripleSpec {
    match b.scheme {
        Scheme::EdgeIndependent => TripleSpec::eigm(p),
        Scheme::LocalBinding => TripleSpec::local(p, g, b.rounds),
        Scheme::ParallelBinding => TripleSpec::parallel(p, g, b.rounds, b.residual_coupling),
    }
}

/// Expected wedge count of one triple: sum over the three center choices of
/// the joint probability of both incident pairs (triangles count as three
/// wedges, matching the empirical convention).
pub fn triple_wedges(d: &crate::motif::MotifDistribution3) -> f64 {
    d.pairwise_joint(0, 1) + d.pairwise_joint(0, 2) + d.pairwise_joint(1, 2)
}

/// Expected triangle and wedge counts under `m` realized with `b`.
pub fn expected_counts(m: &EdgeProbModel, b: &BindingParams) -> Result<ExpectedCounts> {
    b.validate(m)?;
    match m.class_view() {
        Some(view) => {
            let class_g = |c: usize| {
                if b.scheme == Scheme::EdgeIndependent {
                    0.0
                } else {
                    b.g[c]
                }
            };
            let mut triangles = 0.0;
            let mut wedges = 0.0;
            for ct in class_triples(&view.sizes) {
                if ct.weight == 0.0 {
                    continue;
                }
                let [a, bb, c] = ct.classes;
                let p = [view.p[a][bb], view.p[a][c], view.p[bb][c]];
                let g = [class_g(a), class_g(bb), class_g(c)];
                let d = motif3(&triple_spec(p, g, b));
                triangles += ct.weight * d.triangle();
                wedges += ct.weight * triple_wedges(&d);
            }
            Ok(ExpectedCounts { triangles, wedges })
        }
        None => kr_expected_counts(m, b),
    }
}

/// Multinomial coefficient `total! / prod(parts!)` as a float.
fn multinomial(total: u32, parts: &[u32]) -> f64 {
    let mut rem = total;
    let mut out = 1.0;
    for &c in parts {
        out *= binomial(rem, c);
        rem -= c;
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

fn compositions(total: u32, slots: usize, mut visit: impl FnMut(&[u32])) {
    fn rec(total: u32, slot: usize, buf: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if slot + 1 == buf.capacity() {
            buf.push(total);
            visit(buf);
            buf.pop();
            return;
        }
        for c in 0..=total {
            buf.push(c);
            rec(total - c, slot + 1, buf, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(slots);
    rec(total, 0, &mut buf, &mut visit);
}

/// KR aggregation: a node triple is determined up to bit-position permutation
/// by how many positions carry each of the 8 joint bit patterns. Enumerating
/// compositions of k over the patterns beats iterating `8^k` triples.
fn kr_expected_counts(m: &EdgeProbModel, b: &BindingParams) -> Result<ExpectedCounts> {
    let (theta, k) = match m {
        EdgeProbModel::Kr { theta, k } => (*theta, *k),
        _ => unreachable!("class-view models handled by the caller"),
    };
    let mut triangles = 0.0;
    let mut wedges = 0.0;
    compositions(k, 8, |c| {
        // Pattern index bits: 0 -> node u, 1 -> node v, 2 -> node w.
        let differs = |i: usize, j: usize| {
            c.iter()
                .enumerate()
                .any(|(pat, &cnt)| cnt > 0 && (pat >> i) & 1 != (pat >> j) & 1)
        };
        if !(differs(0, 1) && differs(0, 2) && differs(1, 2)) {
            return; // coincident node labels
        }
        // Ordered labeled triples per composition; each unordered triple of
        // distinct nodes appears 3! times.
        let weight = multinomial(k, c) / 6.0;
        let mut p = [1.0f64; 3];
        let mut pop = [0u32; 3];
        for (pat, &cnt) in c.iter().enumerate() {
            let bits = [(pat & 1), (pat >> 1) & 1, (pat >> 2) & 1];
            p[0] *= theta[bits[0]][bits[1]].powi(cnt as i32);
            p[1] *= theta[bits[0]][bits[2]].powi(cnt as i32);
            p[2] *= theta[bits[1]][bits[2]].powi(cnt as i32);
            for (node, &bit) in bits.iter().enumerate() {
                pop[node] += bit as u32 * cnt;
            }
        }
        let g = if b.scheme == Scheme::EdgeIndependent {
            [0.0; 3]
        } else {
            [
                b.g[pop[0] as usize],
                b.g[pop[1] as usize],
                b.g[pop[2] as usize],
            ]
        };
        let d = motif3(&triple_spec(p, g, b));
        triangles += weight * d.triangle();
        wedges += weight * triple_wedges(&d);
    });
    Ok(ExpectedCounts { triangles, wedges })
}

/// Expected edge overlap between two independent samples: since the samples
/// are independent and share marginals, `E[|E1 ∩ E2|] / E[|E|]` is
/// `sum p^2 / sum p` regardless of the binding scheme.
pub fn analytic_overlap(m: &EdgeProbModel) -> Result<f64> {
    let (sum_p, sum_p2) = match m.class_view() {
        Some(view) => {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for a in 0..view.sizes.len() {
                let na = view.sizes[a] as f64;
                let within = na * (na - 1.0) / 2.0;
                sum += within * view.p[a][a];
                sum2 += within * view.p[a][a] * view.p[a][a];
                for b in (a + 1)..view.sizes.len() {
                    let cross = na * view.sizes[b] as f64;
                    sum += cross * view.p[a][b];
                    sum2 += cross * view.p[a][b] * view.p[a][b];
                }
            }
            (sum, sum2)
        }
        None => kr_pair_prob_sums(m),
    };
    if sum_p <= 0.0 {
        return Err(Error::UndefinedOverlap);
    }
    Ok(sum_p2 / sum_p)
}

/// `(sum p, sum p^2)` over unordered KR node pairs via compositions of k over
/// the 4 joint bit patterns of a pair.
fn kr_pair_prob_sums(m: &EdgeProbModel) -> (f64, f64) {
    let (theta, k) = match m {
        EdgeProbModel::Kr { theta, k } => (*theta, *k),
        _ => unreachable!(),
    };
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    compositions(k, 4, |c| {
        // Patterns (b_u, b_v): index bit 0 -> u, bit 1 -> v.
        if c[1] == 0 && c[2] == 0 {
            return; // u == v
        }
        let weight = multinomial(k, c) / 2.0;
        let p = theta[0][0].powi(c[0] as i32)
            * theta[1][0].powi(c[1] as i32)
            * theta[0][1].powi(c[2] as i32)
            * theta[1][1].powi(c[3] as i32);
        sum += weight * p;
        sum2 += weight * p * p;
    });
    (sum, sum2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binding::ResidualCoupling;
    use crate::model::{cl_from_degrees, fit_sb, load_kr};
    use crate::oracle::naive_expected_counts;

    #[test]
    fn class_triples_cover_all_node_triples() {
        let sizes = [3usize, 1, 4];
        let total: f64 = class_triples(&sizes).iter().map(|t| t.weight).sum();
        assert_eq!(total, 56.0); // C(8, 3)
    }

    #[test]
    fn er_eigm_closed_form() {
        let m = EdgeProbModel::Er { n: 10, p0: 0.3 };
        let c = expected_counts(&m, &BindingParams::eigm()).unwrap();
        let triples = 120.0;
        assert!((c.triangles - triples * 0.3f64.powi(3)).abs() < 1e-9);
        assert!((c.wedges - 3.0 * triples * 0.09).abs() < 1e-9);
    }

    #[test]
    fn aggregation_matches_naive_cl() {
        let m = cl_from_degrees(vec![1.0, 2.0, 2.0, 3.0, 1.0]);
        for b in [
            BindingParams::eigm(),
            BindingParams::local(vec![0.4, 0.7, 0.2], 3),
            BindingParams::parallel(vec![0.4, 0.7, 0.2], 4, ResidualCoupling::Shared),
            BindingParams::parallel(vec![0.4, 0.7, 0.2], 4, ResidualCoupling::Independent),
        ] {
            let fast = expected_counts(&m, &b).unwrap();
            let naive = naive_expected_counts(&m, &b).unwrap();
            assert!((fast.triangles - naive.triangles).abs() < 1e-10);
            assert!((fast.wedges - naive.wedges).abs() < 1e-10);
        }
    }

    #[test]
    fn aggregation_matches_naive_sb() {
        let g = crate::graph::Graph::from_edges(
            6,
            [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)],
        )
        .unwrap();
        let m = fit_sb(&g, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let b = BindingParams::local(vec![0.8, 0.3], 5);
        let fast = expected_counts(&m, &b).unwrap();
        let naive = naive_expected_counts(&m, &b).unwrap();
        assert!((fast.triangles - naive.triangles).abs() < 1e-10);
        assert!((fast.wedges - naive.wedges).abs() < 1e-10);
    }

    #[test]
    fn kr_aggregation_matches_naive() {
        let m = load_kr([[0.9, 0.5], [0.5, 0.2]], 3).unwrap();
        for b in [
            BindingParams::eigm(),
            BindingParams::local(vec![0.9, 0.6, 0.3, 0.1], 2),
            BindingParams::parallel(
                vec![0.9, 0.6, 0.3, 0.1],
                3,
                ResidualCoupling::Independent,
            ),
        ] {
            let fast = expected_counts(&m, &b).unwrap();
            let naive = naive_expected_counts(&m, &b).unwrap();
            assert!(
                (fast.triangles - naive.triangles).abs() < 1e-9,
                "{:?} vs {:?}",
                fast,
                naive
            );
            assert!((fast.wedges - naive.wedges).abs() < 1e-9);
        }
    }

    #[test]
    fn binding_raises_triangles_not_wedge_floor() {
        // Same marginals: binding can only increase E[triangles].
        let m = cl_from_degrees(vec![2.0, 3.0, 1.0, 2.0]);
        let base = expected_counts(&m, &BindingParams::eigm()).unwrap();
        let bound =
            expected_counts(&m, &BindingParams::local(vec![0.9, 0.9, 0.9], 2)).unwrap();
        assert!(bound.triangles > base.triangles);
    }

    #[test]
    fn overlap_er_is_p() {
        let m = EdgeProbModel::Er { n: 50, p0: 0.37 };
        assert!((analytic_overlap(&m).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_direct_sums() {
        let models = [
            cl_from_degrees(vec![1.0, 2.0, 2.0, 3.0]),
            load_kr([[0.8, 0.4], [0.4, 0.3]], 3).unwrap(),
        ];
        for m in models {
            let n = m.node_count() as u32;
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for u in 0..n {
                for v in (u + 1)..n {
                    let p = m.prob(u, v);
                    sum += p;
                    sum2 += p * p;
                }
            }
            assert!((analytic_overlap(&m).unwrap() - sum2 / sum).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_undefined_for_empty_model() {
        let m = EdgeProbModel::Er { n: 5, p0: 0.0 };
        assert!(matches!(
            analytic_overlap(&m),
            Err(Error::UndefinedOverlap)
        ));
    }
}
