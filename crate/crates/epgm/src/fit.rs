//! Gradient-based fitting of binding parameters (and optionally the
//! class-pair edge probabilities) to target triangle/wedge counts.
//!
//! Parameters live on the logit scale so box constraints disappear, and the
//! class-aggregated expected counts are differentiated exactly with
//! fixed-width dual numbers: one node triple touches at most 3 distinct
//! classes and 3 distinct class pairs, so 6 slots always suffice.

use crate::binding::{BindingParams, ResidualCoupling, Scheme};
use crate::counts::{class_triples, ExpectedCounts};
use crate::error::{Error, Result};
use crate::model::{ClassView, EdgeProbModel};
use crate::motif::{eigm_law, local_law, parallel_law};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitObjective {
    pub target_triangles: f64,
    /// Optional second moment-matching term.
    pub target_wedges: Option<f64>,
}

impl FitObjective {
    pub fn triangles(target: f64) -> Self {
        Self {
            target_triangles: target,
            target_wedges: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub init_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-8,
            init_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub binding: BindingParams,
    /// Refitted model when the class-pair probabilities were optimized too.
    pub model: Option<EdgeProbModel>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Parameters pinned at the boundary with the objective still large:
    /// the target is out of reach for this scheme.
    pub saturated: bool,
    pub expected: ExpectedCounts,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-9, 1.0 - 1e-9);
    (p / (1.0 - p)).ln()
}

/// Warm-start from the template's g only when every entry is interior;
/// boundary values have a vanishing gradient through the sigmoid and would
/// pin the optimizer at the start.
fn init_logits(g: &[f64], nc: usize) -> Vec<f64> {
    if g.len() == nc && g.iter().all(|&v| v > 1e-6 && v < 1.0 - 1e-6) {
        g.iter().map(|&v| logit(v)).collect()
    } else {
        vec![0.0; nc]
    }
}

fn pairwise_joint_s<S: Scalar>(dist: &[S; 8], e: usize, f: usize) -> S {
    let need = (1u8 << e) | (1u8 << f);
    let mut out = S::constant(0.0);
    for (mask, &pr) in dist.iter().enumerate() {
        if mask as u8 & need == need {
            out = out + pr;
        }
    }
    out
}

/// Class-aggregated expected counts with exact gradients with respect to the
/// per-class g and the per-class-pair p.
struct CountsGrad {
    triangles: f64,
    wedges: f64,
    d_tri_g: Vec<f64>,
    d_wed_g: Vec<f64>,
    d_tri_p: Vec<Vec<f64>>,
    d_wed_p: Vec<Vec<f64>>,
}

fn aggregate_grad(
    sizes: &[usize],
    p: &[Vec<f64>],
    g: &[f64],
    scheme: Scheme,
    rounds: u32,
    residual: ResidualCoupling,
) -> CountsGrad {
    let nc = sizes.len();
    let mut out = CountsGrad {
        triangles: 0.0,
        wedges: 0.0,
        d_tri_g: vec![0.0; nc],
        d_wed_g: vec![0.0; nc],
        d_tri_p: vec![vec![0.0; nc]; nc],
        d_wed_p: vec![vec![0.0; nc]; nc],
    };
    type D = Dual<6>;
    for ct in class_triples(sizes) {
        if ct.weight == 0.0 {
            continue;
        }
        let cls = ct.classes;
        // Slot layout: 0..3 the distinct classes (g), 3..6 the distinct
        // class pairs (p).
        let mut uniq_cls: Vec<usize> = cls.to_vec();
        uniq_cls.dedup();
        let g_slot = |c: usize| uniq_cls.iter().position(|&x| x == c).unwrap();
        let pairs = [
            (cls[0].min(cls[1]), cls[0].max(cls[1])),
            (cls[0].min(cls[2]), cls[0].max(cls[2])),
            (cls[1].min(cls[2]), cls[1].max(cls[2])),
        ];
        let mut uniq_pairs: Vec<(usize, usize)> = Vec::new();
        for &pr in &pairs {
            if !uniq_pairs.contains(&pr) {
                uniq_pairs.push(pr);
            }
        }
        let p_slot = |pr: (usize, usize)| 3 + uniq_pairs.iter().position(|&x| x == pr).unwrap();

        let p_d: [D; 3] = [
            D::var(p[pairs[0].0][pairs[0].1], p_slot(pairs[0])),
            D::var(p[pairs[1].0][pairs[1].1], p_slot(pairs[1])),
            D::var(p[pairs[2].0][pairs[2].1], p_slot(pairs[2])),
        ];
        let g_d: [D; 3] = [
            D::var(g[cls[0]], g_slot(cls[0])),
            D::var(g[cls[1]], g_slot(cls[1])),
            D::var(g[cls[2]], g_slot(cls[2])),
        ];
        let dist = match scheme {
            Scheme::EdgeIndependent => eigm_law(p_d),
            Scheme::LocalBinding => local_law(p_d, g_d, rounds),
            Scheme::ParallelBinding => parallel_law(p_d, g_d, rounds, residual),
        };
        let tri = dist[0b111];
        let wed = pairwise_joint_s(&dist, 0, 1)
            + pairwise_joint_s(&dist, 0, 2)
            + pairwise_joint_s(&dist, 1, 2);
        out.triangles += ct.weight * tri.v;
        out.wedges += ct.weight * wed.v;
        for (slot, &c) in uniq_cls.iter().enumerate() {
            out.d_tri_g[c] += ct.weight * tri.d[slot];
            out.d_wed_g[c] += ct.weight * wed.d[slot];
        }
        for (i, &(a, b)) in uniq_pairs.iter().enumerate() {
            out.d_tri_p[a][b] += ct.weight * tri.d[3 + i];
            out.d_wed_p[a][b] += ct.weight * wed.d[3 + i];
        }
    }
    out
}

/// Expected counts plus their exact gradient with respect to the per-class
/// node-sampling probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsGradient {
    pub counts: ExpectedCounts,
    pub d_triangles: Vec<f64>,
    pub d_wedges: Vec<f64>,
}

/// Differentiated class-aggregated expected counts, exposed for validation
/// against finite differences.
pub fn expected_counts_gradient(m: &EdgeProbModel, b: &BindingParams) -> Result<CountsGradient> {
    b.validate(m)?;
    if b.scheme == Scheme::EdgeIndependent {
        return Err(Error::InvalidBinding(
            "the edge-independent scheme has no g parameters".into(),
        ));
    }
    let view = class_view_or_err(m)?;
    let agg = aggregate_grad(
        &view.sizes,
        &view.p,
        &b.g,
        b.scheme,
        b.rounds,
        b.residual_coupling,
    );
    Ok(CountsGradient {
        counts: ExpectedCounts {
            triangles: agg.triangles,
            wedges: agg.wedges,
        },
        d_triangles: agg.d_tri_g,
        d_wedges: agg.d_wed_g,
    })
}

fn class_view_or_err(m: &EdgeProbModel) -> Result<ClassView> {
    m.class_view().ok_or(Error::UnsupportedClassQuery)
}

fn check_template(template: &BindingParams, obj: &FitObjective) -> Result<()> {
    if template.scheme == Scheme::EdgeIndependent {
        return Err(Error::InvalidBinding(
            "the edge-independent scheme has no binding parameters to fit".into(),
        ));
    }
    if template.scheme == Scheme::ParallelBinding && template.rounds == 0 {
        return Err(Error::InvalidBinding("parallel binding needs R >= 1".into()));
    }
    if template.scheme == Scheme::LocalBinding && template.rounds == 0 {
        return Err(Error::InvalidBinding("local binding needs R >= 1".into()));
    }
    if !(obj.target_triangles > 0.0) {
        return Err(Error::Numerical(
            "target triangle count must be positive".into(),
        ));
    }
    if let Some(w) = obj.target_wedges {
        if !(w > 0.0) {
            return Err(Error::Numerical(
                "target wedge count must be positive".into(),
            ));
        }
    }
    Ok(())
}

/// Shared minimization loop: descent along the gradient direction scaled so
/// `step` is the largest per-coordinate displacement, with backtracking. The
/// loss is target-normalized and so can be enormous far from the solution;
/// decoupling the step size from the gradient magnitude keeps the iterates
/// from flying off to the logit boundary.
fn minimize(
    x: &mut [f64],
    opts: &FitOptions,
    mut loss_grad: impl FnMut(&[f64]) -> (f64, Vec<f64>),
) -> (f64, usize, bool) {
    let (mut loss, mut grad) = loss_grad(x);
    let mut step = opts.init_step;
    let mut iters = 0;
    let mut converged = false;
    let mut checkpoint = loss;
    // Heavy-ball velocity: narrow curved valleys otherwise reduce the line
    // search to tiny zigzag steps and convergence stalls for thousands of
    // iterations.
    let mut vel = vec![0.0f64; x.len()];
    while iters < opts.max_iters {
        iters += 1;
        let gmax = grad.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if loss < opts.tol || gmax < opts.tol {
            converged = true;
            break;
        }
        if iters % 25 == 0 {
            // Stagnation cutoff: competing targets can leave a compromise
            // point that descent only polishes; don't burn the full budget.
            if checkpoint - loss < 1e-2 * loss.max(1e-12) {
                converged = loss < 1e-4;
                break;
            }
            checkpoint = loss;
        }
        let mut accepted = false;
        for attempt in 0..60 {
            // First attempt carries momentum; on rejection fall back to a
            // plain (monotone) gradient step and backtrack.
            let beta = if attempt == 0 { 0.9 } else { 0.0 };
            let trial: Vec<f64> = x
                .iter()
                .zip(grad.iter().zip(&vel))
                .map(|(xi, (di, vi))| {
                    (xi + beta * vi - step * di / gmax).clamp(-30.0, 30.0)
                })
                .collect();
            let (trial_loss, trial_grad) = loss_grad(&trial);
            if trial_loss < loss {
                for (v, (ti, xi)) in vel.iter_mut().zip(trial.iter().zip(x.iter())) {
                    *v = ti - xi;
                }
                x.copy_from_slice(&trial);
                loss = trial_loss;
                grad = trial_grad;
                step = (step * 2.0).min(2.0);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step < 1e-13 {
            // No descent direction at float precision: treat as a stationary
            // point.
            converged = loss < 1e-4;
            break;
        }
    }
    (loss, iters, converged)
}

fn report_for(
    m: &EdgeProbModel,
    template: &BindingParams,
    g: Vec<f64>,
    model: Option<EdgeProbModel>,
    objective: f64,
    iterations: usize,
    converged: bool,
    x_g: &[f64],
) -> Result<FitReport> {
    let binding = BindingParams {
        scheme: template.scheme,
        rounds: template.rounds,
        g,
        residual_coupling: template.residual_coupling,
    };
    let eval_model = model.as_ref().unwrap_or(m);
    let expected = crate::counts::expected_counts(eval_model, &binding)?;
    let saturated = objective > 1e-4 && x_g.iter().any(|&x| x.abs() > 7.0);
    Ok(FitReport {
        binding,
        model,
        objective,
        iterations,
        converged,
        saturated,
        expected,
    })
}

/// Fit the per-class node-sampling probabilities of a binding scheme so the
/// expected counts match the objective. The edge-probability model is held
/// fixed, so every pair marginal is preserved exactly.
pub fn fit_binding(
    m: &EdgeProbModel,
    template: &BindingParams,
    obj: &FitObjective,
    opts: &FitOptions,
) -> Result<FitReport> {
    check_template(template, obj)?;
    let view = class_view_or_err(m)?;
    let nc = view.sizes.len();
    let mut x = init_logits(&template.g, nc);
    let t_tri = obj.target_triangles;
    let t_wed = obj.target_wedges;

    let loss_grad = |x: &[f64]| -> (f64, Vec<f64>) {
        let g: Vec<f64> = x.iter().map(|&xi| sigmoid(xi)).collect();
        let agg = aggregate_grad(
            &view.sizes,
            &view.p,
            &g,
            template.scheme,
            template.rounds,
            template.residual_coupling,
        );
        let r_tri = 1.0 - agg.triangles / t_tri;
        let mut loss = r_tri * r_tri;
        let mut grad: Vec<f64> = (0..nc)
            .map(|c| 2.0 * r_tri * (-agg.d_tri_g[c] / t_tri))
            .collect();
        if let Some(tw) = t_wed {
            let r_wed = 1.0 - agg.wedges / tw;
            loss += r_wed * r_wed;
            for c in 0..nc {
                grad[c] += 2.0 * r_wed * (-agg.d_wed_g[c] / tw);
            }
        }
        for c in 0..nc {
            grad[c] *= g[c] * (1.0 - g[c]); // chain through the logit
        }
        (loss, grad)
    };

    let (objective, iterations, converged) = minimize(&mut x, opts, loss_grad);
    let g: Vec<f64> = x.iter().map(|&xi| sigmoid(xi)).collect();
    report_for(m, template, g, None, objective, iterations, converged, &x)
}

/// Fit binding parameters and the class-pair edge probabilities jointly. A
/// quadratic penalty keeps the expected edge count at `target_edges`
/// (defaulting to the input model's), since the marginals are now free.
pub fn fit_binding_joint(
    m: &EdgeProbModel,
    template: &BindingParams,
    obj: &FitObjective,
    target_edges: Option<f64>,
    opts: &FitOptions,
) -> Result<FitReport> {
    check_template(template, obj)?;
    let view = class_view_or_err(m)?;
    let structure = m.class_structure();
    let nc = view.sizes.len();
    let t_edges = target_edges.unwrap_or_else(|| m.total_pair_prob());
    if !(t_edges > 0.0) {
        return Err(Error::Numerical(
            "target edge count must be positive".into(),
        ));
    }
    // Unordered pair counts n_ab, used by the edge-count penalty.
    let mut pair_count = vec![vec![0.0; nc]; nc];
    for a in 0..nc {
        let na = view.sizes[a] as f64;
        pair_count[a][a] = na * (na - 1.0) / 2.0;
        for b in (a + 1)..nc {
            pair_count[a][b] = na * view.sizes[b] as f64;
        }
    }

    // x = [g logits | upper-triangular p logits].
    let pair_index: Vec<(usize, usize)> = (0..nc)
        .flat_map(|a| (a..nc).map(move |b| (a, b)))
        .collect();
    let mut x = init_logits(&template.g, nc);
    for &(a, b) in &pair_index {
        x.push(logit(view.p[a][b]));
    }
    let t_tri = obj.target_triangles;
    let t_wed = obj.target_wedges;

    let loss_grad = |x: &[f64]| -> (f64, Vec<f64>) {
        let g: Vec<f64> = x[..nc].iter().map(|&xi| sigmoid(xi)).collect();
        let mut p = vec![vec![0.0; nc]; nc];
        for (i, &(a, b)) in pair_index.iter().enumerate() {
            let v = sigmoid(x[nc + i]);
            p[a][b] = v;
            p[b][a] = v;
        }
        let agg = aggregate_grad(
            &view.sizes,
            &p,
            &g,
            template.scheme,
            template.rounds,
            template.residual_coupling,
        );
        let r_tri = 1.0 - agg.triangles / t_tri;
        let mut loss = r_tri * r_tri;
        let mut d_g: Vec<f64> = (0..nc)
            .map(|c| 2.0 * r_tri * (-agg.d_tri_g[c] / t_tri))
            .collect();
        let mut d_p: Vec<f64> = pair_index
            .iter()
            .map(|&(a, b)| 2.0 * r_tri * (-agg.d_tri_p[a][b] / t_tri))
            .collect();
        if let Some(tw) = t_wed {
            let r_wed = 1.0 - agg.wedges / tw;
            loss += r_wed * r_wed;
            for c in 0..nc {
                d_g[c] += 2.0 * r_wed * (-agg.d_wed_g[c] / tw);
            }
            for (i, &(a, b)) in pair_index.iter().enumerate() {
                d_p[i] += 2.0 * r_wed * (-agg.d_wed_p[a][b] / tw);
            }
        }
        // Edge-count penalty.
        let e_edges: f64 = pair_index
            .iter()
            .map(|&(a, b)| pair_count[a][b] * p[a][b])
            .sum();
        let r_e = 1.0 - e_edges / t_edges;
        loss += r_e * r_e;
        for (i, &(a, b)) in pair_index.iter().enumerate() {
            d_p[i] += 2.0 * r_e * (-pair_count[a][b] / t_edges);
        }

        let mut grad = Vec::with_capacity(x.len());
        for c in 0..nc {
            grad.push(d_g[c] * g[c] * (1.0 - g[c]));
        }
        for (i, &(a, b)) in pair_index.iter().enumerate() {
            grad.push(d_p[i] * p[a][b] * (1.0 - p[a][b]));
        }
        (loss, grad)
    };

    let (objective, iterations, converged) = minimize(&mut x, opts, loss_grad);
    let g: Vec<f64> = x[..nc].iter().map(|&xi| sigmoid(xi)).collect();
    let mut p_block = vec![vec![0.0; nc]; nc];
    for (i, &(a, b)) in pair_index.iter().enumerate() {
        let v = sigmoid(x[nc + i]);
        p_block[a][b] = v;
        p_block[b][a] = v;
    }
    let refit = EdgeProbModel::Sb {
        block_of: structure.class_of,
        block_sizes: structure.class_size,
        p_block,
    };
    report_for(
        m,
        template,
        g,
        Some(refit),
        objective,
        iterations,
        converged,
        &x[..nc],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::expected_counts;
    use crate::model::cl_from_degrees;

    #[test]
    fn aggregate_gradient_matches_finite_differences() {
        let m = cl_from_degrees(vec![1.0, 2.0, 2.0, 3.0]);
        let view = m.class_view().unwrap();
        let g = [0.4, 0.7, 0.55];
        for (scheme, residual) in [
            (Scheme::LocalBinding, ResidualCoupling::Shared),
            (Scheme::ParallelBinding, ResidualCoupling::Shared),
            (Scheme::ParallelBinding, ResidualCoupling::Independent),
        ] {
            let agg = aggregate_grad(&view.sizes, &view.p, &g, scheme, 3, residual);
            let h = 1e-6;
            for c in 0..3 {
                let mut gp = g;
                gp[c] += h;
                let mut gm = g;
                gm[c] -= h;
                let up = aggregate_grad(&view.sizes, &view.p, &gp, scheme, 3, residual);
                let dn = aggregate_grad(&view.sizes, &view.p, &gm, scheme, 3, residual);
                let fd_tri = (up.triangles - dn.triangles) / (2.0 * h);
                let fd_wed = (up.wedges - dn.wedges) / (2.0 * h);
                assert!(
                    (agg.d_tri_g[c] - fd_tri).abs() < 1e-5,
                    "{scheme:?} class {c}: {} vs {}",
                    agg.d_tri_g[c],
                    fd_tri
                );
                assert!((agg.d_wed_g[c] - fd_wed).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn aggregate_p_gradient_matches_finite_differences() {
        let m = cl_from_degrees(vec![1.0, 2.0, 3.0]);
        let view = m.class_view().unwrap();
        let g = [0.5, 0.6, 0.7];
        let agg = aggregate_grad(
            &view.sizes,
            &view.p,
            &g,
            Scheme::LocalBinding,
            2,
            ResidualCoupling::Shared,
        );
        let h = 1e-6;
        for a in 0..3 {
            for b in a..3 {
                let perturb = |delta: f64| {
                    let mut p = view.p.clone();
                    p[a][b] += delta;
                    p[b][a] = p[a][b];
                    aggregate_grad(
                        &view.sizes,
                        &p,
                        &g,
                        Scheme::LocalBinding,
                        2,
                        ResidualCoupling::Shared,
                    )
                };
                let fd = (perturb(h).triangles - perturb(-h).triangles) / (2.0 * h);
                assert!(
                    (agg.d_tri_p[a][b] - fd).abs() < 1e-5,
                    "pair ({a},{b}): {} vs {fd}",
                    agg.d_tri_p[a][b]
                );
            }
        }
    }

    #[test]
    fn fit_recovers_reachable_triangle_target() {
        let m = EdgeProbModel::Er { n: 30, p0: 0.2 };
        for (template, planted) in [
            (BindingParams::local(vec![0.0], 3), vec![0.6]),
            (
                BindingParams::parallel(vec![0.0], 4, ResidualCoupling::Shared),
                vec![0.5],
            ),
        ] {
            let mut truth = template.clone();
            truth.g = planted.clone();
            let target = expected_counts(&m, &truth).unwrap().triangles;
            let report = fit_binding(
                &m,
                &template,
                &FitObjective::triangles(target),
                &FitOptions::default(),
            )
            .unwrap();
            assert!(report.converged, "{report:?}");
            assert!(
                (report.expected.triangles / target - 1.0).abs() < 1e-4,
                "{} vs {target}",
                report.expected.triangles
            );
        }
    }

    #[test]
    fn fit_flags_unreachable_target() {
        let m = EdgeProbModel::Er { n: 20, p0: 0.1 };
        // Even full binding cannot produce this many expected triangles.
        let report = fit_binding(
            &m,
            &BindingParams::local(vec![0.0], 3),
            &FitObjective::triangles(1e6),
            &FitOptions::default(),
        )
        .unwrap();
        assert!(report.saturated);
        assert!(report.binding.g[0] > 0.99);
    }

    #[test]
    fn fit_rejects_eigm_and_bad_targets() {
        let m = EdgeProbModel::Er { n: 10, p0: 0.5 };
        assert!(fit_binding(
            &m,
            &BindingParams::eigm(),
            &FitObjective::triangles(1.0),
            &FitOptions::default()
        )
        .is_err());
        assert!(fit_binding(
            &m,
            &BindingParams::local(vec![0.5], 2),
            &FitObjective::triangles(0.0),
            &FitOptions::default()
        )
        .is_err());
    }

    #[test]
    fn joint_fit_matches_triangles_and_edge_count() {
        let m = cl_from_degrees(vec![1.0, 1.0, 2.0, 2.0, 3.0]);
        let edges = m.total_pair_prob();
        let base = expected_counts(&m, &BindingParams::local(vec![0.5; 3], 2)).unwrap();
        let target = base.triangles * 1.5;
        let report = fit_binding_joint(
            &m,
            &BindingParams::local(vec![0.5; 3], 2),
            &FitObjective::triangles(target),
            None,
            &FitOptions::default(),
        )
        .unwrap();
        let refit = report.model.as_ref().unwrap();
        assert!(
            (report.expected.triangles / target - 1.0).abs() < 1e-2,
            "{} vs {target}",
            report.expected.triangles
        );
        assert!((refit.total_pair_prob() / edges - 1.0).abs() < 1e-2);
    }

    #[test]
    fn kr_fit_unsupported() {
        let m = crate::model::load_kr([[0.9, 0.5], [0.5, 0.1]], 2).unwrap();
        assert!(matches!(
            fit_binding(
                &m,
                &BindingParams::local(vec![0.5; 3], 2),
                &FitObjective::triangles(1.0),
                &FitOptions::default()
            ),
            Err(Error::UnsupportedClassQuery)
        ));
    }
}
