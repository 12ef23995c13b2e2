use rayon::prelude::*;

use crate::leaf::{standard_cdf, standard_pdf, Predictive, StudentT};
use crate::particle::{entropy, Cloud, Mixture, Particle};
use crate::tree::NodeId;

/// Expected improvement below `y_min` when the mean is `St(a, b, c)`:
/// `(y_min - a) T_c(z) + sqrt(b)/(c - 1) (c + z^2) t_c(z)`, `z = (y_min - a)/sqrt(b)`.
/// Needs `c > 1`.
pub fn expected_improvement_t(t: &StudentT, y_min: f64) -> Option<f64> {
    let c = t.df;
    if c <= 1.0 {
        return None;
    }
    let sb = t.scale2.sqrt();
    let gap = y_min - t.location;
    let z = gap / sb;
    Some((gap * standard_cdf(z, c) + sb / (c - 1.0) * (c + z * z) * standard_pdf(z, c)).max(0.0))
}

/// Particle average of the expected improvement at `x`, over the particles
/// whose leaf at `x` has `c > 1`; `None` if there are none.
pub fn expected_improvement(cloud: &Cloud, x: &[f64], y_min: f64) -> Option<f64> {
    let (mut total, mut k) = (0.0, 0usize);
    for t in cloud.mean_posteriors(x).into_iter().flatten() {
        if let Some(ei) = expected_improvement_t(&t, y_min) {
            total += ei;
            k += 1;
        }
    }
    (k > 0).then(|| total / k as f64)
}

/// Smallest posterior mean over a reference set.
pub fn y_min_hat(cloud: &Cloud, reference: &[Vec<f64>]) -> Option<f64> {
    reference.par_iter().filter_map(|x| cloud.posterior_mean(x)).reduce_with(f64::min)
}

/// Posterior standard deviation of the mean function at `x`: within-particle
/// variance plus the spread of particle means, over the particles whose leaf
/// at `x` has `c > 2`; `None` if there are none.
pub fn mean_sd(cloud: &Cloud, x: &[f64]) -> Option<f64> {
    let (mut m1, mut m2, mut v, mut k) = (0.0, 0.0, 0.0, 0usize);
    for t in cloud.mean_posteriors(x).into_iter().flatten() {
        let Some(var) = t.variance() else { continue };
        v += var;
        m1 += t.location;
        m2 += t.location * t.location;
        k += 1;
    }
    if k == 0 {
        return None;
    }
    let n = k as f64;
    let (m1, m2, v) = (m1 / n, m2 / n, v / n);
    Some((v + (m2 - m1 * m1).max(0.0)).sqrt())
}

/// `G(x; phi) = E[I(x)] + sd(yhat(x)) / phi`.
pub fn g_statistic(cloud: &Cloud, x: &[f64], y_min: f64, phi: f64) -> Option<f64> {
    Some(expected_improvement(cloud, x, y_min)? + mean_sd(cloud, x)? / phi)
}

/// Mixture predictive variance (active learning MacKay) over the particles
/// whose predictive at `x` has a variance; `None` if there are none.
pub fn alm_statistic(cloud: &Cloud, x: &[f64]) -> Option<f64> {
    let comps: Vec<StudentT> = cloud
        .leaf_stats_at(x)
        .filter_map(|s| match s.predictive(x)? {
            Predictive::Real(t) if t.variance().is_some() => Some(t),
            _ => None,
        })
        .collect();
    (!comps.is_empty()).then(|| Mixture::new(comps).variance()).flatten()
}

/// One particle's ALC terms for every candidate against `reference`, with
/// whether the candidate's leaf supports a variance reduction at all.
fn alc_terms(p: &Particle, candidates: &[Vec<f64>], reference: &[Vec<f64>]) -> Vec<Option<f64>> {
    let ref_leaves: Vec<NodeId> = reference.iter().map(|r| p.tree.route(r)).collect();
    candidates
        .iter()
        .map(|x| {
            let leaf = p.tree.route(x);
            let stats = p.stats(leaf);
            stats.variance_reduction(x, x)?;
            let mut total = 0.0;
            for (r, &l) in reference.iter().zip(&ref_leaves) {
                if l == leaf {
                    total += stats.variance_reduction(x, r).unwrap_or(0.0);
                }
            }
            Some(total)
        })
        .collect()
}

/// Particle average of per-candidate terms, over the particles where the
/// term is defined; 0 where no particle has one.
fn average_defined(per_particle: Vec<Vec<Option<f64>>>, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let (sum, k) = per_particle
                .iter()
                .filter_map(|v| v[j])
                .fold((0.0, 0usize), |(s, k), v| (s + v, k + 1));
            if k == 0 {
                0.0
            } else {
                sum / k as f64
            }
        })
        .collect()
}

/// Expected reduction in predictive variance summed over `reference`,
/// averaged over particles (active learning Cohn). Pairs in different
/// leaves contribute nothing; particles whose leaf at `x` is too small for
/// a variance reduction are left out of the average.
pub fn alc_statistic(cloud: &Cloud, x: &[f64], reference: &[Vec<f64>]) -> f64 {
    let cands = [x.to_vec()];
    let per: Vec<Vec<Option<f64>>> = cloud.particles().par_iter().map(|p| alc_terms(p, &cands, reference)).collect();
    average_defined(per, 1)[0]
}

/// ALC for every candidate against the candidate set itself, routing each
/// point once per particle.
pub fn alc_surface(cloud: &Cloud, candidates: &[Vec<f64>]) -> Vec<f64> {
    let per: Vec<Vec<Option<f64>>> =
        cloud.particles().par_iter().map(|p| alc_terms(p, candidates, candidates)).collect();
    average_defined(per, candidates.len())
}

/// Entropy of the averaged class probabilities.
pub fn entropy_statistic(cloud: &Cloud, x: &[f64]) -> Option<f64> {
    cloud.class_probabilities(x).map(|p| entropy(&p))
}

/// Index of the largest defined value; ties to the lowest index.
pub fn argmax_defined(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|b| b.0)
}
