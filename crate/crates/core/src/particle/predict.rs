use serde::{Deserialize, Serialize};

use crate::leaf::StudentT;

/// Posterior predictive summary at one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PredictiveSummary {
    Real {
        mean: f64,
        /// `None` when some component has `df <= 2`.
        variance: Option<f64>,
        /// 5% and 95% mixture quantiles.
        lower: f64,
        upper: f64,
    },
    Class {
        probs: Vec<f64>,
        class: usize,
        entropy: f64,
    },
}

impl PredictiveSummary {
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Real { mean, .. } => Some(*mean),
            Self::Class { .. } => None,
        }
    }
}

/// Equally weighted mixture of Student-t components.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub components: Vec<StudentT>,
}

impl Mixture {
    pub fn new(components: Vec<StudentT>) -> Self {
        assert!(!components.is_empty(), "mixture needs a component");
        Self { components }
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.location).sum::<f64>() / self.components.len() as f64
    }

    /// Mean of the component variances plus the variance of the component
    /// means.
    pub fn variance(&self) -> Option<f64> {
        let n = self.components.len() as f64;
        let mut second = 0.0;
        for c in &self.components {
            second += c.variance()? + c.location * c.location;
        }
        let m = self.mean();
        Some((second / n - m * m).max(0.0))
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.components.iter().map(|c| c.cdf(y)).sum::<f64>() / self.components.len() as f64
    }

    /// Quantile by bisection between the extreme component quantiles.
    pub fn quantile(&self, p: f64) -> f64 {
        if self.components.len() == 1 {
            return self.components[0].quantile(p);
        }
        let qs = self.components.iter().map(|c| c.quantile(p));
        let (mut lo, mut hi) = qs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q), b.max(q)));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn summary(&self) -> PredictiveSummary {
        PredictiveSummary::Real {
            mean: self.mean(),
            variance: self.variance(),
            lower: self.quantile(0.05),
            upper: self.quantile(0.95),
        }
    }
}

/// Natural-log entropy, with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Average of per-particle class probability vectors.
pub fn class_summary(per_particle: &[Vec<f64>]) -> PredictiveSummary {
    let c = per_particle[0].len();
    let mut probs = vec![0.0; c];
    for p in per_particle {
        for (acc, v) in probs.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let n = per_particle.len() as f64;
    probs.iter_mut().for_each(|v| *v /= n);
    PredictiveSummary::Class { class: argmax(&probs), entropy: entropy(&probs), probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_component_moments() {
        // unit variance components: b c / (c - 2) = 1 with c = 4, b = 1/2
        let m = Mixture::new(vec![StudentT::new(0.0, 0.5, 4.0), StudentT::new(2.0, 0.5, 4.0)]);
        assert_eq!(m.mean(), 1.0);
        assert!((m.variance().unwrap() - 2.0).abs() < 1e-15);
        let single = Mixture::new(vec![StudentT::new(1.0, 2.0, 5.0)]);
        assert_eq!(single.quantile(0.05), StudentT::new(1.0, 2.0, 5.0).quantile(0.05));
        assert_eq!(Mixture::new(vec![StudentT::new(0.0, 1.0, 2.0)]).variance(), None);
    }

    #[test]
    fn quantiles_invert_the_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let comps: Vec<StudentT> = (0..7)
            .map(|_| StudentT::new(rng.random::<f64>() * 4.0, 0.1 + rng.random::<f64>(), 2.5 + rng.random::<f64>() * 10.0))
            .collect();
        let m = Mixture::new(comps);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let q = m.quantile(p);
            assert!((m.cdf(q) - p).abs() < 1e-9);
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn class_mixture_ties_and_entropy() {
        let s = class_summary(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        match s {
            PredictiveSummary::Class { probs, class, entropy } => {
                assert_eq!(probs, vec![0.5, 0.5, 0.0]);
                assert_eq!(class, 0);
                assert!((entropy - 2f64.ln()).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        assert!((entropy(&[1.0 / 3.0; 3]) - 1.098_612).abs() < 1e-6);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]), 0.0);
    }
}
