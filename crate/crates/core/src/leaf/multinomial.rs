use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Class counts under the symmetric `Dir(1/C)` prior.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultinomialStats {
    pub counts: Vec<u64>,
}

impl MultinomialStats {
    pub fn empty(classes: usize) -> Self {
        Self { counts: vec![0; classes] }
    }

    pub fn from_labels(classes: usize, labels: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(classes);
        for c in labels {
            s.update(c);
        }
        s
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn update(&mut self, class: usize) {
        self.counts[class] += 1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self { counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect() }
    }

    pub fn log_marginal(&self) -> Option<f64> {
        let n = self.n();
        if n == 0 {
            return None;
        }
        let a = 1.0 / self.classes() as f64;
        let lg_a = ln_gamma(a);
        Some(-ln_gamma(n as f64 + 1.0) + self.counts.iter().map(|&z| ln_gamma(z as f64 + a) - lg_a).sum::<f64>())
    }

    /// `p_c = (z_c + 1/C) / (n + 1)`
    pub fn predictive(&self) -> Vec<f64> {
        let a = 1.0 / self.classes() as f64;
        let denom = self.n() as f64 + 1.0;
        self.counts.iter().map(|&z| (z as f64 + a) / denom).collect()
    }
}
