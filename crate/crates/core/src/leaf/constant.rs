use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::StudentT;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Constant-mean Gaussian leaf under the `1/sigma^2` reference prior.
///
/// Stored as count, running mean and centered sum of squares (Welford), which
/// carries the same information as `(n, sum_y, sum_y2)` without the
/// cancellation in `sum_y2 - n ybar^2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantStats {
    pub n: usize,
    pub mean: f64,
    /// `s^2 = sum (y - ybar)^2`
    pub ss: f64,
}

impl ConstantStats {
    pub fn from_values(ys: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::default();
        for y in ys {
            s.update(y);
        }
        s
    }

    pub fn update(&mut self, y: f64) {
        self.n += 1;
        let delta = y - self.mean;
        self.mean += delta / self.n as f64;
        self.ss += delta * (y - self.mean);
        if self.ss < 0.0 {
            self.ss = 0.0;
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return other.clone();
        }
        if other.n == 0 {
            return self.clone();
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * nb / n as f64,
            ss: self.ss + other.ss + delta * delta * na * nb / n as f64,
        }
    }

    fn usable(&self) -> bool {
        self.n >= 3 && self.ss > 0.0
    }

    pub fn log_marginal(&self) -> Option<f64> {
        if !self.usable() {
            return None;
        }
        let n = self.n as f64;
        let half_df = 0.5 * (n - 1.0);
        Some(-half_df * LN_2PI - 0.5 * n.ln() - half_df * (0.5 * self.ss).ln() + ln_gamma(half_df))
    }

    pub fn predictive(&self) -> Option<StudentT> {
        self.usable().then(|| {
            let n = self.n as f64;
            StudentT::new(self.mean, (1.0 + 1.0 / n) * self.ss / (n - 1.0), n - 1.0)
        })
    }

    pub fn mean_posterior(&self) -> Option<StudentT> {
        self.usable().then(|| {
            let n = self.n as f64;
            StudentT::new(self.mean, self.ss / (n * (n - 1.0)), n - 1.0)
        })
    }

    pub fn variance_reduction(&self) -> Option<f64> {
        if !self.usable() || self.n < 4 {
            return None;
        }
        let n = self.n as f64;
        let inv_n = 1.0 / n;
        Some(self.ss / (n - 3.0) * inv_n * inv_n / (1.0 + inv_n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_over_0_1_2() {
        let s = ConstantStats::from_values([0.0, 1.0, 2.0]);
        assert_eq!((s.n, s.mean, s.ss), (3, 1.0, 2.0));
    }

    #[test]
    fn marginal_of_0_1_2() {
        let s = ConstantStats::from_values([0.0, 1.0, 2.0]);
        let expect = (1.0 / (2.0 * std::f64::consts::PI * 3f64.sqrt())).ln();
        assert!((s.log_marginal().unwrap() - expect).abs() < 1e-12);
        assert!((expect - -2.387_183).abs() < 1e-6);
    }

    #[test]
    fn predictive_and_mean_posterior_of_0_1_2() {
        let s = ConstantStats::from_values([0.0, 1.0, 2.0]);
        let p = s.predictive().unwrap();
        assert!((p.location - 1.0).abs() < 1e-15);
        assert!((p.scale2 - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.df, 2.0);
        let m = s.mean_posterior().unwrap();
        assert!((m.scale2 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.df, 2.0);
    }

    #[test]
    fn variance_reduction_n5_s2_4() {
        let s = ConstantStats { n: 5, mean: 0.0, ss: 4.0 };
        assert!((s.variance_reduction().unwrap() - 0.066_666_666_666_666_7).abs() < 1e-15);
        assert_eq!(ConstantStats::from_values([0.0, 1.0, 2.0]).variance_reduction(), None);
    }

    #[test]
    fn degenerate_leaves_are_undefined() {
        assert_eq!(ConstantStats::from_values([1.0, 2.0]).log_marginal(), None);
        assert_eq!(ConstantStats::from_values([3.0; 4]).log_marginal(), None);
        assert_eq!(ConstantStats::from_values([3.0; 4]).predictive(), None);
    }

    #[test]
    fn merge_matches_batch_and_identity() {
        let a = ConstantStats::from_values([0.0, 1.0]);
        let b = ConstantStats::from_values([2.0]);
        let m = a.merge(&b);
        assert_eq!(m, ConstantStats::from_values([0.0, 1.0, 2.0]));
        assert_eq!(ConstantStats::default().merge(&b), b);
    }

    #[test]
    fn mean_posterior_shrinks_with_n() {
        let small = ConstantStats { n: 10, mean: 0.0, ss: 9.0 };
        let large = ConstantStats { n: 100_000, mean: 0.0, ss: 99_999.0 };
        assert!(large.mean_posterior().unwrap().scale2 < 1e-3 * small.mean_posterior().unwrap().scale2);
        let p = small.predictive().unwrap().variance().unwrap();
        let m = small.mean_posterior().unwrap().variance().unwrap();
        assert!(m < p);
    }
}
