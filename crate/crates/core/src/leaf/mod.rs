//! Conjugate leaf models.
//!
//! Each leaf keeps sufficient statistics from which the marginal likelihood
//! of its responses (regression parameters integrated out) and the posterior
//! predictive at a new input follow in closed form.

mod constant;
mod linear;
mod multinomial;
mod student_t;

use serde::{Deserialize, Serialize};

pub use constant::ConstantStats;
pub use linear::{GramInverse, LinearStats};
pub use multinomial::MultinomialStats;
pub use student_t::{standard_cdf, standard_pdf, StudentT};

use crate::data::{DataStore, Response, ResponseKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafModel {
    Constant,
    Linear,
    Multinomial,
}

impl std::str::FromStr for LeafModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "linear" => Ok(Self::Linear),
            "multinomial" | "class" => Ok(Self::Multinomial),
            other => Err(Error::Config(format!("unknown leaf model '{other}'"))),
        }
    }
}

impl std::fmt::Display for LeafModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Linear => "linear",
            Self::Multinomial => "multinomial",
        })
    }
}

impl LeafModel {
    /// Minimum rows per leaf a grow move must leave on each side.
    pub fn min_leaf(self, dim: usize) -> usize {
        match self {
            Self::Constant => 3,
            Self::Linear => dim + 2,
            Self::Multinomial => 1,
        }
    }

    /// Rows the root needs before its statistics can be defined.
    pub fn root_minimum(self, dim: usize) -> usize {
        self.min_leaf(dim)
    }

    /// Default size of the conditioning prefix for marginal likelihood
    /// estimates.
    pub fn default_t0(self, dim: usize) -> usize {
        match self {
            Self::Constant => 5,
            Self::Linear => dim + 3,
            Self::Multinomial => 1,
        }
    }

    pub fn check_kind(self, kind: ResponseKind) -> Result<()> {
        match (self, kind) {
            (Self::Multinomial, ResponseKind::Class { .. }) => Ok(()),
            (Self::Constant | Self::Linear, ResponseKind::Real) => Ok(()),
            (m, k) => Err(Error::ResponseKind(format!("{m} leaves cannot model {k:?} responses"))),
        }
    }

    pub fn empty(self, dim: usize, kind: ResponseKind) -> LeafStats {
        match (self, kind) {
            (Self::Constant, _) => LeafStats::Constant(ConstantStats::default()),
            (Self::Linear, _) => LeafStats::Linear(LinearStats::empty(dim)),
            (Self::Multinomial, ResponseKind::Class { classes }) => {
                LeafStats::Multinomial(MultinomialStats::empty(classes))
            }
            (Self::Multinomial, ResponseKind::Real) => panic!("multinomial leaves need class responses"),
        }
    }

    /// Batch statistics over store rows.
    pub fn from_rows(self, store: &DataStore, rows: impl IntoIterator<Item = usize>) -> LeafStats {
        match self {
            Self::Linear => {
                let rows: Vec<usize> = rows.into_iter().collect();
                LeafStats::Linear(LinearStats::from_rows(
                    store.dim(),
                    rows.iter().map(|&r| (store.x(r), store.y(r).to_f64())),
                ))
            }
            _ => {
                let mut s = self.empty(store.dim(), store.kind());
                for r in rows {
                    s.update(store.x(r), store.y(r));
                }
                s
            }
        }
    }
}

/// Posterior predictive at one input.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictive {
    Real(StudentT),
    Class(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeafStats {
    Constant(ConstantStats),
    Linear(LinearStats),
    Multinomial(MultinomialStats),
}

impl LeafStats {
    pub fn model(&self) -> LeafModel {
        match self {
            Self::Constant(_) => LeafModel::Constant,
            Self::Linear(_) => LeafModel::Linear,
            Self::Multinomial(_) => LeafModel::Multinomial,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Constant(s) => s.n,
            Self::Linear(s) => s.n,
            Self::Multinomial(s) => s.n() as usize,
        }
    }

    /// Add one observation. Panics if the response kind does not match the
    /// model; callers validate rows on entry to the store.
    pub fn update(&mut self, x: &[f64], y: Response) {
        match (self, y) {
            (Self::Constant(s), Response::Real(v)) => s.update(v),
            (Self::Linear(s), Response::Real(v)) => s.update(x, v),
            (Self::Multinomial(s), Response::Class(c)) => s.update(c),
            (s, y) => panic!("{} leaf cannot absorb {y:?}", s.model()),
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        match (self, other) {
            (Self::Constant(a), Self::Constant(b)) => Self::Constant(a.merge(b)),
            (Self::Linear(a), Self::Linear(b)) => Self::Linear(a.merge(b)),
            (Self::Multinomial(a), Self::Multinomial(b)) => Self::Multinomial(a.merge(b)),
            (a, b) => panic!("cannot merge {} with {} statistics", a.model(), b.model()),
        }
    }

    /// Merge any number of parts; linear statistics are inverted once.
    pub fn merge_all<'a>(parts: &[&'a LeafStats]) -> Option<Self> {
        let first = *parts.first()?;
        if let Self::Linear(_) = first {
            let lin = parts.iter().map(|p| match p {
                Self::Linear(s) => s,
                other => panic!("cannot merge linear with {} statistics", other.model()),
            });
            return LinearStats::merge_all(lin).map(Self::Linear);
        }
        Some(parts[1..].iter().fold(first.clone(), |acc, p| acc.merge(p)))
    }

    /// Log marginal likelihood of the leaf's responses, `None` when undefined.
    pub fn log_marginal(&self) -> Option<f64> {
        match self {
            Self::Constant(s) => s.log_marginal(),
            Self::Linear(s) => s.log_marginal(),
            Self::Multinomial(s) => s.log_marginal(),
        }
    }

    pub fn predictive(&self, x: &[f64]) -> Option<Predictive> {
        match self {
            Self::Constant(s) => s.predictive().map(Predictive::Real),
            Self::Linear(s) => s.predictive(x).map(Predictive::Real),
            Self::Multinomial(s) => Some(Predictive::Class(s.predictive())),
        }
    }

    /// Log predictive density (or probability) of `y` at `x`.
    pub fn log_predictive(&self, x: &[f64], y: Response) -> Option<f64> {
        match (self, y) {
            (Self::Constant(s), Response::Real(v)) => s.predictive().map(|t| t.ln_pdf(v)),
            (Self::Linear(s), Response::Real(v)) => s.predictive(x).map(|t| t.ln_pdf(v)),
            (Self::Multinomial(s), Response::Class(c)) => {
                let n = s.n() as f64;
                let a = 1.0 / s.classes() as f64;
                Some(((s.counts[c] as f64 + a) / (n + 1.0)).ln())
            }
            _ => None,
        }
    }

    /// Posterior of the noise-free mean at `x` (real responses only).
    pub fn mean_posterior(&self, x: &[f64]) -> Option<StudentT> {
        match self {
            Self::Constant(s) => s.mean_posterior(),
            Self::Linear(s) => s.mean_posterior(x),
            Self::Multinomial(_) => None,
        }
    }

    /// Reduction of predictive variance at `x_ref` from a new observation at
    /// `x`, both in this leaf (real responses only).
    pub fn variance_reduction(&self, x: &[f64], x_ref: &[f64]) -> Option<f64> {
        match self {
            Self::Constant(s) => s.variance_reduction(),
            Self::Linear(s) => s.variance_reduction(x, x_ref),
            Self::Multinomial(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_store(rng: &mut ChaCha8Rng, model: LeafModel, d: usize, n: usize) -> DataStore {
        let mut s = match model {
            LeafModel::Multinomial => DataStore::classes(d, 3),
            _ => DataStore::real(d),
        };
        for _ in 0..n {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let y = match model {
                LeafModel::Multinomial => Response::Class(rng.random_range(0..3)),
                _ => Response::Real(x.iter().sum::<f64>() + rng.random::<f64>() * 3.0),
            };
            s.append(&x, y).unwrap();
        }
        s
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-12)
    }

    #[test]
    fn sequential_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for model in [LeafModel::Constant, LeafModel::Linear, LeafModel::Multinomial] {
            for trial in 0..40 {
                let d = 1 + trial % 3;
                let n = rng.random_range(8..=30);
                let store = random_store(&mut rng, model, d, n);
                let n0 = model.root_minimum(d);
                let mut s = model.from_rows(&store, 0..n0);
                let mut total = s.log_marginal().unwrap();
                for i in n0..n {
                    total += s.log_predictive(store.x(i), store.y(i)).unwrap();
                    s.update(store.x(i), store.y(i));
                }
                let direct = s.log_marginal().unwrap();
                assert!(rel(total.exp(), direct.exp()) < 1e-8, "{model} d={d} n={n}: {total} vs {direct}");
            }
        }
    }

    #[test]
    fn update_and_merge_match_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for case in 0..1000 {
            let model = [LeafModel::Constant, LeafModel::Linear, LeafModel::Multinomial][case % 3];
            let d = 1 + case % 4;
            let n = rng.random_range(d + 6..40);
            let store = random_store(&mut rng, model, d, n);
            let cut = rng.random_range(1..n);
            let batch = model.from_rows(&store, 0..n);
            let mut inc = model.empty(d, store.kind());
            for i in 0..n {
                inc.update(store.x(i), store.y(i));
            }
            let merged = model.from_rows(&store, 0..cut).merge(&model.from_rows(&store, cut..n));
            let want = batch.log_marginal().unwrap();
            for got in [inc.log_marginal().unwrap(), merged.log_marginal().unwrap()] {
                assert!(rel(got, want) < 1e-8, "case {case}: {got} vs {want}");
            }
            if let (LeafStats::Linear(a), LeafStats::Linear(b)) = (&merged, &batch) {
                assert!((&a.gram - &b.gram).norm() / b.gram.norm() < 1e-8);
                assert!(rel(a.ss, b.ss) < 1e-8);
            }
        }
    }

    #[test]
    fn order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for model in [LeafModel::Constant, LeafModel::Linear, LeafModel::Multinomial] {
            let store = random_store(&mut rng, model, 2, 25);
            let fwd = model.from_rows(&store, 0..25);
            let rev = model.from_rows(&store, (0..25).rev());
            let mut inc = model.empty(2, store.kind());
            for i in (0..25).rev() {
                inc.update(store.x(i), store.y(i));
            }
            let a = fwd.log_marginal().unwrap();
            assert!((a - rev.log_marginal().unwrap()).abs() < 1e-10);
            assert!((a - inc.log_marginal().unwrap()).abs() < 1e-10);
        }
    }

    /// Two-dimensional quadrature of the Gaussian likelihood against
    /// `d mu d(log sigma^2)` (the `1/sigma^2` prior on `sigma^2`). The mean is
    /// integrated on a standardized offset grid `mu = ybar + sigma u`.
    fn quadrature_marginal(ys: &[f64]) -> f64 {
        let n = ys.len() as f64;
        let ybar = ys.iter().sum::<f64>() / n;
        let ss: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
        let centre = (ss / (n - 1.0)).ln();
        let (t_lo, t_hi, nt) = (centre - 12.0, centre + 80.0, 6000);
        let (u_lo, u_hi, nu) = (-10.0, 10.0, 800);
        let (ht, hu) = ((t_hi - t_lo) / nt as f64, (u_hi - u_lo) / nu as f64);
        let mut total = 0.0;
        for i in 0..=nt {
            let tau = t_lo + i as f64 * ht;
            let sigma = (0.5 * tau).exp();
            let wt = if i == 0 || i == nt { 0.5 } else { 1.0 };
            for j in 0..=nu {
                let mu = ybar + sigma * (u_lo + j as f64 * hu);
                let wu = if j == 0 || j == nu { 0.5 } else { 1.0 };
                let ll: f64 = ys
                    .iter()
                    .map(|y| -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * tau - 0.5 * (y - mu).powi(2) / sigma.powi(2))
                    .sum();
                total += wt * wu * ll.exp() * sigma;
            }
        }
        total * ht * hu
    }

    #[test]
    fn constant_marginal_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in 3..=8 {
            let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0).collect();
            let closed = ConstantStats::from_values(ys.iter().copied()).log_marginal().unwrap().exp();
            let quad = quadrature_marginal(&ys);
            assert!(rel(quad, closed) < 1e-4, "n={n}: {quad} vs {closed}");
        }
    }

    #[test]
    fn linear_variance_reduction_limit() {
        // x at the centroid and a nearly flat Gram inverse: the linear
        // criterion approaches the constant form with n - d - 3 degrees.
        let mut s = LinearStats::empty(1);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..30 {
            let x = rng.random::<f64>() * 1e4;
            s.update(&[x], rng.random::<f64>());
        }
        let xbar = s.x_mean[0];
        let resid = s.ss - s.reg_ss().unwrap();
        let c = ConstantStats { n: 30, mean: 0.0, ss: resid }.variance_reduction().unwrap();
        let vr = s.variance_reduction(&[xbar], &[xbar]).unwrap();
        assert!(rel(vr * 26.0 / 27.0, c) < 1e-12);
        assert!(vr > 0.0);
    }

    #[test]
    fn kinds_and_minimums() {
        assert_eq!(LeafModel::Linear.min_leaf(2), 4);
        assert_eq!(2 * LeafModel::Linear.min_leaf(2), 8);
        assert_eq!(2 * LeafModel::Constant.min_leaf(1), 6);
        assert!(LeafModel::Multinomial.check_kind(ResponseKind::Real).is_err());
        assert!(LeafModel::Linear.check_kind(ResponseKind::Real).is_ok());
        assert_eq!("linear".parse::<LeafModel>().unwrap(), LeafModel::Linear);
    }
}
