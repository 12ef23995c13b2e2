use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predict::{class_summary, Mixture, PredictiveSummary};
use super::propagate::Particle;
use super::resample::{log_sum_exp, normalize, residual_resample};
use crate::data::{DataStore, Response};
use crate::error::{Error, Result};
use crate::leaf::{LeafModel, LeafStats, Predictive, StudentT};
use crate::rng::substream;
use crate::tree::TreePrior;

const CHECKPOINT_VERSION: u32 = 1;

/// Filter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub particles: usize,
    pub model: LeafModel,
    pub prior: TreePrior,
    pub seed: u64,
    /// Conditioning prefix for the marginal likelihood estimate; the model
    /// default when `None`.
    pub t0: Option<usize>,
    /// Stay, prune and grow when true; stay only (root locked) when false.
    pub structural: bool,
}

impl FilterConfig {
    pub fn new(model: LeafModel) -> Self {
        Self { particles: 1000, model, prior: TreePrior::default(), seed: 0, t0: None, structural: true }
    }

    pub fn particles(mut self, n: usize) -> Self {
        self.particles = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn prior(mut self, prior: TreePrior) -> Self {
        self.prior = prior;
        self
    }

    pub fn t0(mut self, t0: usize) -> Self {
        self.t0 = Some(t0);
        self
    }

    pub fn root_locked(mut self) -> Self {
        self.structural = false;
        self
    }
}

/// A cloud of equally weighted particles together with the data they were
/// fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cloud {
    config: FilterConfig,
    store: DataStore,
    particles: Vec<Particle>,
    log_ml: f64,
    /// `(t, log mean predictive)` for every step counted in `log_ml`.
    increments: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    fingerprint: u64,
    cloud: Cloud,
}

impl Cloud {
    /// `N` identical root-only particles holding every row of `prefix`.
    pub fn init(config: FilterConfig, prefix: DataStore) -> Result<Self> {
        if config.particles == 0 {
            return Err(Error::Config("need at least one particle".into()));
        }
        config.model.check_kind(prefix.kind())?;
        let need = config.model.root_minimum(prefix.dim());
        if prefix.len() < need {
            return Err(Error::Config(format!(
                "{} leaves need at least {need} initial rows, got {}",
                config.model,
                prefix.len()
            )));
        }
        let root = Particle::root(&prefix, config.model, (0..prefix.len()).collect());
        let particles = vec![root; config.particles];
        Ok(Self { config, store: prefix, particles, log_ml: 0.0, increments: Vec::new() })
    }

    /// Initialize on the smallest usable prefix of `data` and filter the rest.
    pub fn fit(config: FilterConfig, data: &DataStore) -> Result<Self> {
        let start = config.model.root_minimum(data.dim()).min(data.len());
        let mut cloud = Self::init(config, data.prefix(start))?;
        for i in start..data.len() {
            cloud.step(data.x(i), data.y(i))?;
        }
        Ok(cloud)
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn store(&self) -> &DataStore {
        &self.store
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Rows consumed so far.
    pub fn t(&self) -> usize {
        self.store.len()
    }

    pub fn t0(&self) -> usize {
        self.config.t0.unwrap_or_else(|| self.config.model.default_t0(self.store.dim()))
    }

    /// Log marginal likelihood estimate: the sum over steps after `t0` of
    /// the log mean one-step predictive.
    pub fn log_marginal_estimate(&self) -> f64 {
        self.log_ml
    }

    pub fn increments(&self) -> &[(usize, f64)] {
        &self.increments
    }

    /// Per-particle log predictive of `(x, y)`.
    pub fn weights(&self, x: &[f64], y: Response) -> Vec<f64> {
        self.particles.par_iter().map(|p| p.log_predictive(x, y)).collect()
    }

    /// Resample by predictive weight, add the row, propagate every particle.
    /// Returns the log mean predictive of the new row.
    pub fn step(&mut self, x: &[f64], y: Response) -> Result<f64> {
        self.store.validate(x, y)?;
        let t = self.store.len() + 1;
        let lw = self.weights(x, y);
        let w = normalize(&lw).ok_or(Error::FilterFailure { t })?;
        let inc = log_sum_exp(&lw) - (lw.len() as f64).ln();
        if t > self.t0() {
            self.log_ml += inc;
            self.increments.push((t, inc));
        }

        let mut rng = substream(self.config.seed, "resample", &[t as u64]);
        let ancestors = residual_resample(&w, &mut rng);
        let mut old: Vec<Option<Particle>> = std::mem::take(&mut self.particles).into_iter().map(Some).collect();
        let mut next = Vec::with_capacity(ancestors.len());
        for (k, &a) in ancestors.iter().enumerate() {
            let last_use = ancestors.get(k + 1) != Some(&a);
            next.push(if last_use { old[a].take().expect("ancestor") } else { old[a].clone().expect("ancestor") });
        }
        drop(old);

        let row = self.store.append(x, y)?;
        let (store, cfg) = (&self.store, &self.config);
        next.par_iter_mut().enumerate().for_each(|(i, p)| {
            let mut rng = substream(cfg.seed, "propagate", &[t as u64, i as u64]);
            p.propagate(store, row, cfg.model, &cfg.prior, cfg.structural, &mut rng);
        });
        self.particles = next;
        Ok(inc)
    }

    /// Leaf statistics at `x` in every particle.
    pub fn leaf_stats_at<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = &'a LeafStats> + 'a {
        self.particles.iter().map(move |p| p.leaf_stats(x))
    }

    /// Per-particle posterior of the noise-free mean at `x`.
    pub fn mean_posteriors(&self, x: &[f64]) -> Vec<Option<StudentT>> {
        self.leaf_stats_at(x).map(|s| s.mean_posterior(x)).collect()
    }

    /// Particle average of the posterior mean at `x`; `None` if any particle
    /// has no defined mean posterior there.
    pub fn posterior_mean(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for s in self.leaf_stats_at(x) {
            total += s.mean_posterior(x)?.location;
        }
        Some(total / self.particles.len() as f64)
    }

    /// Mixture predictive at `x`. Particles whose leaf has no defined
    /// predictive are left out; an error only if none is defined.
    pub fn predict(&self, x: &[f64]) -> Result<PredictiveSummary> {
        if x.len() != self.store.dim() {
            return Err(Error::Dimension { expected: self.store.dim(), got: x.len() });
        }
        let mut real = Vec::new();
        let mut class = Vec::new();
        for s in self.leaf_stats_at(x) {
            match s.predictive(x) {
                Some(Predictive::Real(t)) => real.push(t),
                Some(Predictive::Class(p)) => class.push(p),
                None => {}
            }
        }
        if !class.is_empty() {
            Ok(class_summary(&class))
        } else if !real.is_empty() {
            Ok(Mixture::new(real).summary())
        } else {
            Err(Error::Config(format!("no particle has a defined predictive at {x:?}")))
        }
    }

    /// The real-response predictive mixture at `x`.
    pub fn mixture(&self, x: &[f64]) -> Option<Mixture> {
        let comps: Option<Vec<StudentT>> = self
            .leaf_stats_at(x)
            .map(|s| match s.predictive(x)? {
                Predictive::Real(t) => Some(t),
                Predictive::Class(_) => None,
            })
            .collect();
        comps.map(Mixture::new)
    }

    /// Average class probabilities at `x`.
    pub fn class_probabilities(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self.predict(x).ok()? {
            PredictiveSummary::Class { probs, .. } => Some(probs),
            PredictiveSummary::Real { .. } => None,
        }
    }

    /// Mean number of leaves per particle.
    pub fn mean_leaves(&self) -> f64 {
        self.particles.iter().map(|p| p.tree.num_leaves()).sum::<usize>() as f64 / self.particles.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        let cp = Checkpoint { version: CHECKPOINT_VERSION, fingerprint: self.store.fingerprint(self.t()), cloud: self.clone() };
        Ok(serde_json::to_string(&cp)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(s)?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!("unsupported checkpoint version {}", cp.version)));
        }
        if cp.cloud.store.fingerprint(cp.cloud.t()) != cp.fingerprint {
            return Err(Error::Config("checkpoint data fingerprint mismatch".into()));
        }
        Ok(cp.cloud)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::Io { path: path.into(), source: e })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        Self::from_json(&s)
    }
}

/// `log BF = log_ml(a) - log_ml(b)` for two runs over the same data order
/// and conditioning prefix.
pub fn bayes_factor(a: &Cloud, b: &Cloud) -> Result<f64> {
    if a.t0() != b.t0() {
        return Err(Error::Incomparable(format!("t0 differs: {} vs {}", a.t0(), b.t0())));
    }
    if a.t() != b.t() || a.store.fingerprint(a.t()) != b.store.fingerprint(b.t()) {
        return Err(Error::Incomparable("runs saw different data or data order".into()));
    }
    Ok(a.log_marginal_estimate() - b.log_marginal_estimate())
}

/// Posterior probability of model A under even prior odds.
pub fn posterior_probability(log_bf: f64) -> f64 {
    1.0 / (1.0 + (-log_bf).exp())
}
