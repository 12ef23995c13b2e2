//! The benchmark experiments, each a function of its sizes and a seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{misclassification, rmse};
use super::testfn::TestFunction;
use crate::data::{DataStore, Response};
use crate::design::{active_learn_loop, initial_design, optimize_loop, Bounds, DesignConfig, Heuristic};
use crate::error::Result;
use crate::leaf::LeafModel;
use crate::particle::{bayes_factor, Cloud, FilterConfig, PredictiveSummary};
use crate::rng::{derive_seed, substream};
use crate::tree::TreePrior;

/// Shared filter settings for a batch of repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub particles: usize,
    pub prior: TreePrior,
    pub seed: u64,
}

impl RunSettings {
    pub fn new(particles: usize, seed: u64) -> Self {
        Self { particles, prior: TreePrior::default(), seed }
    }

    fn filter(&self, model: LeafModel, rep: usize) -> FilterConfig {
        FilterConfig::new(model)
            .particles(self.particles)
            .prior(self.prior)
            .seed(derive_seed(self.seed, "rep", &[rep as u64]))
    }
}

fn posterior_means(cloud: &Cloud, xs: &[Vec<f64>]) -> Vec<f64> {
    xs.par_iter().map(|x| cloud.posterior_mean(x).unwrap_or(f64::NAN)).collect()
}

fn truth_on(f: TestFunction, xs: &[Vec<f64>]) -> Vec<f64> {
    xs.iter().map(|x| f.mean(x).expect("grid matches dimension")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfRep {
    pub rep: usize,
    /// `(t, running log BF)` after each counted step.
    pub trajectory: Vec<(usize, f64)>,
    pub log_bf: f64,
    /// RMSE of each model's posterior mean against the truth grid.
    pub rmse_a: Option<f64>,
    pub rmse_b: Option<f64>,
}

/// Filter the same data under two leaf models over `reps` random
/// reorderings (one shared order per repetition) and compare their marginal
/// likelihood estimates.
pub fn bayes_factor_experiment(
    data: &DataStore,
    model_a: LeafModel,
    model_b: LeafModel,
    reps: usize,
    t0: usize,
    settings: RunSettings,
    truth: Option<(&[Vec<f64>], &[f64])>,
) -> Result<Vec<BfRep>> {
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut substream(settings.seed, "reorder", &[rep as u64]));
            let shuffled = data.select(&order);
            let a = Cloud::fit(settings.filter(model_a, rep).t0(t0), &shuffled)?;
            let b = Cloud::fit(settings.filter(model_b, rep).t0(t0), &shuffled)?;
            let log_bf = bayes_factor(&a, &b)?;
            let mut run = 0.0;
            let trajectory = a
                .increments()
                .iter()
                .zip(b.increments())
                .map(|(&(t, ia), &(_, ib))| {
                    run += ia - ib;
                    (t, run)
                })
                .collect();
            let score = |c: &Cloud| truth.and_then(|(xs, ys)| rmse(&posterior_means(c, xs), ys).ok());
            Ok(BfRep { rep, trajectory, log_bf, rmse_a: score(&a), rmse_b: score(&b) })
        })
        .collect()
}

/// The parabola data: `n` noisy draws of `x + x^2` on `[-3, 3]`.
pub fn parabola_data(n: usize, seed: u64) -> DataStore {
    TestFunction::Parabola.dataset(n, &mut substream(seed, "parabola-data", &[]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanRep {
    pub rep: usize,
    pub rmse_linear: f64,
    pub rmse_constant: f64,
}

/// Out-of-sample RMSE to the true mean for linear and constant leaves on
/// fresh Friedman training and test sets per repetition.
pub fn friedman_experiment(reps: usize, n_train: usize, n_test: usize, settings: RunSettings) -> Result<Vec<FriedmanRep>> {
    let f = TestFunction::Friedman;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let train = f.dataset(n_train, &mut substream(settings.seed, "friedman-train", &[rep as u64]));
            let test = f.dataset(n_test, &mut substream(settings.seed, "friedman-test", &[rep as u64]));
            let xs: Vec<Vec<f64>> = (0..test.len()).map(|i| test.x(i).to_vec()).collect();
            let truth = truth_on(f, &xs);
            let lin = Cloud::fit(settings.filter(LeafModel::Linear, rep), &train)?;
            let con = Cloud::fit(settings.filter(LeafModel::Constant, rep), &train)?;
            Ok(FriedmanRep {
                rep,
                rmse_linear: rmse(&posterior_means(&lin, &xs), &truth)?,
                rmse_constant: rmse(&posterior_means(&con, &xs), &truth)?,
            })
        })
        .collect()
}

/// Sizes of a design-loop benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSizes {
    pub init: usize,
    pub rounds: usize,
    pub candidates: usize,
    pub phi: f64,
}

fn noisy_objective(f: TestFunction, seed: u64) -> impl FnMut(&[f64]) -> std::result::Result<Response, Box<dyn std::error::Error + Send + Sync>> {
    let mut rng = substream(seed, "objective-noise", &[]);
    move |x: &[f64]| Ok(Response::Real(f.sample(x, &mut rng)?))
}

/// Active learning RMSE per repetition against the noise-free mean on an
/// evenly spaced holdout grid.
pub fn active_learning_experiment(
    f: TestFunction,
    model: LeafModel,
    heuristic: Heuristic,
    reps: usize,
    sizes: DesignSizes,
    holdout: usize,
    settings: RunSettings,
) -> Result<Vec<f64>> {
    let grid = f.grid(holdout);
    let truth = truth_on(f, &grid);
    let bounds = f.bounds();
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let filter = settings.filter(model, rep);
            let mut obj = noisy_objective(f, filter.seed);
            let init = initial_design(&mut obj, &bounds, sizes.init, crate::data::ResponseKind::Real, filter.seed)?;
            let cfg = DesignConfig { candidates: sizes.candidates, phi: sizes.phi, heuristic, rounds: sizes.rounds, filter };
            let run = active_learn_loop(&mut obj, init, &bounds, &cfg, Some((&grid, &truth)))?;
            if let Some(e) = run.aborted {
                return Err(e);
            }
            Ok(run.trace.rmse.unwrap_or(f64::NAN))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRep {
    pub rep: usize,
    /// True mean at the observed input with the smallest posterior mean.
    pub solution: f64,
    pub best_x: Vec<f64>,
    pub best_posterior_mean: f64,
}

/// Minimization runs from a random initial design.
pub fn optimization_experiment(
    f: TestFunction,
    model: LeafModel,
    reps: usize,
    sizes: DesignSizes,
    settings: RunSettings,
) -> Result<Vec<OptRep>> {
    let bounds = f.bounds();
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let filter = settings.filter(model, rep);
            let mut obj = noisy_objective(f, filter.seed);
            let init = random_design(&mut obj, &bounds, sizes.init, filter.seed)?;
            let cfg = DesignConfig { candidates: sizes.candidates, phi: sizes.phi, heuristic: Heuristic::Ei, rounds: sizes.rounds, filter };
            let run = optimize_loop(&mut obj, init, &bounds, &cfg)?;
            if let Some(e) = run.aborted {
                return Err(e);
            }
            let best_x = run.trace.best_x.clone().unwrap_or_default();
            Ok(OptRep {
                rep,
                solution: f.mean(&best_x).unwrap_or(f64::NAN),
                best_x,
                best_posterior_mean: run.trace.best_posterior_mean.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

fn random_design(
    obj: &mut crate::design::Objective<'_>,
    bounds: &Bounds,
    n: usize,
    seed: u64,
) -> Result<DataStore> {
    let mut rng = substream(seed, "random-design", &[]);
    let mut store = DataStore::real(bounds.dim());
    for _ in 0..n {
        let x: Vec<f64> = (0..bounds.dim()).map(|j| bounds.lo[j] + rng.random::<f64>() * (bounds.hi[j] - bounds.lo[j])).collect();
        let y = obj(&x).map_err(|source| crate::error::Error::Objective { round: 0, source })?;
        store.append(&x, y)?;
    }
    Ok(store)
}

/// Three classes on the unit square: class 0 left of `x0 = 0.5`; on the
/// right, class 1 below `x1 = 0.5` and class 2 above.
pub fn three_class_label(x: &[f64]) -> usize {
    if x[0] <= 0.5 {
        0
    } else if x[1] <= 0.5 {
        1
    } else {
        2
    }
}

/// Distance from `x` to the nearest class boundary of [`three_class_label`].
pub fn three_class_boundary_distance(x: &[f64]) -> f64 {
    let vertical = (x[0] - 0.5).abs();
    let horizontal = if x[0] >= 0.5 { (x[1] - 0.5).abs() } else { (x[0] - 0.5).hypot(x[1] - 0.5) };
    vertical.min(horizontal)
}

/// Labeled sample with inputs uniform on the unit square; with probability
/// `noise` the label is replaced by one of the other classes at random.
/// Returns the store and the noise-free labels.
pub fn three_class_data(n: usize, noise: f64, rng: &mut impl Rng) -> (DataStore, Vec<usize>) {
    let mut store = DataStore::classes(2, 3);
    let mut clean = Vec::with_capacity(n);
    for _ in 0..n {
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        let c = three_class_label(&x);
        let y = if rng.random::<f64>() < noise { (c + rng.random_range(1..3)) % 3 } else { c };
        store.append(&x, Response::Class(y)).expect("valid row");
        clean.push(c);
    }
    (store, clean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Error rate against the held-out (noisy) labels.
    pub misclassification: f64,
    /// Error rate against the noise-free classes.
    pub misclassification_clean: f64,
    /// Centre of the grid cell with the largest predictive entropy.
    pub entropy_argmax: Vec<f64>,
    pub entropy_max: f64,
    /// Grid cell width.
    pub cell: f64,
    pub argmax_boundary_distance: f64,
}

/// Fit the multinomial-leaf filter to the three-class data and evaluate
/// held-out error and the entropy surface on a `grid x grid` cell grid.
pub fn classification_experiment(
    n_train: usize,
    n_test: usize,
    noise: f64,
    grid: usize,
    settings: RunSettings,
) -> Result<ClassificationReport> {
    let (train, _) = three_class_data(n_train, noise, &mut substream(settings.seed, "class-train", &[]));
    let (test, clean) = three_class_data(n_test, noise, &mut substream(settings.seed, "class-test", &[]));
    let cloud = Cloud::fit(settings.filter(LeafModel::Multinomial, 0), &train)?;
    let pred: Vec<usize> = (0..test.len())
        .into_par_iter()
        .map(|i| match cloud.predict(test.x(i)) {
            Ok(PredictiveSummary::Class { class, .. }) => class,
            _ => usize::MAX,
        })
        .collect();
    let observed: Vec<usize> = (0..test.len()).map(|i| test.y(i).as_class().expect("class store")).collect();
    let cell = 1.0 / grid as f64;
    let centres: Vec<Vec<f64>> =
        (0..grid * grid).map(|k| vec![((k / grid) as f64 + 0.5) * cell, ((k % grid) as f64 + 0.5) * cell]).collect();
    let ent: Vec<f64> = centres
        .par_iter()
        .map(|x| crate::design::entropy_statistic(&cloud, x).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let mut best = 0;
    for (k, &e) in ent.iter().enumerate() {
        if e > ent[best] {
            best = k;
        }
    }
    Ok(ClassificationReport {
        misclassification: misclassification(&pred, &observed)?,
        misclassification_clean: misclassification(&pred, &clean)?,
        entropy_argmax: centres[best].clone(),
        entropy_max: ent[best],
        cell,
        argmax_boundary_distance: three_class_boundary_distance(&centres[best]),
    })
}
