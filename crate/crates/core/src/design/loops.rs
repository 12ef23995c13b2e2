use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::criteria::{alc_surface, alm_statistic, argmax_defined, entropy_statistic, g_statistic, y_min_hat};
use super::lhs::{lhs, Bounds};
use crate::data::{DataStore, Response};
use crate::error::{Error, Result};
use crate::particle::{Cloud, FilterConfig};
use crate::rng::substream;

/// Acquisition rule for a sequential design round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// `G(x; phi)`: expected improvement plus scaled posterior sd.
    Ei,
    Alm,
    Alc,
    Entropy,
}

impl std::str::FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ei" | "ei-g" | "g" => Ok(Self::Ei),
            "alm" => Ok(Self::Alm),
            "alc" => Ok(Self::Alc),
            "entropy" => Ok(Self::Entropy),
            other => Err(Error::Config(format!("unknown heuristic '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    /// Candidates drawn per round.
    pub candidates: usize,
    pub phi: f64,
    pub heuristic: Heuristic,
    pub rounds: usize,
    pub filter: FilterConfig,
}

impl DesignConfig {
    fn check(&self) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::Config("need at least one candidate per round".into()));
        }
        if !(self.phi > 0.0) {
            return Err(Error::Config(format!("phi must be positive, got {}", self.phi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub x_star: Vec<f64>,
    /// Criterion at the chosen candidate (`None` if no candidate had one).
    pub criterion: Option<f64>,
    /// Criterion at every candidate, in draw order.
    pub criteria: Vec<Option<f64>>,
    pub y_observed: f64,
    pub y_min_hat: Option<f64>,
    /// Posterior mean at `x_star` after absorbing the new point.
    pub posterior_mean_at_x_star: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignTrace {
    pub rounds: Vec<RoundRecord>,
    /// Observed input with the smallest posterior mean, and that mean.
    pub best_x: Option<Vec<f64>>,
    pub best_posterior_mean: Option<f64>,
    /// RMSE of the posterior mean against a supplied truth.
    pub rmse: Option<f64>,
}

impl DesignTrace {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Result of a design loop; `aborted` holds the error that ended the loop
/// early, with the trace up to that round.
#[derive(Debug)]
pub struct DesignRun {
    pub trace: DesignTrace,
    pub cloud: Cloud,
    pub aborted: Option<Error>,
}

/// Black-box response at one input.
pub type Objective<'a> = dyn FnMut(&[f64]) -> std::result::Result<Response, Box<dyn std::error::Error + Send + Sync>> + 'a;

/// Evaluate `objective` on an `n` point Latin hypercube.
pub fn initial_design(
    objective: &mut Objective<'_>,
    bounds: &Bounds,
    n: usize,
    kind: crate::data::ResponseKind,
    seed: u64,
) -> Result<DataStore> {
    let mut store = DataStore::new(bounds.dim(), kind);
    for x in lhs(n, bounds, &mut substream(seed, "initial-design", &[])) {
        let y = objective(&x).map_err(|source| Error::Objective { round: 0, source })?;
        store.append(&x, y)?;
    }
    Ok(store)
}

fn criteria(cloud: &Cloud, cands: &[Vec<f64>], observed: &[Vec<f64>], cfg: &DesignConfig) -> (Vec<Option<f64>>, Option<f64>) {
    match cfg.heuristic {
        Heuristic::Ei => {
            let mut reference = cands.to_vec();
            reference.extend_from_slice(observed);
            let ymin = y_min_hat(cloud, &reference);
            let vals = match ymin {
                Some(y) => cands.par_iter().map(|x| g_statistic(cloud, x, y, cfg.phi)).collect(),
                None => vec![None; cands.len()],
            };
            (vals, ymin)
        }
        Heuristic::Alm => (cands.par_iter().map(|x| alm_statistic(cloud, x)).collect(), None),
        Heuristic::Alc => (alc_surface(cloud, cands).into_iter().map(Some).collect(), None),
        Heuristic::Entropy => (cands.par_iter().map(|x| entropy_statistic(cloud, x)).collect(), None),
    }
}

fn best_observed(cloud: &Cloud) -> (Option<Vec<f64>>, Option<f64>) {
    let store = cloud.store();
    let mut best: Option<(usize, f64)> = None;
    for i in 0..store.len() {
        if let Some(m) = cloud.posterior_mean(store.x(i)) {
            if best.is_none_or(|(_, b)| m < b) {
                best = Some((i, m));
            }
        }
    }
    match best {
        Some((i, m)) => (Some(store.x(i).to_vec()), Some(m)),
        None => (None, None),
    }
}

/// Run the sequential design loop from an initial design: each round draws
/// Latin hypercube candidates, picks the best by the configured heuristic,
/// observes the objective there and updates the filter.
pub fn design_loop(
    objective: &mut Objective<'_>,
    initial: DataStore,
    bounds: &Bounds,
    cfg: &DesignConfig,
    truth: Option<(&[Vec<f64>], &[f64])>,
) -> Result<DesignRun> {
    cfg.check()?;
    if bounds.dim() != initial.dim() {
        return Err(Error::Dimension { expected: bounds.dim(), got: initial.dim() });
    }
    let mut cloud = Cloud::fit(cfg.filter.clone(), &initial)?;
    let mut trace = DesignTrace::default();
    let mut aborted = None;
    for round in 1..=cfg.rounds {
        let cands = lhs(cfg.candidates, bounds, &mut substream(cfg.filter.seed, "candidates", &[round as u64]));
        let observed: Vec<Vec<f64>> = (0..cloud.t()).map(|i| cloud.store().x(i).to_vec()).collect();
        let (vals, ymin) = criteria(&cloud, &cands, &observed, cfg);
        let pick = argmax_defined(&vals).unwrap_or(0);
        let x_star = cands[pick].clone();
        let y = match objective(&x_star) {
            Ok(y) => y,
            Err(source) => {
                aborted = Some(Error::Objective { round, source });
                break;
            }
        };
        if let Err(e) = cloud.step(&x_star, y) {
            aborted = Some(e);
            break;
        }
        trace.rounds.push(RoundRecord {
            round,
            posterior_mean_at_x_star: cloud.posterior_mean(&x_star),
            x_star,
            criterion: vals[pick],
            criteria: vals,
            y_observed: y.to_f64(),
            y_min_hat: ymin,
        });
    }
    let (bx, bm) = best_observed(&cloud);
    trace.best_x = bx;
    trace.best_posterior_mean = bm;
    if let Some((xs, ys)) = truth {
        let preds: Vec<f64> = xs.par_iter().map(|x| cloud.posterior_mean(x).unwrap_or(f64::NAN)).collect();
        trace.rmse = crate::harness::rmse(&preds, ys).ok();
    }
    Ok(DesignRun { trace, cloud, aborted })
}

/// Minimize the mean of a noisy objective with the `G(x; phi)` criterion.
pub fn optimize_loop(
    objective: &mut Objective<'_>,
    initial: DataStore,
    bounds: &Bounds,
    cfg: &DesignConfig,
) -> Result<DesignRun> {
    let cfg = DesignConfig { heuristic: Heuristic::Ei, ..cfg.clone() };
    design_loop(objective, initial, bounds, &cfg, None)
}

/// Active learning with ALM, ALC or entropy; reports RMSE against `truth`
/// when given.
pub fn active_learn_loop(
    objective: &mut Objective<'_>,
    initial: DataStore,
    bounds: &Bounds,
    cfg: &DesignConfig,
    truth: Option<(&[Vec<f64>], &[f64])>,
) -> Result<DesignRun> {
    if cfg.heuristic == Heuristic::Ei {
        return Err(Error::Config("active learning needs alm, alc or entropy".into()));
    }
    design_loop(objective, initial, bounds, cfg, truth)
}
