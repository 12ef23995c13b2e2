use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_j, hi_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(ranges: &[(f64, f64)]) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::Config("bounds need at least one dimension".into()));
        }
        for &(lo, hi) in ranges {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
            }
        }
        Ok(Self { lo: ranges.iter().map(|r| r.0).collect(), hi: ranges.iter().map(|r| r.1).collect() })
    }

    /// The same interval in every one of `dim` dimensions.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(&vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(j, &v)| v >= self.lo[j] && v <= self.hi[j])
    }

    /// Evenly spaced grid with `per_dim` points per dimension, endpoints
    /// included; the last dimension varies fastest.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let axis = |j: usize| -> Vec<f64> {
            (0..per_dim)
                .map(|k| match per_dim {
                    1 => 0.5 * (self.lo[j] + self.hi[j]),
                    _ => self.lo[j] + (self.hi[j] - self.lo[j]) * k as f64 / (per_dim - 1) as f64,
                })
                .collect()
        };
        let mut pts = vec![Vec::new()];
        for j in 0..self.dim() {
            let a = axis(j);
            pts = pts.into_iter().flat_map(|p| a.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
        }
        pts
    }
}

/// Latin hypercube sample of `m` points: in every dimension each of the `m`
/// equal-width strata holds exactly one point, jittered uniformly within it.
pub fn lhs<R: Rng + ?Sized>(m: usize, bounds: &Bounds, rng: &mut R) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    let mut pts = vec![vec![0.0; d]; m];
    let mut perm: Vec<usize> = (0..m).collect();
    for j in 0..d {
        perm.shuffle(rng);
        let width = (bounds.hi[j] - bounds.lo[j]) / m as f64;
        for (p, &s) in pts.iter_mut().zip(&perm) {
            let v = bounds.lo[j] + (s as f64 + rng.random::<f64>()) * width;
            // keep the half-open stratum under rounding
            p[j] = v.min(bounds.lo[j] + (s + 1) as f64 * width).max(bounds.lo[j] + s as f64 * width);
        }
    }
    pts
}
