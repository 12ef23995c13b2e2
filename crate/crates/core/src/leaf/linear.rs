use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::StudentT;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Rank-1 updates with a smaller denominator fall back to fresh inversion.
const MIN_UPDATE_DENOM: f64 = 1e-12;
/// Gram matrices with a larger 1-norm condition estimate have no marginal.
const MAX_CONDITION: f64 = 1e12;
/// Above this condition estimate rank-1 updates lose too many digits and the
/// inverse is recomputed instead.
const UPDATE_CONDITION: f64 = 1e4;
/// `s^2 - R` below this fraction of `s^2` is treated as an exact fit.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// Inverse of the centered Gram matrix and the quantities derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramInverse {
    pub inv: DMatrix<f64>,
    /// `log |G|`
    pub log_det: f64,
    /// `beta_hat = G^-1 sxy`
    pub slope: DVector<f64>,
    /// `R = beta_hat' G beta_hat`
    pub reg_ss: f64,
    pub condition: f64,
}

/// Linear-mean Gaussian leaf (intercept plus `d` slopes) under the
/// `1/sigma^2` reference prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearStats {
    pub n: usize,
    pub y_mean: f64,
    /// `s^2 = sum (y - ybar)^2`
    pub ss: f64,
    pub x_mean: DVector<f64>,
    /// centered Gram matrix `G = sum (x - xbar)(x - xbar)'`
    pub gram: DMatrix<f64>,
    /// `sum (x - xbar)(y - ybar)`
    pub sxy: DVector<f64>,
    pub inverse: Option<GramInverse>,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl LinearStats {
    pub fn empty(d: usize) -> Self {
        Self {
            n: 0,
            y_mean: 0.0,
            ss: 0.0,
            x_mean: DVector::zeros(d),
            gram: DMatrix::zeros(d, d),
            sxy: DVector::zeros(d),
            inverse: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_mean.len()
    }

    /// Two-pass batch construction.
    pub fn from_rows<'a>(d: usize, rows: impl IntoIterator<Item = (&'a [f64], f64)> + Clone) -> Self {
        let mut s = Self::empty(d);
        for (x, y) in rows.clone() {
            s.n += 1;
            s.y_mean += y;
            for (m, v) in s.x_mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        if s.n == 0 {
            return s;
        }
        let n = s.n as f64;
        s.y_mean /= n;
        s.x_mean /= n;
        let mut u = DVector::zeros(d);
        for (x, y) in rows {
            for j in 0..d {
                u[j] = x[j] - s.x_mean[j];
            }
            let dy = y - s.y_mean;
            s.ss += dy * dy;
            s.gram.ger(1.0, &u, &u, 1.0);
            s.sxy.axpy(dy, &u, 1.0);
        }
        s.refresh_inverse();
        s
    }

    /// Recompute `G^-1` by Cholesky. Leaves `inverse` empty when the Gram
    /// matrix is singular.
    pub fn refresh_inverse(&mut self) {
        self.inverse = None;
        let d = self.dim();
        if self.n < d + 1 {
            return;
        }
        let Some(chol) = self.gram.clone().cholesky() else {
            return;
        };
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let inv = chol.inverse();
        self.set_inverse(inv, log_det);
    }

    fn set_inverse(&mut self, inv: DMatrix<f64>, log_det: f64) {
        let condition = one_norm(&self.gram) * one_norm(&inv);
        let slope = &inv * &self.sxy;
        let reg_ss = self.sxy.dot(&slope);
        if !log_det.is_finite() || !condition.is_finite() {
            self.inverse = None;
            return;
        }
        self.inverse = Some(GramInverse { inv, log_det, slope, reg_ss, condition });
    }

    /// Add one observation. The Gram inverse is carried by a Sherman-Morrison
    /// update and its log-determinant by the matrix determinant lemma.
    pub fn update(&mut self, x: &[f64], y: f64) {
        let d = self.dim();
        let k = self.n as f64 / (self.n + 1) as f64;
        let u = DVector::from_iterator(d, x.iter().zip(self.x_mean.iter()).map(|(a, m)| a - m));
        let dy = y - self.y_mean;

        self.n += 1;
        let n = self.n as f64;
        self.y_mean += dy / n;
        self.x_mean.axpy(1.0 / n, &u, 1.0);
        self.ss += k * dy * dy;
        self.gram.ger(k, &u, &u, 1.0);
        self.sxy.axpy(k * dy, &u, 1.0);

        match self.inverse.take() {
            Some(GramInverse { mut inv, log_det, condition, .. }) if condition <= UPDATE_CONDITION => {
                let v = &inv * &u;
                let denom = 1.0 + k * u.dot(&v);
                if denom.abs() < MIN_UPDATE_DENOM || denom <= 0.0 {
                    self.refresh_inverse();
                } else {
                    inv.ger(-k / denom, &v, &v, 1.0);
                    self.set_inverse(inv, log_det + denom.ln());
                }
            }
            _ => self.refresh_inverse(),
        }
    }

    /// Sufficient statistics of the union of several disjoint row sets.
    /// Additive parts are pooled with mean-shift corrections; the inverse is
    /// recomputed once at the end.
    pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a LinearStats>) -> Option<Self> {
        let mut iter = parts.into_iter();
        let first = iter.next()?;
        let mut acc = first.clone();
        for b in iter {
            if b.n == 0 {
                continue;
            }
            if acc.n == 0 {
                acc = b.clone();
                continue;
            }
            let (na, nb) = (acc.n as f64, b.n as f64);
            let n = na + nb;
            let w = na * nb / n;
            let dx = &b.x_mean - &acc.x_mean;
            let dy = b.y_mean - acc.y_mean;
            acc.gram += &b.gram;
            acc.gram.ger(w, &dx, &dx, 1.0);
            acc.sxy += &b.sxy;
            acc.sxy.axpy(w * dy, &dx, 1.0);
            acc.ss += b.ss + w * dy * dy;
            acc.x_mean.axpy(nb / n, &dx, 1.0);
            acc.y_mean += dy * nb / n;
            acc.n += b.n;
        }
        acc.refresh_inverse();
        Some(acc)
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::merge_all([self, other]).expect("two parts")
    }

    /// `(G^-1, s^2 - R, n - d - 1)` when the leaf supports inference.
    fn usable(&self) -> Option<(&GramInverse, f64, f64)> {
        let d = self.dim();
        if self.n < d + 2 {
            return None;
        }
        let g = self.inverse.as_ref()?;
        if g.condition > MAX_CONDITION {
            return None;
        }
        let resid = self.ss - g.reg_ss;
        if !(resid > RESIDUAL_FLOOR * self.ss) {
            return None;
        }
        Some((g, resid, (self.n - d - 1) as f64))
    }

    /// Regression sum of squares `R`, if the Gram matrix is invertible.
    pub fn reg_ss(&self) -> Option<f64> {
        self.inverse.as_ref().map(|g| g.reg_ss)
    }

    pub fn log_marginal(&self) -> Option<f64> {
        let (g, resid, df) = self.usable()?;
        let n = self.n as f64;
        let half = 0.5 * df;
        Some(-half * LN_2PI + 0.5 * (-g.log_det - n.ln()) - half * (0.5 * resid).ln() + ln_gamma(half))
    }

    fn centered(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), x.iter().zip(self.x_mean.iter()).map(|(a, m)| a - m))
    }

    fn quad(inv: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (inv * b).dot(a)
    }

    pub fn predictive(&self, x: &[f64]) -> Option<StudentT> {
        let (g, resid, df) = self.usable()?;
        let xh = self.centered(x);
        let q = Self::quad(&g.inv, &xh, &xh);
        let n = self.n as f64;
        Some(StudentT::new(self.y_mean + xh.dot(&g.slope), (1.0 + 1.0 / n + q) * resid / df, df))
    }

    pub fn mean_posterior(&self, x: &[f64]) -> Option<StudentT> {
        let (g, resid, df) = self.usable()?;
        let xh = self.centered(x);
        let q = Self::quad(&g.inv, &xh, &xh);
        let n = self.n as f64;
        Some(StudentT::new(self.y_mean + xh.dot(&g.slope), (1.0 / n + q) * resid / df, df))
    }

    /// Reduction in predictive variance at `x_ref` from observing at `x`.
    pub fn variance_reduction(&self, x: &[f64], x_ref: &[f64]) -> Option<f64> {
        let (g, resid, _) = self.usable()?;
        let d = self.dim();
        if self.n < d + 4 {
            return None;
        }
        let n = self.n as f64;
        let xh = self.centered(x);
        let rh = self.centered(x_ref);
        let cross = 1.0 / n + Self::quad(&g.inv, &rh, &xh);
        let own = 1.0 + 1.0 / n + Self::quad(&g.inv, &xh, &xh);
        Some(resid / (n - d as f64 - 3.0) * cross * cross / own)
    }
}
