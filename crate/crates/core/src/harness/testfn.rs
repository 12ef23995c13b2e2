use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataStore, Response};
use crate::design::Bounds;
use crate::error::{Error, Result};

/// Synthetic benchmark responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// `x + x^2` on `[-3, 3]`, noise sd 1/5.
    Parabola,
    /// `sin(x)` minus a Cauchy(1.6, 0.15) density on `[0, 7]`, noise sd 0.1.
    SinCauchy,
    /// `x1 exp(-x1^2 - x2^2)` on `[-2, 6]^2`, noise sd 1e-3.
    Exp2d,
    /// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5` on `[0, 1]^5`,
    /// noise sd 1.
    Friedman,
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabola" => Ok(Self::Parabola),
            "sincauchy" => Ok(Self::SinCauchy),
            "exp2d" => Ok(Self::Exp2d),
            "friedman" => Ok(Self::Friedman),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller on (0, 1]
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            Self::Parabola => "parabola",
            Self::SinCauchy => "sincauchy",
            Self::Exp2d => "exp2d",
            Self::Friedman => "friedman",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Parabola | Self::SinCauchy => 1,
            Self::Exp2d => 2,
            Self::Friedman => 5,
        }
    }

    pub fn bounds(self) -> Bounds {
        let b = match self {
            Self::Parabola => Bounds::cube(-3.0, 3.0, 1),
            Self::SinCauchy => Bounds::cube(0.0, 7.0, 1),
            Self::Exp2d => Bounds::cube(-2.0, 6.0, 2),
            Self::Friedman => Bounds::cube(0.0, 1.0, 5),
        };
        b.expect("static bounds")
    }

    pub fn noise_sd(self) -> f64 {
        match self {
            Self::Parabola => 0.2,
            Self::SinCauchy => 0.1,
            Self::Exp2d => 1e-3,
            Self::Friedman => 1.0,
        }
    }

    /// Noise-free mean at `x`.
    pub fn mean(self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(match self {
            Self::Parabola => x[0] + x[0] * x[0],
            Self::SinCauchy => {
                let (loc, scale) = (1.6, 0.15);
                let z = (x[0] - loc) / scale;
                x[0].sin() - 1.0 / (PI * scale * (1.0 + z * z))
            }
            Self::Exp2d => x[0] * (-x[0] * x[0] - x[1] * x[1]).exp(),
            Self::Friedman => {
                10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
            }
        })
    }

    /// Mean plus Gaussian noise.
    pub fn sample<R: Rng + ?Sized>(self, x: &[f64], rng: &mut R) -> Result<f64> {
        Ok(self.mean(x)? + self.noise_sd() * normal(rng))
    }

    /// `n` noisy observations at inputs drawn uniformly in the bounds.
    pub fn dataset(self, n: usize, rng: &mut ChaCha8Rng) -> DataStore {
        let b = self.bounds();
        let mut store = DataStore::real(self.dim());
        for _ in 0..n {
            let x: Vec<f64> = (0..self.dim()).map(|j| b.lo[j] + rng.random::<f64>() * (b.hi[j] - b.lo[j])).collect();
            let y = self.sample(&x, rng).expect("dimension matches");
            store.append(&x, Response::Real(y)).expect("finite row");
        }
        store
    }

    /// Evenly spaced grid with `per_dim` points per dimension, endpoints
    /// included.
    pub fn grid(self, per_dim: usize) -> Vec<Vec<f64>> {
        self.bounds().grid(per_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn reference_values() {
        let f = TestFunction::Friedman.mean(&[0.5; 5]).unwrap();
        assert!((f - (10.0 * (PI / 4.0).sin() + 7.5)).abs() < 1e-12);
        assert!((f - 14.571_07).abs() < 1e-5);
        let s = TestFunction::SinCauchy.mean(&[1.6]).unwrap();
        assert!((s - (1.6f64.sin() - 1.0 / (0.15 * PI))).abs() < 1e-15);
        let e = TestFunction::Exp2d.mean(&[-0.5f64.sqrt(), 0.0]).unwrap();
        assert!((e - -0.428_882).abs() < 1e-6);
        assert!(TestFunction::Exp2d.mean(&[1.0]).is_err());
        assert!("nope".parse::<TestFunction>().is_err());
    }

    #[test]
    fn exp2d_minimum_on_a_grid() {
        let g = TestFunction::Exp2d.grid(801);
        let min = g.iter().map(|x| TestFunction::Exp2d.mean(x).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min >= -0.428_882 - 1e-6);
        assert!(min < -0.428_8);
    }

    #[test]
    fn noise_has_the_stated_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 20_000;
        let r: Vec<f64> = (0..n).map(|_| TestFunction::Parabola.sample(&[1.0], &mut rng).unwrap() - 2.0).collect();
        let m = r.iter().sum::<f64>() / n as f64;
        let sd = (r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(m.abs() < 0.01 && (sd - 0.2).abs() < 0.01);
    }
}
