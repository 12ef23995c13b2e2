use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

/// Location-scale Student-t `St(a, b, c)`: location `a`, squared scale `b`,
/// `c` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentT {
    pub location: f64,
    pub scale2: f64,
    pub df: f64,
}

impl StudentT {
    pub fn new(location: f64, scale2: f64, df: f64) -> Self {
        debug_assert!(scale2 > 0.0 && df > 0.0, "St({location}, {scale2}, {df})");
        Self { location, scale2, df }
    }

    pub fn mean(&self) -> f64 {
        self.location
    }

    /// `b c / (c - 2)`, defined for `c > 2`.
    pub fn variance(&self) -> Option<f64> {
        (self.df > 2.0).then(|| self.scale2 * self.df / (self.df - 2.0))
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let c = self.df;
        let z2 = (y - self.location).powi(2) / self.scale2;
        ln_gamma(0.5 * (c + 1.0))
            - ln_gamma(0.5 * c)
            - 0.5 * (c * std::f64::consts::PI * self.scale2).ln()
            - 0.5 * (c + 1.0) * (z2 / c).ln_1p()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        standard_cdf((y - self.location) / self.scale2.sqrt(), self.df)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let t = StudentsT::new(0.0, 1.0, self.df).expect("valid degrees of freedom");
        self.location + self.scale2.sqrt() * t.inverse_cdf(p)
    }
}

/// Standard t density with `df` degrees of freedom.
pub fn standard_pdf(z: f64, df: f64) -> f64 {
    StudentT::new(0.0, 1.0, df).pdf(z)
}

/// Standard t distribution function with `df` degrees of freedom.
pub fn standard_cdf(z: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("valid degrees of freedom").cdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_at_mode_matches_closed_form() {
        let t = StudentT::new(1.0, 4.0 / 3.0, 2.0);
        // Gamma(3/2) / (Gamma(1) sqrt(2 pi 4/3))
        let expect = 0.886_226_925_452_758 / (2.0 * std::f64::consts::PI * 4.0 / 3.0).sqrt();
        assert!((t.pdf(1.0) - expect).abs() < 1e-14);
    }

    #[test]
    fn density_integrates_to_one() {
        // trapezoid on a substituted variable y = a + s tan(u), u in (-pi/2, pi/2)
        for &(df, b) in &[(1.5, 0.3), (2.0, 1.0), (5.0, 4.0), (30.0, 0.01)] {
            let t = StudentT::new(-0.7, b, df);
            let s = f64::sqrt(b);
            let n = 200_000;
            let h = std::f64::consts::PI / n as f64;
            let mut total = 0.0;
            for k in 1..n {
                let u = -std::f64::consts::FRAC_PI_2 + k as f64 * h;
                let y = -0.7 + s * u.tan();
                total += t.pdf(y) * s / u.cos().powi(2);
            }
            assert!((total * h - 1.0).abs() < 1e-6, "df={df}: {}", total * h);
        }
    }

    #[test]
    fn cdf_and_quantile_invert() {
        let t = StudentT::new(2.0, 0.5, 4.0);
        for &p in &[0.01, 0.05, 0.5, 0.9, 0.999] {
            assert!((t.cdf(t.quantile(p)) - p).abs() < 1e-10);
        }
        assert_eq!(t.variance(), Some(0.5 * 4.0 / 2.0));
        assert_eq!(StudentT::new(0.0, 1.0, 2.0).variance(), None);
    }
}
