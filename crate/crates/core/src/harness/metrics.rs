use crate::error::{Error, Result};

/// Root mean squared difference.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Dimension { expected: truth.len(), got: pred.len() });
    }
    let ss: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((ss / pred.len() as f64).sqrt())
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

/// Fraction of mismatched labels.
pub fn misclassification(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Dimension { expected: truth.len(), got: pred.len() });
    }
    Ok(pred.iter().zip(truth).filter(|(a, b)| a != b).count() as f64 / pred.len() as f64)
}
