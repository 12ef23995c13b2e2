use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

/// Normalize log weights. `None` if none is finite.
pub fn normalize(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let w: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    Some(w.into_iter().map(|v| v / total).collect())
}

/// `log(sum exp(l_i))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + log_weights.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// Deterministic part of residual resampling: `floor(N w_i)` copies of each
/// index and the leftover residual weights `N w_i - floor(N w_i)`.
pub fn residual_split(weights: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let n = weights.len() as f64;
    let mut copies = Vec::with_capacity(weights.len());
    let mut residual = Vec::with_capacity(weights.len());
    for &w in weights {
        let nw = n * w;
        let k = nw.floor();
        copies.push(k as usize);
        residual.push((nw - k).max(0.0));
    }
    (copies, residual)
}

/// Residual resampling of `N` indices from normalized weights. The result is
/// sorted by ancestor index.
pub fn residual_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let (copies, residual) = residual_split(weights);
    let mut counts = copies;
    let fixed: usize = counts.iter().sum();
    let rest = n.saturating_sub(fixed);
    if rest > 0 {
        match WeightedIndex::new(&residual) {
            Ok(dist) => {
                for _ in 0..rest {
                    counts[dist.sample(rng)] += 1;
                }
            }
            // residuals vanish only through rounding; fall back to the weights
            Err(_) => {
                let dist = WeightedIndex::new(weights).expect("normalized weights");
                for _ in 0..rest {
                    counts[dist.sample(rng)] += 1;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for (i, &c) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(i, c));
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_of_halves_and_eighths() {
        let (copies, residual) = residual_split(&[0.5, 0.25, 0.125, 0.125]);
        assert_eq!(copies, vec![2, 1, 0, 0]);
        assert_eq!(residual, vec![0.0, 0.0, 0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = residual_resample(&[0.5, 0.25, 0.125, 0.125], &mut rng);
        assert_eq!(&out[..3], &[0, 0, 1]);
        assert!(out[3] == 2 || out[3] == 3);
    }

    #[test]
    fn uniform_and_degenerate_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(residual_resample(&[0.25; 4], &mut rng), vec![0, 1, 2, 3]);
        assert_eq!(residual_resample(&[0.0, 1.0, 0.0], &mut rng), vec![1, 1, 1]);
        assert_eq!(normalize(&[f64::NEG_INFINITY; 3]), None);
        let w = normalize(&[0.0, f64::NEG_INFINITY, 0.0]).unwrap();
        assert_eq!(w, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
