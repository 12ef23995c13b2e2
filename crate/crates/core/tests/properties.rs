use dyntree::leaf::{ConstantStats, MultinomialStats};
use dyntree::particle::resample::residual_split;
use dyntree::particle::Mixture;
use dyntree::tree::split_interval;
use dyntree::{Cloud, DataStore, FilterConfig, LeafModel, Response, StudentT};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn constant_merge_matches_batch(ys in prop::collection::vec(-50.0f64..50.0, 2..40), cut in 0usize..40) {
        let cut = cut.min(ys.len());
        let batch = ConstantStats::from_values(ys.iter().copied());
        let merged = ConstantStats::from_values(ys[..cut].iter().copied())
            .merge(&ConstantStats::from_values(ys[cut..].iter().copied()));
        prop_assert_eq!(batch.n, merged.n);
        prop_assert!(close(batch.mean, merged.mean, 1e-12));
        prop_assert!(close(batch.ss, merged.ss, 1e-9));
    }

    #[test]
    fn multinomial_predictive_is_a_distribution(labels in prop::collection::vec(0usize..4, 0..30)) {
        let s = MultinomialStats::from_labels(4, labels);
        let p = s.predictive();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn split_interval_separates_valid_values(
        coords in prop::collection::vec(0u8..10, 1..30),
        m in 1usize..6,
        probe in 0.0f64..10.0,
    ) {
        let xs: Vec<f64> = coords.iter().map(|&c| f64::from(c)).collect();
        let left = xs.iter().filter(|&&v| v <= probe).count();
        let valid = left >= m && xs.len() - left >= m;
        let inside = match split_interval(&mut xs.clone(), m) {
            Some((lo, hi)) => probe >= lo && probe < hi,
            None => false,
        };
        prop_assert_eq!(valid, inside);
    }

    #[test]
    fn residual_split_keeps_mass(raw in prop::collection::vec(0.001f64..10.0, 1..50)) {
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let (copies, residual) = residual_split(&w);
        let fixed: usize = copies.iter().sum();
        prop_assert!(fixed <= w.len());
        prop_assert!(residual.iter().all(|&r| (0.0..1.0).contains(&r)));
        prop_assert!((fixed as f64 + residual.iter().sum::<f64>() - w.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn mixture_quantile_inverts_cdf(
        comps in prop::collection::vec((-5.0f64..5.0, 0.01f64..4.0, 1.0f64..50.0), 1..8),
        p in 0.001f64..0.999,
    ) {
        let mix = Mixture::new(comps.iter().map(|&(a, b, c)| StudentT::new(a, b, c)).collect());
        let q = mix.quantile(p);
        prop_assert!((mix.cdf(q) - p).abs() < 1e-9);
        prop_assert!(mix.quantile((p + 0.5 * (1.0 - p)).min(0.999)) >= q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn checkpoint_roundtrip_resumes_identically(seed in 0u64..1000, n in 12usize..30) {
        let mut store = DataStore::real(1);
        for i in 0..n + 5 {
            let x = ((i as u64 * 37 + seed) % 101) as f64 / 100.0;
            store.append(&[x], Response::Real((6.0 * x).sin() + 0.01 * (i % 7) as f64)).unwrap();
        }
        let config = FilterConfig::new(LeafModel::Constant).particles(30).seed(seed);
        let mut a = Cloud::fit(config, &store.prefix(n)).unwrap();
        let mut b = Cloud::from_json(&a.to_json().unwrap()).unwrap();
        for i in n..store.len() {
            a.step(store.x(i), store.y(i)).unwrap();
            b.step(store.x(i), store.y(i)).unwrap();
        }
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
