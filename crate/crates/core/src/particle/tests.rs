use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::data::{DataStore, Response};
use crate::leaf::{ConstantStats, LeafModel, LeafStats, StudentT};
use crate::tree::{Move, TreePrior};

fn real_store(xs: &[Vec<f64>], ys: &[f64]) -> DataStore {
    let mut s = DataStore::real(xs[0].len());
    for (x, &y) in xs.iter().zip(ys) {
        s.append(x, Response::Real(y)).unwrap();
    }
    s
}

fn random_1d(rng: &mut ChaCha8Rng, n: usize, f: impl Fn(f64) -> f64) -> DataStore {
    let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>() * 6.0 - 3.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f(x[0]) + 0.3 * (rng.random::<f64>() - 0.5)).collect();
    real_store(&xs, &ys)
}

#[test]
fn init_builds_identical_roots() {
    let store = real_store(&[vec![0.0], vec![1.0], vec![2.0]], &[0.0, 1.0, 2.0]);
    let cloud = Cloud::init(FilterConfig::new(LeafModel::Constant).particles(7), store.clone()).unwrap();
    assert_eq!(cloud.len(), 7);
    for p in cloud.particles() {
        assert_eq!(p.tree.num_leaves(), 1);
        assert_eq!(p.stats(p.tree.root()).n(), 3);
    }
    assert!(Cloud::init(FilterConfig::new(LeafModel::Constant), store.prefix(2)).is_err());
    assert!(Cloud::init(FilterConfig::new(LeafModel::Multinomial), store).is_err());
}

#[test]
fn weights_match_leaf_predictives() {
    let store = real_store(&[vec![0.0], vec![1.0], vec![2.0]], &[0.0, 1.0, 2.0]);
    let cloud = Cloud::init(FilterConfig::new(LeafModel::Constant).particles(3), store).unwrap();
    let w = cloud.weights(&[0.5], Response::Real(1.0));
    let mode = StudentT::new(1.0, 4.0 / 3.0, 2.0).ln_pdf(1.0);
    assert!(w.iter().all(|&v| (v - mode).abs() < 1e-15));

    let mut cs = DataStore::classes(1, 2);
    cs.append(&[0.0], Response::Class(0)).unwrap();
    let cloud = Cloud::init(FilterConfig::new(LeafModel::Multinomial).particles(2), cs).unwrap();
    let w = cloud.weights(&[0.3], Response::Class(0));
    assert!((w[0] - 0.75f64.ln()).abs() < 1e-15);
}

#[test]
fn single_particle_increment_is_its_log_predictive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_1d(&mut rng, 20, |x| x);
    let mut cloud = Cloud::init(FilterConfig::new(LeafModel::Constant).particles(1).t0(3), data.prefix(3)).unwrap();
    for i in 3..20 {
        let expect = cloud.particles()[0].log_predictive(data.x(i), data.y(i));
        let inc = cloud.step(data.x(i), data.y(i)).unwrap();
        assert_eq!(inc, expect);
    }
    let total: f64 = cloud.increments().iter().map(|p| p.1).sum();
    assert!((total - cloud.log_marginal_estimate()).abs() < 1e-12);
}

#[test]
fn root_locked_estimate_is_the_exact_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_1d(&mut rng, 40, |x| x * x);
    let cfg = FilterConfig::new(LeafModel::Constant).particles(5).root_locked();
    let cloud = Cloud::fit(cfg, &data).unwrap();
    let ys = |n: usize| ConstantStats::from_values((0..n).map(|i| data.y(i).to_f64()));
    let expect = ys(40).log_marginal().unwrap() - ys(5).log_marginal().unwrap();
    assert!((cloud.log_marginal_estimate() - expect).abs() < 1e-9 * expect.abs());
    assert_eq!(cloud.increments().len(), 35);
}

#[test]
fn runs_are_deterministic_and_checkpoints_resume_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = random_1d(&mut rng, 60, |x| if x > 0.5 { 2.0 } else { -1.0 });
    let cfg = FilterConfig::new(LeafModel::Constant).particles(50).seed(9);
    let a = Cloud::fit(cfg.clone(), &data).unwrap();
    let b = Cloud::fit(cfg.clone(), &data).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());

    let mut half = Cloud::fit(cfg, &data.prefix(30)).unwrap();
    half = Cloud::from_json(&half.to_json().unwrap()).unwrap();
    for i in 30..60 {
        half.step(data.x(i), data.y(i)).unwrap();
    }
    assert_eq!(half, a);
}

#[test]
fn carried_stats_match_batch_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for model in [LeafModel::Constant, LeafModel::Linear] {
        let data = random_1d(&mut rng, 100, |x| if x > 0.0 { x } else { -2.0 * x });
        let cfg = FilterConfig::new(model).particles(40).seed(5);
        let mut cloud = Cloud::init(cfg, data.prefix(3)).unwrap();
        for i in 3..100 {
            cloud.step(data.x(i), data.y(i)).unwrap();
            for p in cloud.particles() {
                assert!(p.max_stats_discrepancy(cloud.store(), model) < 1e-8);
                let rows: usize = p.tree.leaves().iter().map(|&l| p.tree.rows(l).len()).sum();
                assert_eq!(rows, i + 1);
            }
        }
    }
}

#[test]
fn linear_structure_waits_for_twice_the_leaf_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xs: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.random(), rng.random()]).collect();
    let ys: Vec<f64> = (0..8).map(|_| rng.random()).collect();
    let data = real_store(&xs, &ys);
    let cloud = Cloud::init(FilterConfig::new(LeafModel::Linear).particles(1), data.prefix(6)).unwrap();
    let mut store = data.prefix(7);
    let p = &cloud.particles()[0];
    assert!(p.candidates(&store, 6, LeafModel::Linear, &TreePrior::default(), &mut rng).grow.is_none());
    let mut tree = p.clone();
    tree.propagate(&store, 6, LeafModel::Linear, &TreePrior::default(), true, &mut rng);
    store.append(data.x(7), data.y(7)).unwrap();
    assert!(tree.candidates(&store, 7, LeafModel::Linear, &TreePrior::default(), &mut rng).grow.is_some());
}

#[test]
fn step_function_is_split() {
    let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
    let ys = [0.0, 0.1, -0.1, 10.0, 10.1, 9.9];
    let data = real_store(&xs, &ys);
    let cloud = Cloud::init(FilterConfig::new(LeafModel::Constant).particles(1), data.prefix(5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = cloud.particles()[0].candidates(&data, 5, LeafModel::Constant, &TreePrior::default(), &mut rng);
    let (rule, grow) = c.grow.unwrap();
    assert_eq!(rule.dim, 0);
    assert!((2.0..3.0).contains(&rule.value));
    // stay: one leaf over all six; grow: two tight leaves of three
    let all = ConstantStats::from_values(ys);
    let left = ConstantStats::from_values(ys[..3].iter().copied());
    let right = ConstantStats::from_values(ys[3..].iter().copied());
    let prior = TreePrior::default();
    let stay = prior.log_no_split(0) + all.log_marginal().unwrap();
    let grown = prior.log_split(0) + 2.0 * prior.log_no_split(1) + left.log_marginal().unwrap() + right.log_marginal().unwrap();
    assert!((c.stay - stay).abs() < 1e-12);
    assert!((grow - grown).abs() < 1e-12);
    assert!(grow - c.stay > 10.0);
}

/// Full-tree log posterior: tree prior plus the sum of leaf marginals.
fn full_posterior(p: &Particle, prior: &TreePrior) -> f64 {
    p.tree.log_prior(prior) + p.log_marginal().unwrap()
}

#[test]
fn local_scores_equal_full_posterior_ratios() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let prior = TreePrior::default();
    let mut checked = 0;
    for trial in 0..60 {
        let data = random_1d(&mut rng, 60, |x| (2.0 * x).sin() * 3.0);
        let cfg = FilterConfig::new(LeafModel::Constant).particles(8).seed(trial);
        let cloud = Cloud::fit(cfg, &data.prefix(59)).unwrap();
        let row = 59;
        for p in cloud.particles() {
            let seed = rng.random::<u64>();
            let c = p.candidates(&data, row, LeafModel::Constant, &prior, &mut ChaCha8Rng::seed_from_u64(seed));
            let eta = c.leaf;
            let mut scored = vec![(Move::Stay, c.stay)];
            if c.prune.is_finite() {
                scored.push((Move::Prune, c.prune));
            }
            if let Some((rule, s)) = c.grow.filter(|g| g.1.is_finite()) {
                scored.push((Move::Grow(rule), s));
            }
            let full: Vec<f64> = scored
                .iter()
                .map(|(mv, _)| {
                    let mut q = p.clone();
                    let min_leaf = LeafModel::Constant.min_leaf(1);
                    let store = &data;
                    match mv {
                        Move::Stay => q.tree.add_row(eta, row),
                        Move::Prune => {
                            q.tree.apply_prune(eta, Some(row)).unwrap();
                        }
                        Move::Grow(rule) => {
                            q.tree.apply_grow(eta, *rule, store, Some(row), min_leaf).unwrap();
                        }
                    }
                    let states = q
                        .tree
                        .leaves()
                        .into_iter()
                        .map(|l| (l, LeafState::new(LeafModel::Constant.from_rows(store, q.tree.rows(l).iter().copied()))))
                        .collect();
                    full_posterior(&Particle::from_parts(q.tree.clone(), states), &prior)
                })
                .collect();
            for k in 1..scored.len() {
                let local = scored[k].1 - scored[0].1;
                let global = full[k] - full[0];
                assert!((local - global).abs() < 1e-10, "{local} vs {global}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "only {checked} comparisons");
}

#[test]
fn bayes_factor_checks_comparability() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = random_1d(&mut rng, 30, |x| x + x * x);
    let cfg = FilterConfig::new(LeafModel::Constant).particles(10).t0(5);
    let a = Cloud::fit(cfg.clone(), &data).unwrap();
    assert_eq!(bayes_factor(&a, &a).unwrap(), 0.0);
    let b = Cloud::fit(cfg.clone().t0(6), &data).unwrap();
    assert!(bayes_factor(&a, &b).is_err());
    let c = Cloud::fit(cfg, &data.select(&(0..30).rev().collect::<Vec<_>>())).unwrap();
    assert!(bayes_factor(&a, &c).is_err());
    assert!((posterior_probability(2.3) - 0.909).abs() < 5e-4);
}

#[test]
fn constant_cloud_learns_a_normal_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let normal = rand_distr::Normal::new(5.0, 1.0).unwrap();
    let xs: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.random::<f64>()]).collect();
    let ys: Vec<f64> = (0..500).map(|_| rng.sample(normal)).collect();
    let data = real_store(&xs, &ys);
    let cloud = Cloud::fit(FilterConfig::new(LeafModel::Constant).particles(100).seed(1), &data).unwrap();
    match cloud.predict(&[0.5]).unwrap() {
        PredictiveSummary::Real { mean, variance, lower, upper } => {
            // 3 standard errors of a mean of 500 unit-variance draws
            assert!((mean - 5.0).abs() < 3.0 / 500f64.sqrt(), "mean {mean}");
            let v = variance.unwrap();
            assert!((v - 1.0).abs() < 0.2, "variance {v}");
            assert!(lower < mean && mean < upper);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn stats_kinds_round_trip_through_json() {
    let s = LeafStats::Constant(ConstantStats::from_values([1.0, 2.0, 4.0]));
    let back: LeafStats = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(s, back);
}
