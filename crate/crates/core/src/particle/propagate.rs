use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataStore, Response};
use crate::leaf::{LeafModel, LeafStats};
use crate::tree::{Move, NodeId, SplitRule, Tree, TreePrior};

/// Sufficient statistics of one leaf with their cached log marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafState {
    pub stats: LeafStats,
    pub log_marginal: Option<f64>,
}

impl LeafState {
    pub fn new(stats: LeafStats) -> Self {
        let log_marginal = stats.log_marginal();
        Self { stats, log_marginal }
    }
}

/// A tree together with the statistics of each of its leaves, indexed by
/// node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub tree: Tree,
    leaves: Vec<Option<Arc<LeafState>>>,
}

/// Which move a propagation step took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chosen {
    Stay,
    Prune,
    Grow(SplitRule),
    /// No candidate had a finite score; the point was added to its leaf.
    Fallback,
}

/// Scores of the candidate moves for one arriving row, before sampling.
#[derive(Debug, Clone)]
pub struct Candidates {
    pub leaf: NodeId,
    pub stay: f64,
    pub prune: f64,
    pub grow: Option<(SplitRule, f64)>,
}

struct Prepared {
    cands: Candidates,
    stay_stats: LeafState,
    prune_stats: Option<LeafState>,
    grow_stats: Option<(LeafState, LeafState)>,
}

impl Particle {
    /// A root-only particle over `rows`.
    pub fn root(store: &DataStore, model: LeafModel, rows: Vec<usize>) -> Self {
        let stats = model.from_rows(store, rows.iter().copied());
        let tree = Tree::new(rows);
        let mut p = Self { tree, leaves: Vec::new() };
        let root = p.tree.root();
        p.set(root, LeafState::new(stats));
        p
    }

    pub fn from_parts(tree: Tree, states: Vec<(NodeId, LeafState)>) -> Self {
        let mut p = Self { tree, leaves: Vec::new() };
        for (id, s) in states {
            p.set(id, s);
        }
        p
    }

    pub fn state(&self, leaf: NodeId) -> &LeafState {
        self.leaves
            .get(leaf.index())
            .and_then(|s| s.as_deref())
            .unwrap_or_else(|| panic!("no statistics for leaf {leaf:?}"))
    }

    pub fn stats(&self, leaf: NodeId) -> &LeafStats {
        &self.state(leaf).stats
    }

    fn set(&mut self, id: NodeId, s: LeafState) {
        if self.leaves.len() <= id.index() {
            self.leaves.resize(id.index() + 1, None);
        }
        self.leaves[id.index()] = Some(Arc::new(s));
    }

    fn clear(&mut self, id: NodeId) {
        if let Some(slot) = self.leaves.get_mut(id.index()) {
            *slot = None;
        }
    }

    /// Leaf statistics for the leaf containing `x`.
    pub fn leaf_stats(&self, x: &[f64]) -> &LeafStats {
        self.stats(self.tree.route(x))
    }

    /// Log predictive of `(x, y)` under this particle; `-inf` if undefined.
    pub fn log_predictive(&self, x: &[f64], y: Response) -> f64 {
        self.leaf_stats(x).log_predictive(x, y).unwrap_or(f64::NEG_INFINITY)
    }

    /// Log marginal likelihood of all leaves together.
    pub fn log_marginal(&self) -> Option<f64> {
        self.tree.leaves().iter().map(|&l| self.state(l).log_marginal).sum()
    }

    fn prepare<R: Rng + ?Sized>(
        &self,
        store: &DataStore,
        row: usize,
        model: LeafModel,
        prior: &TreePrior,
        structural: bool,
        rng: &mut R,
    ) -> Prepared {
        let (x, y) = (store.x(row), store.y(row));
        let tree = &self.tree;
        let eta = tree.route(x);
        let mut stay = self.stats(eta).clone();
        stay.update(x, y);
        let stay_stats = LeafState::new(stay);

        // log marginal of everything under the parent other than eta
        let sibling_lm = match tree.sibling(eta) {
            Some(s) => tree.leaves_under(s).iter().map(|&l| self.state(l).log_marginal).sum(),
            None => Some(0.0),
        };
        let with_rest = |lm: Option<f64>| match (lm, sibling_lm) {
            (Some(a), Some(b)) => a + b,
            _ => f64::NEG_INFINITY,
        };

        let stay_score = tree.local_log_prior(eta, Move::Stay, prior) + with_rest(stay_stats.log_marginal);

        let mut prune_score = f64::NEG_INFINITY;
        let mut prune_stats = None;
        if let (true, Some(p)) = (structural, tree.parent(eta)) {
            let under = tree.leaves_under(p);
            let mut parts: Vec<&LeafStats> = Vec::with_capacity(under.len());
            for &l in &under {
                parts.push(if l == eta { &stay_stats.stats } else { self.stats(l) });
            }
            if let Some(merged) = LeafStats::merge_all(&parts) {
                let s = LeafState::new(merged);
                if let Some(lm) = s.log_marginal {
                    prune_score = tree.local_log_prior(eta, Move::Prune, prior) + lm;
                }
                prune_stats = Some(s);
            }
        }

        let mut grow = None;
        let mut grow_stats = None;
        if structural {
            let min_leaf = prior.leaf_minimum(model.min_leaf(store.dim()));
            let eligible: Vec<(usize, (f64, f64))> = (0..store.dim())
                .filter_map(|d| tree.grow_interval(eta, d, min_leaf, store, Some(row)).map(|iv| (d, iv)))
                .collect();
            if !eligible.is_empty() {
                let (dim, (lo, hi)) = eligible[rng.random_range(0..eligible.len())];
                let value = lo + rng.random::<f64>() * (hi - lo);
                let rule = SplitRule { dim, value: if value < hi { value } else { lo } };
                let rows = tree.rows(eta).iter().copied().chain(std::iter::once(row));
                let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows.partition(|&r| rule.goes_left(store.x(r)));
                let l = LeafState::new(model.from_rows(store, l_rows));
                let r = LeafState::new(model.from_rows(store, r_rows));
                let score = match (l.log_marginal, r.log_marginal) {
                    (Some(a), Some(b)) => tree.local_log_prior(eta, Move::Grow(rule), prior) + with_rest(Some(a + b)),
                    _ => f64::NEG_INFINITY,
                };
                grow = Some((rule, score));
                grow_stats = Some((l, r));
            }
        }

        Prepared {
            cands: Candidates { leaf: eta, stay: stay_score, prune: prune_score, grow },
            stay_stats,
            prune_stats,
            grow_stats,
        }
    }

    /// Scores of stay, prune and one sampled grow for the row at `row`,
    /// without changing the particle.
    pub fn candidates<R: Rng + ?Sized>(
        &self,
        store: &DataStore,
        row: usize,
        model: LeafModel,
        prior: &TreePrior,
        rng: &mut R,
    ) -> Candidates {
        self.prepare(store, row, model, prior, true, rng).cands
    }

    /// Absorb the stored row `row`: score the local moves around the leaf it
    /// falls in, sample one proportional to prior times marginal likelihood,
    /// and apply it.
    pub fn propagate<R: Rng + ?Sized>(
        &mut self,
        store: &DataStore,
        row: usize,
        model: LeafModel,
        prior: &TreePrior,
        structural: bool,
        rng: &mut R,
    ) -> Chosen {
        let Prepared { cands, stay_stats, prune_stats, grow_stats } =
            self.prepare(store, row, model, prior, structural, rng);
        let grow_score = cands.grow.map_or(f64::NEG_INFINITY, |g| g.1);
        let scores = [cands.stay, cands.prune, grow_score];
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eta = cands.leaf;

        let pick = max.is_finite().then(|| {
            let w = scores.map(|s| (s - max).exp());
            let u = rng.random::<f64>() * w.iter().sum::<f64>();
            let mut acc = 0.0;
            let mut k = w.iter().rposition(|&v| v > 0.0).expect("max is finite");
            for (i, &v) in w.iter().enumerate() {
                acc += v;
                if v > 0.0 && u < acc {
                    k = i;
                    break;
                }
            }
            k
        });

        match pick {
            Some(1) => {
                let merged = prune_stats.expect("prune scored");
                let p = self.tree.parent(eta).expect("prune has a parent");
                for l in self.tree.leaves_under(p) {
                    self.clear(l);
                }
                let p = self.tree.apply_prune(eta, Some(row)).expect("valid prune");
                self.set(p, merged);
                Chosen::Prune
            }
            Some(2) => {
                let (rule, _) = cands.grow.expect("grow scored");
                let (ls, rs) = grow_stats.expect("grow scored");
                let (l, r) = self
                    .tree
                    .apply_grow(eta, rule, store, Some(row), prior.leaf_minimum(model.min_leaf(store.dim())))
                    .expect("split drawn inside the grow interval");
                self.clear(eta);
                self.set(l, ls);
                self.set(r, rs);
                Chosen::Grow(rule)
            }
            other => {
                self.tree.add_row(eta, row);
                self.set(eta, stay_stats);
                if other.is_some() {
                    Chosen::Stay
                } else {
                    Chosen::Fallback
                }
            }
        }
    }

    /// Recompute every leaf's statistics from its rows and compare with the
    /// carried ones. Returns the largest relative discrepancy in log marginal.
    pub fn max_stats_discrepancy(&self, store: &DataStore, model: LeafModel) -> f64 {
        let mut worst: f64 = 0.0;
        for l in self.tree.leaves() {
            let batch = model.from_rows(store, self.tree.rows(l).iter().copied());
            let carried = self.stats(l);
            if batch.n() != carried.n() {
                return f64::INFINITY;
            }
            match (batch.log_marginal(), carried.log_marginal()) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs() / a.abs().max(1e-12)),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}
