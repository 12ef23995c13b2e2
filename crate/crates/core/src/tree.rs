//! Binary recursive-partition trees.
//!
//! Nodes live in an index arena with explicit parent links. Leaves hold the
//! store indices of the rows routed to them, kept sorted, behind an `Arc` so
//! that cloning a tree (as particle resampling does constantly) copies only
//! the small node table.
//!
//! Routing convention: `x[dim] <= value` goes left, everything else right.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::DataStore;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Axis-aligned split: `x[dim] <= value` routes left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub dim: usize,
    pub value: f64,
}

impl SplitRule {
    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        x[self.dim] <= self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Internal { rule: SplitRule, left: NodeId, right: NodeId },
    Leaf { rows: Arc<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub depth: u32,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// Depth-dependent split probability `alpha * (1 + depth)^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePrior {
    pub alpha: f64,
    pub beta: f64,
    /// Raises the leaf model's minimum leaf size when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_leaf: Option<usize>,
}

impl Default for TreePrior {
    fn default() -> Self {
        Self { alpha: 0.95, beta: 2.0, min_leaf: None }
    }
}

impl TreePrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!(
                "tree prior needs 0 < alpha < 1 and beta > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta, min_leaf: None })
    }

    pub fn with_min_leaf(mut self, min_leaf: usize) -> Self {
        self.min_leaf = Some(min_leaf);
        self
    }

    /// Minimum rows per leaf given the leaf model's own minimum.
    pub fn leaf_minimum(&self, model_minimum: usize) -> usize {
        self.min_leaf.map_or(model_minimum, |m| m.max(model_minimum))
    }

    #[inline]
    pub fn p_split(&self, depth: u32) -> f64 {
        self.alpha * (1.0 + f64::from(depth)).powf(-self.beta)
    }

    #[inline]
    pub fn log_split(&self, depth: u32) -> f64 {
        self.p_split(depth).ln()
    }

    #[inline]
    pub fn log_no_split(&self, depth: u32) -> f64 {
        (-self.p_split(depth)).ln_1p()
    }
}

/// A candidate structural change at the leaf receiving a new point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Move {
    Stay,
    Prune,
    Grow(SplitRule),
}

/// Half-open interval `[lo, hi)` of split values that keep at least
/// `min_leaf` of `coords` on each side. `None` if no such value exists.
///
/// `coords` is reordered in place.
pub fn split_interval(coords: &mut [f64], min_leaf: usize) -> Option<(f64, f64)> {
    let n = coords.len();
    let m = min_leaf.max(1);
    if n < 2 * m {
        return None;
    }
    coords.sort_unstable_by(f64::total_cmp);
    // left count >= m  <=>  s >= v[m-1];  right count >= m  <=>  s < v[n-m]
    let lo = coords[m - 1];
    let hi = coords[n - m];
    (lo < hi).then_some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    slots: Vec<Option<Node>>,
    free: Vec<NodeId>,
    root: NodeId,
    live: usize,
}

impl Tree {
    /// A root-only tree whose leaf holds `rows`.
    pub fn new(mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        let root = Node { kind: NodeKind::Leaf { rows: Arc::new(rows) }, parent: None, depth: 0 };
        Self { slots: vec![Some(root)], free: Vec::new(), root: NodeId(0), live: 1 }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        self.slots[id.index()].as_ref().expect("stale node id")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.slots[id.index()].as_mut().expect("stale node id")
    }

    /// Size of the id space; every live `NodeId` indexes below this.
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn node_count(&self) -> usize {
        self.live
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.node(id).is_leaf()
    }

    pub fn depth(&self, id: NodeId) -> u32 {
        self.node(id).depth
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.node(id).kind {
            NodeKind::Internal { left, right, .. } => Some((left, right)),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn sibling(&self, id: NodeId) -> Option<NodeId> {
        let p = self.parent(id)?;
        let (l, r) = self.children(p)?;
        Some(if l == id { r } else { l })
    }

    /// Rows held by a leaf.
    pub fn rows(&self, leaf: NodeId) -> &[usize] {
        match &self.node(leaf).kind {
            NodeKind::Leaf { rows } => rows,
            NodeKind::Internal { .. } => panic!("rows() called on an internal node"),
        }
    }

    /// The leaf whose ancestor rules `x` satisfies.
    pub fn route(&self, x: &[f64]) -> NodeId {
        let mut id = self.root;
        loop {
            match &self.node(id).kind {
                NodeKind::Leaf { .. } => return id,
                NodeKind::Internal { rule, left, right } => {
                    id = if rule.goes_left(x) { *left } else { *right };
                }
            }
        }
    }

    /// All leaves under `id` (inclusive), left to right.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            match self.node(n).kind {
                NodeKind::Leaf { .. } => out.push(n),
                NodeKind::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.leaves_under(self.root)
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves().len()
    }

    /// Maximum leaf depth plus one (a root-only tree has height 1).
    pub fn height(&self) -> u32 {
        self.leaves().iter().map(|&l| self.depth(l)).max().unwrap_or(0) + 1
    }

    /// Log prior of the subtree rooted at `id`, with depths taken from the
    /// full tree.
    pub fn subtree_log_prior(&self, id: NodeId, prior: &TreePrior) -> f64 {
        let mut total = 0.0;
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = self.node(n);
            match node.kind {
                NodeKind::Leaf { .. } => total += prior.log_no_split(node.depth),
                NodeKind::Internal { left, right, .. } => {
                    total += prior.log_split(node.depth);
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        total
    }

    /// Log of the tree prior: internal nodes split, leaves do not.
    pub fn log_prior(&self, prior: &TreePrior) -> f64 {
        self.subtree_log_prior(self.root, prior)
    }

    /// Log prior of the candidate subtree rooted at the parent of `leaf` (or
    /// at `leaf` itself when it is the root). Candidate trees agree above
    /// that node, so differences of this quantity equal differences of the
    /// full-tree log prior. Prune at the root yields `-inf`.
    pub fn local_log_prior(&self, leaf: NodeId, mv: Move, prior: &TreePrior) -> f64 {
        let d = self.depth(leaf);
        let grow_delta = prior.log_split(d) + 2.0 * prior.log_no_split(d + 1) - prior.log_no_split(d);
        match self.parent(leaf) {
            None => match mv {
                Move::Stay => prior.log_no_split(d),
                Move::Grow(_) => prior.log_no_split(d) + grow_delta,
                Move::Prune => f64::NEG_INFINITY,
            },
            Some(p) => match mv {
                Move::Stay => self.subtree_log_prior(p, prior),
                Move::Grow(_) => self.subtree_log_prior(p, prior) + grow_delta,
                Move::Prune => prior.log_no_split(self.depth(p)),
            },
        }
    }

    /// Interval of valid split values on `dim` for `leaf` joined with the
    /// optional pending row.
    pub fn grow_interval(
        &self,
        leaf: NodeId,
        dim: usize,
        min_leaf: usize,
        store: &DataStore,
        pending: Option<usize>,
    ) -> Option<(f64, f64)> {
        let mut coords: Vec<f64> = self.rows(leaf).iter().map(|&r| store.x(r)[dim]).collect();
        if let Some(p) = pending {
            coords.push(store.x(p)[dim]);
        }
        split_interval(&mut coords, min_leaf)
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        self.live += 1;
        if let Some(id) = self.free.pop() {
            self.slots[id.index()] = Some(node);
            id
        } else {
            self.slots.push(Some(node));
            NodeId((self.slots.len() - 1) as u32)
        }
    }

    fn release(&mut self, id: NodeId) {
        self.slots[id.index()] = None;
        self.free.push(id);
        self.live -= 1;
    }

    /// Append a row to a leaf (the *stay* update).
    pub fn add_row(&mut self, leaf: NodeId, row: usize) {
        match &mut self.node_mut(leaf).kind {
            NodeKind::Leaf { rows } => {
                let rows = Arc::make_mut(rows);
                let at = rows.partition_point(|&r| r < row);
                rows.insert(at, row);
            }
            NodeKind::Internal { .. } => panic!("add_row on internal node"),
        }
    }

    /// Split `leaf` by `rule`; its rows plus `pending` are divided between
    /// two new leaves. Returns `(left, right)`.
    pub fn apply_grow(
        &mut self,
        leaf: NodeId,
        rule: SplitRule,
        store: &DataStore,
        pending: Option<usize>,
        min_leaf: usize,
    ) -> Result<(NodeId, NodeId)> {
        if !self.is_leaf(leaf) {
            return Err(Error::TreeEdit("grow on an internal node".into()));
        }
        if rule.dim >= store.dim() {
            return Err(Error::TreeEdit(format!("split dimension {} out of range", rule.dim)));
        }
        let mut rows: Vec<usize> = self.rows(leaf).to_vec();
        if let Some(p) = pending {
            let at = rows.partition_point(|&r| r < p);
            rows.insert(at, p);
        }
        let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| rule.goes_left(store.x(r)));
        if l_rows.len() < min_leaf || r_rows.len() < min_leaf {
            return Err(Error::TreeEdit(format!(
                "split {}<={} leaves {} / {} rows, minimum is {min_leaf}",
                rule.dim,
                rule.value,
                l_rows.len(),
                r_rows.len()
            )));
        }
        let depth = self.depth(leaf) + 1;
        let left = self.alloc(Node {
            kind: NodeKind::Leaf { rows: Arc::new(l_rows) },
            parent: Some(leaf),
            depth,
        });
        let right = self.alloc(Node {
            kind: NodeKind::Leaf { rows: Arc::new(r_rows) },
            parent: Some(leaf),
            depth,
        });
        self.node_mut(leaf).kind = NodeKind::Internal { rule, left, right };
        Ok((left, right))
    }

    /// Remove `leaf` and its sibling subtree; the parent becomes a leaf
    /// holding every row that was below it, plus `pending`. Returns the
    /// parent id.
    pub fn apply_prune(&mut self, leaf: NodeId, pending: Option<usize>) -> Result<NodeId> {
        if !self.is_leaf(leaf) {
            return Err(Error::TreeEdit("prune target must be a leaf".into()));
        }
        let parent = self
            .parent(leaf)
            .ok_or_else(|| Error::TreeEdit("cannot prune the root".into()))?;
        let mut rows = Vec::new();
        let mut doomed = Vec::new();
        let mut stack = vec![parent];
        while let Some(n) = stack.pop() {
            match &self.node(n).kind {
                NodeKind::Leaf { rows: r } => rows.extend_from_slice(r),
                NodeKind::Internal { left, right, .. } => {
                    stack.push(*left);
                    stack.push(*right);
                }
            }
            if n != parent {
                doomed.push(n);
            }
        }
        for n in doomed {
            self.release(n);
        }
        rows.extend(pending);
        rows.sort_unstable();
        self.node_mut(parent).kind = NodeKind::Leaf { rows: Arc::new(rows) };
        Ok(parent)
    }

    /// Nested text rendering: one rule per internal node, one row count per
    /// leaf, children indented under their parent (left first).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, indent)) = stack.pop() {
            let pad = "  ".repeat(indent);
            match &self.node(id).kind {
                NodeKind::Leaf { rows } => {
                    let _ = writeln!(out, "{pad}leaf n={}", rows.len());
                }
                NodeKind::Internal { rule, left, right } => {
                    let _ = writeln!(out, "{pad}x{} <= {}", rule.dim, rule.value);
                    stack.push((*right, indent + 1));
                    stack.push((*left, indent + 1));
                }
            }
        }
        out
    }
}
