//! Steiner tree maintenance under additions and deletions.
//!
//! New vertices attach greedily to the nearest tree vertex. Deleted
//! vertices stay in the tree as Steiner points while they have degree at
//! least 3; lower-degree ones are pruned or spliced out. After every
//! request the tree is improved by 2-swaps until none applies.

mod shadow;
mod swap;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{Edge, SteinerForest, VertexId};
use crate::length::Length;
use crate::metric::{MetricError, MetricSpace};

pub use shadow::{potential, Color, ShadowTree};
pub use swap::{next_swap, valid_swaps, Swap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynError {
    #[error("vertex {0} was already added")]
    DuplicateId(VertexId),
    #[error("vertex {0} is unknown or already deleted")]
    UnknownOrDeleted(VertexId),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynOp {
    Add,
    Del,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynStep {
    pub op: DynOp,
    pub vertex: VertexId,
    pub greedy: Option<Edge>,
    pub swaps: usize,
    pub splices: usize,
    pub pruned: usize,
    /// `|T_{t-1} △ T_t|`.
    pub churn: usize,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub requests: usize,
    pub additions: usize,
    pub deletions: usize,
    /// `n_b`.
    pub swaps: usize,
    /// `n_d`.
    pub splices: usize,
    pub pruned: usize,
}

#[derive(Clone, Debug)]
pub struct DynTree<L> {
    metric: MetricSpace<L>,
    alive: BTreeSet<VertexId>,
    steiner: BTreeSet<VertexId>,
    tree: SteinerForest<L>,
    shadow: ShadowTree<L>,
    greedy: Vec<(Edge, L)>,
    order: Vec<VertexId>,
    counters: Counters,
}

impl<L: Length> Default for DynTree<L> {
    fn default() -> Self {
        Self::new()
    }
}

impl<L: Length> DynTree<L> {
    pub fn new() -> Self {
        DynTree {
            metric: MetricSpace::empty(),
            alive: BTreeSet::new(),
            steiner: BTreeSet::new(),
            tree: SteinerForest::new(),
            shadow: ShadowTree::new(),
            greedy: Vec::new(),
            order: Vec::new(),
            counters: Counters::default(),
        }
    }

    /// Adds `id` with its distances to the currently alive vertices.
    pub fn add(&mut self, id: VertexId, dists: &BTreeMap<VertexId, L>) -> Result<DynStep, DynError> {
        if self.metric.contains(id) {
            return Err(DynError::DuplicateId(id));
        }
        let metric = self.metric.extend(id, dists, &self.alive)?;
        let before = self.tree.clone();
        self.metric = metric;
        let greedy = self.metric.nearest(id, self.tree_vertices()).map(|p| {
            let e = Edge::new(id, p);
            let len = self.metric.edge_len(e);
            self.tree.insert(e, len);
            self.shadow.add_black(e, len);
            self.greedy.push((e, len));
            e
        });
        self.alive.insert(id);
        self.order.push(id);
        self.counters.requests += 1;
        self.counters.additions += 1;
        let mut step = self.stabilize(DynOp::Add, id, &before);
        step.greedy = greedy;
        Ok(step)
    }

    pub fn remove(&mut self, id: VertexId) -> Result<DynStep, DynError> {
        if !self.alive.remove(&id) {
            return Err(DynError::UnknownOrDeleted(id));
        }
        let before = self.tree.clone();
        self.steiner.insert(id);
        self.counters.requests += 1;
        self.counters.deletions += 1;
        Ok(self.stabilize(DynOp::Del, id, &before))
    }

    fn stabilize(&mut self, op: DynOp, vertex: VertexId, before: &SteinerForest<L>) -> DynStep {
        let mut step = DynStep { op, vertex, greedy: None, swaps: 0, splices: 0, pruned: 0, churn: 0 };
        loop {
            let converted = self.convert(&mut step);
            let mut swapped = false;
            while let Some(s) = next_swap(&self.metric, &self.tree) {
                self.apply_swap(s);
                step.swaps += 1;
                swapped = true;
            }
            if !converted && !swapped {
                break;
            }
        }
        self.counters.swaps += step.swaps;
        self.counters.splices += step.splices;
        self.counters.pruned += step.pruned;
        step.churn = before.symmetric_difference(&self.tree);
        step
    }

    /// Prunes and splices Steiner vertices of degree at most 2 until none
    /// is left. Returns whether anything changed.
    fn convert(&mut self, step: &mut DynStep) -> bool {
        let mut changed = false;
        while let Some(u) = self.steiner.iter().copied().find(|&u| self.tree.degree(u) <= 2) {
            changed = true;
            self.steiner.remove(&u);
            let nbrs: Vec<VertexId> = self.tree.edges().filter(|e| e.touches(u)).map(|e| e.other(u)).collect();
            match nbrs[..] {
                [] => {}
                [x] => {
                    let e = Edge::new(u, x);
                    self.tree.remove(&e);
                    self.shadow.recolor_red(&e);
                    step.pruned += 1;
                }
                [v, w] => {
                    let (ev, ew) = (Edge::new(u, v), Edge::new(u, w));
                    self.tree.remove(&ev);
                    self.tree.remove(&ew);
                    let vw = Edge::new(v, w);
                    let len = self.metric.edge_len(vw);
                    self.tree.insert(vw, len);
                    self.shadow.add_black(vw, len);
                    let (near, far) = if (self.metric.dist(u, v), v) <= (self.metric.dist(u, w), w) {
                        (ev, ew)
                    } else {
                        (ew, ev)
                    };
                    self.shadow.recolor_red(&near);
                    self.shadow.remove(&far);
                    step.splices += 1;
                }
                _ => unreachable!("degree checked above"),
            }
        }
        changed
    }

    fn apply_swap(&mut self, s: Swap) {
        self.tree.remove(&s.remove);
        self.shadow.remove(&s.remove);
        let len = self.metric.edge_len(s.add);
        self.tree.insert(s.add, len);
        self.shadow.add_black(s.add, len);
    }

    pub fn tree(&self) -> &SteinerForest<L> {
        &self.tree
    }

    pub fn cost(&self) -> L {
        self.tree.cost()
    }

    /// `V(T)`: alive vertices plus retained Steiner vertices.
    pub fn tree_vertices(&self) -> BTreeSet<VertexId> {
        self.alive.union(&self.steiner).copied().collect()
    }

    pub fn alive(&self) -> &BTreeSet<VertexId> {
        &self.alive
    }

    pub fn steiner(&self) -> &BTreeSet<VertexId> {
        &self.steiner
    }

    pub fn metric(&self) -> &MetricSpace<L> {
        &self.metric
    }

    pub fn shadow(&self) -> &ShadowTree<L> {
        &self.shadow
    }

    /// `E_g`, in the order the edges were added.
    pub fn greedy_edges(&self) -> &[(Edge, L)] {
        &self.greedy
    }

    /// Ids in the order they were added.
    pub fn addition_order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Every valid 2-swap of the current tree; empty after each step.
    pub fn check_stable(&self) -> Vec<Swap> {
        valid_swaps(&self.metric, &self.tree)
    }

    pub fn potential(&self) -> BigUint {
        self.shadow.potential()
    }

    /// Structural invariants: spanning, Steiner degrees, stability, shadow.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let nodes = self.tree_vertices();
        if !self.tree.is_empty() && self.tree.vertices() != nodes {
            out.push("tree vertices differ from alive ∪ Steiner".into());
        }
        if nodes.len() > 1 && !self.tree.spans_as_tree(&nodes) {
            out.push("tree is not a spanning tree of its vertices".into());
        }
        for &u in &self.steiner {
            let deg = self.tree.degree(u);
            if deg < 3 {
                out.push(format!("Steiner vertex {u} has degree {deg}"));
            }
        }
        for s in self.check_stable() {
            out.push(format!("valid swap {} -> {}", s.remove, s.add));
        }
        out.extend(self.shadow.violations(&self.tree, &nodes, self.metric.ids()));
        let mst = self.metric.mst_cost(&self.alive).unwrap_or_else(|_| L::zero()).widen();
        if self.cost().widen() > 4 * mst {
            out.push(format!("cost {} > 4·MST {mst}", self.cost()));
        }
        out
    }

    /// Potential and counting bounds of the swap analysis. Quadratic in the
    /// number of vertices seen; meant for end-of-run checks.
    pub fn potential_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let all: BTreeSet<VertexId> = self.metric.ids().iter().copied().collect();
        let c = self.counters;
        let phi = self.potential();
        let phi_g = potential(self.greedy.iter().map(|&(_, l)| l));
        let phi_mst = match self.metric.mst(&all) {
            Ok(t) => potential(t.iter().map(|(_, l)| l)),
            Err(_) => potential::<L, _>([]),
        };
        if (&phi << c.swaps) > (&phi_g << c.splices) {
            out.push(format!("Φ(shadow)·2^{} > Φ(greedy)·2^{}", c.swaps, c.splices));
        }
        if phi < phi_mst {
            out.push("Φ(shadow) < Φ(MST)".into());
        }
        if phi_g > (&phi_mst << (2 * all.len())) {
            out.push("Φ(greedy) > 4^|V|·Φ(MST)".into());
        }
        if c.swaps > 2 * all.len() + c.splices {
            out.push(format!("{} swaps > 2·{} + {}", c.swaps, all.len(), c.splices));
        }
        if c.swaps > 2 * c.requests {
            out.push(format!("{} swaps over {} requests", c.swaps, c.requests));
        }
        let mut replay: Vec<Edge> = greedy_replay(&self.metric, &self.order);
        let mut ours: Vec<Edge> = self.greedy.iter().map(|&(e, _)| e).collect();
        replay.sort();
        ours.sort();
        if replay != ours {
            out.push("greedy edges differ from an additions-only replay".into());
        }
        out
    }
}

/// Edges the plain greedy algorithm adds when the vertices of `order`
/// arrive one by one and nothing is deleted.
pub fn greedy_replay<L: Length>(m: &MetricSpace<L>, order: &[VertexId]) -> Vec<Edge> {
    order
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &v)| Edge::new(v, m.nearest(v, order[..i].iter().copied()).expect("non-empty prefix")))
        .collect()
}
