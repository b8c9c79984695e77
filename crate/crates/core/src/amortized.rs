//! Deletion-only maintenance with an amortized bound on edge changes.
//!
//! After each deletion the clustering is rebuilt with the deleted vertex as
//! a zombie. A level is bad when its zombie clusters are at least as many as
//! its alive clusters; if any level is bad, every vertex of every zombie
//! cluster at the lowest bad level gets threshold 0 (dead everywhere) and
//! the clustering is rebuilt once more. The maintained tree only changes in
//! that second case.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{SteinerForest, VertexId};
use crate::hierarchy::{form_cluster, ClusterStatus, HierarchicalClustering, VertexState};
use crate::length::Length;
use crate::metric::MetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeleteError {
    #[error("vertex {0} is not part of the metric")]
    UnknownVertex(VertexId),
    #[error("vertex {0} was already deleted")]
    AlreadyDeleted(VertexId),
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
}

/// Which branch a deletion step took.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepCase {
    /// No rebuild was needed.
    Lazy,
    /// Zombie clusters at `lstar` were killed and the clustering rebuilt.
    Rebuild { lstar: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmortizedStep {
    pub deleted: VertexId,
    pub case: StepCase,
    /// Vertices whose threshold dropped to 0 in this step.
    pub zt: Vec<VertexId>,
    pub zombie_clusters: usize,
    /// `|T_{t-1} △ T_t|`.
    pub churn: usize,
    /// Change of the whole forest `E(C_r)`, including components with no
    /// alive vertex.
    pub forest_churn: usize,
}

#[derive(Clone, Debug)]
pub struct AmortizedState<L> {
    metric: MetricSpace<L>,
    clustering: HierarchicalClustering<L>,
    tree: SteinerForest<L>,
    forest: SteinerForest<L>,
}

/// Levels whose zombie clusters are at least as many as their alive
/// clusters. A level with neither is not counted as bad.
pub fn bad_levels<L: Length>(h: &HierarchicalClustering<L>) -> Vec<u32> {
    (0..=h.s())
        .filter(|&l| {
            let st = h.stats_at(l);
            st.zombie > 0 && st.zombie >= st.alive
        })
        .collect()
}

/// `2κ₀ + Σ_{ℓ=1}^{r} κ_ℓ 2^ℓ`, with `κ_ℓ` the non-dead cluster count.
pub fn cost_upper_bound<L: Length>(h: &HierarchicalClustering<L>) -> u128 {
    let kappa = |l: u32| h.stats_at(l).non_dead() as u128;
    2 * kappa(0) + (1..=h.r()).map(|l| kappa(l) << l).sum::<u128>()
}

impl<L: Length> AmortizedState<L> {
    pub fn new(metric: MetricSpace<L>) -> Self {
        let states = vec![VertexState::fresh(metric.tau_max()); metric.len()];
        let clustering = form_cluster(&metric, &states);
        let tree = clustering.alive_tree_at(clustering.r());
        let forest = clustering.forest_through(clustering.r());
        AmortizedState { metric, clustering, tree, forest }
    }

    pub fn delete(&mut self, v: VertexId) -> Result<AmortizedStep, DeleteError> {
        let idx = self.metric.index_of(v).ok_or(DeleteError::UnknownVertex(v))?;
        let mut states = self.clustering.states().to_vec();
        if !states[idx].alive {
            return Err(DeleteError::AlreadyDeleted(v));
        }
        states[idx].alive = false;
        let hat = form_cluster(&self.metric, &states);

        let prev_tree = std::mem::take(&mut self.tree);
        let prev_forest = std::mem::take(&mut self.forest);
        let (case, zt, zombie_clusters) = match bad_levels(&hat).first() {
            None => {
                self.tree = prev_tree.clone();
                self.clustering = hat;
                (StepCase::Lazy, Vec::new(), 0)
            }
            Some(&lstar) => {
                let mut zt = Vec::new();
                let mut zombie_clusters = 0;
                for c in hat.clusters_at(lstar) {
                    if crate::hierarchy::status(&c.members, hat.states(), lstar) == ClusterStatus::Zombie {
                        zombie_clusters += 1;
                        for &m in &c.members {
                            states[m].tau = 0;
                            zt.push(self.metric.id(m));
                        }
                    }
                }
                zt.sort();
                self.clustering = form_cluster(&self.metric, &states);
                self.tree = self.clustering.alive_tree_at(self.clustering.r());
                (StepCase::Rebuild { lstar }, zt, zombie_clusters)
            }
        };
        self.forest = self.clustering.forest_through(self.clustering.r());
        Ok(AmortizedStep {
            deleted: v,
            case,
            zt,
            zombie_clusters,
            churn: prev_tree.symmetric_difference(&self.tree),
            forest_churn: prev_forest.symmetric_difference(&self.forest),
        })
    }

    pub fn tree(&self) -> &SteinerForest<L> {
        &self.tree
    }

    pub fn forest(&self) -> &SteinerForest<L> {
        &self.forest
    }

    pub fn clustering(&self) -> &HierarchicalClustering<L> {
        &self.clustering
    }

    pub fn metric(&self) -> &MetricSpace<L> {
        &self.metric
    }

    pub fn alive(&self) -> BTreeSet<VertexId> {
        self.clustering.alive_vertices()
    }

    /// Structural invariants that must hold after every step; returns a
    /// description of each violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let h = &self.clustering;
        let bad = bad_levels(h);
        if !bad.is_empty() {
            out.push(format!("bad levels after step: {bad:?}"));
        }
        for l in 0..=h.s() {
            for c in h.clusters_at(l) {
                let st = crate::hierarchy::status(&c.members, h.states(), l);
                if st == ClusterStatus::Dead && c.members.len() > 1 {
                    out.push(format!("dead cluster of size {} at level {l}", c.members.len()));
                }
            }
        }
        if h.r() != h.s() {
            out.push(format!("r = {} differs from s = {}", h.r(), h.s()));
        }
        if !self.tree.spans_as_tree(&self.alive()) {
            out.push("tree does not span the alive vertices".into());
        }
        if !self.tree.is_subset(&h.full_forest()) {
            out.push("tree uses edges outside the clustering".into());
        }
        let bound = cost_upper_bound(h);
        if self.tree.cost().widen() > bound {
            out.push(format!("tree cost {} exceeds level bound {bound}", self.tree.cost()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pos: &[u64]) -> MetricSpace<u64> {
        let pts: Vec<VertexId> = (1..=pos.len() as u32).map(VertexId).collect();
        let mut d = Vec::new();
        for a in 0..pos.len() {
            for b in (a + 1)..pos.len() {
                d.push((pts[a], pts[b], pos[a].abs_diff(pos[b])));
            }
        }
        MetricSpace::validate(&pts, &d).unwrap()
    }

    #[test]
    fn initial_tree_spans_everything() {
        let st = AmortizedState::new(line(&[0, 2]));
        assert_eq!(st.tree().len(), 1);
        assert_eq!(st.tree().cost(), 2);

        let st = AmortizedState::new(line(&[0, 2, 8, 10]));
        let mut lens: Vec<u64> = st.tree().iter().map(|(_, l)| l).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 2, 6]);

        let st = AmortizedState::new(line(&[3]));
        assert!(st.tree().is_empty());
    }

    #[test]
    fn deleting_one_of_two() {
        let mut st = AmortizedState::new(line(&[0, 2]));
        let step = st.delete(VertexId(1)).unwrap();
        assert_eq!(step.case, StepCase::Rebuild { lstar: 0 });
        assert_eq!(step.zt, vec![VertexId(1)]);
        assert!(st.tree().is_empty());
        assert_eq!(step.churn, 1);
        assert!(step.churn <= 3 * step.zt.len());
        assert!(st.violations().is_empty());
        assert_eq!(st.delete(VertexId(1)).unwrap_err(), DeleteError::AlreadyDeleted(VertexId(1)));
        assert_eq!(st.delete(VertexId(9)).unwrap_err(), DeleteError::UnknownVertex(VertexId(9)));
    }

    #[test]
    fn deletion_inside_big_alive_cluster_is_lazy() {
        // A tight group of 5 plus one far vertex: deleting a group member
        // leaves it alive at every level.
        let mut st = AmortizedState::new(line(&[0, 2, 4, 6, 8, 1000]));
        let before = st.tree().clone();
        let step = st.delete(VertexId(3)).unwrap();
        assert_eq!(step.case, StepCase::Lazy);
        assert_eq!(step.churn, 0);
        assert_eq!(st.tree(), &before);
        assert!(st.violations().is_empty());
    }

    #[test]
    fn deleting_everything() {
        let mut st = AmortizedState::new(line(&[0, 2, 8, 10, 40, 44]));
        let mut total = 0;
        for v in 1..=6 {
            let step = st.delete(VertexId(v)).unwrap();
            assert!(step.churn <= 3 * step.zt.len(), "{step:?}");
            total += step.churn;
            assert!(st.violations().is_empty(), "{:?}", st.violations());
        }
        assert!(total <= 18);
        assert!(st.tree().is_empty());
    }
}
