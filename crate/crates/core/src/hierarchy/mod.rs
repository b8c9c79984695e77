//! Hierarchical clusterings driven by per-vertex alive bits and thresholds.
//!
//! A clustering at level `ℓ` partitions the vertices; each cluster carries a
//! spanning tree, and the cluster at level `ℓ+1` containing a vertex is a
//! union of level-`ℓ` clusters joined by the edges added at level `ℓ+1`.
//! Vertex state decides which clusters take part in merging: a cluster is
//! *alive* if it holds an undeleted vertex, a *zombie* at level `ℓ` if it
//! is not alive but some member has threshold `> ℓ`, and *dead* otherwise.

mod build;
mod skeleton;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{Edge, SteinerForest, VertexId};
use crate::length::Length;

pub use build::{form_cluster, form_cluster_new, MergeRadius};
pub use skeleton::{boundary, classify_safe, find_low_degree, find_low_degree_with, SafePartition, Skeleton};

/// Minimum number of skeleton edges for which low-degree nodes are guaranteed.
pub const LOW_DEGREE_MIN_EDGES: usize = 36;
/// Number of low-degree nodes returned by [`find_low_degree`].
pub const LOW_DEGREE_COUNT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("level {level} is above the top level {top}")]
    LevelOutOfRange { level: u32, top: u32 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Alive bit and threshold of one vertex.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexState {
    pub alive: bool,
    pub tau: u32,
}

impl VertexState {
    pub fn fresh(tau_max: u32) -> Self {
        VertexState { alive: true, tau: tau_max }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterStatus {
    Alive,
    Zombie,
    Dead,
}

impl ClusterStatus {
    pub fn is_non_dead(self) -> bool {
        self != ClusterStatus::Dead
    }
}

/// Status at `level` of the cluster made of `members` (dense vertex indices).
pub fn status(members: &[usize], states: &[VertexState], level: u32) -> ClusterStatus {
    let mut zombie = false;
    for &m in members {
        let s = states[m];
        if s.alive {
            return ClusterStatus::Alive;
        }
        zombie |= s.tau > level;
    }
    if zombie {
        ClusterStatus::Zombie
    } else {
        ClusterStatus::Dead
    }
}

/// An edge added while building a clustering, in dense indices.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AddedEdge<L> {
    pub a: usize,
    pub b: usize,
    pub len: L,
}

/// Counts of cluster kinds at one level.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub clusters: usize,
    pub alive: usize,
    pub zombie: usize,
    pub dead: usize,
}

impl LevelStats {
    /// Alive plus zombie clusters.
    pub fn non_dead(&self) -> usize {
        self.alive + self.zombie
    }
}

/// One cluster of a level, in dense indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterView {
    /// Smallest member index; identifies the cluster within its level.
    pub key: usize,
    pub members: Vec<usize>,
}

/// Output of [`form_cluster`] / [`form_cluster_new`], together with the
/// vertex states it was built under.
///
/// Levels `0..=s` are stored; every level above `s` equals level `s`.
#[derive(Clone, Debug)]
pub struct HierarchicalClustering<L> {
    ids: Vec<VertexId>,
    states: Vec<VertexState>,
    labels: Vec<Vec<usize>>,
    added: Vec<Vec<AddedEdge<L>>>,
    r: u32,
    s: u32,
}

impl<L: Length> HierarchicalClustering<L> {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn states(&self) -> &[VertexState] {
        &self.states
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    fn clamp(&self, level: u32) -> usize {
        level.min(self.s) as usize
    }

    /// `labels[i]` is the smallest member index of `i`'s cluster at `level`.
    pub fn labels_at(&self, level: u32) -> &[usize] {
        &self.labels[self.clamp(level)]
    }

    /// `E_ℓ`: edges added while forming level `ℓ` from level `ℓ-1`.
    pub fn added_at(&self, level: u32) -> &[AddedEdge<L>] {
        if level > self.s {
            &[]
        } else {
            &self.added[level as usize]
        }
    }

    /// `m_ℓ = |E_ℓ|`.
    pub fn m_at(&self, level: u32) -> usize {
        self.added_at(level).len()
    }

    /// `m_{>ℓ}`: edges added strictly above `level`.
    pub fn m_above(&self, level: u32) -> usize {
        ((level + 1)..=self.s).map(|j| self.m_at(j)).sum()
    }

    /// Every added edge with the level it was added at, ascending by level
    /// and then by endpoint ids.
    pub fn edges_by_level(&self) -> Vec<(u32, AddedEdge<L>)> {
        let mut out: Vec<(u32, AddedEdge<L>)> = Vec::new();
        for (lvl, es) in self.added.iter().enumerate() {
            let mut es = es.clone();
            es.sort_by_key(|e| (self.ids[e.a], self.ids[e.b]));
            out.extend(es.into_iter().map(|e| (lvl as u32, e)));
        }
        out
    }

    pub fn to_edge(&self, e: &AddedEdge<L>) -> Edge {
        Edge::new(self.ids[e.a], self.ids[e.b])
    }

    /// Level at which `e` was added, if it was.
    pub fn level_of(&self, e: Edge) -> Option<u32> {
        self.added.iter().enumerate().find_map(|(lvl, es)| {
            es.iter().any(|x| self.to_edge(x) == e).then_some(lvl as u32)
        })
    }

    pub fn clusters_at(&self, level: u32) -> Vec<ClusterView> {
        let labels = self.labels_at(level);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        groups.into_iter().map(|(key, members)| ClusterView { key, members }).collect()
    }

    /// Status at `level` of every cluster of that level, keyed by cluster key.
    pub fn statuses_at(&self, level: u32) -> BTreeMap<usize, ClusterStatus> {
        self.clusters_at(level)
            .into_iter()
            .map(|c| (c.key, status(&c.members, &self.states, level)))
            .collect()
    }

    pub fn stats_at(&self, level: u32) -> LevelStats {
        let mut st = LevelStats::default();
        for s in self.statuses_at(level).into_values() {
            st.clusters += 1;
            match s {
                ClusterStatus::Alive => st.alive += 1,
                ClusterStatus::Zombie => st.zombie += 1,
                ClusterStatus::Dead => st.dead += 1,
            }
        }
        st
    }

    /// `E(C_ℓ)`: all edges added at levels `≤ ℓ`.
    pub fn forest_through(&self, level: u32) -> SteinerForest<L> {
        (0..=self.clamp(level))
            .flat_map(|l| self.added[l].iter())
            .map(|e| (self.to_edge(e), e.len))
            .collect()
    }

    /// Every edge of the clustering, `E(C_s)`.
    pub fn full_forest(&self) -> SteinerForest<L> {
        self.forest_through(self.s)
    }

    /// Spanning tree `T(C)` of the level-`level` cluster with key `key`.
    pub fn cluster_tree(&self, level: u32, key: usize) -> SteinerForest<L> {
        let labels = self.labels_at(level);
        (0..=self.clamp(level))
            .flat_map(|l| self.added[l].iter())
            .filter(|e| labels[e.a] == key)
            .map(|e| (self.to_edge(e), e.len))
            .collect()
    }

    /// Tree of the single alive cluster at `level`; empty if no cluster is
    /// alive. Panics if more than one cluster is alive.
    pub fn alive_tree_at(&self, level: u32) -> SteinerForest<L> {
        let alive: Vec<usize> = self
            .statuses_at(level)
            .into_iter()
            .filter(|&(_, s)| s == ClusterStatus::Alive)
            .map(|(k, _)| k)
            .collect();
        match alive.as_slice() {
            [] => SteinerForest::new(),
            [key] => self.cluster_tree(level, *key),
            _ => panic!("{} alive clusters at level {level}", alive.len()),
        }
    }

    pub fn alive_vertices(&self) -> BTreeSet<VertexId> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive)
            .map(|(i, _)| self.ids[i])
            .collect()
    }

    /// JSON-friendly view of every stored level.
    pub fn dump(&self) -> ClusteringDump {
        let levels = (0..=self.s)
            .map(|level| {
                let clusters = self
                    .clusters_at(level)
                    .into_iter()
                    .map(|c| ClusterDump {
                        vertices: c.members.iter().map(|&i| self.ids[i]).collect(),
                        tree: self
                            .cluster_tree(level, c.key)
                            .iter()
                            .map(|(e, l)| (e.u, e.v, l.widen() as u64))
                            .collect(),
                        status: status(&c.members, &self.states, level),
                    })
                    .collect();
                LevelDump {
                    level,
                    added: self.added[level as usize]
                        .iter()
                        .map(|e| {
                            let edge = self.to_edge(e);
                            (edge.u, edge.v, e.len.widen() as u64)
                        })
                        .collect(),
                    clusters,
                }
            })
            .collect();
        ClusteringDump { r: self.r, s: self.s, levels }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringDump {
    pub r: u32,
    pub s: u32,
    pub levels: Vec<LevelDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDump {
    pub level: u32,
    pub added: Vec<(VertexId, VertexId, u64)>,
    pub clusters: Vec<ClusterDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterDump {
    pub vertices: Vec<VertexId>,
    pub tree: Vec<(VertexId, VertexId, u64)>,
    pub status: ClusterStatus,
}
