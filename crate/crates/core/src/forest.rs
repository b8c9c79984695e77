//! Vertex ids, undirected edges and edge-set forests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::length::Length;

/// Identifier of a vertex of the metric.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// An undirected edge, stored with its endpoints in ascending order so that
/// the derived ordering is the lexicographic order on endpoint pairs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        debug_assert_ne!(a, b, "self-loop edge");
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint opposite to `x`. `x` must be an endpoint.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            debug_assert_eq!(self.v, x);
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

/// A set of weighted edges. Used both for Steiner trees and for forests in
/// which only one component is required to span the terminals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerForest<L> {
    edges: BTreeMap<Edge, L>,
}

/// Trees are forests with a single component; the distinction is only
/// enforced where it matters.
pub type SteinerTree<L> = SteinerForest<L>;

impl<L: Length> SteinerForest<L> {
    pub fn new() -> Self {
        SteinerForest { edges: BTreeMap::new() }
    }

    pub fn insert(&mut self, e: Edge, len: L) -> bool {
        self.edges.insert(e, len).is_none()
    }

    pub fn remove(&mut self, e: &Edge) -> Option<L> {
        self.edges.remove(e)
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains_key(e)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn length_of(&self, e: &Edge) -> Option<L> {
        self.edges.get(e).copied()
    }

    pub fn cost(&self) -> L {
        self.edges.values().fold(L::zero(), |acc, &l| acc + l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, L)> + '_ {
        self.edges.iter().map(|(&e, &l)| (e, l))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.keys().copied()
    }

    /// Vertices touched by at least one edge.
    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.edges.keys().flat_map(|e| [e.u, e.v]).collect()
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.edges.keys().filter(|e| e.touches(x)).count()
    }

    /// `|self △ other|`.
    pub fn symmetric_difference(&self, other: &Self) -> usize {
        let only_self = self.edges.keys().filter(|e| !other.edges.contains_key(e)).count();
        let only_other = other.edges.keys().filter(|e| !self.edges.contains_key(e)).count();
        only_self + only_other
    }

    /// `|self \ other|`.
    pub fn difference(&self, other: &Self) -> usize {
        self.edges.keys().filter(|e| !other.edges.contains_key(e)).count()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.edges.keys().all(|e| other.edges.contains_key(e))
    }

    /// True when the edges contain no cycle.
    pub fn is_acyclic(&self) -> bool {
        let verts: Vec<VertexId> = self.vertices().into_iter().collect();
        let index: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(verts.len());
        self.edges.keys().all(|e| uf.union(index[&e.u], index[&e.v]))
    }

    /// True when the edges form one tree containing every vertex of `required`.
    /// An empty edge set spans at most one vertex.
    pub fn spans_as_tree(&self, required: &BTreeSet<VertexId>) -> bool {
        if self.edges.is_empty() {
            return required.len() <= 1;
        }
        let verts = self.vertices();
        if !required.is_subset(&verts) || !self.is_acyclic() {
            return false;
        }
        self.edges.len() + 1 == verts.len()
    }
}

impl<L: Length> FromIterator<(Edge, L)> for SteinerForest<L> {
    fn from_iter<I: IntoIterator<Item = (Edge, L)>>(iter: I) -> Self {
        SteinerForest { edges: iter.into_iter().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: u32, b: u32) -> Edge {
        Edge::new(VertexId(a), VertexId(b))
    }

    #[test]
    fn edge_is_normalized() {
        assert_eq!(e(3, 1), e(1, 3));
        assert_eq!(e(3, 1).u, VertexId(1));
        assert!(e(1, 2) < e(1, 3));
        assert!(e(1, 9) < e(2, 3));
    }

    #[test]
    fn symmetric_difference_counts_both_sides() {
        let a: SteinerForest<u64> = [(e(1, 2), 2), (e(2, 3), 4)].into_iter().collect();
        let b: SteinerForest<u64> = [(e(1, 2), 2), (e(3, 4), 1)].into_iter().collect();
        assert_eq!(a.symmetric_difference(&b), 2);
        assert_eq!(a.difference(&b), 1);
        assert_eq!(a.cost(), 6);
    }

    #[test]
    fn tree_checks() {
        let path: SteinerForest<u64> = [(e(1, 2), 1), (e(2, 3), 1)].into_iter().collect();
        let req: BTreeSet<VertexId> = [1, 3].into_iter().map(VertexId).collect();
        assert!(path.spans_as_tree(&req));
        let mut cyc = path.clone();
        cyc.insert(e(1, 3), 1);
        assert!(!cyc.is_acyclic());
        assert!(!cyc.spans_as_tree(&req));
        let split: SteinerForest<u64> = [(e(1, 2), 1), (e(3, 4), 1)].into_iter().collect();
        assert!(!split.spans_as_tree(&req));
        assert!(SteinerForest::<u64>::new().spans_as_tree(&BTreeSet::from([VertexId(5)])));
    }
}
