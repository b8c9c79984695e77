use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::forest::{Edge, SteinerForest, VertexId};
use crate::length::Length;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Red,
}

/// Product of the edge lengths; `1` for no edges.
pub fn potential<L: Length, I: IntoIterator<Item = L>>(lengths: I) -> BigUint {
    lengths.into_iter().fold(BigUint::one(), |acc, l| acc * l.to_big())
}

/// Spanning tree over every vertex seen so far. Black edges are exactly
/// the current Steiner tree; red edges hang removed vertices off it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShadowTree<L> {
    edges: BTreeMap<Edge, (L, Color)>,
}

impl<L: Length> ShadowTree<L> {
    pub fn new() -> Self {
        ShadowTree { edges: BTreeMap::new() }
    }

    pub fn add_black(&mut self, e: Edge, len: L) {
        let old = self.edges.insert(e, (len, Color::Black));
        debug_assert!(old.is_none(), "shadow edge {e} added twice");
    }

    pub fn remove(&mut self, e: &Edge) {
        self.edges.remove(e);
    }

    pub fn recolor_red(&mut self, e: &Edge) {
        if let Some(entry) = self.edges.get_mut(e) {
            entry.1 = Color::Red;
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, L, Color)> + '_ {
        self.edges.iter().map(|(&e, &(l, c))| (e, l, c))
    }

    pub fn colored(&self, color: Color) -> SteinerForest<L> {
        self.iter().filter(|&(_, _, c)| c == color).map(|(e, l, _)| (e, l)).collect()
    }

    pub fn potential(&self) -> BigUint {
        potential(self.edges.values().map(|&(l, _)| l))
    }

    /// Problems with the shadow relative to the Steiner tree `tree` on
    /// `tree_vertices`, with `all` the vertices seen so far.
    pub fn violations(
        &self,
        tree: &SteinerForest<L>,
        tree_vertices: &BTreeSet<VertexId>,
        all: &[VertexId],
    ) -> Vec<String> {
        let mut out = Vec::new();
        if &self.colored(Color::Black) != tree {
            out.push("black shadow edges differ from the tree".into());
        }
        let index: BTreeMap<VertexId, usize> = all.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = UnionFind::<usize>::new(all.len());
        let mut red = UnionFind::<usize>::new(all.len());
        for (e, _, c) in self.iter() {
            let (Some(&a), Some(&b)) = (index.get(&e.u), index.get(&e.v)) else {
                out.push(format!("shadow edge {e} leaves the vertex set"));
                continue;
            };
            if !uf.union(a, b) {
                out.push(format!("shadow edge {e} closes a cycle"));
            }
            if c == Color::Red {
                red.union(a, b);
            }
        }
        if !all.is_empty() && self.len() + 1 != all.len() {
            out.push(format!("shadow has {} edges on {} vertices", self.len(), all.len()));
        }
        if !tree_vertices.is_empty() {
            let mut count: BTreeMap<usize, usize> = BTreeMap::new();
            for v in all {
                let root = red.find(index[v]);
                *count.entry(root).or_default() += usize::from(tree_vertices.contains(v));
            }
            if let Some((_, k)) = count.iter().find(|(_, &k)| k != 1) {
                out.push(format!("a red component holds {k} tree vertices"));
            }
        }
        out
    }
}
