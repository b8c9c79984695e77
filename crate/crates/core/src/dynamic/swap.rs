use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::forest::{Edge, SteinerForest, VertexId};
use crate::length::Length;
use crate::metric::MetricSpace;

/// Replace tree edge `remove` by `add`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Swap {
    pub remove: Edge,
    pub add: Edge,
}

fn adjacency<L: Length>(tree: &SteinerForest<L>) -> BTreeMap<VertexId, Vec<VertexId>> {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for e in tree.edges() {
        adj.entry(e.u).or_default().push(e.v);
        adj.entry(e.v).or_default().push(e.u);
    }
    adj
}

/// Vertices on `e.u`'s side of `tree − e`.
fn side(adj: &BTreeMap<VertexId, Vec<VertexId>>, e: Edge) -> BTreeSet<VertexId> {
    let mut seen = BTreeSet::from([e.u]);
    let mut stack = vec![e.u];
    while let Some(x) = stack.pop() {
        for &y in adj.get(&x).into_iter().flatten() {
            if Edge::new(x, y) != e && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// Pairs `(x, y)` with `x` in `a`, `y` in `b`, ordered by length then edge.
fn crossing<'a, L: Length>(
    m: &'a MetricSpace<L>,
    a: &'a BTreeSet<VertexId>,
    b: &'a [VertexId],
) -> impl Iterator<Item = (L, Edge)> + 'a {
    a.iter().flat_map(move |&x| b.iter().map(move |&y| (m.dist(x, y), Edge::new(x, y))))
}

fn is_valid<L: Length>(removed: L, added: L) -> bool {
    removed.widen() >= 2 * added.widen()
}

/// The swap the stabilization loop performs next: tree edges are scanned
/// longest first, and the first one whose shortest reconnecting edge is at
/// most half as long is swapped for it.
pub fn next_swap<L: Length>(m: &MetricSpace<L>, tree: &SteinerForest<L>) -> Option<Swap> {
    let adj = adjacency(tree);
    let mut order: Vec<(L, Edge)> = tree.iter().map(|(e, l)| (l, e)).collect();
    order.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    for (len, e) in order {
        let a = side(&adj, e);
        let b: Vec<VertexId> = adj.keys().copied().filter(|v| !a.contains(v)).collect();
        let best = crossing(m, &a, &b).filter(|&(_, f)| f != e).min();
        if let Some((flen, f)) = best {
            if is_valid(len, flen) {
                return Some(Swap { remove: e, add: f });
            }
        }
    }
    None
}

/// Every valid 2-swap of `tree`, candidates drawn from all pairs of tree
/// vertices.
pub fn valid_swaps<L: Length>(m: &MetricSpace<L>, tree: &SteinerForest<L>) -> Vec<Swap> {
    let adj = adjacency(tree);
    let mut out = Vec::new();
    for (e, len) in tree.iter() {
        let a = side(&adj, e);
        let b: Vec<VertexId> = adj.keys().copied().filter(|v| !a.contains(v)).collect();
        out.extend(
            crossing(m, &a, &b)
                .filter(|&(flen, f)| f != e && is_valid(len, flen))
                .map(|(_, f)| Swap { remove: e, add: f }),
        );
    }
    out.sort();
    out
}
