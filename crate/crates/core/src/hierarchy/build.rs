use petgraph::unionfind::UnionFind;

use super::{AddedEdge, HierarchicalClustering, VertexState};
use crate::length::Length;
use crate::metric::MetricSpace;

/// Greedy merge radius used while building level `ℓ+1` from level `ℓ`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MergeRadius {
    /// Merge clusters at distance `≤ 2^{ℓ+1}` (first-generation builder).
    Doubled,
    /// Merge clusters at distance `≤ 2^ℓ` (builder that reuses old edges).
    Plain,
}

impl MergeRadius {
    fn exponent(self, level: u32) -> u32 {
        match self {
            MergeRadius::Doubled => level + 1,
            MergeRadius::Plain => level,
        }
    }
}

/// Builds a hierarchical clustering from scratch: at each level, repeatedly
/// merge the closest pair of non-dead clusters within `2^{ℓ+1}`, joining them
/// by their closest vertex pair; ties go to the lexicographically smallest
/// vertex pair.
pub fn form_cluster<L: Length>(metric: &MetricSpace<L>, states: &[VertexState]) -> HierarchicalClustering<L> {
    Builder::new(metric, states).run(MergeRadius::Doubled, None)
}

/// Builds a hierarchical clustering that follows `old` where it can: at
/// each level `j` the old edges of levels `≤ j+1` joining two `j`-non-dead
/// clusters are reused first (by level, then endpoint ids), and only then
/// are non-dead clusters within `2^j` merged greedily.
pub fn form_cluster_new<L: Length>(
    metric: &MetricSpace<L>,
    states: &[VertexState],
    old: &HierarchicalClustering<L>,
) -> HierarchicalClustering<L> {
    assert_eq!(old.num_vertices(), metric.len(), "old clustering is over a different vertex set");
    Builder::new(metric, states).run(MergeRadius::Plain, Some(old))
}

struct Builder<'a, L> {
    metric: &'a MetricSpace<L>,
    states: &'a [VertexState],
    uf: UnionFind<usize>,
    // Aggregates, valid at union-find roots.
    alive: Vec<bool>,
    max_tau: Vec<u32>,
}

impl<'a, L: Length> Builder<'a, L> {
    fn new(metric: &'a MetricSpace<L>, states: &'a [VertexState]) -> Self {
        let n = metric.len();
        assert_eq!(states.len(), n, "one state per vertex");
        Builder {
            metric,
            states,
            uf: UnionFind::new(n),
            alive: states.iter().map(|s| s.alive).collect(),
            max_tau: states.iter().map(|s| s.tau).collect(),
        }
    }

    fn non_dead_root(&self, root: usize, level: u32) -> bool {
        self.alive[root] || self.max_tau[root] > level
    }

    /// Joins the clusters of `a` and `b` if they differ and both are
    /// non-dead at `level`.
    fn try_merge(&mut self, a: usize, b: usize, level: u32) -> bool {
        let (ra, rb) = (self.uf.find_mut(a), self.uf.find_mut(b));
        if ra == rb || !self.non_dead_root(ra, level) || !self.non_dead_root(rb, level) {
            return false;
        }
        self.uf.union(ra, rb);
        let root = self.uf.find_mut(ra);
        self.alive[root] = self.alive[ra] || self.alive[rb];
        self.max_tau[root] = self.max_tau[ra].max(self.max_tau[rb]);
        true
    }

    fn labels(&mut self) -> Vec<usize> {
        let n = self.states.len();
        let mut smallest = vec![usize::MAX; n];
        let roots: Vec<usize> = (0..n).map(|i| self.uf.find_mut(i)).collect();
        // Ids ascend with index only for sorted metrics, so compare ids.
        for (i, &r) in roots.iter().enumerate() {
            let cur = smallest[r];
            if cur == usize::MAX || self.metric.id(i) < self.metric.id(cur) {
                smallest[r] = i;
            }
        }
        roots.iter().map(|&r| smallest[r]).collect()
    }

    /// (alive clusters, non-dead clusters) at `level`.
    fn counts(&mut self, level: u32) -> (usize, usize) {
        let n = self.states.len();
        let (mut alive, mut non_dead) = (0, 0);
        for i in 0..n {
            if self.uf.find_mut(i) == i {
                alive += usize::from(self.alive[i]);
                non_dead += usize::from(self.non_dead_root(i, level));
            }
        }
        (alive, non_dead)
    }

    fn run(mut self, radius: MergeRadius, old: Option<&HierarchicalClustering<L>>) -> HierarchicalClustering<L> {
        let n = self.states.len();
        let pairs = self.metric.sorted_pairs();
        let old_edges = old.map(|o| o.edges_by_level()).unwrap_or_default();
        let top = pairs.last().map_or(0, |&(d, _, _)| d.ceil_log2());
        let limit = top.max(self.states.iter().map(|s| s.tau).max().unwrap_or(0)) + 2;

        let mut labels = vec![(0..n).collect::<Vec<_>>()];
        let mut added: Vec<Vec<AddedEdge<L>>> = vec![Vec::new()];
        let mut r = None;
        let (mut next_pair, mut next_old) = (0, 0);
        let mut level = 0u32;
        loop {
            let (alive, non_dead) = self.counts(level);
            if alive <= 1 && r.is_none() {
                r = Some(level);
            }
            if non_dead <= 1 {
                break;
            }
            assert!(level <= limit, "clustering failed to converge by level {limit}");

            let mut this_level = Vec::new();
            // Old edges of levels ≤ level+1. Anything skipped at an earlier
            // level was intra-cluster or touched a dead cluster, and stays so.
            while next_old < old_edges.len() && old_edges[next_old].0 <= level + 1 {
                let e = old_edges[next_old].1;
                if self.try_merge(e.a, e.b, level) {
                    this_level.push(e);
                }
                next_old += 1;
            }
            // Greedy merges in (length, id pair) order; the same persistence
            // argument lets the cursor carry over between levels.
            let exp = radius.exponent(level);
            while next_pair < pairs.len() && pairs[next_pair].0.within_pow2(exp) {
                let (len, a, b) = pairs[next_pair];
                if self.try_merge(a, b, level) {
                    this_level.push(AddedEdge { a, b, len });
                }
                next_pair += 1;
            }
            added.push(this_level);
            labels.push(self.labels());
            level += 1;
        }

        HierarchicalClustering {
            ids: self.metric.ids().to_vec(),
            states: self.states.to_vec(),
            labels,
            added,
            r: r.expect("r is set before the loop exits"),
            s: level,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::forest::{Edge, VertexId};
    use crate::hierarchy::ClusterStatus;

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

    fn fresh(m: &MetricSpace<u64>) -> Vec<VertexState> {
        vec![VertexState::fresh(m.tau_max()); m.len()]
    }

    fn e(a: u32, b: u32) -> Edge {
        Edge::new(VertexId(a), VertexId(b))
    }

    #[test]
    fn four_points_on_a_line() {
        let m = line(&[0, 2, 8, 10]);
        let h = form_cluster(&m, &fresh(&m));
        assert_eq!(h.labels_at(1), &[0, 0, 2, 2]);
        assert_eq!(h.labels_at(2), &[0, 0, 2, 2]);
        assert_eq!(h.labels_at(3), &[0, 0, 0, 0]);
        assert_eq!(h.m_at(1), 2);
        assert_eq!(h.m_at(2), 0);
        assert_eq!(h.m_at(3), 1);
        let top: Vec<Edge> = h.added_at(3).iter().map(|x| h.to_edge(x)).collect();
        assert_eq!(top, vec![e(2, 3)]);
        assert_eq!((h.r(), h.s()), (3, 3));
    }

    #[test]
    fn single_vertex() {
        let m = line(&[5]);
        let h = form_cluster(&m, &fresh(&m));
        assert_eq!((h.r(), h.s()), (0, 0));
        assert!(h.full_forest().is_empty());
    }

    #[test]
    fn two_close_vertices_merge_on_first_level() {
        let m = line(&[0, 2]);
        let h = form_cluster(&m, &fresh(&m));
        assert_eq!(h.m_at(1), 1);
        assert_eq!((h.r(), h.s()), (1, 1));
    }

    #[test]
    fn rebuilding_from_own_output_keeps_every_level() {
        let m = line(&[0, 2, 8, 10, 31, 40, 100]);
        let st = fresh(&m);
        let h = form_cluster(&m, &st);
        let h2 = form_cluster_new(&m, &st, &h);
        for lvl in 0..=h.s().max(h2.s()) {
            assert_eq!(h.forest_through(lvl), h2.forest_through(lvl), "level {lvl}");
        }
        let h3 = form_cluster_new(&m, &st, &h2);
        assert_eq!(h2.edges_by_level(), h3.edges_by_level());
        assert_eq!(h2.labels, h3.labels);
    }

    #[test]
    fn fully_dead_cluster_is_never_reused() {
        let m = line(&[0, 2, 8, 10]);
        let h = form_cluster(&m, &fresh(&m));
        let mut st = fresh(&m);
        st[0] = VertexState { alive: false, tau: 0 };
        st[1] = VertexState { alive: false, tau: 0 };
        let h2 = form_cluster_new(&m, &st, &h);
        assert!(!h2.full_forest().contains(&e(1, 2)));
        for lvl in 0..=h2.s() {
            assert_eq!(h2.labels_at(lvl)[0], 0);
            assert_eq!(h2.labels_at(lvl)[1], 1);
        }
        assert_eq!(h2.full_forest().len(), 1);
    }

    #[test]
    fn zombies_stop_merging_at_their_threshold() {
        // Vertex 3 is deleted with threshold 2: it may merge at levels 0 and
        // 1 only. At distance 6 from its neighbours it would need level 2.
        let m = line(&[0, 2, 8]);
        let mut st = fresh(&m);
        st[2] = VertexState { alive: false, tau: 2 };
        let h = form_cluster(&m, &st);
        assert_eq!(h.stats_at(2).dead, 1);
        assert_eq!(h.statuses_at(2)[&2], ClusterStatus::Dead);
        assert_eq!(h.full_forest().len(), 1);
        assert_eq!(h.alive_vertices(), BTreeSet::from([VertexId(1), VertexId(2)]));
    }
}
