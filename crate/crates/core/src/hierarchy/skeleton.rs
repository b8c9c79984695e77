use std::collections::{BTreeMap, BTreeSet};

use super::{status, ClusterStatus, HierarchicalClustering, HierarchyError, VertexState};
use super::{LOW_DEGREE_COUNT, LOW_DEGREE_MIN_EDGES};
use crate::forest::Edge;
use crate::length::Length;

/// Level-`ℓ` skeleton: level-`ℓ` clusters as nodes, joined by the edges
/// added above level `ℓ`. Nodes are cluster keys (smallest member index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub level: u32,
    pub nodes: Vec<usize>,
    /// `(node, node, underlying edge)`.
    pub edges: Vec<(usize, usize, Edge)>,
}

impl Skeleton {
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b, _)| a == node || b == node).count()
    }

    pub fn degrees(&self) -> BTreeMap<usize, usize> {
        let mut deg: BTreeMap<usize, usize> = self.nodes.iter().map(|&n| (n, 0)).collect();
        for &(a, b, _) in &self.edges {
            *deg.entry(a).or_default() += 1;
            *deg.entry(b).or_default() += 1;
        }
        deg
    }

    pub fn neighbors(&self, node: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b, _)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_forest(&self) -> bool {
        let index: BTreeMap<usize, usize> = self.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(self.nodes.len());
        self.edges.iter().all(|&(a, b, _)| a != b && uf.union(index[&a], index[&b]))
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(a, b, _)| (a, b)).collect()
    }
}

impl<L: Length> HierarchicalClustering<L> {
    pub fn skeleton(&self, level: u32) -> Result<Skeleton, HierarchyError> {
        if level > self.s() {
            return Err(HierarchyError::LevelOutOfRange { level, top: self.s() });
        }
        let labels = self.labels_at(level);
        let nodes: Vec<usize> = self.clusters_at(level).into_iter().map(|c| c.key).collect();
        let edges = ((level + 1)..=self.s())
            .flat_map(|l| self.added_at(l).iter())
            .map(|e| (labels[e.a], labels[e.b], self.to_edge(e)))
            .collect();
        Ok(Skeleton { level, nodes, edges })
    }
}

/// Skeleton neighbours of `zombies` that are not themselves in `zombies`.
pub fn boundary<L: Length>(
    h: &HierarchicalClustering<L>,
    level: u32,
    zombies: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>, HierarchyError> {
    let sk = h.skeleton(level)?;
    Ok(zombies
        .iter()
        .flat_map(|&z| sk.neighbors(z))
        .filter(|n| !zombies.contains(n))
        .collect())
}

/// Edges of a clustering split by whether they survive the next step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SafePartition {
    /// `(level added, edge)`.
    pub safe: Vec<(u32, Edge)>,
    pub unsafe_edges: Vec<(u32, Edge)>,
}

/// Splits every edge of `h_prev` into safe and unsafe ones relative to the
/// killed cluster set `zombies` at level `lstar` and its `boundary_set`.
///
/// An edge is safe if it was added at a level `≤ lstar`, or if one of its
/// endpoints lies (at level `lstar`) in a cluster outside
/// `zombies ∪ boundary_set`. `states` decides zombie status; every cluster in
/// `zombies` must be a zombie of skeleton degree 1 or 2.
pub fn classify_safe<L: Length>(
    h_prev: &HierarchicalClustering<L>,
    states: &[VertexState],
    lstar: u32,
    zombies: &BTreeSet<usize>,
    boundary_set: &BTreeSet<usize>,
) -> Result<SafePartition, HierarchyError> {
    let sk = h_prev.skeleton(lstar)?;
    let degrees = sk.degrees();
    let clusters: BTreeMap<usize, Vec<usize>> =
        h_prev.clusters_at(lstar).into_iter().map(|c| (c.key, c.members)).collect();
    for z in zombies {
        let members = clusters
            .get(z)
            .ok_or_else(|| HierarchyError::PreconditionViolated(format!("{z} is not a cluster key at level {lstar}")))?;
        if status(members, states, lstar) != ClusterStatus::Zombie {
            return Err(HierarchyError::PreconditionViolated(format!(
                "cluster {z} is not a zombie at level {lstar}"
            )));
        }
        let deg = degrees[z];
        if !(1..=2).contains(&deg) {
            return Err(HierarchyError::PreconditionViolated(format!(
                "cluster {z} has skeleton degree {deg}"
            )));
        }
    }

    let labels = h_prev.labels_at(lstar);
    let guarded = |x: usize| zombies.contains(&labels[x]) || boundary_set.contains(&labels[x]);
    let mut out = SafePartition::default();
    for (lvl, e) in h_prev.edges_by_level() {
        let edge = h_prev.to_edge(&e);
        if lvl <= lstar || !guarded(e.a) || !guarded(e.b) {
            out.safe.push((lvl, edge));
        } else {
            out.unsafe_edges.push((lvl, edge));
        }
    }
    Ok(out)
}

/// Picks [`LOW_DEGREE_COUNT`] nodes of `b` with degree 1 or 2 in the forest
/// `edges`, smallest first.
///
/// Requires at least [`LOW_DEGREE_MIN_EDGES`] edges and more than `3|a|`
/// edges; under those conditions such nodes always exist.
pub fn find_low_degree<N: Ord + Copy>(
    edges: &[(N, N)],
    a: &BTreeSet<N>,
    b: &BTreeSet<N>,
) -> Result<Vec<N>, HierarchyError> {
    find_low_degree_with(edges, a, b, LOW_DEGREE_COUNT, LOW_DEGREE_MIN_EDGES)
}

pub fn find_low_degree_with<N: Ord + Copy>(
    edges: &[(N, N)],
    a: &BTreeSet<N>,
    b: &BTreeSet<N>,
    count: usize,
    min_edges: usize,
) -> Result<Vec<N>, HierarchyError> {
    if edges.len() < min_edges || edges.len() <= 3 * a.len() {
        return Err(HierarchyError::PreconditionViolated(format!(
            "{} edges with |A| = {} (need ≥ {min_edges} and > 3|A|)",
            edges.len(),
            a.len()
        )));
    }
    let mut deg: BTreeMap<N, usize> = BTreeMap::new();
    for &(x, y) in edges {
        *deg.entry(x).or_default() += 1;
        *deg.entry(y).or_default() += 1;
    }
    let picked: Vec<N> = deg
        .into_iter()
        .filter(|&(n, d)| (1..=2).contains(&d) && b.contains(&n))
        .map(|(n, _)| n)
        .take(count)
        .collect();
    if picked.len() < count {
        return Err(HierarchyError::PreconditionViolated(format!(
            "only {} low-degree nodes in B",
            picked.len()
        )));
    }
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::VertexId;
    use crate::hierarchy::form_cluster;
    use crate::metric::MetricSpace;

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

    #[test]
    fn skeleton_levels() {
        let m = line(&[0, 2, 8, 10]);
        let h = form_cluster(&m, &fresh(&m));
        let top = h.skeleton(h.s()).unwrap();
        assert!(top.edges.is_empty());
        let bottom = h.skeleton(0).unwrap();
        assert_eq!(bottom.nodes.len(), 4);
        assert_eq!(bottom.edges.len(), 3);
        assert!(bottom.is_forest());
        let mid = h.skeleton(1).unwrap();
        assert_eq!(mid.nodes, vec![0, 2]);
        assert_eq!(mid.edge_pairs(), vec![(0, 2)]);
        assert_eq!(
            h.skeleton(4).unwrap_err(),
            HierarchyError::LevelOutOfRange { level: 4, top: 3 }
        );
    }

    #[test]
    fn no_zombies_means_everything_safe() {
        let m = line(&[0, 2, 8, 10]);
        let h = form_cluster(&m, &fresh(&m));
        let p = classify_safe(&h, h.states(), 1, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert_eq!(p.safe.len(), 3);
        assert!(p.unsafe_edges.is_empty());
    }

    #[test]
    fn path_through_a_zombie() {
        // 0 - 4 - 8: both edges are added at level 2, and at level 1 the
        // skeleton is the path {1} - {2} - {3}.
        let m = line(&[0, 4, 8]);
        let h = form_cluster(&m, &fresh(&m));
        let mut st = h.states().to_vec();
        st[1].alive = false;
        let z = BTreeSet::from([1]);
        let bt = boundary(&h, 1, &z).unwrap();
        assert_eq!(bt, BTreeSet::from([0, 2]));
        let p = classify_safe(&h, &st, 1, &z, &bt).unwrap();
        assert_eq!(p.unsafe_edges.len(), 2);
        assert!(p.unsafe_edges.len() <= 3 * z.len() - 1);
        // The same edges are safe when looked at from level 2.
        let p2 = classify_safe(&h, &st, 2, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert!(p2.unsafe_edges.is_empty());
    }

    #[test]
    fn classify_rejects_alive_cluster() {
        let m = line(&[0, 4, 8]);
        let h = form_cluster(&m, &fresh(&m));
        let err = classify_safe(&h, h.states(), 1, &BTreeSet::from([1]), &BTreeSet::new()).unwrap_err();
        assert!(matches!(err, HierarchyError::PreconditionViolated(_)));
    }

    #[test]
    fn low_degree_on_a_path() {
        let edges: Vec<(u32, u32)> = (0..37).map(|i| (i, i + 1)).collect();
        let b: BTreeSet<u32> = (0..=37).collect();
        let got = find_low_degree(&edges, &BTreeSet::new(), &b).unwrap();
        assert_eq!(got, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn low_degree_on_a_star() {
        let edges: Vec<(u32, u32)> = (1..=36).map(|i| (0, i)).collect();
        let a = BTreeSet::from([0]);
        let b: BTreeSet<u32> = (1..=36).collect();
        assert_eq!(find_low_degree(&edges, &a, &b).unwrap(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn low_degree_precondition() {
        let edges: Vec<(u32, u32)> = (0..35).map(|i| (i, i + 1)).collect();
        let b: BTreeSet<u32> = (0..=35).collect();
        assert!(find_low_degree(&edges, &BTreeSet::new(), &b).is_err());
        let edges: Vec<(u32, u32)> = (0..40).map(|i| (i, i + 1)).collect();
        let a: BTreeSet<u32> = (0..14).collect();
        let b: BTreeSet<u32> = (14..=40).collect();
        assert!(find_low_degree(&edges, &a, &b).is_err());
    }
}
