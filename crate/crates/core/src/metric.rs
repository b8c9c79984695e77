//! Exact finite metrics over integer-labelled vertices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::forest::{Edge, SteinerForest, VertexId};
use crate::length::Length;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("vertex {0} listed twice")]
    DuplicatePoint(VertexId),
    #[error("vertex {0} is not part of the metric")]
    UnknownVertex(VertexId),
    #[error("no distance given between {0} and {1}")]
    MissingDistance(VertexId, VertexId),
    #[error("distance between {0} and {1} must be positive")]
    NonPositive(VertexId, VertexId),
    #[error("conflicting distances given for the pair ({0},{1})")]
    Asymmetric(VertexId, VertexId),
    #[error("triangle inequality violated: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(VertexId, VertexId, VertexId),
    #[error("distance payload references {0}, which is not alive")]
    UnknownAliveVertex(VertexId),
    #[error("distance payload is missing alive vertex {0}")]
    MissingAliveDistance(VertexId),
    #[error("cannot infer distances: no alive vertex to route through")]
    NoAliveVertices,
    #[error("subset is empty")]
    EmptySubset,
    #[error("distance overflows the length type while rescaling")]
    Overflow,
}

/// A finite metric stored as a dense symmetric matrix.
///
/// Vertices are addressed either by [`VertexId`] or by their dense index
/// (insertion order). Metrics built by [`MetricSpace::validate`] sort their
/// points, so index order and id order agree there.
#[derive(Clone, Debug)]
pub struct MetricSpace<L> {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    dist: Vec<Vec<L>>,
    scale: u32,
    sorted: OnceLock<Vec<(L, usize, usize)>>,
}

impl<L: Length> MetricSpace<L> {
    /// An empty metric, the starting point of fully-dynamic runs.
    pub fn empty() -> Self {
        MetricSpace {
            ids: Vec::new(),
            index: HashMap::new(),
            dist: Vec::new(),
            scale: 1,
            sorted: OnceLock::new(),
        }
    }

    /// Builds and checks a metric from explicit pairwise lengths.
    ///
    /// Every unordered pair of distinct points needs a length; a pair may be
    /// given in both orientations as long as the values agree. If the
    /// smallest distance is below 2 every length is doubled, and
    /// [`MetricSpace::scale`] reports the factor.
    pub fn validate(points: &[VertexId], dist: &[(VertexId, VertexId, L)]) -> Result<Self, MetricError> {
        let mut ids = points.to_vec();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(MetricError::DuplicatePoint(w[0]));
        }
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let mut given: Vec<Vec<Option<L>>> = vec![vec![None; n]; n];
        for &(a, b, len) in dist {
            let i = *index.get(&a).ok_or(MetricError::UnknownVertex(a))?;
            let j = *index.get(&b).ok_or(MetricError::UnknownVertex(b))?;
            if i == j {
                if len != L::zero() {
                    return Err(MetricError::NonPositive(a, b));
                }
                continue;
            }
            if len == L::zero() {
                return Err(MetricError::NonPositive(a, b));
            }
            for (x, y) in [(i, j), (j, i)] {
                match given[x][y] {
                    Some(old) if old != len => return Err(MetricError::Asymmetric(a, b)),
                    _ => given[x][y] = Some(len),
                }
            }
        }
        let mut matrix = vec![vec![L::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let len = given[i][j].ok_or(MetricError::MissingDistance(ids[i], ids[j]))?;
                matrix[i][j] = len;
                matrix[j][i] = len;
            }
        }
        let mut m = MetricSpace {
            ids,
            index,
            dist: matrix,
            scale: 1,
            sorted: OnceLock::new(),
        };
        m.check_triangle()?;
        let two = L::one() + L::one();
        if m.min_distance().is_some_and(|d| d < two) {
            for row in &mut m.dist {
                for x in row.iter_mut() {
                    *x = x.checked_mul(&two).ok_or(MetricError::Overflow)?;
                }
            }
            m.scale = 2;
            m.sorted = OnceLock::new();
        }
        Ok(m)
    }

    /// Adds `new_id`, given its distances to exactly the alive vertices.
    ///
    /// Distances to the remaining (deleted) vertices are inferred as
    /// `min over alive a of d(new, a) + d(a, s)`. Existing distances are left
    /// untouched.
    pub fn extend(
        &self,
        new_id: VertexId,
        dists_to_alive: &BTreeMap<VertexId, L>,
        alive: &BTreeSet<VertexId>,
    ) -> Result<Self, MetricError> {
        if self.index.contains_key(&new_id) {
            return Err(MetricError::DuplicatePoint(new_id));
        }
        if let Some(&a) = alive.iter().find(|a| !self.index.contains_key(a)) {
            return Err(MetricError::UnknownVertex(a));
        }
        if let Some(&k) = dists_to_alive.keys().find(|k| !alive.contains(k)) {
            return Err(MetricError::UnknownAliveVertex(k));
        }
        if let Some(&a) = alive.iter().find(|a| !dists_to_alive.contains_key(a)) {
            return Err(MetricError::MissingAliveDistance(a));
        }
        if let Some((&a, _)) = dists_to_alive.iter().find(|(_, &d)| d == L::zero()) {
            return Err(MetricError::NonPositive(new_id, a));
        }
        if alive.is_empty() && !self.ids.is_empty() {
            return Err(MetricError::NoAliveVertices);
        }

        // Triangle inequality on {new} ∪ alive.
        for (&a, &da) in dists_to_alive {
            for (&b, &db) in dists_to_alive {
                if a == b {
                    continue;
                }
                let dab = self.dist(a, b);
                if da > db + dab {
                    return Err(MetricError::TriangleViolation(new_id, b, a));
                }
                if dab > da + db {
                    return Err(MetricError::TriangleViolation(a, new_id, b));
                }
            }
        }

        let alive_idx: Vec<(usize, L)> = dists_to_alive.iter().map(|(a, &d)| (self.index[a], d)).collect();
        let n = self.ids.len();
        let mut row = Vec::with_capacity(n + 1);
        for s in 0..n {
            let inferred = alive_idx
                .iter()
                .map(|&(a, d)| d + self.dist[a][s])
                .min()
                .expect("alive set is non-empty whenever the metric is");
            row.push(inferred);
        }
        row.push(L::zero());

        let mut next = self.clone();
        next.sorted = OnceLock::new();
        for (s, r) in next.dist.iter_mut().enumerate() {
            r.push(row[s]);
        }
        next.dist.push(row);
        next.index.insert(new_id, n);
        next.ids.push(new_id);
        Ok(next)
    }

    /// Minimum spanning tree on `subset`, Kruskal with ties broken by the
    /// lexicographically smallest endpoint pair.
    pub fn mst(&self, subset: &BTreeSet<VertexId>) -> Result<SteinerForest<L>, MetricError> {
        if subset.is_empty() {
            return Err(MetricError::EmptySubset);
        }
        let members: Vec<(VertexId, usize)> = subset
            .iter()
            .map(|&v| self.index.get(&v).map(|&i| (v, i)).ok_or(MetricError::UnknownVertex(v)))
            .collect::<Result<_, _>>()?;
        Ok(self.mst_of_indices(&members))
    }

    pub fn mst_cost(&self, subset: &BTreeSet<VertexId>) -> Result<L, MetricError> {
        if subset.is_empty() {
            return Ok(L::zero());
        }
        self.mst(subset).map(|t| t.cost())
    }

    /// `members` is (id, index) sorted by id.
    pub(crate) fn mst_of_indices(&self, members: &[(VertexId, usize)]) -> SteinerForest<L> {
        let k = members.len();
        let mut cand: Vec<(L, usize, usize)> = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for a in 0..k {
            for b in (a + 1)..k {
                cand.push((self.dist[members[a].1][members[b].1], a, b));
            }
        }
        cand.sort_unstable();
        let mut uf = UnionFind::<usize>::new(k);
        let mut tree = SteinerForest::new();
        for (d, a, b) in cand {
            if uf.union(a, b) {
                tree.insert(Edge::new(members[a].0, members[b].0), d);
                if tree.len() + 1 == k {
                    break;
                }
            }
        }
        tree
    }

    /// Closest vertex to `from` among `candidates`, ties to the smaller id.
    pub fn nearest<I>(&self, from: VertexId, candidates: I) -> Option<VertexId>
    where
        I: IntoIterator<Item = VertexId>,
    {
        candidates
            .into_iter()
            .filter(|&c| c != from)
            .min_by_key(|&c| (self.dist(from, c), c))
    }

    /// Full O(n³) triangle-inequality check.
    pub fn check_triangle(&self) -> Result<(), MetricError> {
        let n = self.ids.len();
        for u in 0..n {
            for w in (u + 1)..n {
                for v in 0..n {
                    if v == u || v == w {
                        continue;
                    }
                    if self.dist[u][w] > self.dist[u][v] + self.dist[v][w] {
                        return Err(MetricError::TriangleViolation(self.ids[u], self.ids[v], self.ids[w]));
                    }
                }
            }
        }
        Ok(())
    }

    /// `max ⌈log₂ d(u,v)⌉` over all pairs; `0` for fewer than two points.
    pub fn tau_max(&self) -> u32 {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .map(|d| d.ceil_log2())
            .max()
            .unwrap_or(0)
    }

    pub fn min_distance(&self) -> Option<L> {
        self.sorted_pairs().first().map(|&(d, _, _)| d)
    }

    /// All unordered index pairs `(d, i, j)` with `i < j`, sorted by length
    /// and then by the id pair. Computed once per metric.
    pub fn sorted_pairs(&self) -> &[(L, usize, usize)] {
        self.sorted.get_or_init(|| {
            let n = self.ids.len();
            let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = if self.ids[i] < self.ids[j] { (i, j) } else { (j, i) };
                    pairs.push((self.dist[i][j], a, b));
                }
            }
            pairs.sort_unstable_by_key(|&(d, a, b)| (d, self.ids[a], self.ids[b]));
            pairs
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, idx: usize) -> VertexId {
        self.ids[idx]
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    /// Distance by id. Panics on unknown ids.
    pub fn dist(&self, u: VertexId, v: VertexId) -> L {
        self.dist[self.index[&u]][self.index[&v]]
    }

    pub fn dist_idx(&self, i: usize, j: usize) -> L {
        self.dist[i][j]
    }

    pub fn edge_len(&self, e: Edge) -> L {
        self.dist(e.u, e.v)
    }

    /// Factor applied at ingest (1 or 2).
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// All pairs `(u, v, d)` with `u < v`, in id order.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId, L)> {
        let mut order: Vec<usize> = (0..self.ids.len()).collect();
        order.sort_by_key(|&i| self.ids[i]);
        let mut out = Vec::new();
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                out.push((self.ids[i], self.ids[j], self.dist[i][j]));
            }
        }
        out
    }
}
