//! Deletion-only maintenance with a constant bound on the edge changes of
//! every single step.
//!
//! Instead of killing all zombies at the lowest bad level, the highest bad
//! level `ℓ*` with many edges above it is located, six zombie clusters of
//! skeleton degree 1 or 2 are picked there, and their thresholds are
//! lowered to `ℓ*` only. Rebuilds reuse the previous clustering's edges
//! whenever possible, so most of the forest survives a step.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::amortized::{DeleteError, StepCase};
use crate::forest::{SteinerForest, VertexId};
use crate::hierarchy::{
    boundary, classify_safe, find_low_degree_with, form_cluster, form_cluster_new, status, ClusterStatus,
    HierarchicalClustering, VertexState,
};
use crate::length::Length;
use crate::metric::MetricSpace;

/// Tunable constants. The defaults are the ones the analysis is carried
/// out with; the `*_bound` fields are the guarantees checked by
/// [`LipschitzState::check_step`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipschitzConfig {
    /// A level is good when `m_{>ℓ} ≤ goodness · #alive(C_ℓ)`.
    pub goodness: usize,
    /// Bad levels with fewer edges above them are tolerated.
    pub min_edges: usize,
    /// Zombie clusters killed in a rebuild.
    pub kill_count: usize,
    /// Additive slack of the invariant `m_{>ℓ} ≤ 3 a_ℓ + slack`.
    pub slack: usize,
    pub churn_bound: usize,
    pub drop_bound: usize,
    pub tail_bound: usize,
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        LipschitzConfig {
            goodness: 3,
            min_edges: 36,
            kill_count: 6,
            slack: 54,
            churn_bound: 144,
            drop_bound: 17,
            tail_bound: 55,
        }
    }
}

/// Per-level summary of a clustering.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    pub m_above: usize,
    pub alive: usize,
    pub good: bool,
}

pub fn level_rows<L: Length>(h: &HierarchicalClustering<L>, goodness: usize) -> Vec<LevelRow> {
    (0..=h.s())
        .map(|level| {
            let m_above = h.m_above(level);
            let alive = h.stats_at(level).alive;
            LevelRow { level, m_above, alive, good: m_above <= goodness * alive }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct LipschitzStep<L> {
    pub deleted: VertexId,
    pub case: StepCase,
    /// Keys (smallest member id) of the killed zombie clusters.
    pub killed: Vec<VertexId>,
    /// Vertices of the killed clusters.
    pub zt: Vec<VertexId>,
    /// `|F_{t-1} △ F_t|`.
    pub churn: usize,
    /// `|F'_{t-1} △ F'_t|`.
    pub full_churn: usize,
    /// `|F'_{t-1} \ F'_t|`.
    pub full_dropped: usize,
    /// `|F'_{t-1}| - |F'_t|` (may be negative).
    pub full_shrink: i64,
    /// `|F'_t \ F_t|`.
    pub tail: usize,
    /// Levels of the lazily rebuilt clustering.
    pub levels: Vec<LevelRow>,
    /// Previous clustering and the states the lazy rebuild ran with; kept
    /// so a step can be audited after the fact.
    pub prev: HierarchicalClustering<L>,
    pub lazy_states: Vec<VertexState>,
}

#[derive(Clone, Debug)]
pub struct LipschitzState<L> {
    metric: MetricSpace<L>,
    config: LipschitzConfig,
    clustering: HierarchicalClustering<L>,
    forest: SteinerForest<L>,
    full_forest: SteinerForest<L>,
}

impl<L: Length> LipschitzState<L> {
    pub fn new(metric: MetricSpace<L>) -> Self {
        Self::with_config(metric, LipschitzConfig::default())
    }

    pub fn with_config(metric: MetricSpace<L>, config: LipschitzConfig) -> Self {
        let states = vec![VertexState::fresh(metric.tau_max()); metric.len()];
        let clustering = form_cluster(&metric, &states);
        let forest = clustering.forest_through(clustering.r());
        let full_forest = clustering.full_forest();
        LipschitzState { metric, config, clustering, forest, full_forest }
    }

    pub fn delete(&mut self, v: VertexId) -> Result<LipschitzStep<L>, DeleteError> {
        let cfg = self.config;
        let idx = self.metric.index_of(v).ok_or(DeleteError::UnknownVertex(v))?;
        let mut states = self.clustering.states().to_vec();
        if !states[idx].alive {
            return Err(DeleteError::AlreadyDeleted(v));
        }
        states[idx].alive = false;
        let lazy_states = states.clone();
        let hat = form_cluster_new(&self.metric, &states, &self.clustering);
        let levels = level_rows(&hat, cfg.goodness);

        let lstar = levels.iter().rev().find(|r| !r.good && r.m_above >= cfg.min_edges).map(|r| r.level);
        let (case, killed, zt, next) = match lstar {
            None => (StepCase::Lazy, Vec::new(), Vec::new(), hat),
            Some(lstar) => {
                let sk = hat.skeleton(lstar).expect("lstar has edges above it, so it is below s");
                let statuses = hat.statuses_at(lstar);
                let alive: BTreeSet<usize> =
                    statuses.iter().filter(|(_, &s)| s == ClusterStatus::Alive).map(|(&k, _)| k).collect();
                let others: BTreeSet<usize> = sk.nodes.iter().copied().filter(|k| !alive.contains(k)).collect();
                let picked = find_low_degree_with(&sk.edge_pairs(), &alive, &others, cfg.kill_count, cfg.min_edges)
                    .map_err(|e| DeleteError::InternalInvariantBroken(e.to_string()))?;
                let clusters: BTreeMap<usize, Vec<usize>> =
                    hat.clusters_at(lstar).into_iter().map(|c| (c.key, c.members)).collect();
                let mut zt = Vec::new();
                for key in &picked {
                    if statuses[key] != ClusterStatus::Zombie {
                        return Err(DeleteError::InternalInvariantBroken(format!(
                            "picked cluster {} is {:?}, not a zombie",
                            self.metric.id(*key),
                            statuses[key]
                        )));
                    }
                    for &m in &clusters[key] {
                        states[m].tau = states[m].tau.min(lstar);
                        zt.push(self.metric.id(m));
                    }
                }
                zt.sort();
                let killed = picked.iter().map(|&k| self.metric.id(k)).collect();
                let next = form_cluster_new(&self.metric, &states, &self.clustering);
                (StepCase::Rebuild { lstar }, killed, zt, next)
            }
        };

        let prev = std::mem::replace(&mut self.clustering, next);
        let forest = self.clustering.forest_through(self.clustering.r());
        let full_forest = self.clustering.full_forest();
        let step = LipschitzStep {
            deleted: v,
            case,
            killed,
            zt,
            churn: self.forest.symmetric_difference(&forest),
            full_churn: self.full_forest.symmetric_difference(&full_forest),
            full_dropped: self.full_forest.difference(&full_forest),
            full_shrink: self.full_forest.len() as i64 - full_forest.len() as i64,
            tail: full_forest.difference(&forest),
            levels,
            prev,
            lazy_states,
        };
        self.forest = forest;
        self.full_forest = full_forest;
        Ok(step)
    }

    /// `F_t = E(C_{r_t})`.
    pub fn forest(&self) -> &SteinerForest<L> {
        &self.forest
    }

    /// `F'_t`: every edge of the clustering.
    pub fn full_forest(&self) -> &SteinerForest<L> {
        &self.full_forest
    }

    pub fn clustering(&self) -> &HierarchicalClustering<L> {
        &self.clustering
    }

    pub fn metric(&self) -> &MetricSpace<L> {
        &self.metric
    }

    pub fn config(&self) -> &LipschitzConfig {
        &self.config
    }

    pub fn alive(&self) -> BTreeSet<VertexId> {
        self.clustering.alive_vertices()
    }

    /// Invariants of the current state alone.
    pub fn violations(&self) -> Vec<String> {
        let cfg = self.config;
        let h = &self.clustering;
        let mut out = Vec::new();
        for row in level_rows(h, cfg.goodness) {
            if row.m_above >= cfg.min_edges && row.m_above > cfg.goodness * row.alive + cfg.slack {
                out.push(format!(
                    "level {}: m_above {} > 3·{} + {}",
                    row.level, row.m_above, row.alive, cfg.slack
                ));
            }
        }
        let tail = self.full_forest.difference(&self.forest);
        if tail != h.m_above(h.r()) {
            out.push(format!("|F' \\ F| = {tail} but m_above(r) = {}", h.m_above(h.r())));
        }
        if tail > cfg.tail_bound {
            out.push(format!("|F' \\ F| = {tail} > {}", cfg.tail_bound));
        }
        if !self.forest.is_subset(&self.full_forest) {
            out.push("F is not contained in F'".into());
        }
        let alive = self.alive();
        let component_ok = alive.len() <= 1 || {
            let key = h.labels_at(h.r());
            let keys: BTreeSet<usize> = alive.iter().map(|&v| key[self.metric.index_of(v).unwrap()]).collect();
            keys.len() == 1
        };
        if !component_ok {
            out.push("alive vertices are not in one component of F".into());
        }
        for l in 1..=h.s() {
            for e in h.added_at(l) {
                if !e.len.within_pow2(l) {
                    out.push(format!("edge {} of length {} added at level {l}", h.to_edge(e), e.len));
                }
            }
        }
        let bound: u128 = (1..=h.r()).map(|l| (h.m_above(l - 1) as u128) << l).sum();
        if self.forest.cost().widen() > bound {
            out.push(format!("cost {} exceeds level bound {bound}", self.forest.cost()));
        }
        out
    }

    /// Checks relating the previous clustering to the current one.
    pub fn check_step(&self, step: &LipschitzStep<L>) -> Vec<String> {
        let cfg = self.config;
        let (prev, cur) = (&step.prev, &self.clustering);
        let mut out = Vec::new();
        if step.churn > cfg.churn_bound {
            out.push(format!("churn {} > {}", step.churn, cfg.churn_bound));
        }
        if step.full_dropped > cfg.drop_bound {
            out.push(format!("|F'_prev \\ F'| = {} > {}", step.full_dropped, cfg.drop_bound));
        }
        if step.tail > cfg.tail_bound {
            out.push(format!("|F' \\ F| = {} > {}", step.tail, cfg.tail_bound));
        }
        let top = prev.s().max(cur.s());
        for l in 0..=top {
            let (a_prev, a_cur) = (prev.stats_at(l).alive, cur.stats_at(l).alive);
            if a_cur + 1 < a_prev {
                out.push(format!("level {l}: alive clusters fell from {a_prev} to {a_cur}"));
            }
            if let Some(msg) = refinement_failure(prev, cur, l) {
                out.push(msg);
            }
        }
        if let StepCase::Rebuild { lstar } = step.case {
            out.extend(self.check_rebuild(step, lstar));
        }
        out
    }

    fn check_rebuild(&self, step: &LipschitzStep<L>, lstar: u32) -> Vec<String> {
        let cfg = self.config;
        let (prev, cur) = (&step.prev, &self.clustering);
        let mut out = Vec::new();
        let kill = cfg.kill_count;
        let keys: BTreeSet<usize> = step.killed.iter().map(|&k| self.metric.index_of(k).unwrap()).collect();

        // Killed clusters stay intact and dead from lstar upwards.
        for l in lstar..=cur.s() {
            let clusters: BTreeMap<usize, Vec<usize>> =
                cur.clusters_at(l).into_iter().map(|c| (c.key, c.members)).collect();
            let before: BTreeMap<usize, Vec<usize>> =
                prev.clusters_at(lstar).into_iter().map(|c| (c.key, c.members)).collect();
            for k in &keys {
                match clusters.get(k) {
                    Some(m) if *m == before[k] => {
                        if status(m, cur.states(), l) != ClusterStatus::Dead {
                            out.push(format!("killed cluster {} not dead at level {l}", self.metric.id(*k)));
                        }
                    }
                    _ => out.push(format!("killed cluster {} changed at level {l}", self.metric.id(*k))),
                }
            }
        }
        // Each killed cluster had a vertex whose threshold strictly dropped.
        let before = &step.lazy_states;
        for k in &keys {
            let members = &prev.clusters_at(lstar).into_iter().find(|c| c.key == *k).unwrap().members;
            if !members.iter().any(|&m| before[m].tau > lstar && cur.states()[m].tau == lstar) {
                out.push(format!("no threshold of cluster {} dropped", self.metric.id(*k)));
            }
        }

        if step.full_shrink < (kill / 2) as i64 {
            out.push(format!("|F'| shrank by {} < {}", step.full_shrink, kill / 2));
        }
        for l in 0..=prev.s().max(cur.s()) {
            let (mp, mc) = (prev.m_above(l), cur.m_above(l));
            if l <= lstar && mc + kill / 2 > mp {
                out.push(format!("level {l} ≤ ℓ*: m_above {mc} > {mp} - {}", kill / 2));
            }
            if l > lstar && mc > mp + 3 * kill {
                out.push(format!("level {l} > ℓ*: m_above {mc} > {mp} + {}", 3 * kill));
            }
        }

        match boundary(prev, lstar, &keys)
            .and_then(|bt| classify_safe(prev, &step.lazy_states, lstar, &keys, &bt))
        {
            Err(e) => out.push(format!("safe-edge classification failed: {e}")),
            Ok(part) => {
                if part.unsafe_edges.len() + 1 > 3 * kill {
                    out.push(format!("{} unsafe edges", part.unsafe_edges.len()));
                }
                for (lvl, e) in part.safe {
                    if cur.added_at(lvl).iter().all(|x| cur.to_edge(x) != e) {
                        out.push(format!("safe edge {e} of level {lvl} was not re-added"));
                    }
                }
            }
        }
        out
    }
}

/// Every level-`l` cluster of `cur` must sit inside one cluster of `prev`.
pub fn refinement_failure<L: Length>(
    prev: &HierarchicalClustering<L>,
    cur: &HierarchicalClustering<L>,
    l: u32,
) -> Option<String> {
    let (lp, lc) = (prev.labels_at(l), cur.labels_at(l));
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, (&c, &p)) in lc.iter().zip(lp).enumerate() {
        if *parent.entry(c).or_insert(p) != p {
            return Some(format!("level {l}: cluster of {} is not inside one old cluster", cur.ids()[i]));
        }
    }
    None
}
