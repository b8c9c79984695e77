//! Exact optimal Steiner trees and the packing lower bound.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{SteinerForest, VertexId};
use crate::hierarchy::HierarchicalClustering;
use crate::length::Length;
use crate::metric::MetricSpace;

pub const DEFAULT_TERMINAL_LIMIT: usize = 12;
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{count} terminals exceed the limit of {limit}")]
    TooManyTerminals { count: usize, limit: usize },
    #[error("{count} candidate Steiner vertices exceed the enumeration limit of {limit}")]
    TooManyCandidates { count: usize, limit: usize },
    #[error("terminal {0} is not part of the metric")]
    UnknownVertex(VertexId),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    DreyfusWagner,
    Enumeration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult<L> {
    pub cost: L,
    pub tree: SteinerForest<L>,
    pub method: OracleMethod,
}

/// A non-negative value in units of `1/4`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quarters(pub u128);

impl Quarters {
    pub fn from_whole(x: u128) -> Self {
        Quarters(x * 4)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 4.0
    }
}

impl fmt::Display for Quarters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/4", self.0)
    }
}

fn indices<L: Length>(m: &MetricSpace<L>, terminals: &BTreeSet<VertexId>) -> Result<Vec<usize>, OracleError> {
    terminals
        .iter()
        .map(|&t| m.index_of(t).ok_or(OracleError::UnknownVertex(t)))
        .collect()
}

fn tree_on<L: Length>(m: &MetricSpace<L>, used: &BTreeSet<usize>) -> SteinerForest<L> {
    let mut members: Vec<(VertexId, usize)> = used.iter().map(|&i| (m.id(i), i)).collect();
    members.sort();
    m.mst_of_indices(&members)
}

/// Optimal Steiner tree for `terminals`, any vertex of `m` usable as a
/// Steiner point. Dreyfus–Wagner with the default terminal limit.
pub fn opt_steiner<L: Length>(
    m: &MetricSpace<L>,
    terminals: &BTreeSet<VertexId>,
) -> Result<OracleResult<L>, OracleError> {
    opt_steiner_with_limit(m, terminals, DEFAULT_TERMINAL_LIMIT)
}

pub fn opt_steiner_with_limit<L: Length>(
    m: &MetricSpace<L>,
    terminals: &BTreeSet<VertexId>,
    limit: usize,
) -> Result<OracleResult<L>, OracleError> {
    if terminals.len() > limit {
        return Err(OracleError::TooManyTerminals { count: terminals.len(), limit });
    }
    let term = indices(m, terminals)?;
    let method = OracleMethod::DreyfusWagner;
    if term.len() <= 1 {
        return Ok(OracleResult { cost: L::zero(), tree: SteinerForest::new(), method });
    }

    let n = m.len();
    let k = term.len();
    let full = (1usize << k) - 1;
    let inf = u128::MAX;
    let d = |a: usize, b: usize| m.dist_idx(a, b).widen();
    // best[S][v]: cheapest tree spanning S ∪ {v}; split[S][v]: same, with v
    // of degree ≥ 2 in it.
    let mut best = vec![vec![inf; n]; full + 1];
    let mut split = vec![vec![inf; n]; full + 1];
    let mut split_at = vec![vec![0usize; n]; full + 1];
    let mut via = vec![vec![0usize; n]; full + 1];
    for (i, &t) in term.iter().enumerate() {
        for v in 0..n {
            best[1 << i][v] = d(t, v);
        }
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub & low != 0 {
                let rest = mask ^ sub;
                for v in 0..n {
                    let c = best[sub][v] + best[rest][v];
                    if c < split[mask][v] {
                        split[mask][v] = c;
                        split_at[mask][v] = sub;
                    }
                }
            }
            sub = (sub - 1) & mask;
        }
        for v in 0..n {
            let (c, u) = (0..n).map(|u| (split[mask][u] + d(u, v), u)).min().unwrap();
            best[mask][v] = c;
            via[mask][v] = u;
        }
    }

    let mut used = BTreeSet::new();
    let mut stack = vec![(full, term[0])];
    while let Some((mask, v)) = stack.pop() {
        used.insert(v);
        if mask.count_ones() == 1 {
            used.insert(term[mask.trailing_zeros() as usize]);
            continue;
        }
        let u = via[mask][v];
        used.insert(u);
        let sub = split_at[mask][u];
        stack.push((sub, u));
        stack.push((mask ^ sub, u));
    }
    let tree = tree_on(m, &used);
    debug_assert_eq!(tree.cost().widen(), best[full][term[0]]);
    Ok(OracleResult { cost: tree.cost(), tree, method })
}

/// Brute force: the MST of `terminals ∪ X` for every set `X` of
/// non-terminals, minimized. Independent of [`opt_steiner`].
pub fn opt_steiner_enumerate<L: Length>(
    m: &MetricSpace<L>,
    terminals: &BTreeSet<VertexId>,
) -> Result<OracleResult<L>, OracleError> {
    let term = indices(m, terminals)?;
    let method = OracleMethod::Enumeration;
    if term.len() <= 1 {
        return Ok(OracleResult { cost: L::zero(), tree: SteinerForest::new(), method });
    }
    let others: Vec<usize> = (0..m.len()).filter(|i| !term.contains(i)).collect();
    if others.len() > DEFAULT_ENUMERATION_LIMIT {
        return Err(OracleError::TooManyCandidates { count: others.len(), limit: DEFAULT_ENUMERATION_LIMIT });
    }
    let mut best: Option<SteinerForest<L>> = None;
    for mask in 0u32..(1 << others.len()) {
        let mut used: BTreeSet<usize> = term.iter().copied().collect();
        used.extend(others.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &i)| i));
        let tree = tree_on(m, &used);
        if best.as_ref().is_none_or(|b| tree.cost() < b.cost()) {
            best = Some(tree);
        }
    }
    let tree = best.expect("at least the empty extension is tried");
    Ok(OracleResult { cost: tree.cost(), tree, method })
}

/// `Σ_ℓ (⌈κ_ℓ/2⌉ − 1)·2^{ℓ−2}` with `κ_ℓ` the number of non-dead clusters
/// at level `ℓ`.
pub fn dual_lower_bound<L: Length>(h: &HierarchicalClustering<L>) -> Quarters {
    Quarters(
        (0..=h.s())
            .map(|l| {
                let kappa = h.stats_at(l).non_dead() as u128;
                kappa.div_ceil(2).saturating_sub(1) << l
            })
            .sum(),
    )
}

/// The same sum from explicit per-level counts.
pub fn dual_lower_bound_from_counts(kappa: &[usize]) -> Quarters {
    Quarters(
        kappa
            .iter()
            .enumerate()
            .map(|(l, &k)| (k as u128).div_ceil(2).saturating_sub(1) << l)
            .sum(),
    )
}
