//! Seeded instance generators. Same seed and parameters, same trace.

use std::collections::BTreeSet;

use clap::ValueEnum;
use dynsteiner::VertexId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trace::{Request, Trace};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Distinct points of an integer grid, rounded-up Euclidean distance.
    UniformGrid,
    /// Independent random lengths, repaired by shortest-path closure.
    RandomIntegerMetric,
}

pub const MAX_RANDOM_LENGTH: u64 = 1000;

fn isqrt_ceil(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r < x {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r
}

/// Replaces every entry by the shortest-path distance (Floyd–Warshall).
pub fn metric_closure(m: &mut [Vec<u64>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k].saturating_add(m[k][j]);
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
}

/// A full `n × n` distance matrix.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, geometry: Geometry) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n]; n];
    match geometry {
        Geometry::UniformGrid => {
            let side = 4 * n as i64 + 4;
            let mut seen = BTreeSet::new();
            let mut pts = Vec::with_capacity(n);
            while pts.len() < n {
                let p = (rng.random_range(0..side), rng.random_range(0..side));
                if seen.insert(p) {
                    pts.push(p);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let (a, b): ((i64, i64), (i64, i64)) = (pts[i], pts[j]);
                    m[i][j] = isqrt_ceil(((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u64);
                }
            }
        }
        Geometry::RandomIntegerMetric => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = rng.random_range(1..=MAX_RANDOM_LENGTH);
                    m[i][j] = x;
                    m[j][i] = x;
                }
            }
            metric_closure(&mut m);
        }
    }
    m
}

fn ids(n: usize) -> Vec<VertexId> {
    (1..=n as u32).map(VertexId).collect()
}

/// An `init` record over `n` points followed by the deletion of every
/// point in uniformly random order.
pub fn gen_random(seed: u64, n: usize, geometry: Geometry) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_matrix(&mut rng, n, geometry);
    let points = ids(n);
    let dist = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| (points[i], points[j], m[i][j]))
        .collect();
    let mut order = points.clone();
    order.shuffle(&mut rng);
    let mut requests = vec![Request::Init { points, dist }];
    requests.extend(order.into_iter().map(|id| Request::Del { id }));
    Trace { requests }
}

/// `requests` mixed requests over a hidden metric. Each request deletes a
/// random alive vertex with probability `p_del` (only while at least two
/// are alive) and otherwise adds the next point with its distances to the
/// alive ones.
pub fn gen_mixed(seed: u64, requests: usize, p_del: f64, geometry: Geometry) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_matrix(&mut rng, requests, geometry);
    let mut alive: Vec<usize> = Vec::new();
    let mut next = 0usize;
    let id = |i: usize| VertexId(i as u32 + 1);
    let mut out = Vec::with_capacity(requests);
    for _ in 0..requests {
        if alive.len() >= 2 && rng.random_bool(p_del) {
            let k = rng.random_range(0..alive.len());
            out.push(Request::Del { id: id(alive.swap_remove(k)) });
        } else {
            let dist = alive.iter().map(|&a| (id(a), m[next][a])).collect();
            out.push(Request::Add { id: id(next), dist });
            alive.push(next);
            next += 1;
        }
    }
    Trace { requests: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_repairs_long_edges() {
        let mut m = vec![vec![0, 2, 9], vec![2, 0, 2], vec![9, 2, 0]];
        metric_closure(&mut m);
        assert_eq!(m[0][2], 4);
        assert_eq!(m[2][0], 4);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_random(1, 4, Geometry::UniformGrid).to_jsonl();
        assert_eq!(a, gen_random(1, 4, Geometry::UniformGrid).to_jsonl());
        assert_ne!(a, gen_random(2, 4, Geometry::UniformGrid).to_jsonl());
        assert_eq!(a.lines().count(), 5);
    }

    #[test]
    fn generated_traces_validate() {
        for geometry in [Geometry::UniformGrid, Geometry::RandomIntegerMetric] {
            gen_mixed(7, 30, 0.4, geometry).validate().unwrap();
            gen_random(7, 30, geometry).validate_deletion_only().unwrap();
        }
    }

    #[test]
    fn ceil_sqrt() {
        assert_eq!((isqrt_ceil(0), isqrt_ceil(1), isqrt_ceil(2), isqrt_ceil(4), isqrt_ceil(5)), (0, 1, 2, 2, 3));
    }
}
