#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dynsteiner::{Metric, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(n: usize) -> Vec<VertexId> {
    (1..=n as u32).map(VertexId).collect()
}

/// Distinct grid points, distance the rounded-up Euclidean distance.
pub fn grid_points(rng: &mut ChaCha8Rng, n: usize, side: i64) -> Vec<(i64, i64)> {
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        seen.insert((rng.random_range(0..side), rng.random_range(0..side)));
    }
    let mut pts: Vec<_> = seen.into_iter().collect();
    pts.shuffle(rng);
    pts
}

pub fn ceil_dist(a: (i64, i64), b: (i64, i64)) -> u64 {
    let sq = ((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u64;
    let mut r = (sq as f64).sqrt() as u64;
    while r * r < sq {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= sq {
        r -= 1;
    }
    r
}

pub fn grid_metric(seed: u64, n: usize) -> Metric {
    let mut rng = rng(seed);
    let side = 4 * n as i64 + 4;
    let pts = grid_points(&mut rng, n, side);
    let ids = ids(n);
    let mut d = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            d.push((ids[i], ids[j], ceil_dist(pts[i], pts[j])));
        }
    }
    Metric::validate(&ids, &d).unwrap()
}

/// Random lengths in `1..=max`, closed under shortest paths.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let x = rng.random_range(1..=max);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k] + m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    m
}

pub fn random_metric(seed: u64, n: usize, max: u64) -> Metric {
    let mut rng = rng(seed);
    let m = random_matrix(&mut rng, n, max);
    let ids = ids(n);
    let mut d = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            d.push((ids[i], ids[j], m[i][j]));
        }
    }
    Metric::validate(&ids, &d).unwrap()
}

pub fn deletion_order(seed: u64, n: usize) -> Vec<VertexId> {
    let mut order = ids(n);
    order.shuffle(&mut rng(seed ^ 0x5eed));
    order
}

/// Mixed add/delete requests over grid points; distances of each new
/// point to the alive ones only.
pub enum Req {
    Add(VertexId, BTreeMap<VertexId, u64>),
    Del(VertexId),
}

pub fn mixed(seed: u64, requests: usize, p_del: f64) -> Vec<Req> {
    let mut rng = rng(seed);
    let side = 4 * requests as i64 + 4;
    let pts = grid_points(&mut rng, requests, side);
    let mut alive: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    for _ in 0..requests {
        if alive.len() >= 2 && rng.random_bool(p_del) {
            let k = rng.random_range(0..alive.len());
            out.push(Req::Del(VertexId(alive.swap_remove(k) as u32 + 1)));
        } else {
            let d = alive.iter().map(|&a| (VertexId(a as u32 + 1), ceil_dist(pts[a], pts[next]))).collect();
            out.push(Req::Add(VertexId(next as u32 + 1), d));
            alive.push(next);
            next += 1;
        }
    }
    out
}
