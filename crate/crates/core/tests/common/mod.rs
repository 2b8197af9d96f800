//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use curvecx::boundary::BoundaryPoint;
use curvecx::hypgraph::{TreeEnd, TreeVertex};
use curvecx::Slope;
use num_traits::ToPrimitive;
use rand::Rng;

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Slope as a plain (p, q) pair with q >= 0 and 1/0 for infinity.
pub fn pq(s: &Slope) -> (i64, i64) {
    (s.numer().to_i64().unwrap(), s.denom().to_i64().unwrap())
}

/// The induced Farey subgraph on slopes with max(|p|, q) <= h, searched by plain BFS.
pub struct FareyBall {
    pub verts: Vec<(i64, i64)>,
    pub index: HashMap<(i64, i64), usize>,
    pub adj: Vec<Vec<usize>>,
}

impl FareyBall {
    pub fn new(h: i64) -> Self {
        let mut verts = vec![(1, 0)];
        for q in 1..=h {
            for p in -h..=h {
                if gcd(p, q) == 1 {
                    verts.push((p, q));
                }
            }
        }
        let index: HashMap<_, _> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = verts.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                let ((p, q), (r, s)) = (verts[i], verts[j]);
                if (p * s - q * r).abs() == 1 {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        FareyBall { verts, index, adj }
    }

    pub fn bfs(&self, src: usize) -> Vec<u64> {
        let mut d = vec![u64::MAX; self.verts.len()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &w in &self.adj[u] {
                if d[w] == u64::MAX {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// Every shortest path from the BFS source to `dst`, as (p, q) lists.
    pub fn paths(&self, dist: &[u64], dst: usize) -> BTreeSet<Vec<(i64, i64)>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![dst];
        self.back(dist, &mut stack, &mut out);
        out
    }

    fn back(&self, dist: &[u64], stack: &mut Vec<usize>, out: &mut BTreeSet<Vec<(i64, i64)>>) {
        let u = *stack.last().unwrap();
        if dist[u] == 0 {
            out.insert(stack.iter().rev().map(|&i| self.verts[i]).collect());
            return;
        }
        for &w in &self.adj[u] {
            if dist[w] + 1 == dist[u] {
                stack.push(w);
                self.back(dist, stack, out);
                stack.pop();
            }
        }
    }
}

/// A random quadratic irrational as an eventually periodic continued fraction.
pub fn random_qi<R: Rng>(rng: &mut R) -> BoundaryPoint {
    let head = rng.gen_range(-3i64..=3);
    let pre: Vec<i64> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..=4)).collect();
    let per: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=4)).collect();
    BoundaryPoint::periodic_i64(head, &pre, &per).unwrap()
}

// Naive 3-regular tree: vertices are reduced words over {0,1,2}, ends are
// prefix + repeated period.

pub fn tree_random_vertex<R: Rng>(rng: &mut R, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    let mut w: Vec<u8> = Vec::new();
    while w.len() < len {
        let c = rng.gen_range(0..3u8);
        if w.last() != Some(&c) {
            w.push(c);
        }
    }
    w
}

pub fn tree_random_end<R: Rng>(rng: &mut R) -> (Vec<u8>, Vec<u8>) {
    loop {
        let pre = tree_random_vertex(rng, 3);
        let per_len = rng.gen_range(2..=3);
        let per: Vec<u8> = (0..per_len).map(|_| rng.gen_range(0..3u8)).collect();
        let mut word = pre.clone();
        for _ in 0..3 {
            word.extend(&per);
        }
        if word.windows(2).all(|p| p[0] != p[1]) {
            return (pre, per);
        }
    }
}

pub fn tree_end_letter(end: &(Vec<u8>, Vec<u8>), i: usize) -> u8 {
    if i < end.0.len() {
        end.0[i]
    } else {
        end.1[(i - end.0.len()) % end.1.len()]
    }
}

pub fn to_tree_vertex(w: &[u8]) -> TreeVertex {
    TreeVertex::new(w.to_vec()).unwrap()
}

pub fn to_tree_end(e: &(Vec<u8>, Vec<u8>)) -> TreeEnd {
    TreeEnd::new(e.0.clone(), e.1.clone()).unwrap()
}

fn tree_neighbors(w: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for c in 0..3u8 {
        if w.last() == Some(&c) {
            let mut v = w.to_vec();
            v.pop();
            out.push(v);
        } else {
            let mut v = w.to_vec();
            v.push(c);
            out.push(v);
        }
    }
    out
}

pub fn tree_neighbor<R: Rng>(rng: &mut R, w: &[u8]) -> Vec<u8> {
    let nb = tree_neighbors(w);
    nb[rng.gen_range(0..3)].clone()
}

pub fn tree_ball(x: &[u8], r: u64) -> Vec<Vec<u8>> {
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::from([x.to_vec()]);
    let mut layer = vec![x.to_vec()];
    for _ in 0..r {
        let mut next = Vec::new();
        for v in &layer {
            for w in tree_neighbors(v) {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    seen.into_iter().collect()
}

/// Vertex at position t on the ray from y toward the end.
pub fn tree_ray_point(y: &[u8], end: &(Vec<u8>, Vec<u8>), t: usize) -> Vec<u8> {
    let mut c = 0;
    while c < y.len() && y[c] == tree_end_letter(end, c) {
        c += 1;
    }
    let up = y.len() - c;
    if t <= up {
        y[..y.len() - t].to_vec()
    } else {
        let mut v = y[..c].to_vec();
        for i in c..c + (t - up) {
            v.push(tree_end_letter(end, i));
        }
        v
    }
}

/// Multiplicities of n^{3/2} H_a(x, n).
pub fn tree_h(x: &[u8], end: &(Vec<u8>, Vec<u8>), n: u64) -> BTreeMap<Vec<u8>, u64> {
    let mut s = 0;
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    let ks = if s * s == n { s } else { s + 1 };
    let mut h = BTreeMap::new();
    for k in 0..ks {
        let mut f = BTreeSet::new();
        for b in tree_ball(x, k) {
            for t in n..=2 * n {
                f.insert(tree_ray_point(&b, end, t as usize));
            }
        }
        for v in f {
            *h.entry(v).or_insert(0) += 1;
        }
    }
    h
}

pub fn l1_counts<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> u64 {
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| a.get(k).copied().unwrap_or(0).abs_diff(b.get(k).copied().unwrap_or(0)))
        .sum()
}

pub mod strategies {
    use curvecx::mcg::{self, SL2Matrix};
    use curvecx::Slope;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Slopes p/q with |p|, q <= h, including 1/0.
    pub fn slope(h: i64) -> impl Strategy<Value = Slope> {
        (-h..=h, 0..=h).prop_filter_map("not primitive", |(p, q)| {
            (super::gcd(p, q) == 1 && (q > 0 || p == 1)).then(|| Slope::new(p, q).unwrap())
        })
    }

    /// Words of length below `max_len` in the standard generators.
    pub fn matrix(max_len: usize) -> impl Strategy<Value = SL2Matrix> {
        (any::<u64>(), 0..max_len).prop_map(|(seed, len)| {
            mcg::random_word(&mut ChaCha8Rng::seed_from_u64(seed), len)
        })
    }

    pub fn seed() -> impl Strategy<Value = ChaCha8Rng> {
        any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
    }
}
