//! The Farey graph: vertices are extended rationals, two slopes are adjacent when
//! their intersection number |ps - qr| is 1.
//!
//! Distances and geodesics are computed on the finite crossing graph of a pair:
//! the pair itself plus every endpoint of an edge separating them. The crossing
//! graph is built by moving `x` to 1/0 with an SL(2,Z) element and descending the
//! Stern-Brocot tree toward the image of `y`; every descent step adds one Farey
//! triangle, and the resulting strip of triangles carries every Farey edge among
//! its vertices.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mcg::SL2Matrix;

/// A reduced extended rational p/q with q >= 0; 1/0 is the point at infinity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Slope {
    p: BigInt,
    q: BigInt,
}

impl Slope {
    pub fn reduce(p: BigInt, q: BigInt) -> Result<Slope> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::ZeroVector);
        }
        if q.is_zero() {
            return Ok(Slope::infinity());
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / &g, q / &g);
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        Ok(Slope { p, q })
    }

    pub fn new(p: i64, q: i64) -> Result<Slope> {
        Slope::reduce(BigInt::from(p), BigInt::from(q))
    }

    pub fn int(n: i64) -> Slope {
        Slope {
            p: BigInt::from(n),
            q: BigInt::one(),
        }
    }

    pub fn infinity() -> Slope {
        Slope {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    /// Slope of a primitive vector; only the sign is normalized.
    pub(crate) fn from_primitive(p: BigInt, q: BigInt) -> Slope {
        debug_assert!(!(p.is_zero() && q.is_zero()));
        if q.is_zero() {
            Slope::infinity()
        } else if q.is_negative() {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.p
    }

    pub fn denom(&self) -> &BigInt {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.q.is_one()
    }

    /// max(|p|, q)
    pub fn height(&self) -> BigInt {
        std::cmp::max(self.p.abs(), self.q.clone())
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinity() {
            f64::INFINITY
        } else {
            self.p.to_f64().unwrap_or(f64::NAN) / self.q.to_f64().unwrap_or(f64::NAN)
        }
    }
}

impl Ord for Slope {
    /// Order by value, with 1/0 above every finite slope.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_infinity(), other.is_infinity()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => (&self.p * &other.q).cmp(&(&other.p * &self.q)),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    /// Accepts "p/q", a bare integer, or "inf".
    fn from_str(s: &str) -> Result<Slope> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(Slope::infinity());
        }
        let bad = || Error::Parse(format!("bad slope {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                Slope::reduce(p, q)
            }
            None => {
                let p: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Slope { p, q: BigInt::one() })
            }
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Slope, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn reduce(p: BigInt, q: BigInt) -> Result<Slope> {
    Slope::reduce(p, q)
}

/// |ps - qr|, the geometric intersection number of the two torus curves.
pub fn intersection_number(a: &Slope, b: &Slope) -> BigInt {
    (&a.p * &b.q - &a.q * &b.p).abs()
}

/// Intersection number in the four-holed sphere normalization: twice the torus value.
/// The graph is the same; only this number is rescaled.
pub fn intersection_number_m04(a: &Slope, b: &Slope) -> BigInt {
    intersection_number(a, b) * 2
}

pub fn adjacent(a: &Slope, b: &Slope) -> bool {
    intersection_number(a, b).is_one()
}

/// True if `v` lies in the open arc that starts at `lo` and runs in the increasing
/// direction to `hi` (through 1/0 when lo > hi).
pub fn in_open_arc(v: &Slope, lo: &Slope, hi: &Slope) -> bool {
    match lo.cmp(hi) {
        Ordering::Less => lo < v && v < hi,
        Ordering::Greater => v > lo || v < hi,
        Ordering::Equal => false,
    }
}

/// An edge of the Farey graph, stored with its endpoints in increasing order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FareyEdge {
    lo: Slope,
    hi: Slope,
}

impl FareyEdge {
    pub fn new(a: Slope, b: Slope) -> Result<FareyEdge> {
        if !adjacent(&a, &b) {
            return Err(Error::NotAdjacent(a.to_string(), b.to_string()));
        }
        Ok(FareyEdge::new_unchecked(a, b))
    }

    pub(crate) fn new_unchecked(a: Slope, b: Slope) -> FareyEdge {
        if a <= b {
            FareyEdge { lo: a, hi: b }
        } else {
            FareyEdge { lo: b, hi: a }
        }
    }

    pub fn endpoints(&self) -> (&Slope, &Slope) {
        (&self.lo, &self.hi)
    }

    pub fn has_endpoint(&self, v: &Slope) -> bool {
        &self.lo == v || &self.hi == v
    }

    pub fn apply(&self, m: &SL2Matrix) -> FareyEdge {
        FareyEdge::new_unchecked(m.apply(&self.lo), m.apply(&self.hi))
    }
}

impl fmt::Display for FareyEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

impl FromStr for FareyEdge {
    type Err = Error;

    fn from_str(s: &str) -> Result<FareyEdge> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad edge {s:?}")))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad edge {s:?}")))?;
        FareyEdge::new(a.parse()?, b.parse()?)
    }
}

impl Serialize for FareyEdge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FareyEdge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<FareyEdge, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// True iff x and y lie in different components of the circle minus the endpoints of e.
pub fn separates(e: &FareyEdge, x: &Slope, y: &Slope) -> Result<bool> {
    for v in [x, y] {
        if e.has_endpoint(v) {
            return Err(Error::EndpointCollision(v.to_string()));
        }
    }
    Ok(in_open_arc(x, &e.lo, &e.hi) != in_open_arc(y, &e.lo, &e.hi))
}

pub fn apply_sl2(m: &SL2Matrix, v: &Slope) -> Result<Slope> {
    m.check_det()?;
    Ok(m.apply(v))
}

/// An SL(2,Z) element sending `x` to 1/0.
pub fn to_infinity(x: &Slope) -> SL2Matrix {
    if x.is_infinity() {
        return SL2Matrix::identity();
    }
    let e = x.p.extended_gcd(&x.q);
    let (mut s, mut t) = (e.x, e.y);
    if e.gcd.is_negative() {
        s = -s;
        t = -t;
    }
    SL2Matrix::from_entries_unchecked(s, t, -x.q.clone(), x.p.clone())
}

/// Neighbors of `v` strictly inside the circular interval (lo, hi), in circular order from lo.
pub fn neighbors_in_interval(v: &Slope, lo: &Slope, hi: &Slope) -> Result<Vec<Slope>> {
    if lo == hi {
        return Err(Error::DegenerateInterval(lo.to_string()));
    }
    if v == lo || v == hi {
        return Err(Error::UnboundedNeighbors(v.to_string()));
    }
    if in_open_arc(v, lo, hi) {
        return Err(Error::Precondition(format!(
            "{v} lies inside ({lo}, {hi})"
        )));
    }
    let g = to_infinity(v);
    let ginv = g.inverse();
    let (a, b) = (g.apply(lo), g.apply(hi));
    // Both images are finite and a < b, since 1/0 is outside the image arc.
    let first = a.p.div_floor(&a.q) + 1u32;
    let last = -((-&b.p).div_floor(&b.q)) - 1u32;
    let mut out = Vec::new();
    let mut n = first;
    while n <= last {
        out.push(ginv.apply(&Slope::int_big(n.clone())));
        n += 1;
    }
    Ok(out)
}

/// All neighbors of `v` of height at most `h`, sorted by value.
pub fn neighbors_bounded(v: &Slope, h: &BigInt) -> Vec<Slope> {
    let ginv = to_infinity(v).inverse();
    let (a, b, c, d) = ginv.entries();
    let mut out = Vec::new();
    let mut push = |s: Slope| {
        if &s.height() <= h {
            out.push(s);
        }
    };
    // ginv(1/0) is v itself; neighbors are ginv(n/1).
    let (lo, hi) = if c.is_zero() {
        // a = +-1: numerator a*n + b must be bounded by h
        let lo = -h - b.abs();
        let hi = h + b.abs();
        (lo, hi)
    } else {
        let cabs = c.abs();
        let lo = (-h - d.abs()).div_floor(&cabs) - 1;
        let hi = (h + d.abs()).div_ceil(&cabs) + 1;
        (lo, hi)
    };
    let mut n = lo;
    while n <= hi {
        let num = a * &n + b;
        let den = c * &n + d;
        push(Slope::from_primitive(num, den));
        n += 1;
    }
    out.sort();
    out.dedup();
    out
}

impl Slope {
    pub(crate) fn int_big(n: BigInt) -> Slope {
        Slope { p: n, q: BigInt::one() }
    }
}

/// A uniformly drawn slope with |p|, q <= h (1/0 included), for scans and tests.
pub fn random_slope<R: rand::Rng>(rng: &mut R, h: i64) -> Slope {
    loop {
        let p = rng.gen_range(-h..=h);
        let q = rng.gen_range(0..=h);
        if let Ok(s) = Slope::new(p, q) {
            if s.height() <= BigInt::from(h) && (q > 0 || p == 1) {
                return s;
            }
        }
    }
}

/// A vertex of `pivots`: incident to at least two separating edges.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PivotRecord {
    pub vertex: Slope,
    pub weight: usize,
}

/// The finite graph on {x, y} and all endpoints of edges separating them, with every
/// Farey edge among those vertices. Vertex 0 is x, vertex `y_index()` is y.
#[derive(Clone, Debug)]
pub struct CrossingGraph {
    vertices: Vec<Slope>,
    adj: Vec<Vec<usize>>,
    chain: Vec<(usize, usize)>,
    y: usize,
    index: HashMap<Slope, usize>,
}

impl CrossingGraph {
    pub fn new(x: &Slope, y: &Slope) -> CrossingGraph {
        if x == y {
            return CrossingGraph::finish(vec![x.clone()], vec![vec![]], vec![], 0);
        }
        let g = to_infinity(x);
        let ginv = g.inverse();
        let yy = g.apply(y);
        if yy.is_integer() {
            return CrossingGraph::finish(
                vec![x.clone(), y.clone()],
                vec![vec![1], vec![0]],
                vec![],
                1,
            );
        }
        // Normalized frame: x = 1/0, y = r/s with s >= 2.
        let n = yy.p.div_floor(&yy.q);
        let mut vecs: Vec<(BigInt, BigInt)> = vec![
            (BigInt::one(), BigInt::zero()),
            (yy.p.clone(), yy.q.clone()),
            (n.clone(), BigInt::one()),
            (n + 1, BigInt::one()),
        ];
        let mut edges: Vec<(usize, usize)> = vec![(0, 2), (0, 3), (2, 3)];
        let mut chain = Vec::new();
        let (mut l, mut r) = (2usize, 3usize);
        loop {
            chain.push((l, r));
            let m = (&vecs[l].0 + &vecs[r].0, &vecs[l].1 + &vecs[r].1);
            if m == vecs[1] {
                edges.push((1, l));
                edges.push((1, r));
                break;
            }
            let k = vecs.len();
            edges.push((k, l));
            edges.push((k, r));
            let below = &yy.p * &m.1 < &m.0 * &yy.q;
            vecs.push(m);
            if below {
                r = k;
            } else {
                l = k;
            }
        }
        let vertices: Vec<Slope> = vecs
            .into_iter()
            .map(|(p, q)| ginv.apply(&Slope::from_primitive(p, q)))
            .collect();
        let mut adj = vec![Vec::new(); vertices.len()];
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        CrossingGraph::finish(vertices, adj, chain, 1)
    }

    fn finish(
        vertices: Vec<Slope>,
        mut adj: Vec<Vec<usize>>,
        chain: Vec<(usize, usize)>,
        y: usize,
    ) -> CrossingGraph {
        for list in adj.iter_mut() {
            list.sort_by(|a, b| vertices[*a].cmp(&vertices[*b]));
        }
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        CrossingGraph {
            vertices,
            adj,
            chain,
            y,
            index,
        }
    }

    pub fn vertices(&self) -> &[Slope] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Slope {
        &self.vertices[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn y_index(&self) -> usize {
        self.y
    }

    pub fn index_of(&self, v: &Slope) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn bfs(&self, src: usize) -> Vec<u64> {
        let mut dist = vec![u64::MAX; self.vertices.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == u64::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self) -> u64 {
        self.bfs(0)[self.y]
    }

    pub fn separating_edges(&self) -> Vec<FareyEdge> {
        self.chain
            .iter()
            .map(|&(a, b)| {
                FareyEdge::new_unchecked(self.vertices[a].clone(), self.vertices[b].clone())
            })
            .collect()
    }

    /// Pivots in order of first incidence along the separating edges.
    pub fn pivots(&self) -> Vec<PivotRecord> {
        let mut count: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<usize> = Vec::new();
        for &(a, b) in &self.chain {
            let mut pair = [a, b];
            pair.sort_by(|u, v| self.vertices[*u].cmp(&self.vertices[*v]));
            for v in pair {
                let c = count.entry(v).or_insert(0);
                if *c == 0 {
                    order.push(v);
                }
                *c += 1;
            }
        }
        order
            .into_iter()
            .filter(|v| count[v] >= 2)
            .map(|v| PivotRecord {
                vertex: self.vertices[v].clone(),
                weight: count[&v],
            })
            .collect()
    }

    /// Marks vertices lying on some geodesic from vertex 0 to one of `targets`.
    pub fn geodesic_mask(&self, targets: &[usize]) -> (Vec<u64>, Vec<bool>) {
        let dx = self.bfs(0);
        let mut mask = vec![false; self.vertices.len()];
        for &t in targets {
            let dt = self.bfs(t);
            let d = dx[t];
            for i in 0..self.vertices.len() {
                if dx[i] != u64::MAX && dt[i] != u64::MAX && dx[i] + dt[i] == d {
                    mask[i] = true;
                }
            }
        }
        (dx, mask)
    }

    pub fn geodesic_vertices(&self) -> BTreeSet<Slope> {
        let (_, mask) = self.geodesic_mask(&[self.y]);
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.vertices[i].clone())
            .collect()
    }

    /// All geodesics from x to y, in lexicographic order of slope values.
    pub fn geodesics(&self) -> Vec<Vec<Slope>> {
        let dx = self.bfs(0);
        let dy = self.bfs(self.y);
        let d = dx[self.y];
        let mut out = Vec::new();
        let mut path = vec![0usize];
        self.extend_paths(&dx, &dy, d, &mut path, &mut out);
        out
    }

    fn extend_paths(
        &self,
        dx: &[u64],
        dy: &[u64],
        d: u64,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<Slope>>,
    ) {
        let u = *path.last().expect("nonempty path");
        if u == self.y {
            out.push(path.iter().map(|&i| self.vertices[i].clone()).collect());
            return;
        }
        let level = dx[u];
        for &w in &self.adj[u] {
            if dx[w] == level + 1 && dy[w] != u64::MAX && dx[w] + dy[w] == d {
                path.push(w);
                self.extend_paths(dx, dy, d, path, out);
                path.pop();
            }
        }
    }

    /// Number of geodesics from x to y, without enumerating them.
    pub fn geodesic_count(&self) -> BigInt {
        let dx = self.bfs(0);
        let dy = self.bfs(self.y);
        let d = dx[self.y];
        let mut order: Vec<usize> = (0..self.len())
            .filter(|&i| dx[i] != u64::MAX && dy[i] != u64::MAX && dx[i] + dy[i] == d)
            .collect();
        order.sort_by_key(|&i| dx[i]);
        let mut ways = vec![BigInt::zero(); self.len()];
        ways[0] = BigInt::one();
        for &u in &order {
            if ways[u].is_zero() {
                continue;
            }
            let wu = ways[u].clone();
            for &w in &self.adj[u] {
                if dx[w] == dx[u] + 1 && dy[w] != u64::MAX && dx[w] + dy[w] == d {
                    ways[w] += &wu;
                }
            }
        }
        ways[self.y].clone()
    }
}

pub fn separating_edges(x: &Slope, y: &Slope) -> Vec<FareyEdge> {
    CrossingGraph::new(x, y).separating_edges()
}

pub fn distance(x: &Slope, y: &Slope) -> u64 {
    CrossingGraph::new(x, y).distance()
}

pub fn geodesics(x: &Slope, y: &Slope) -> Vec<Vec<Slope>> {
    CrossingGraph::new(x, y).geodesics()
}

pub fn geodesic_vertices(x: &Slope, y: &Slope) -> BTreeSet<Slope> {
    CrossingGraph::new(x, y).geodesic_vertices()
}

pub fn pivots(x: &Slope, y: &Slope) -> Vec<PivotRecord> {
    CrossingGraph::new(x, y).pivots()
}

/// Distance from a vertex to an edge: the smaller distance to its endpoints.
pub fn distance_to_edge(x: &Slope, e: &FareyEdge) -> u64 {
    std::cmp::min(distance(x, &e.lo), distance(x, &e.hi))
}

/// Vertices of the closed ball B(center; radius) of height at most `h`, found by
/// breadth-first search inside the height-bounded subgraph.
pub fn ball_bounded(center: &Slope, radius: u64, h: &BigInt) -> Vec<Slope> {
    let mut seen: BTreeSet<Slope> = BTreeSet::new();
    seen.insert(center.clone());
    let mut frontier = vec![center.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in neighbors_bounded(v, h) {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Slope::new(2, 4).unwrap(), s("1/2"));
        assert_eq!(Slope::new(-3, 0).unwrap(), Slope::infinity());
        assert_eq!(Slope::new(6, -4).unwrap(), s("-3/2"));
        assert_eq!(Slope::new(0, 0), Err(Error::ZeroVector));
        assert_eq!(Slope::new(0, -5).unwrap().to_string(), "0/1");
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(intersection_number(&s("1/0"), &s("0/1")), BigInt::one());
        assert_eq!(intersection_number(&s("3/7"), &s("3/7")), BigInt::zero());
        assert_eq!(intersection_number(&s("2/5"), &s("3/7")), BigInt::one());
        assert_eq!(intersection_number_m04(&s("2/5"), &s("3/7")), BigInt::from(2));
        assert!(adjacent(&s("0/1"), &s("1/0")));
        assert!(!adjacent(&s("0/1"), &s("2/1")));
        assert!(!adjacent(&s("5/3"), &s("5/3")));
    }

    #[test]
    fn neighbors_in_interval_examples() {
        let got = neighbors_in_interval(&s("1/0"), &s("-1/2"), &s("3/2")).unwrap();
        assert_eq!(got, vec![s("0"), s("1")]);
        let got = neighbors_in_interval(&s("0"), &s("1/3"), &s("1/0")).unwrap();
        assert_eq!(got, vec![s("1/2"), s("1")]);
        let got = neighbors_in_interval(&s("0"), &s("2/5"), &s("1/2")).unwrap();
        assert!(got.is_empty());
        assert!(matches!(
            neighbors_in_interval(&s("0"), &s("1"), &s("1")),
            Err(Error::DegenerateInterval(_))
        ));
    }

    #[test]
    fn separates_examples() {
        let e = FareyEdge::new(s("0"), s("1/0")).unwrap();
        assert!(separates(&e, &s("-1"), &s("1")).unwrap());
        let e = FareyEdge::new(s("0"), s("1")).unwrap();
        assert!(!separates(&e, &s("2"), &s("3")).unwrap());
        let e = FareyEdge::new(s("0"), s("1/2")).unwrap();
        assert!(separates(&e, &s("1/0"), &s("2/5")).unwrap());
        assert!(matches!(
            separates(&e, &s("0"), &s("2/5")),
            Err(Error::EndpointCollision(_))
        ));
    }

    #[test]
    fn separating_edges_examples() {
        let e = separating_edges(&s("-1"), &s("1"));
        assert_eq!(e, vec![FareyEdge::new(s("0"), s("1/0")).unwrap()]);
        assert!(separating_edges(&s("1/2"), &s("1/3")).is_empty());
        let e: Vec<String> = separating_edges(&s("1/0"), &s("2/5"))
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(e, vec!["(0/1,1/1)", "(0/1,1/2)", "(1/3,1/2)"]);
    }

    #[test]
    fn distance_and_geodesics_examples() {
        assert_eq!(distance(&s("3/7"), &s("3/7")), 0);
        assert_eq!(distance(&s("-1"), &s("1")), 2);
        assert_eq!(distance(&s("1/0"), &s("2/5")), 3);
        let g = geodesics(&s("-1"), &s("1"));
        assert_eq!(
            g,
            vec![vec![s("-1"), s("0"), s("1")], vec![s("-1"), s("1/0"), s("1")]]
        );
        assert_eq!(geodesics(&s("2/3"), &s("2/3")), vec![vec![s("2/3")]]);
        let g = geodesics(&s("1/0"), &s("2/5"));
        let want = vec![
            vec![s("1/0"), s("0"), s("1/3"), s("2/5")],
            vec![s("1/0"), s("0"), s("1/2"), s("2/5")],
            vec![s("1/0"), s("1"), s("1/2"), s("2/5")],
        ];
        assert_eq!(g, want);
        assert_eq!(CrossingGraph::new(&s("1/0"), &s("2/5")).geodesic_count(), BigInt::from(3));
    }

    #[test]
    fn geodesic_vertices_and_pivots() {
        let v: Vec<Slope> = geodesic_vertices(&s("-1"), &s("1")).into_iter().collect();
        assert_eq!(v, vec![s("-1"), s("0"), s("1"), s("1/0")]);
        let v: Vec<Slope> = geodesic_vertices(&s("1/0"), &s("2/5")).into_iter().collect();
        assert_eq!(v, vec![s("0"), s("1/3"), s("2/5"), s("1/2"), s("1"), s("1/0")]);
        assert!(pivots(&s("-1"), &s("1")).is_empty());
        assert!(pivots(&s("0"), &s("1")).is_empty());
        let p = pivots(&s("1/0"), &s("2/5"));
        assert_eq!(
            p,
            vec![
                PivotRecord { vertex: s("0"), weight: 2 },
                PivotRecord { vertex: s("1/2"), weight: 2 }
            ]
        );
    }

    #[test]
    fn to_infinity_works() {
        for t in ["2/5", "-7/3", "0", "1/0", "13/8"] {
            let x = s(t);
            assert_eq!(to_infinity(&x).apply(&x), Slope::infinity());
        }
    }

    #[test]
    fn neighbors_bounded_matches_filter() {
        let h = BigInt::from(6);
        for t in ["0", "1/0", "2/5", "-1/3", "5/2"] {
            let v = s(t);
            let got = neighbors_bounded(&v, &h);
            let mut want = Vec::new();
            for q in 0..=6i64 {
                for p in -6..=6i64 {
                    if let Ok(w) = Slope::new(p, q) {
                        if w.height() <= h && adjacent(&v, &w) && !want.contains(&w) {
                            want.push(w);
                        }
                    }
                }
            }
            want.sort();
            assert_eq!(got, want, "neighbors of {v}");
        }
    }
}
