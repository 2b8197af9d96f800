//! Hyperbolic-graph tooling over a pluggable oracle: Gromov products, sample
//! hyperbolicity constants, fellow traveling. Three backends: the Farey graph, the
//! 3-regular tree, and a finite graph read from an edge list.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Sub};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{self, BoundaryPoint};
use crate::error::{Error, Result};
use crate::farey::{self, Slope};

pub type GeodesicPath<V> = Vec<V>;

/// A metric graph known through distances and geodesics.
pub trait GraphOracle: Sync {
    type Vertex: Clone + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync;

    fn name(&self) -> &'static str;
    fn distance(&self, x: &Self::Vertex, y: &Self::Vertex) -> u64;
    fn geodesics(&self, x: &Self::Vertex, y: &Self::Vertex) -> Vec<GeodesicPath<Self::Vertex>>;
    /// Present only for locally finite backends.
    fn neighbors(&self, _x: &Self::Vertex) -> Option<Vec<Self::Vertex>> {
        None
    }
}

/// Oracles that also know rays toward points at infinity.
pub trait RayOracle: GraphOracle {
    type End: Clone + fmt::Debug + fmt::Display + Send + Sync;

    /// Levels 0..=t_max of the union of all geodesic rays from y toward a.
    fn ray_spheres(
        &self,
        y: &Self::Vertex,
        a: &Self::End,
        t_max: u64,
    ) -> Result<Vec<BTreeSet<Self::Vertex>>>;

    /// The closed ball B(x; r). Locally infinite backends cut it at height `cut` and
    /// report `exact = false`.
    fn ball(&self, x: &Self::Vertex, r: u64, cut: Option<&BigInt>) -> Result<Ball<Self::Vertex>>;

    /// Whether balls are finite, so that ball() is always exact.
    fn bounded_geometry(&self) -> bool;
}

#[derive(Clone, Debug)]
pub struct Ball<V> {
    pub vertices: Vec<V>,
    pub exact: bool,
}

/// BFS ball through the neighbor oracle.
pub fn bfs_ball<G: GraphOracle>(g: &G, x: &G::Vertex, r: u64) -> Result<Vec<G::Vertex>> {
    let mut seen: BTreeSet<G::Vertex> = BTreeSet::new();
    seen.insert(x.clone());
    let mut frontier = vec![x.clone()];
    for _ in 0..r {
        let mut next = Vec::new();
        for v in &frontier {
            let nb = g.neighbors(v).ok_or_else(|| {
                Error::UnboundedNeighbors(format!("{} has no neighbor enumeration", g.name()))
            })?;
            for w in nb {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    Ok(seen.into_iter().collect())
}

/// Exact half-integers, stored doubled.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_doubled(d: i64) -> HalfInt {
        HalfInt(d)
    }

    pub fn from_int(n: i64) -> HalfInt {
        HalfInt(2 * n)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn scale(self, k: i64) -> HalfInt {
        HalfInt(self.0 * k)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// (x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2.
pub fn gromov_product<G: GraphOracle>(
    g: &G,
    x: &G::Vertex,
    y: &G::Vertex,
    z: &G::Vertex,
) -> HalfInt {
    let d = |u: &G::Vertex, v: &G::Vertex| g.distance(u, v) as i64;
    HalfInt(d(x, z) + d(y, z) - d(x, y))
}

fn distance_matrix<G: GraphOracle>(g: &G, vs: &[G::Vertex]) -> Vec<Vec<i64>> {
    vs.par_iter()
        .map(|u| vs.iter().map(|v| g.distance(u, v) as i64).collect())
        .collect()
}

/// Least delta with (x|z)_w >= min((x|y)_w, (y|z)_w) - delta over all ordered
/// quadruples drawn from the sample.
pub fn four_point_delta<G: GraphOracle>(g: &G, vertices: &[G::Vertex]) -> Result<HalfInt> {
    let vs: Vec<G::Vertex> = vertices.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if vs.len() < 4 {
        return Err(Error::Precondition(format!(
            "four-point delta needs 4 distinct vertices, got {}",
            vs.len()
        )));
    }
    Ok(HalfInt(four_point_delta_matrix(&distance_matrix(g, &vs))))
}

/// Doubled four-point delta from a distance matrix.
pub fn four_point_delta_matrix(d: &[Vec<i64>]) -> i64 {
    let n = d.len();
    (0..n)
        .into_par_iter()
        .map(|w| {
            let dw = &d[w];
            let mut best = 0i64;
            for x in 0..n {
                for y in 0..n {
                    let xy = dw[x] + dw[y] - d[x][y];
                    for z in 0..n {
                        let yz = dw[y] + dw[z] - d[y][z];
                        let xz = dw[x] + dw[z] - d[x][z];
                        best = best.max(xy.min(yz) - xz);
                    }
                }
            }
            best
        })
        .max()
        .unwrap_or(0)
}

fn dist_to_path<G: GraphOracle>(g: &G, v: &G::Vertex, path: &[G::Vertex]) -> u64 {
    path.iter().map(|u| g.distance(v, u)).min().unwrap_or(u64::MAX)
}

/// Least delta' such that, for every sampled triangle and every choice of geodesic
/// sides, each side lies in the delta'-neighborhood of the other two.
pub fn slim_delta<G: GraphOracle>(
    g: &G,
    triangles: &[(G::Vertex, G::Vertex, G::Vertex)],
) -> HalfInt {
    let worst = triangles
        .par_iter()
        .map(|(x, y, z)| {
            // a degenerate triangle is one geodesic used twice, with the same choice
            if x == y || y == z || z == x {
                return 0;
            }
            let sides = [g.geodesics(x, y), g.geodesics(y, z), g.geodesics(z, x)];
            let mut worst = 0u64;
            for s in 0..3 {
                let (t, u) = ((s + 1) % 3, (s + 2) % 3);
                let verts: BTreeSet<&G::Vertex> = sides[s].iter().flatten().collect();
                for v in verts {
                    // the other two sides are chosen independently
                    let far = |k: usize| {
                        sides[k]
                            .iter()
                            .map(|p| dist_to_path(g, v, p))
                            .max()
                            .unwrap_or(0)
                    };
                    worst = worst.max(far(t).min(far(u)));
                }
            }
            worst
        })
        .max()
        .unwrap_or(0);
    HalfInt::from_int(worst as i64)
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicityReport {
    pub four_point_delta: HalfInt,
    pub slim_delta: HalfInt,
    pub sample: String,
}

pub fn hyperbolicity_report<G: GraphOracle>(
    g: &G,
    vertices: &[G::Vertex],
    triangles: &[(G::Vertex, G::Vertex, G::Vertex)],
    sample: impl Into<String>,
) -> Result<HyperbolicityReport> {
    Ok(HyperbolicityReport {
        four_point_delta: four_point_delta(g, vertices)?,
        slim_delta: slim_delta(g, triangles),
        sample: sample.into(),
    })
}

/// Whether d(f_i, g_i) <= r for all i.
pub fn r_close<G: GraphOracle>(
    g: &G,
    f: &[G::Vertex],
    h: &[G::Vertex],
    r: u64,
) -> Result<bool> {
    if f.len() != h.len() {
        return Err(Error::Precondition(format!(
            "paths of lengths {} and {}",
            f.len(),
            h.len()
        )));
    }
    Ok(f.iter().zip(h).all(|(u, v)| g.distance(u, v) <= r))
}

/// x_r ... x_{n-r} of a path x_0 ... x_n.
pub fn central_segment<V: Clone>(f: &[V], r: usize) -> Result<Vec<V>> {
    let n = f.len().saturating_sub(1);
    if f.is_empty() || 2 * r > n {
        return Err(Error::Precondition(format!("cannot trim {r} from a path of length {n}")));
    }
    Ok(f[r..=n - r].to_vec())
}

/// Whether the r-central segment of f is within `close` of some equally long
/// segment of h.
pub fn central_segment_close<G: GraphOracle>(
    g: &G,
    f: &[G::Vertex],
    h: &[G::Vertex],
    r: usize,
    close: u64,
) -> Result<bool> {
    let c = central_segment(f, r)?;
    if h.len() < c.len() {
        return Ok(false);
    }
    for start in 0..=h.len() - c.len() {
        if r_close(g, &c, &h[start..start + c.len()], close)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Count of triples violating (x|y)_z + (x|z)_y = d(y,z).
pub fn consistency_violations<G: GraphOracle>(
    g: &G,
    triples: &[(G::Vertex, G::Vertex, G::Vertex)],
) -> usize {
    triples
        .par_iter()
        .filter(|(x, y, z)| {
            gromov_product(g, x, y, z) + gromov_product(g, x, z, y)
                != HalfInt::from_int(g.distance(y, z) as i64)
        })
        .count()
}

/// Count of (triangle, geodesic [y,z]) pairs violating
/// (y|z)_x <= d(x, [y,z]) <= (y|z)_x + 4 delta.
pub fn sandwich_violations<G: GraphOracle>(
    g: &G,
    triples: &[(G::Vertex, G::Vertex, G::Vertex)],
    delta: HalfInt,
) -> usize {
    triples
        .par_iter()
        .map(|(x, y, z)| {
            let gp = gromov_product(g, y, z, x);
            g.geodesics(y, z)
                .iter()
                .filter(|p| {
                    let d = HalfInt::from_int(dist_to_path(g, x, p) as i64);
                    d < gp || d > gp + delta.scale(4)
                })
                .count()
        })
        .sum()
}

/// Finds a shift l and start i0 with d(f(i), h(i - l)) <= bound for every computed
/// i >= i0, taking the smallest i0 and then the smallest |l|.
pub fn fellow_travel<G: GraphOracle>(
    g: &G,
    f: &[G::Vertex],
    h: &[G::Vertex],
    bound: u64,
) -> Option<(i64, usize)> {
    let span = f.len().max(h.len()) as i64;
    let mut best: Option<(i64, usize)> = None;
    for l in (-span..=span).filter(|l| l.unsigned_abs() as usize * 2 <= f.len()) {
        let idx: Vec<usize> = (0..f.len())
            .filter(|&i| {
                let j = i as i64 - l;
                j >= 0 && (j as usize) < h.len()
            })
            .collect();
        if idx.len() * 2 < f.len().min(h.len()) {
            continue;
        }
        let mut i0 = *idx.last().expect("nonempty") + 1;
        for &i in idx.iter().rev() {
            if g.distance(&f[i], &h[(i as i64 - l) as usize]) <= bound {
                i0 = i;
            } else {
                break;
            }
        }
        // at least half of the overlap must fellow travel
        if (idx.last().unwrap() + 1 - i0) * 2 < idx.len() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bl, bi)) => i0 < bi || (i0 == bi && l.abs() < bl.abs()),
        };
        if better {
            best = Some((l, i0));
        }
    }
    best
}

/// The Farey graph.
#[derive(Clone, Debug, Default)]
pub struct FareyOracle;

impl GraphOracle for FareyOracle {
    type Vertex = Slope;

    fn name(&self) -> &'static str {
        "farey"
    }

    fn distance(&self, x: &Slope, y: &Slope) -> u64 {
        farey::distance(x, y)
    }

    fn geodesics(&self, x: &Slope, y: &Slope) -> Vec<Vec<Slope>> {
        farey::geodesics(x, y)
    }
}

impl RayOracle for FareyOracle {
    type End = BoundaryPoint;

    fn ray_spheres(&self, y: &Slope, a: &BoundaryPoint, t_max: u64) -> Result<Vec<BTreeSet<Slope>>> {
        boundary::geodesic_spheres(y, a, t_max)
    }

    fn ball(&self, x: &Slope, r: u64, cut: Option<&BigInt>) -> Result<Ball<Slope>> {
        if r == 0 {
            return Ok(Ball {
                vertices: vec![x.clone()],
                exact: true,
            });
        }
        let cut = cut.ok_or_else(|| {
            Error::UnboundedNeighbors("Farey balls need a height cutoff".into())
        })?;
        Ok(Ball {
            vertices: farey::ball_bounded(x, r, cut),
            exact: false,
        })
    }

    fn bounded_geometry(&self) -> bool {
        false
    }
}

/// Vertex of the 3-regular tree: a reduced word over {0,1,2} read from the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct TreeVertex(Vec<u8>);

impl TreeVertex {
    pub fn root() -> TreeVertex {
        TreeVertex(Vec::new())
    }

    pub fn new(word: Vec<u8>) -> Result<TreeVertex> {
        if word.iter().any(|&c| c > 2) || word.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(format!("{word:?} is not a reduced word")));
        }
        Ok(TreeVertex(word))
    }

    pub fn word(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    fn step(&self, c: u8) -> TreeVertex {
        let mut w = self.0.clone();
        if w.last() == Some(&c) {
            w.pop();
        } else {
            w.push(c);
        }
        TreeVertex(w)
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for TreeVertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<TreeVertex> {
        let s = s.trim();
        if s == "e" {
            return Ok(TreeVertex::root());
        }
        let word = s
            .chars()
            .map(|c| match c {
                '0'..='2' => Ok(c as u8 - b'0'),
                _ => Err(Error::Parse(format!("bad tree vertex {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        TreeVertex::new(word)
    }
}

/// An end of the 3-regular tree: the infinite reduced word prefix.period^inf.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TreeEnd {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl TreeEnd {
    pub fn new(prefix: Vec<u8>, period: Vec<u8>) -> Result<TreeEnd> {
        let n = prefix.len() + 2 * period.len();
        let e = TreeEnd { prefix, period };
        let word: Vec<u8> = (0..n.max(1)).map(|i| e.letter(i)).collect();
        if e.period.is_empty() {
            return Err(Error::Precondition("empty period".into()));
        }
        TreeVertex::new(word)?;
        Ok(e)
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn letter(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// Length of the common prefix of v and this end.
    fn meet(&self, v: &TreeVertex) -> usize {
        v.0.iter()
            .enumerate()
            .take_while(|(i, &c)| self.letter(*i) == c)
            .count()
    }

    /// The unique ray from v, truncated to `len` steps.
    pub fn ray_from(&self, v: &TreeVertex, len: u64) -> Vec<TreeVertex> {
        let mut out = vec![v.clone()];
        let mut cur = v.clone();
        for _ in 0..len {
            cur = if cur.depth() > self.meet(&cur) {
                let mut w = cur.0.clone();
                w.pop();
                TreeVertex(w)
            } else {
                let c = self.letter(cur.depth());
                cur.step(c)
            };
            out.push(cur.clone());
        }
        out
    }
}

impl fmt::Display for TreeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.prefix {
            write!(f, "{c}")?;
        }
        write!(f, "(")?;
        for c in &self.period {
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for TreeEnd {
    type Err = Error;

    /// "01(20)" for 01202020...
    fn from_str(s: &str) -> Result<TreeEnd> {
        let bad = || Error::Parse(format!("bad tree end {s:?}"));
        let (pre, per) = s.trim().split_once('(').ok_or_else(bad)?;
        let per = per.strip_suffix(')').ok_or_else(bad)?;
        let digits = |t: &str| -> Result<Vec<u8>> {
            t.chars()
                .map(|c| match c {
                    '0'..='2' => Ok(c as u8 - b'0'),
                    _ => Err(bad()),
                })
                .collect()
        };
        TreeEnd::new(digits(pre)?, digits(per)?)
    }
}

/// The 3-regular tree, vertices addressed from a fixed root.
#[derive(Clone, Debug, Default)]
pub struct Tree3;

impl Tree3 {
    fn lcp(x: &TreeVertex, y: &TreeVertex) -> usize {
        x.0.iter().zip(&y.0).take_while(|(a, b)| a == b).count()
    }

    /// Median of three vertices.
    pub fn median(x: &TreeVertex, y: &TreeVertex, z: &TreeVertex) -> TreeVertex {
        let cands = [
            Self::lcp(x, y),
            Self::lcp(y, z),
            Self::lcp(x, z),
        ];
        // the median is the deepest of the three pairwise meets
        let (i, &m) = cands.iter().enumerate().max_by_key(|(_, &m)| m).expect("three");
        let src = if i == 1 { y } else { x };
        TreeVertex(src.0[..m].to_vec())
    }
}

impl GraphOracle for Tree3 {
    type Vertex = TreeVertex;

    fn name(&self) -> &'static str {
        "tree3"
    }

    fn distance(&self, x: &TreeVertex, y: &TreeVertex) -> u64 {
        (x.depth() + y.depth() - 2 * Self::lcp(x, y)) as u64
    }

    fn geodesics(&self, x: &TreeVertex, y: &TreeVertex) -> Vec<Vec<TreeVertex>> {
        let m = Self::lcp(x, y);
        let mut path = Vec::new();
        for k in (m..=x.depth()).rev() {
            path.push(TreeVertex(x.0[..k].to_vec()));
        }
        for k in m + 1..=y.depth() {
            path.push(TreeVertex(y.0[..k].to_vec()));
        }
        vec![path]
    }

    fn neighbors(&self, x: &TreeVertex) -> Option<Vec<TreeVertex>> {
        let mut out: Vec<TreeVertex> = (0..3).map(|c| x.step(c)).collect();
        out.sort();
        Some(out)
    }
}

impl RayOracle for Tree3 {
    type End = TreeEnd;

    fn ray_spheres(&self, y: &TreeVertex, a: &TreeEnd, t_max: u64) -> Result<Vec<BTreeSet<TreeVertex>>> {
        Ok(a
            .ray_from(y, t_max)
            .into_iter()
            .map(|v| BTreeSet::from([v]))
            .collect())
    }

    fn ball(&self, x: &TreeVertex, r: u64, _cut: Option<&BigInt>) -> Result<Ball<TreeVertex>> {
        Ok(Ball {
            vertices: bfs_ball(self, x, r)?,
            exact: true,
        })
    }

    fn bounded_geometry(&self) -> bool {
        true
    }
}

/// A finite connected graph with all-pairs distances precomputed.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u64>>,
}

impl FiniteGraph {
    /// One edge "u v" per line; blank lines and lines starting with '#' are skipped.
    pub fn parse(text: &str) -> Result<FiniteGraph> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut id = |s: &str, names: &mut Vec<String>| -> usize {
            *index.entry(s.to_string()).or_insert_with(|| {
                names.push(s.to_string());
                names.len() - 1
            })
        };
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected \"u v\"", ln + 1)));
            }
            let u = id(parts[0], &mut names);
            let v = id(parts[1], &mut names);
            if u != v {
                edges.push((u, v));
            }
        }
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_by(|&x, &y| names[x].cmp(&names[y]));
            a.dedup();
        }
        let dist: Vec<Vec<u64>> = (0..n).into_par_iter().map(|s| bfs(&adj, s)).collect();
        if dist.iter().flatten().any(|&d| d == u64::MAX) {
            return Err(Error::Precondition("edge list graph is disconnected".into()));
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FiniteGraph {
            names,
            index,
            adj,
            dist,
        })
    }

    pub fn load(path: &Path) -> Result<FiniteGraph> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))?;
        FiniteGraph::parse(&text)
    }

    pub fn vertices(&self) -> Vec<String> {
        let mut v = self.names.clone();
        v.sort();
        v
    }

    fn idx(&self, v: &str) -> usize {
        *self
            .index
            .get(v)
            .unwrap_or_else(|| panic!("{v} is not a vertex of the edge-list graph"))
    }

    pub fn contains(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<u64> {
    let mut d = vec![u64::MAX; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v] == u64::MAX {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

impl GraphOracle for FiniteGraph {
    type Vertex = String;

    fn name(&self) -> &'static str {
        "file"
    }

    fn distance(&self, x: &String, y: &String) -> u64 {
        self.dist[self.idx(x)][self.idx(y)]
    }

    fn geodesics(&self, x: &String, y: &String) -> Vec<Vec<String>> {
        let (s, t) = (self.idx(x), self.idx(y));
        let mut out = Vec::new();
        let mut path = vec![s];
        fn rec(g: &FiniteGraph, t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<String>>) {
            let u = *path.last().expect("nonempty");
            if u == t {
                out.push(path.iter().map(|&i| g.names[i].clone()).collect());
                return;
            }
            for &v in &g.adj[u] {
                if g.dist[v][t] + 1 == g.dist[u][t] {
                    path.push(v);
                    rec(g, t, path, out);
                    path.pop();
                }
            }
        }
        rec(self, t, &mut path, &mut out);
        out
    }

    fn neighbors(&self, x: &String) -> Option<Vec<String>> {
        Some(self.adj[self.idx(x)].iter().map(|&i| self.names[i].clone()).collect())
    }
}

impl RayOracle for FiniteGraph {
    /// A far target vertex stands in for a point at infinity.
    type End = String;

    fn ray_spheres(&self, y: &String, a: &String, t_max: u64) -> Result<Vec<BTreeSet<String>>> {
        let (s, t) = (self.idx(y), self.idx(a));
        let total = self.dist[s][t];
        if t_max > total {
            return Err(Error::Budget(format!(
                "target {a} is only {total} away from {y}, level {t_max} requested"
            )));
        }
        let mut out = vec![BTreeSet::new(); t_max as usize + 1];
        for v in 0..self.len() {
            let dv = self.dist[s][v];
            if dv <= t_max && dv + self.dist[v][t] == total {
                out[dv as usize].insert(self.names[v].clone());
            }
        }
        Ok(out)
    }

    fn ball(&self, x: &String, r: u64, _cut: Option<&BigInt>) -> Result<Ball<String>> {
        let s = self.idx(x);
        let mut vertices: Vec<String> = (0..self.len())
            .filter(|&v| self.dist[s][v] <= r)
            .map(|v| self.names[v].clone())
            .collect();
        vertices.sort();
        Ok(Ball {
            vertices,
            exact: true,
        })
    }

    fn bounded_geometry(&self) -> bool {
        true
    }
}

/// Serializable description of a backend choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Farey,
    Tree3,
    File,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "farey" => Ok(Backend::Farey),
            "tree3" => Ok(Backend::Tree3),
            "file" => Ok(Backend::File),
            _ => Err(Error::Parse(format!("unknown backend {s:?}"))),
        }
    }
}
