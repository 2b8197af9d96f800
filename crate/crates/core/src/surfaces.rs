//! Surface complexity arithmetic, decomposition types of curve systems, and the
//! Euler characteristic / l2-Betti invariants of mapping class groups.
//!
//! A curve system is recorded only up to its decomposition type: the dual graph
//! whose vertices are the cut pieces (labelled by genus and leg count) and whose
//! edges are the curves. Everything verified here is a statement about types.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order of the mapping class group of a pair of pants (boundary permutations included).
pub const PANTS_MCG_ORDER: u32 = 6;

/// Default cap on the number of distinct types an enumeration may produce.
pub const DEFAULT_GRAPH_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SurfaceType {
    pub g: u32,
    pub p: u32,
}

impl SurfaceType {
    pub const fn new(g: u32, p: u32) -> Self {
        SurfaceType { g, p }
    }

    pub fn euler_char(&self) -> i64 {
        2 - 2 * self.g as i64 - self.p as i64
    }

    /// Allowed as a piece of a cut surface: negative Euler characteristic.
    pub fn is_admissible(&self) -> bool {
        self.euler_char() < 0
    }

    pub fn complexity(&self) -> i64 {
        3 * self.g as i64 + self.p as i64 - 4
    }

    pub fn n_max(&self) -> i64 {
        self.g as i64 + (self.g as i64 + self.p as i64 - 2).div_euclid(2)
    }

    pub fn is_pants(&self) -> bool {
        self.g == 0 && self.p == 3
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.g, self.p)
    }
}

pub fn complexity(s: SurfaceType) -> i64 {
    s.complexity()
}

pub fn n_max(s: SurfaceType) -> i64 {
    s.n_max()
}

/// Type of the surface cut along a nonseparating curve.
pub fn cut_nonseparating(s: SurfaceType) -> Result<SurfaceType> {
    if s.g == 0 {
        return Err(Error::Precondition(format!("{s} has no nonseparating curve")));
    }
    let t = SurfaceType::new(s.g - 1, s.p + 2);
    if !t.is_admissible() {
        return Err(Error::Precondition(format!("cut of {s} gives inadmissible {t}")));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparatingCuts {
    pub pairs: Vec<(SurfaceType, SurfaceType)>,
    /// Splits with g1+g2 = g, p1+p2 = p+2, p_i >= 1 dropped because a side has χ >= 0.
    pub filtered: Vec<(SurfaceType, SurfaceType)>,
}

/// All unordered splits along a separating curve.
pub fn cut_separating(s: SurfaceType) -> SeparatingCuts {
    let mut pairs = BTreeSet::new();
    let mut filtered = BTreeSet::new();
    for g1 in 0..=s.g {
        for p1 in 1..=s.p + 1 {
            let a = SurfaceType::new(g1, p1);
            let b = SurfaceType::new(s.g - g1, s.p + 2 - p1);
            let key = if a <= b { (a, b) } else { (b, a) };
            if a.is_admissible() && b.is_admissible() {
                pairs.insert(key);
            } else {
                filtered.insert(key);
            }
        }
    }
    SeparatingCuts {
        pairs: pairs.into_iter().collect(),
        filtered: filtered.into_iter().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub genus: u32,
    pub legs: u32,
}

/// Dual graph of a curve system. Vertices are stored in canonical order, so two
/// graphs are isomorphic iff they compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DecompositionGraph {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    code: Vec<u32>,
}

impl DecompositionGraph {
    /// Validates connectivity and admissibility, then canonicalizes.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::Precondition("empty decomposition graph".into()));
        }
        if edges.iter().any(|&(u, v)| u >= n || v >= n) {
            return Err(Error::Precondition("edge endpoint out of range".into()));
        }
        let raw = Raw { vertices, edges };
        if !raw.is_connected() {
            return Err(Error::Precondition("decomposition graph is disconnected".into()));
        }
        for (i, t) in raw.piece_types().iter().enumerate() {
            if !t.is_admissible() {
                return Err(Error::Precondition(format!("vertex {i} has inadmissible piece {t}")));
            }
        }
        Ok(raw.canonical())
    }

    /// One vertex, no curves.
    pub fn empty(s: SurfaceType) -> Self {
        Raw {
            vertices: vec![Vertex { genus: s.g, legs: s.p }],
            edges: vec![],
        }
        .canonical()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical certificate, e.g. `1.1|1.1|0-1`.
    pub fn certificate(&self) -> String {
        let mut parts: Vec<String> = self
            .vertices
            .iter()
            .map(|v| format!("{}.{}", v.genus, v.legs))
            .collect();
        parts.extend(self.edges.iter().map(|(u, v)| format!("{u}-{v}")));
        parts.join("|")
    }

    /// The ambient surface.
    pub fn surface(&self) -> SurfaceType {
        let g: i64 = self.vertices.iter().map(|v| v.genus as i64).sum::<i64>()
            + self.edges.len() as i64
            - self.vertices.len() as i64
            + 1;
        SurfaceType::new(g as u32, self.vertices.iter().map(|v| v.legs).sum())
    }

    pub fn piece_types(&self) -> Vec<SurfaceType> {
        self.raw().piece_types()
    }

    /// Number of pieces that are not pairs of pants.
    pub fn n_of(&self) -> usize {
        self.piece_types().iter().filter(|t| !t.is_pants()).count()
    }

    pub fn piece_counts(&self) -> BTreeMap<SurfaceType, usize> {
        let mut m = BTreeMap::new();
        for t in self.piece_types() {
            *m.entry(t).or_insert(0) += 1;
        }
        m
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len()
    }

    pub fn is_pants_decomposition(&self) -> bool {
        self.piece_types().iter().all(|t| t.is_pants())
    }

    /// Indices of edges whose curve separates the surface.
    pub fn bridges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.split(&[e]).len() == 2)
            .collect()
    }

    /// Components after cutting along the given edges, each with its vertex set
    /// and surface type. Ordered by smallest vertex index.
    pub fn split(&self, cut: &[usize]) -> Vec<(Vec<usize>, SurfaceType)> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for (i, &(a, b)) in self.edges.iter().enumerate() {
                    if cut.contains(&i) {
                        continue;
                    }
                    let w = if a == u {
                        b
                    } else if b == u {
                        a
                    } else {
                        continue;
                    };
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        let mut out = Vec::with_capacity(count);
        for c in 0..count {
            let vs: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
            let mut genus: i64 = vs.iter().map(|&v| self.vertices[v].genus as i64).sum();
            let mut legs: u32 = vs.iter().map(|&v| self.vertices[v].legs).sum();
            let mut internal = 0i64;
            for (i, &(a, b)) in self.edges.iter().enumerate() {
                if cut.contains(&i) {
                    legs += (comp[a] == c) as u32 + (comp[b] == c) as u32;
                } else if comp[a] == c {
                    internal += 1;
                }
            }
            genus += internal - vs.len() as i64 + 1;
            out.push((vs, SurfaceType::new(genus as u32, legs)));
        }
        out
    }

    /// Topological type of the curve on edge `e`.
    pub fn curve_key(&self, e: usize) -> CurveKey {
        let parts = self.split(&[e]);
        if parts.len() == 1 {
            CurveKey::NonSeparating
        } else {
            CurveKey::separating(parts[0].1, parts[1].1)
        }
    }

    fn raw(&self) -> Raw {
        Raw {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
    }

    /// All types obtained by adding one curve inside one piece.
    pub fn degenerations(&self) -> Vec<DecompositionGraph> {
        self.raw()
            .degenerations()
            .into_iter()
            .map(|r| r.canonical())
            .collect()
    }
}

impl fmt::Display for DecompositionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.certificate())
    }
}

#[derive(Debug, Clone)]
struct Raw {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
}

impl Raw {
    fn piece_types(&self) -> Vec<SurfaceType> {
        let mut ends = vec![0u32; self.vertices.len()];
        for &(a, b) in &self.edges {
            ends[a] += 1;
            ends[b] += 1;
        }
        self.vertices
            .iter()
            .zip(ends)
            .map(|(v, h)| SurfaceType::new(v.genus, v.legs + h))
            .collect()
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// One-curve degenerations; the new curve is the last edge.
    fn degenerations(&self) -> Vec<Raw> {
        let types = self.piece_types();
        let mut out = Vec::new();
        for (v, vert) in self.vertices.iter().enumerate() {
            if vert.genus >= 1 {
                let mut r = self.clone();
                r.vertices[v].genus -= 1;
                r.edges.push((v, v));
                out.push(r);
            }
            // half-edges at v: (edge index, which end)
            let halves: Vec<(usize, bool)> = self
                .edges
                .iter()
                .enumerate()
                .flat_map(|(i, &(a, b))| {
                    let mut h = Vec::new();
                    if a == v {
                        h.push((i, false));
                    }
                    if b == v {
                        h.push((i, true));
                    }
                    h
                })
                .collect();
            let h = halves.len();
            debug_assert_eq!(types[v].p, vert.legs + h as u32);
            let w = self.vertices.len();
            for mask in 0u64..(1u64 << h) {
                let moved = mask.count_ones();
                for g1 in 0..=vert.genus {
                    for l1 in 0..=vert.legs {
                        let a = SurfaceType::new(g1, l1 + (h as u32 - moved) + 1);
                        let b = SurfaceType::new(vert.genus - g1, vert.legs - l1 + moved + 1);
                        if !a.is_admissible() || !b.is_admissible() {
                            continue;
                        }
                        let mut r = self.clone();
                        r.vertices[v] = Vertex { genus: g1, legs: l1 };
                        r.vertices.push(Vertex {
                            genus: vert.genus - g1,
                            legs: vert.legs - l1,
                        });
                        for (k, &(e, end)) in halves.iter().enumerate() {
                            if mask >> k & 1 == 1 {
                                if end {
                                    r.edges[e].1 = w;
                                } else {
                                    r.edges[e].0 = w;
                                }
                            }
                        }
                        r.edges.push((v, w));
                        out.push(r);
                    }
                }
            }
        }
        out
    }

    fn canonical(&self) -> DecompositionGraph {
        let n = self.vertices.len();
        let mut adj = vec![vec![0u32; n]; n];
        for &(a, b) in &self.edges {
            adj[a][b] += 1;
            if a != b {
                adj[b][a] += 1;
            }
        }
        let init: Vec<(u32, u32, u32, u32)> = (0..n)
            .map(|v| {
                let deg: u32 = adj[v].iter().sum();
                (self.vertices[v].genus, self.vertices[v].legs, adj[v][v], deg)
            })
            .collect();
        let colors = rank(&init);
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        search(&self.vertices, &adj, colors, &mut best);
        let (code, order) = best.expect("search visits at least one leaf");
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let vertices = order.iter().map(|&v| self.vertices[v]).collect();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (pos[a], pos[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        DecompositionGraph {
            vertices,
            edges,
            code,
        }
    }
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(s).unwrap() as u32)
        .collect()
}

fn distinct(colors: &[u32]) -> usize {
    colors.iter().collect::<HashSet<_>>().len()
}

fn refine(adj: &[Vec<u32>], mut colors: Vec<u32>) -> Vec<u32> {
    let n = colors.len();
    loop {
        let before = distinct(&colors);
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(u32, u32)> = (0..n)
                    .filter(|&u| u != v && adj[v][u] > 0)
                    .map(|u| (colors[u], adj[v][u]))
                    .collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        colors = rank(&sigs);
        if distinct(&colors) == before {
            return colors;
        }
    }
}

// Individualization-refinement; keeps the lexicographically least encoding.
fn search(
    vertices: &[Vertex],
    adj: &[Vec<u32>],
    colors: Vec<u32>,
    best: &mut Option<(Vec<u32>, Vec<usize>)>,
) {
    let colors = refine(adj, colors);
    let n = colors.len();
    if distinct(&colors) == n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| colors[v]);
        let mut code = Vec::with_capacity(1 + 2 * n + n * (n + 1) / 2);
        code.push(n as u32);
        for &v in &order {
            code.push(vertices[v].genus);
            code.push(vertices[v].legs);
        }
        for i in 0..n {
            for j in i..n {
                code.push(adj[order[i]][order[j]]);
            }
        }
        if best.as_ref().map_or(true, |(b, _)| code < *b) {
            *best = Some((code, order));
        }
        return;
    }
    let mut size = vec![0usize; n];
    for &c in &colors {
        size[c as usize] += 1;
    }
    let cell = (0..n).find(|&c| size[c] > 1).unwrap() as u32;
    let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
    let mut tried: Vec<usize> = Vec::new();
    for &v in &members {
        // twins (same neighborhood apart from each other) give the same leaves
        if tried.iter().any(|&u| twins(adj, u, v)) {
            continue;
        }
        tried.push(v);
        let sigs: Vec<(u32, u8)> = (0..n)
            .map(|u| (colors[u], if u == v { 0 } else { 1 }))
            .collect();
        search(vertices, adj, rank(&sigs), best);
    }
}

fn twins(adj: &[Vec<u32>], u: usize, v: usize) -> bool {
    adj[u][u] == adj[v][v]
        && (0..adj.len())
            .filter(|&w| w != u && w != v)
            .all(|w| adj[u][w] == adj[v][w])
}

/// All decomposition types of `s` with at most `max_edges` curves (default
/// 3g+p-3), sorted by curve count then certificate.
pub fn enumerate_decompositions(
    s: SurfaceType,
    max_edges: Option<usize>,
) -> Result<Vec<DecompositionGraph>> {
    enumerate_with_budget(s, max_edges, DEFAULT_GRAPH_BUDGET)
}

pub fn enumerate_with_budget(
    s: SurfaceType,
    max_edges: Option<usize>,
    budget: usize,
) -> Result<Vec<DecompositionGraph>> {
    if s.complexity() < 0 {
        return Err(Error::Precondition(format!("κ{s} = {} < 0", s.complexity())));
    }
    let cap = max_edges.unwrap_or((3 * s.g + s.p - 3) as usize);
    let mut all = vec![DecompositionGraph::empty(s)];
    let mut frontier = all.clone();
    for _ in 0..cap {
        let mut seen = HashSet::new();
        let mut next: Vec<DecompositionGraph> = Vec::new();
        // chunked so that a runaway level stops near the budget
        for chunk in frontier.chunks(4096) {
            let produced: Vec<DecompositionGraph> = chunk
                .par_iter()
                .flat_map_iter(|d| d.degenerations())
                .collect();
            next.extend(produced.into_iter().filter(|d| seen.insert(d.code.clone())));
            if all.len() + next.len() > budget {
                return Err(Error::Budget(format!(
                    "enumeration of {s} exceeded {budget} types"
                )));
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| a.code.cmp(&b.code));
        all.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(all)
}

/// Topological type of a single curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CurveKey {
    NonSeparating,
    Separating(SurfaceType, SurfaceType),
}

impl CurveKey {
    pub fn separating(a: SurfaceType, b: SurfaceType) -> Self {
        if a <= b {
            CurveKey::Separating(a, b)
        } else {
            CurveKey::Separating(b, a)
        }
    }
}

impl fmt::Display for CurveKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKey::NonSeparating => f.write_str("nonsep"),
            CurveKey::Separating(a, b) => write!(f, "sep {a}+{b}"),
        }
    }
}

/// Counts (n03, n04, n05, n11, n12) of pieces by type.
pub type CountTuple = [usize; 5];

const TUPLE_TYPES: [SurfaceType; 5] = [
    SurfaceType::new(0, 3),
    SurfaceType::new(0, 4),
    SurfaceType::new(0, 5),
    SurfaceType::new(1, 1),
    SurfaceType::new(1, 2),
];

pub fn count_tuple(d: &DecompositionGraph) -> CountTuple {
    let c = d.piece_counts();
    TUPLE_TYPES.map(|t| c.get(&t).copied().unwrap_or(0))
}

/// Enumeration of one surface together with the derived statistics.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub surface: SurfaceType,
    pub graphs: Vec<DecompositionGraph>,
}

impl Enumeration {
    pub fn new(s: SurfaceType) -> Result<Self> {
        Ok(Enumeration {
            surface: s,
            graphs: enumerate_decompositions(s, None)?,
        })
    }

    pub fn max_n(&self) -> usize {
        self.graphs.iter().map(|d| d.n_of()).max().unwrap_or(0)
    }

    pub fn maximizers(&self) -> Vec<&DecompositionGraph> {
        let m = self.max_n();
        self.graphs.iter().filter(|d| d.n_of() == m).collect()
    }

    /// Full pants decompositions with the wrong number of pieces or curves.
    pub fn pants_count_violations(&self) -> Vec<String> {
        let s = self.surface;
        let (v, e) = ((2 * s.g + s.p - 2) as usize, (3 * s.g + s.p - 3) as usize);
        self.graphs
            .iter()
            .filter(|d| d.is_pants_decomposition())
            .filter(|d| d.vertices().len() != v || d.edge_count() != e)
            .map(|d| d.certificate())
            .collect()
    }

    /// Separating curves whose sides violate κ(M) = κ(Q1)+κ(Q2)+2.
    pub fn kappa_additivity_violations(&self) -> Vec<String> {
        let k = self.surface.complexity();
        let mut out = Vec::new();
        for d in &self.graphs {
            for e in d.bridges() {
                if let CurveKey::Separating(a, b) = d.curve_key(e) {
                    if a.complexity() + b.complexity() + 2 != k {
                        out.push(format!("{d} edge {e}"));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxLemmaReport {
    pub surface: SurfaceType,
    pub kappa: i64,
    pub n_max: i64,
    pub observed_max: usize,
    pub types: usize,
    pub maximizers: usize,
    pub pass: bool,
}

pub fn verify_max_lemma(e: &Enumeration) -> MaxLemmaReport {
    let s = e.surface;
    let observed = e.max_n();
    MaxLemmaReport {
        surface: s,
        kappa: s.complexity(),
        n_max: s.n_max(),
        observed_max: observed,
        types: e.graphs.len(),
        maximizers: e.maximizers().len(),
        pass: observed as i64 == s.n_max(),
    }
}

/// One of the four maximizer shapes for odd complexity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddCase {
    pub label: char,
    pub tuple: CountTuple,
    pub admissible: bool,
    pub realized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub surface: SurfaceType,
    pub kappa: i64,
    pub maximizer_tuples: Vec<CountTuple>,
    pub odd_cases: Vec<OddCase>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Admissible maximizer tuples (n03, n04, n05, n11, n12) for odd κ.
pub fn odd_cases(s: SurfaceType) -> Vec<(char, CountTuple, bool)> {
    let (g, p) = (s.g as i64, s.p as i64);
    let h = |x: i64| if x >= 0 { (x / 2) as usize } else { 0 };
    let gu = s.g as usize;
    vec![
        ('a', [1, h(g + p - 3), 0, gu, 0], g + p >= 3),
        ('b', [0, h(g + p - 5), 1, gu, 0], g + p >= 5),
        ('c', [0, h(g + p - 1), 0, gu.saturating_sub(1), 0], g >= 1),
        ('d', [0, h(g + p - 3), 0, gu.saturating_sub(1), 1], g >= 1),
    ]
}

pub fn verify_parity_lemmas(e: &Enumeration) -> ParityReport {
    let s = e.surface;
    let k = s.complexity();
    let maxs = e.maximizers();
    let mut failures = Vec::new();
    let tuples: BTreeSet<CountTuple> = maxs.iter().map(|d| count_tuple(d)).collect();
    for d in &maxs {
        let other: usize = d
            .piece_counts()
            .iter()
            .filter(|(t, _)| !TUPLE_TYPES.contains(t))
            .map(|(_, c)| c)
            .sum();
        if other > 0 {
            failures.push(format!("maximizer {d} has pieces outside the five small types"));
        }
    }
    let mut cases = Vec::new();
    if k.rem_euclid(2) == 0 {
        let want: CountTuple = [0, ((s.g + s.p - 2) / 2) as usize, 0, s.g as usize, 0];
        for d in &maxs {
            if count_tuple(d) != want {
                failures.push(format!("maximizer {d} has counts {:?}", count_tuple(d)));
            }
            if !d.is_tree() {
                failures.push(format!("maximizer {d} has a nonseparating curve"));
            }
        }
    } else {
        let spec = odd_cases(s);
        for t in &tuples {
            if !spec.iter().any(|(_, c, ok)| *ok && c == t) {
                failures.push(format!("maximizer tuple {t:?} matches no case"));
            }
        }
        for (label, tuple, admissible) in spec {
            let realized = tuples.contains(&tuple);
            if admissible && !realized {
                failures.push(format!("case ({label}) {tuple:?} not realized"));
            }
            cases.push(OddCase {
                label,
                tuple,
                admissible,
                realized,
            });
        }
    }
    if e.max_n() as i64 != s.n_max() {
        failures.push(format!("max n = {} but n(M) = {}", e.max_n(), s.n_max()));
    }
    ParityReport {
        surface: s,
        kappa: k,
        maximizer_tuples: tuples.into_iter().collect(),
        odd_cases: cases,
        pass: failures.is_empty(),
        failures,
    }
}

/// Two disjoint separating curves: the middle piece and the two outer pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BridgePairKey {
    pub middle: SurfaceType,
    pub outer: (SurfaceType, SurfaceType),
}

/// A separating curve with sides q1, q2 and a disjoint nonseparating curve in q1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BridgeNsKey {
    pub q1: SurfaceType,
    pub q2: SurfaceType,
}

/// Best n over all curve systems containing a pattern of each type.
#[derive(Debug, Clone, Default)]
pub struct ExtensionOracle {
    pub single: BTreeMap<CurveKey, usize>,
    pub bridge_pairs: BTreeMap<BridgePairKey, usize>,
    pub bridge_ns: BTreeMap<BridgeNsKey, usize>,
}

fn bump<K: Ord>(m: &mut BTreeMap<K, usize>, k: K, n: usize) {
    let e = m.entry(k).or_insert(n);
    *e = (*e).max(n);
}

impl ExtensionOracle {
    pub fn build(e: &Enumeration) -> Self {
        let mut o = ExtensionOracle::default();
        for d in &e.graphs {
            let n = d.n_of();
            let bridges = d.bridges();
            for i in 0..d.edge_count() {
                bump(&mut o.single, d.curve_key(i), n);
            }
            for (x, &b1) in bridges.iter().enumerate() {
                for &b2 in &bridges[x + 1..] {
                    let parts = d.split(&[b1, b2]);
                    let touches = |vs: &Vec<usize>, e: usize| {
                        let (a, b) = d.edges()[e];
                        vs.contains(&a) || vs.contains(&b)
                    };
                    let mid = parts
                        .iter()
                        .position(|(vs, _)| touches(vs, b1) && touches(vs, b2))
                        .expect("two bridges bound a middle piece");
                    let outer: Vec<SurfaceType> = parts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != mid)
                        .map(|(_, p)| p.1)
                        .collect();
                    let (a, b) = (outer[0].min(outer[1]), outer[0].max(outer[1]));
                    bump(
                        &mut o.bridge_pairs,
                        BridgePairKey {
                            middle: parts[mid].1,
                            outer: (a, b),
                        },
                        n,
                    );
                }
            }
            for &b in &bridges {
                let parts = d.split(&[b]);
                for i in 0..d.edge_count() {
                    if bridges.contains(&i) {
                        continue;
                    }
                    let u = d.edges()[i].0;
                    let (q1, q2) = if parts[0].0.contains(&u) {
                        (parts[0].1, parts[1].1)
                    } else {
                        (parts[1].1, parts[0].1)
                    };
                    bump(&mut o.bridge_ns, BridgeNsKey { q1, q2 }, n);
                }
            }
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionReport {
    pub surface: SurfaceType,
    pub kappa: i64,
    /// Odd κ: pairs of separating curves checked.
    pub bridge_pairs: usize,
    /// Odd κ: (separating, nonseparating) pairs checked.
    pub bridge_ns: usize,
    /// Single curves checked (every curve type for odd κ, curves disjoint from a maximizer for even κ).
    pub single: usize,
    pub disagreements: Vec<String>,
    pub pass: bool,
}

/// Compares the parity predicates with the enumeration oracle on every pattern.
pub fn extension_predicate_checks(e: &Enumeration) -> ExtensionReport {
    let s = e.surface;
    let k = s.complexity();
    let n_m = s.n_max() as usize;
    let o = ExtensionOracle::build(e);
    let mut bad = Vec::new();
    let (mut pairs, mut ns, mut single) = (0, 0, 0);
    if k.rem_euclid(2) == 1 {
        for (key, &best) in &o.bridge_pairs {
            pairs += 1;
            let pieces = [key.middle, key.outer.0, key.outer.1];
            let predicate = pieces.iter().any(|q| q.complexity().rem_euclid(2) == 0);
            if predicate != (best == n_m) {
                bad.push(format!(
                    "separating pair {}|{}|{}: predicate {predicate}, best n {best}",
                    key.outer.0, key.middle, key.outer.1
                ));
            }
        }
        for (key, &best) in &o.bridge_ns {
            ns += 1;
            let predicate = key.q1.complexity().rem_euclid(2) == 1;
            if predicate != (best == n_m) {
                bad.push(format!(
                    "separating {}+{} with nonseparating in {}: predicate {predicate}, best n {best}",
                    key.q1, key.q2, key.q1
                ));
            }
        }
        let mut keys: Vec<CurveKey> = cut_separating(s)
            .pairs
            .into_iter()
            .map(|(a, b)| CurveKey::separating(a, b))
            .collect();
        if cut_nonseparating(s).is_ok() {
            keys.push(CurveKey::NonSeparating);
        }
        for key in keys {
            single += 1;
            match o.single.get(&key) {
                Some(&best) if best == n_m => {}
                Some(&best) => bad.push(format!("curve {key}: best n {best} < {n_m}")),
                None => bad.push(format!("curve {key} never appears in the enumeration")),
            }
        }
    } else {
        for d in e.maximizers() {
            for r in d.raw().degenerations() {
                let key = r.curve_key(r.edges.len() - 1);
                single += 1;
                let best = o.single.get(&key).copied().unwrap_or(0);
                if best + 1 > n_m {
                    bad.push(format!(
                        "curve {key} disjoint from maximizer {d}: extension reaches n {best}"
                    ));
                }
            }
        }
    }
    ExtensionReport {
        surface: s,
        kappa: k,
        bridge_pairs: pairs,
        bridge_ns: ns,
        single,
        pass: bad.is_empty(),
        disagreements: bad,
    }
}

impl Raw {
    fn curve_key(&self, e: usize) -> CurveKey {
        let d = DecompositionGraph {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            code: Vec::new(),
        };
        d.curve_key(e)
    }
}

/// Row of the lemma CSV report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaRow {
    pub g: u32,
    pub p: u32,
    pub kappa: i64,
    pub n_max: i64,
    pub types: usize,
    pub maximizers: usize,
    pub verdict: String,
}

/// Runs all three checks on one surface.
pub fn lemma_row(e: &Enumeration) -> LemmaRow {
    let m = verify_max_lemma(e);
    let p = verify_parity_lemmas(e);
    let x = extension_predicate_checks(e);
    let ok = m.pass
        && p.pass
        && x.pass
        && e.pants_count_violations().is_empty()
        && e.kappa_additivity_violations().is_empty();
    LemmaRow {
        g: e.surface.g,
        p: e.surface.p,
        kappa: m.kappa,
        n_max: m.n_max,
        types: m.types,
        maximizers: m.maximizers,
        verdict: if ok { "PASS" } else { "FAIL" }.into(),
    }
}

/// All surfaces with 0 <= κ <= k_max.
pub fn surfaces_up_to(k_max: i64) -> Vec<SurfaceType> {
    let mut out = Vec::new();
    for g in 0u32.. {
        if 3 * g as i64 - 4 > k_max {
            break;
        }
        for p in 0u32.. {
            let s = SurfaceType::new(g, p);
            if s.complexity() > k_max {
                break;
            }
            if s.complexity() >= 0 {
                out.push(s);
            }
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * BigInt::from(i))
}

/// Bernoulli numbers from the recurrence sum_k C(n+1,k) B_k = 0, so B_1 = -1/2.
pub fn bernoulli_table(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=n {
        let mut s = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += BigRational::from_integer(binomial(m as u64 + 1, k as u64)) * bk;
        }
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli(n: usize) -> BigRational {
    bernoulli_table(n).pop().unwrap()
}

/// Virtual Euler characteristic of the mapping class group.
pub fn virtual_euler(s: SurfaceType) -> Result<BigRational> {
    let (g, p) = (s.g as u64, s.p as u64);
    let b = bernoulli(2 * g as usize);
    if p == 0 {
        if g <= 1 {
            return Err(Error::Precondition(format!("virtual Euler characteristic of {s} needs g > 1")));
        }
        return Ok(b / BigRational::from_integer(BigInt::from(4 * g * (g - 1))));
    }
    if 2 * g + p <= 2 {
        return Err(Error::Precondition(format!("{s} has 2g-2+p <= 0")));
    }
    let num = factorial(p + 2 * g - 3) * (BigInt::from(2 * g) - 1);
    let den = factorial(p) * factorial(2 * g);
    let sign = if p % 2 == 0 { 1 } else { -1 };
    Ok(BigRational::new(num * sign, den) * b)
}

/// Degree and value of the single nonzero l2-Betti number.
pub fn l2_betti(s: SurfaceType) -> Result<(u32, BigRational)> {
    let chi = virtual_euler(s)?;
    // for g = 0 the (2g-1) factor is negative; the Betti number is the modulus
    Ok((3 * s.g + s.p - 3, chi.abs()))
}

/// Alternating-sum l2 Euler characteristic (-1)^d beta_d.
pub fn l2_euler(s: SurfaceType) -> Result<BigRational> {
    let (d, b) = l2_betti(s)?;
    Ok(if d % 2 == 0 { b } else { -b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(g: u32, p: u32) -> SurfaceType {
        SurfaceType::new(g, p)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn complexity_and_n_max() {
        assert_eq!(st(1, 1).complexity(), 0);
        assert_eq!(st(2, 0).n_max(), 2);
        assert_eq!(st(0, 7).n_max(), 2);
        assert_eq!(st(0, 3).n_max(), 0);
    }

    #[test]
    fn cuts_of_genus_two() {
        assert_eq!(cut_nonseparating(st(2, 0)).unwrap(), st(1, 2));
        let c = cut_separating(st(2, 0));
        assert_eq!(c.pairs, vec![(st(1, 1), st(1, 1))]);
        assert!(c.filtered.contains(&(st(0, 1), st(2, 1))));
        assert!(cut_nonseparating(st(0, 5)).is_err());
    }

    #[test]
    fn small_enumerations() {
        let e = enumerate_decompositions(st(1, 1), None).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].edges(), &[(0, 0)]);
        let e = enumerate_decompositions(st(0, 4), None).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].vertices().len(), 2);
    }

    #[test]
    fn genus_two_types() {
        // the seven strata of the genus two boundary, open part included
        let e = enumerate_decompositions(st(2, 0), None).unwrap();
        assert_eq!(e.len(), 7);
        let en = Enumeration { surface: st(2, 0), graphs: e };
        let m = en.maximizers();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].n_of(), 2);
        assert!(m[0].is_tree());
        assert_eq!(m[0].piece_counts()[&st(1, 1)], 2);
    }

    #[test]
    fn seven_holed_sphere_tuples() {
        let e = Enumeration::new(st(0, 7)).unwrap();
        let r = verify_parity_lemmas(&e);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(r.maximizer_tuples, vec![[0, 1, 1, 0, 0], [1, 2, 0, 0, 0]]);
    }

    #[test]
    fn canonical_form_is_label_invariant() {
        let v = |g, l| Vertex { genus: g, legs: l };
        let a = DecompositionGraph::new(vec![v(0, 2), v(1, 0), v(0, 1)], vec![(0, 1), (1, 2), (2, 2)]).unwrap();
        let b = DecompositionGraph::new(vec![v(0, 1), v(0, 2), v(1, 0)], vec![(0, 0), (2, 0), (1, 2)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.certificate(), b.certificate());
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(4), q(-1, 30));
        assert_eq!(bernoulli(3), q(0, 1));
    }

    #[test]
    fn invariants() {
        assert_eq!(virtual_euler(st(1, 1)).unwrap(), q(-1, 12));
        assert_eq!(l2_betti(st(2, 0)).unwrap(), (3, q(1, 240)));
        assert_eq!(virtual_euler(st(0, 3)).unwrap(), q(1, PANTS_MCG_ORDER as i64));
        assert!(virtual_euler(st(1, 0)).is_err());
        assert!(virtual_euler(st(0, 2)).is_err());
    }
}
