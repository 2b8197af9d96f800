//! Property-A witnesses: F_a(x,k,n) as the union of the [n,2n] stretches of rays
//! from B(x;k) toward a, H_a(x,n) = n^{-3/2} sum_{k<sqrt n} F_a(x,k,n), their
//! normalization to probability vectors, and Yu's quantized sets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypgraph::{GraphOracle, RayOracle};

/// Per-backend constants (delta0, delta1, P0, P1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PropaConstants {
    pub delta0: u64,
    pub delta1: u64,
    pub p0: u64,
    pub p1: u64,
    /// Upper bounds are asserted only for trusted configurations.
    pub trusted: bool,
}

impl PropaConstants {
    pub fn tree() -> PropaConstants {
        PropaConstants {
            delta0: 0,
            delta1: 1,
            p0: 1,
            p1: 1,
            trusted: true,
        }
    }

    pub fn farey() -> PropaConstants {
        PropaConstants {
            delta0: 2,
            delta1: 6,
            p0: 6,
            p1: 6 * (2 * 2 + 5),
            trusted: false,
        }
    }

    /// Whether n - 2k - delta0 - delta1 > 0.
    pub fn admits(&self, k: u64, n: u64) -> bool {
        n > 2 * k + self.delta0 + self.delta1
    }

    /// Least N0 with N0 - 2 sqrt(N0) - delta0 - delta1 > 0.
    pub fn n0(&self) -> u64 {
        let c = self.delta0 + self.delta1;
        (1u64..)
            .find(|&n| {
                // n - c > 2 sqrt(n)  <=>  n > c and (n - c)^2 > 4n
                n > c && (n - c) * (n - c) > 4 * n
            })
            .expect("exists")
    }

    /// Support radius R(n) = 2n + ceil(sqrt n) + delta0.
    pub fn support_radius(&self, n: u64) -> u64 {
        2 * n + ceil_sqrt(n) + self.delta0
    }
}

pub fn ceil_sqrt(n: u64) -> u64 {
    let r = n.sqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Height cutoffs for locally infinite backends: start at `start`, step by `step`
/// until two consecutive cutoffs agree, at most `rounds` times.
#[derive(Clone, Debug, Serialize)]
pub struct Truncation {
    pub start: BigInt,
    pub step: u64,
    pub rounds: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            start: BigInt::from(16),
            step: 16,
            rounds: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    /// Base points cut at the given height; the support agreed with the next cutoff.
    Truncated { height: BigInt },
}

impl Exactness {
    fn combine(&self, o: &Exactness) -> Exactness {
        match (self, o) {
            (Exactness::Exact, Exactness::Exact) => Exactness::Exact,
            (Exactness::Truncated { height }, _) | (_, Exactness::Truncated { height }) => {
                Exactness::Truncated {
                    height: height.clone(),
                }
            }
        }
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exactness::Exact => write!(f, "exact"),
            Exactness::Truncated { height } => write!(f, "truncated@{height}"),
        }
    }
}

/// The number m * n^{-3/2}, or m itself when n is None.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scaled {
    pub m: BigInt,
    pub n: Option<u64>,
}

impl Scaled {
    fn key(&self) -> (BigInt, BigInt) {
        // m^2 n^-3, as (m^2, n^3) with sign carried by m
        let n3 = match self.n {
            Some(n) => BigInt::from(n).pow(3),
            None => BigInt::one(),
        };
        (&self.m * &self.m, n3)
    }

    /// Exact rational value when n is a perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self.n {
            None => Some(BigRational::from_integer(self.m.clone())),
            Some(n) => {
                let r = n.sqrt();
                (r * r == n).then(|| {
                    BigRational::new(self.m.clone(), BigInt::from(n) * BigInt::from(r))
                })
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.m.to_f64().unwrap_or(f64::NAN);
        match self.n {
            None => m,
            Some(n) => m / (n as f64).powf(1.5),
        }
    }
}

impl PartialOrd for Scaled {
    fn partial_cmp(&self, o: &Scaled) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Scaled {
    fn cmp(&self, o: &Scaled) -> Ordering {
        let (s1, s2) = (self.m.sign(), o.m.sign());
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        let (a2, an3) = self.key();
        let (b2, bn3) = o.key();
        let c = (a2 * bn3).cmp(&(b2 * an3));
        if self.m.is_negative() {
            c.reverse()
        } else {
            c
        }
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.to_rational(), self.n) {
            (Some(r), _) => write!(f, "{r}"),
            (None, Some(n)) => write!(f, "{}*{}^(-3/2)", self.m, n),
            (None, None) => write!(f, "{}", self.m),
        }
    }
}

/// A finitely supported function with integer multiplicities, scaled by `scale`
/// (n^{-3/2} for H-witnesses, 1 for F-witnesses).
#[derive(Clone, Debug, Serialize)]
pub struct WitnessFunction<V: Ord> {
    pub support: BTreeMap<V, u64>,
    pub scale_n: Option<u64>,
    pub n: u64,
    pub k: Option<u64>,
    pub exactness: Exactness,
}

impl<V: Ord + Clone> WitnessFunction<V> {
    pub fn l1_norm(&self) -> Scaled {
        Scaled {
            m: self.support.values().map(|&c| BigInt::from(c)).sum(),
            n: self.scale_n,
        }
    }

    pub fn value(&self, v: &V) -> Scaled {
        Scaled {
            m: BigInt::from(self.support.get(v).copied().unwrap_or(0)),
            n: self.scale_n,
        }
    }

    pub fn map_vertices<W: Ord>(&self, f: impl Fn(&V) -> W) -> WitnessFunction<W> {
        WitnessFunction {
            support: self.support.iter().map(|(v, &c)| (f(v), c)).collect(),
            scale_n: self.scale_n,
            n: self.n,
            k: self.k,
            exactness: self.exactness.clone(),
        }
    }
}

/// The set of vertices at positions n..=2n on rays from B(x;k) toward a, with the
/// ball cut at `cut` when the backend is locally infinite. No precondition check.
pub fn segment_union<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    a: &G::End,
    k: u64,
    n: u64,
    cut: Option<&BigInt>,
) -> Result<(BTreeSet<G::Vertex>, bool)> {
    let ball = g.ball(x, k, cut)?;
    let mut out = BTreeSet::new();
    for b in &ball.vertices {
        let spheres = g.ray_spheres(b, a, 2 * n)?;
        for s in &spheres[n as usize..] {
            out.extend(s.iter().cloned());
        }
    }
    Ok((out, ball.exact))
}

/// Runs `f` at increasing cutoffs until two consecutive ones agree.
fn stabilize_cut<T: PartialEq>(
    trunc: &Truncation,
    what: &str,
    f: impl Fn(&BigInt) -> Result<T>,
) -> Result<(T, BigInt)> {
    let mut d = trunc.start.clone();
    let mut cur = f(&d)?;
    for _ in 0..trunc.rounds {
        let next_d = &d + trunc.step;
        let next = f(&next_d)?;
        if next == cur {
            return Ok((cur, d));
        }
        d = next_d;
        cur = next;
    }
    Err(Error::Budget(format!(
        "{what} did not stabilize up to height {d}"
    )))
}

/// Support of F_a(x,k,n) with exactness; k = 0 and bounded-geometry backends are exact.
fn f_support<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    a: &G::End,
    k: u64,
    n: u64,
    trunc: &Truncation,
) -> Result<(BTreeSet<G::Vertex>, Exactness)> {
    if k == 0 || g.bounded_geometry() {
        let (s, exact) = segment_union(g, x, a, k, n, None)?;
        debug_assert!(exact);
        return Ok((s, Exactness::Exact));
    }
    let (s, height) = stabilize_cut(trunc, "F-witness support", |d| {
        Ok(segment_union(g, x, a, k, n, Some(d))?.0)
    })?;
    Ok((s, Exactness::Truncated { height }))
}

/// F_a(x,k,n) as an indicator function.
pub fn f_witness<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    a: &G::End,
    k: u64,
    n: u64,
    consts: &PropaConstants,
    trunc: &Truncation,
) -> Result<WitnessFunction<G::Vertex>> {
    if !consts.admits(k, n) {
        return Err(Error::Precondition(format!(
            "n - 2k - delta0 - delta1 = {n} - {} - {} - {} is not positive",
            2 * k,
            consts.delta0,
            consts.delta1
        )));
    }
    let (s, exactness) = f_support(g, x, a, k, n, trunc)?;
    Ok(WitnessFunction {
        support: s.into_iter().map(|v| (v, 1)).collect(),
        scale_n: None,
        n,
        k: Some(k),
        exactness,
    })
}

/// H_a(x,n) = n^{-3/2} sum_{k < sqrt n} F_a(x,k,n). The precondition is checked for
/// each k actually used.
pub fn h_witness<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    a: &G::End,
    n: u64,
    consts: &PropaConstants,
    trunc: &Truncation,
) -> Result<WitnessFunction<G::Vertex>> {
    let mut support: BTreeMap<G::Vertex, u64> = BTreeMap::new();
    let mut exactness = Exactness::Exact;
    for k in 0..ceil_sqrt(n) {
        let f = f_witness(g, x, a, k, n, consts, trunc)?;
        exactness = exactness.combine(&f.exactness);
        for (v, c) in f.support {
            *support.entry(v).or_insert(0) += c;
        }
    }
    Ok(WitnessFunction {
        support,
        scale_n: Some(n),
        n,
        k: None,
        exactness,
    })
}

/// l1 distance between two witnesses with the same scale.
pub fn l1_distance<V: Ord + Clone>(
    f: &WitnessFunction<V>,
    h: &WitnessFunction<V>,
) -> Result<Scaled> {
    if f.scale_n != h.scale_n {
        return Err(Error::Precondition("witnesses with different scales".into()));
    }
    if f.exactness != h.exactness {
        return Err(Error::Precondition(format!(
            "mixed exactness: {} vs {}",
            f.exactness, h.exactness
        )));
    }
    let keys: BTreeSet<&V> = f.support.keys().chain(h.support.keys()).collect();
    let m: u64 = keys
        .into_iter()
        .map(|v| {
            let a = f.support.get(v).copied().unwrap_or(0);
            let b = h.support.get(v).copied().unwrap_or(0);
            a.abs_diff(b)
        })
        .sum();
    Ok(Scaled {
        m: BigInt::from(m),
        n: f.scale_n,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HDifference {
    pub n: u64,
    pub value: Scaled,
    pub exactness: Exactness,
}

/// ||H_a(x,n) - H_a(y,n)||_1 exactly. On locally infinite backends both witnesses
/// are cut at a common height that is stable for both.
pub fn h_difference<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    y: &G::Vertex,
    a: &G::End,
    n: u64,
    consts: &PropaConstants,
    trunc: &Truncation,
) -> Result<HDifference> {
    if g.bounded_geometry() || ceil_sqrt(n) <= 1 {
        let hx = h_witness(g, x, a, n, consts, trunc)?;
        let hy = h_witness(g, y, a, n, consts, trunc)?;
        let value = l1_distance(&hx, &hy)?;
        return Ok(HDifference {
            n,
            value,
            exactness: hx.exactness,
        });
    }
    let ((hx, hy), height) = stabilize_cut(trunc, "H-difference", |d| {
        let fixed = Truncation {
            start: d.clone(),
            step: trunc.step,
            rounds: 0,
        };
        let hx = h_witness_at(g, x, a, n, consts, &fixed)?;
        let hy = h_witness_at(g, y, a, n, consts, &fixed)?;
        Ok((hx, hy))
    })?;
    let m: u64 = {
        let keys: BTreeSet<&G::Vertex> = hx.keys().chain(hy.keys()).collect();
        keys.into_iter()
            .map(|v| hx.get(v).copied().unwrap_or(0).abs_diff(hy.get(v).copied().unwrap_or(0)))
            .sum()
    };
    Ok(HDifference {
        n,
        value: Scaled {
            m: BigInt::from(m),
            n: Some(n),
        },
        exactness: Exactness::Truncated { height },
    })
}

/// H multiplicities with every k >= 1 term cut at exactly `trunc.start`.
fn h_witness_at<G: RayOracle>(
    g: &G,
    x: &G::Vertex,
    a: &G::End,
    n: u64,
    consts: &PropaConstants,
    trunc: &Truncation,
) -> Result<BTreeMap<G::Vertex, u64>> {
    let mut support: BTreeMap<G::Vertex, u64> = BTreeMap::new();
    for k in 0..ceil_sqrt(n) {
        if !consts.admits(k, n) {
            return Err(Error::Precondition(format!("n = {n} too small for k = {k}")));
        }
        let cut = (k > 0).then_some(&trunc.start);
        for v in segment_union(g, x, a, k, n, cut)?.0 {
            *support.entry(v).or_insert(0) += 1;
        }
    }
    Ok(support)
}

/// Whether m n^{-3/2} <= 2 n^{-3/2} R (n + 2 sqrt n + 2 delta0 + 1) P1.
pub fn within_difference_bound(value: &Scaled, n: u64, r: u64, consts: &PropaConstants) -> bool {
    let rp = BigInt::from(r * consts.p1);
    let a = BigInt::from(2u32) * &rp * BigInt::from(n + 2 * consts.delta0 + 1);
    let b = BigInt::from(4u32) * &rp;
    let lhs = &value.m - a;
    !lhs.is_positive() || &lhs * &lhs <= &b * &b * BigInt::from(n)
}

/// The bound 2 n^{-3/2} R (n + 2 sqrt n + 2 delta0 + 1) P1 as a float, for reports.
pub fn difference_bound_f64(n: u64, r: u64, consts: &PropaConstants) -> f64 {
    let n_f = n as f64;
    2.0 * n_f.powf(-1.5) * r as f64 * (n_f + 2.0 * n_f.sqrt() + 2.0 * consts.delta0 as f64 + 1.0)
        * consts.p1 as f64
}

/// Probability vectors a^n_x with recorded support radius.
#[derive(Clone, Debug, Serialize)]
pub struct ProbAssignment<V: Ord> {
    pub vectors: BTreeMap<V, BTreeMap<V, BigRational>>,
    pub radius: u64,
    pub n: u64,
}

/// Divides each H-witness by its l1 norm (the n^{-3/2} factor cancels).
pub fn normalize<V: Ord + Clone>(
    witnesses: &BTreeMap<V, WitnessFunction<V>>,
    consts: &PropaConstants,
) -> Result<ProbAssignment<V>> {
    let mut n = None;
    let mut vectors = BTreeMap::new();
    for (x, h) in witnesses {
        let total: u64 = h.support.values().sum();
        if total == 0 {
            return Err(Error::Precondition("zero witness".into()));
        }
        n.get_or_insert(h.n);
        let vec = h
            .support
            .iter()
            .map(|(v, &c)| (v.clone(), BigRational::new(c.into(), total.into())))
            .collect();
        vectors.insert(x.clone(), vec);
    }
    let n = n.unwrap_or(0);
    Ok(ProbAssignment {
        vectors,
        radius: consts.support_radius(n),
        n,
    })
}

/// Largest d(x, v) over the support of a^n_x.
pub fn max_support_distance<G: GraphOracle>(g: &G, p: &ProbAssignment<G::Vertex>) -> u64 {
    p.vectors
        .iter()
        .flat_map(|(x, vec)| vec.keys().map(move |v| g.distance(x, v)))
        .max()
        .unwrap_or(0)
}

/// A_n(x) = {(x', j) : 1 <= j, j/P <= v(x')}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YuSet<V: Ord> {
    pub elements: BTreeSet<(V, u64)>,
    pub p: u64,
}

pub fn yu_sets<V: Ord + Clone>(v: &BTreeMap<V, BigRational>, p: u64) -> Result<YuSet<V>> {
    if p == 0 {
        return Err(Error::Precondition("P must be positive".into()));
    }
    let mut elements = BTreeSet::new();
    for (x, w) in v {
        let scaled = w * BigRational::from_integer(p.into());
        if !scaled.is_integer() || scaled.is_negative() {
            return Err(Error::Precondition(format!("weight {w} is not a multiple of 1/{p}")));
        }
        let levels = scaled.to_integer().to_u64().ok_or_else(|| {
            Error::Precondition("weight too large".into())
        })?;
        for j in 1..=levels {
            elements.insert((x.clone(), j));
        }
    }
    Ok(YuSet { elements, p })
}

pub fn symmetric_difference_size<V: Ord>(a: &YuSet<V>, b: &YuSet<V>) -> usize {
    a.elements.symmetric_difference(&b.elements).count()
}

pub fn l1_rational<V: Ord>(u: &BTreeMap<V, BigRational>, v: &BTreeMap<V, BigRational>) -> BigRational {
    let keys: BTreeSet<&V> = u.keys().chain(v.keys()).collect();
    let zero = BigRational::zero();
    keys.into_iter()
        .map(|k| (u.get(k).unwrap_or(&zero) - v.get(k).unwrap_or(&zero)).abs())
        .fold(BigRational::zero(), |s, x| s + x)
}

/// Least common denominator of the weights, the natural quantization for a vector.
pub fn common_denominator<V>(v: &BTreeMap<V, BigRational>) -> BigInt {
    use num_integer::Integer;
    v.values().fold(BigInt::one(), |l, w| l.lcm(w.denom()))
}
