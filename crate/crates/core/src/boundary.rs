//! Boundary points of the Farey graph as continued fractions, and geodesic rays,
//! spheres and Gromov-product brackets toward them.
//!
//! Rays are never computed directly. A quantity is evaluated against the edge
//! e_K = (c_{K-1}, c_K) of consecutive convergents, which every ray toward `a`
//! must cross, and accepted once the probes at depths K and K+2 agree.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::farey::{self, CrossingGraph, FareyEdge, Slope};
use crate::mcg::SL2Matrix;

/// Default cap on how many probe depths the stabilization loops may try.
pub const DEFAULT_DEPTH_BUDGET: usize = 400;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Tail {
    Periodic(Vec<BigInt>),
    /// Only the listed terms are available.
    Finite,
}

/// An irrational point of the circle, [a0; a1, a2, ...].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BoundaryPoint {
    head: BigInt,
    prefix: Vec<BigInt>,
    tail: Tail,
}

impl BoundaryPoint {
    /// Eventually periodic continued fraction [head; prefix, (period)^inf].
    pub fn periodic(head: BigInt, prefix: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Precondition("empty period".into()));
        }
        if prefix.iter().chain(period.iter()).any(|t| !t.is_positive()) {
            return Err(Error::Precondition("partial quotients must be positive".into()));
        }
        let mut bp = BoundaryPoint {
            head,
            prefix,
            tail: Tail::Periodic(period),
        };
        bp.canonicalize();
        Ok(bp)
    }

    pub fn periodic_i64(head: i64, prefix: &[i64], period: &[i64]) -> Result<Self> {
        BoundaryPoint::periodic(
            BigInt::from(head),
            prefix.iter().map(|&t| BigInt::from(t)).collect(),
            period.iter().map(|&t| BigInt::from(t)).collect(),
        )
    }

    /// A point known through finitely many terms; it is assumed irrational, and any
    /// computation needing deeper terms fails with `DepthExceeded`.
    pub fn finite_terms(head: BigInt, terms: Vec<BigInt>) -> Result<Self> {
        if terms.iter().any(|t| !t.is_positive()) {
            return Err(Error::Precondition("partial quotients must be positive".into()));
        }
        Ok(BoundaryPoint {
            head,
            prefix: terms,
            tail: Tail::Finite,
        })
    }

    /// The golden ratio [1; 1, 1, ...].
    pub fn golden() -> Self {
        BoundaryPoint::periodic_i64(1, &[], &[1]).expect("valid")
    }

    fn canonicalize(&mut self) {
        let Tail::Periodic(period) = &mut self.tail else {
            return;
        };
        let n = period.len();
        for k in 1..=n {
            if n % k == 0 && (0..n).all(|i| period[i] == period[i % k]) {
                period.truncate(k);
                break;
            }
        }
        while let Some(last) = self.prefix.last() {
            if last == period.last().expect("nonempty") {
                self.prefix.pop();
                period.rotate_right(1);
            } else {
                break;
            }
        }
    }

    pub fn head(&self) -> &BigInt {
        &self.head
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.tail, Tail::Periodic(_))
    }

    /// Number of partial quotients after a0 that can be produced, or None if unbounded.
    pub fn available_depth(&self) -> Option<usize> {
        match self.tail {
            Tail::Periodic(_) => None,
            Tail::Finite => Some(self.prefix.len()),
        }
    }

    /// The n-th partial quotient (n = 0 is a0).
    pub fn term(&self, n: usize) -> Result<BigInt> {
        if n == 0 {
            return Ok(self.head.clone());
        }
        if n <= self.prefix.len() {
            return Ok(self.prefix[n - 1].clone());
        }
        match &self.tail {
            Tail::Periodic(p) => Ok(p[(n - 1 - self.prefix.len()) % p.len()].clone()),
            Tail::Finite => Err(Error::DepthExceeded {
                requested: n,
                available: self.prefix.len(),
            }),
        }
    }

    fn check_depth(&self, n: usize) -> Result<()> {
        match self.available_depth() {
            Some(a) if n > a => Err(Error::DepthExceeded {
                requested: n,
                available: a,
            }),
            _ => Ok(()),
        }
    }

    /// Convergent numerators and denominators p_0/q_0, ..., p_n/q_n.
    pub fn convergents(&self, n: usize) -> Result<Vec<Slope>> {
        self.check_depth(n)?;
        let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let a = self.term(k)?;
            let p = &a * &p1 + &p2;
            let q = &a * &q1 + &q2;
            out.push(Slope::from_primitive(p.clone(), q.clone()));
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
        }
        Ok(out)
    }

    /// Compares this irrational with a slope (1/0 counts as larger than everything).
    pub fn cmp_slope(&self, r: &Slope) -> Result<Ordering> {
        if r.is_infinity() {
            return Ok(Ordering::Less);
        }
        let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
        let mut i = 0usize;
        loop {
            let ri = num.div_floor(&den);
            let ai = self.term(i)?;
            let flip = |o: Ordering| if i % 2 == 0 { o } else { o.reverse() };
            if ai != ri {
                return Ok(flip(ai.cmp(&ri)));
            }
            let rem = &num - &ri * &den;
            if rem.is_zero() {
                return Ok(flip(Ordering::Greater));
            }
            num = std::mem::replace(&mut den, rem);
            i += 1;
        }
    }

    /// Exact value as a quadratic irrational; only for periodic tails.
    pub fn to_quadratic(&self) -> Result<QuadraticIrrational> {
        let Tail::Periodic(period) = &self.tail else {
            return Err(Error::Precondition(
                "only eventually periodic points have a closed form".into(),
            ));
        };
        // y = [b1; b2, ..., bm, y] is the larger fixed point of the period matrix.
        let m = cf_matrix(period);
        let (pp, pq, qp, qq) = (&m[0][0], &m[0][1], &m[1][0], &m[1][1]);
        let disc = (qq - pp) * (qq - pp) + pq * qp * 4u32;
        let y = QuadraticIrrational::new(pp - qq, BigInt::one(), disc, qp * 2u32)?;
        let mut pre = vec![self.head.clone()];
        pre.extend(self.prefix.iter().cloned());
        let mp = cf_matrix(&pre);
        Ok(y.mobius(&mp[0][0], &mp[0][1], &mp[1][0], &mp[1][1]))
    }

    pub fn from_quadratic(x: &QuadraticIrrational) -> BoundaryPoint {
        x.continued_fraction()
    }

    /// Image under an SL(2,Z) element acting by Moebius transformation.
    pub fn apply(&self, m: &SL2Matrix) -> Result<BoundaryPoint> {
        let x = self.to_quadratic()?;
        let (a, b, c, d) = m.entries();
        Ok(x.mobius(a, b, c, d).continued_fraction())
    }

    pub fn to_f64(&self) -> f64 {
        let n = match self.available_depth() {
            Some(a) => a.min(40),
            None => 40,
        };
        let c = self.convergents(n).expect("depth checked");
        c[n].to_f64()
    }

    /// Whether this point lies in the open arc from lo to hi (increasing direction).
    pub fn in_open_arc(&self, lo: &Slope, hi: &Slope) -> Result<bool> {
        let above_lo = self.cmp_slope(lo)? == Ordering::Greater;
        let below_hi = self.cmp_slope(hi)? == Ordering::Less;
        Ok(match lo.cmp(hi) {
            Ordering::Less => above_lo && below_hi,
            Ordering::Greater => above_lo || below_hi,
            Ordering::Equal => false,
        })
    }
}

/// Product of [[t,1],[1,0]] over the terms.
fn cf_matrix(terms: &[BigInt]) -> [[BigInt; 2]; 2] {
    let mut m = [
        [BigInt::one(), BigInt::zero()],
        [BigInt::zero(), BigInt::one()],
    ];
    for t in terms {
        let n00 = &m[0][0] * t + &m[0][1];
        let n10 = &m[1][0] * t + &m[1][1];
        m = [[n00, m[0][0].clone()], [n10, m[1][0].clone()]];
    }
    m
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{};", self.head)?;
        let pre: Vec<String> = self.prefix.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", pre.join(","))?;
        if let Tail::Periodic(p) = &self.tail {
            let per: Vec<String> = p.iter().map(|t| t.to_string()).collect();
            if !pre.is_empty() {
                write!(f, ",")?;
            }
            write!(f, "~({})", per.join(","))?;
        }
        write!(f, "]")
    }
}

impl FromStr for BoundaryPoint {
    type Err = Error;

    /// "[a0;a1,...,ak]" (finitely many terms) or "[a0;a1,...,ak,~(b1,...,bm)]".
    fn from_str(s: &str) -> Result<BoundaryPoint> {
        let bad = || Error::Parse(format!("bad continued fraction {s:?}"));
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (head, rest) = body.split_once(';').ok_or_else(bad)?;
        let head: BigInt = head.trim().parse().map_err(|_| bad())?;
        let parse_list = |t: &str| -> Result<Vec<BigInt>> {
            t.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<BigInt>().map_err(|_| bad()))
                .collect()
        };
        match rest.split_once('~') {
            Some((pre, per)) => {
                let per = per
                    .trim()
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(bad)?;
                BoundaryPoint::periodic(head, parse_list(pre)?, parse_list(per)?)
            }
            None => BoundaryPoint::finite_terms(head, parse_list(rest)?),
        }
    }
}

impl Serialize for BoundaryPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BoundaryPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The real number (u + v*sqrt(d)) / w with d > 1 squarefree, v != 0, w > 0 and
/// gcd(u, v, w) = 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadraticIrrational {
    u: BigInt,
    v: BigInt,
    d: BigInt,
    w: BigInt,
}

/// Largest square dividing n is pulled out: returns (s, f) with n = s^2 f, f squarefree.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut f = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= f {
        let pp = &p * &p;
        while (&f % &pp).is_zero() {
            f /= &pp;
            s *= &p;
        }
        p += 1;
    }
    (s, f)
}

impl QuadraticIrrational {
    /// (u + v sqrt(d)) / w; fails if the value is rational.
    pub fn new(u: BigInt, v: BigInt, d: BigInt, w: BigInt) -> Result<Self> {
        if w.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        if d.is_negative() {
            return Err(Error::Precondition("negative discriminant".into()));
        }
        let (s, f) = square_part(&d);
        if f.is_one() || v.is_zero() || d.is_zero() {
            return Err(Error::Precondition("value is rational".into()));
        }
        Ok(Self::normalized(u, v * s, f, w))
    }

    fn normalized(mut u: BigInt, mut v: BigInt, d: BigInt, mut w: BigInt) -> Self {
        if w.is_negative() {
            u = -u;
            v = -v;
            w = -w;
        }
        let g = u.gcd(&v).gcd(&w);
        QuadraticIrrational {
            u: u / &g,
            v: v / &g,
            d,
            w: w / &g,
        }
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.u, &self.v, &self.d, &self.w)
    }

    /// floor of the value, exactly.
    pub fn floor(&self) -> BigInt {
        let n = &self.v * &self.v * &self.d;
        let r = n.sqrt();
        if self.v.is_positive() {
            (&self.u + r).div_floor(&self.w)
        } else {
            (&self.u - r - 1u32).div_floor(&self.w)
        }
    }

    /// (a x + b) / (c x + d) for an integer matrix with nonzero determinant.
    pub fn mobius(&self, a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> Self {
        let (u, v, w) = (&self.u, &self.v, &self.w);
        let (na, nb) = (a * u + b * w, a * v);
        let (da, db) = (c * u + d * w, c * v);
        // (na + nb r) / (da + db r) with r = sqrt(D)
        let num_u = &na * &da - &nb * &db * &self.d;
        let num_v = &nb * &da - &na * &db;
        let den = &da * &da - &db * &db * &self.d;
        Self::normalized(num_u, num_v, self.d.clone(), den)
    }

    /// Sign of the value minus a finite slope.
    pub fn cmp_slope(&self, r: &Slope) -> Ordering {
        if r.is_infinity() {
            return Ordering::Less;
        }
        // compare (u + v s)/w with p/q, i.e. sign of q u - p w + q v s
        let a = r.denom() * &self.u - r.numer() * &self.w;
        let b = r.denom() * &self.v;
        sign_surd(&a, &b, &self.d)
    }

    pub fn to_f64(&self) -> f64 {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        (f(&self.u) + f(&self.v) * f(&self.d).sqrt()) / f(&self.w)
    }

    /// Continued fraction expansion; always eventually periodic.
    pub fn continued_fraction(&self) -> BoundaryPoint {
        let mut x = self.clone();
        let mut terms: Vec<BigInt> = Vec::new();
        let mut seen: HashMap<QuadraticIrrational, usize> = HashMap::new();
        loop {
            if let Some(&start) = seen.get(&x) {
                let head = terms[0].clone();
                let (prefix, period) = if start == 0 {
                    let mut per = terms[1..].to_vec();
                    per.push(head.clone());
                    (Vec::new(), per)
                } else {
                    (terms[1..start].to_vec(), terms[start..].to_vec())
                };
                return BoundaryPoint::periodic(head, prefix, period).expect("valid expansion");
            }
            seen.insert(x.clone(), terms.len());
            let a = x.floor();
            // x <- 1 / (x - a)
            let frac = x.mobius(&BigInt::one(), &-&a, &BigInt::zero(), &BigInt::one());
            x = frac.mobius(&BigInt::zero(), &BigInt::one(), &BigInt::one(), &BigInt::zero());
            terms.push(a);
        }
    }
}

/// Sign of a + b sqrt(d) for d > 0 not a square.
pub fn sign_surd(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    match (sa, sb) {
        (NoSign, NoSign) => Ordering::Equal,
        (_, NoSign) => a.cmp(&BigInt::zero()),
        (NoSign, _) => b.cmp(&BigInt::zero()),
        (Plus, Plus) => Ordering::Greater,
        (Minus, Minus) => Ordering::Less,
        (Plus, Minus) => (a * a).cmp(&(b * b * d)),
        (Minus, Plus) => (b * b * d).cmp(&(a * a)),
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.v.is_negative() { '-' } else { '+' };
        let mag = self.v.abs();
        if mag.is_one() {
            write!(f, "({}{}√{})/{}", self.u, sign, self.d, self.w)
        } else {
            write!(f, "({}{}{}√{})/{}", self.u, sign, mag, self.d, self.w)
        }
    }
}

impl FromStr for QuadraticIrrational {
    type Err = Error;

    /// "(u+v√D)/w" or "(u-v√D)/w"; "sqrt" is accepted in place of "√".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad surd {s:?}"));
        let s2 = s.trim().replace("sqrt", "√");
        let (num, w) = s2.rsplit_once('/').ok_or_else(bad)?;
        let num = num
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (left, d) = num.split_once('√').ok_or_else(bad)?;
        // left is "u+v" or "u-v", u possibly negative
        let split_at = left
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(bad)?;
        let u: BigInt = left[..split_at].parse().map_err(|_| bad())?;
        let v: BigInt = match &left[split_at..] {
            "+" => BigInt::one(),
            "-" => -BigInt::one(),
            t => t.trim_start_matches('+').parse().map_err(|_| bad())?,
        };
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        let w: BigInt = w.trim().parse().map_err(|_| bad())?;
        QuadraticIrrational::new(u, v, d, w)
    }
}

impl Serialize for QuadraticIrrational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuadraticIrrational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn convergent(a: &BoundaryPoint, n: usize) -> Result<Slope> {
    Ok(a.convergents(n)?.pop().expect("n+1 entries"))
}

/// Edges (c_{k-1}, c_k) of consecutive convergents for k = 1..=count.
pub fn nested_edges(a: &BoundaryPoint, count: usize) -> Result<Vec<FareyEdge>> {
    let c = a.convergents(count)?;
    Ok((1..=count)
        .map(|k| FareyEdge::new_unchecked(c[k - 1].clone(), c[k].clone()))
        .collect())
}

/// True if `y` is outside the closed arc of the convergent edge (c_{k-1}, c_k) that
/// contains `a`.
fn strictly_outside(y: &Slope, lo: &Slope, hi: &Slope) -> bool {
    let (l, h) = if lo < hi { (lo, hi) } else { (hi, lo) };
    // a lies in the finite interval (l, h)
    y < l || y > h
}

/// One probe of the ray structure from `y` toward `a` at convergent depth K.
struct Probe {
    graph: CrossingGraph,
    dist: Vec<u64>,
    on_ray: Vec<bool>,
    /// Levels up to which spheres are meaningful.
    reach: u64,
}

fn probe(y: &Slope, a: &BoundaryPoint, k: usize) -> Result<Option<Probe>> {
    if k < 2 {
        return Ok(None);
    }
    let c = a.convergents(k)?;
    let (ck1, ck, ck2) = (&c[k - 1], &c[k], &c[k - 2]);
    if !strictly_outside(y, ck2, ck1) {
        return Ok(None);
    }
    let graph = CrossingGraph::new(y, ck);
    let Some(i1) = graph.index_of(ck1) else {
        return Ok(None);
    };
    let i2 = graph.y_index();
    let (dist, on_ray) = graph.geodesic_mask(&[i1, i2]);
    let reach = dist[i1].min(dist[i2]);
    Ok(Some(Probe {
        graph,
        dist,
        on_ray,
        reach,
    }))
}

impl Probe {
    fn spheres(&self, t_max: u64) -> Vec<BTreeSet<Slope>> {
        let mut out = vec![BTreeSet::new(); t_max as usize + 1];
        for (i, v) in self.graph.vertices().iter().enumerate() {
            if self.on_ray[i] && self.dist[i] <= t_max {
                out[self.dist[i] as usize].insert(v.clone());
            }
        }
        out
    }

    fn lex_min_ray(&self, length: u64) -> Vec<Slope> {
        let mut cur = 0usize;
        let mut out = vec![self.graph.vertex(0).clone()];
        for t in 0..length {
            let next = self
                .graph
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&w| self.on_ray[w] && self.dist[w] == t + 1)
                .expect("a ray vertex below the reach has a successor");
            out.push(self.graph.vertex(next).clone());
            cur = next;
        }
        out
    }

    fn lex_max_ray(&self, length: u64) -> Vec<Slope> {
        let mut cur = 0usize;
        let mut out = vec![self.graph.vertex(0).clone()];
        for t in 0..length {
            let next = self
                .graph
                .neighbors(cur)
                .iter()
                .rev()
                .copied()
                .find(|&w| self.on_ray[w] && self.dist[w] == t + 1)
                .expect("a ray vertex below the reach has a successor");
            out.push(self.graph.vertex(next).clone());
            cur = next;
        }
        out
    }
}

/// Runs `eval` on probes at increasing depth until two probes K and K+2 with
/// reach >= `need` agree. Returns the value and the depth K.
fn stabilize<T: PartialEq>(
    y: &Slope,
    a: &BoundaryPoint,
    need: u64,
    budget: usize,
    eval: impl Fn(&Probe) -> T,
) -> Result<(T, usize)> {
    let limit = match a.available_depth() {
        Some(d) => d.min(budget),
        None => budget,
    };
    let mut k = 2usize;
    while k + 2 <= limit {
        let p = match probe(y, a, k)? {
            Some(p) if p.reach >= need => p,
            _ => {
                k += 1;
                continue;
            }
        };
        let q = match probe(y, a, k + 2)? {
            Some(q) if q.reach >= need => q,
            _ => {
                k += 1;
                continue;
            }
        };
        let (vp, vq) = (eval(&p), eval(&q));
        if vp == vq {
            return Ok((vp, k));
        }
        k += 1;
    }
    Err(Error::NotStabilized(format!(
        "from {y} toward {a} needing level {need} within depth {limit}"
    )))
}

/// A geodesic segment from `origin` toward a boundary point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaySegment {
    pub origin: Slope,
    pub vertices: Vec<Slope>,
    pub target: BoundaryPoint,
    /// Convergent depth at which the segment was certified.
    pub stable_depth: usize,
}

/// The lexicographically smallest ray from `x` toward `a`, truncated to `length` steps.
pub fn ray(x: &Slope, a: &BoundaryPoint, length: u64) -> Result<RaySegment> {
    ray_with_budget(x, a, length, DEFAULT_DEPTH_BUDGET)
}

pub fn ray_with_budget(
    x: &Slope,
    a: &BoundaryPoint,
    length: u64,
    budget: usize,
) -> Result<RaySegment> {
    let (vertices, k) = stabilize(x, a, length, budget, |p| p.lex_min_ray(length))?;
    check_crossings(x, a, &vertices, k + 2)?;
    Ok(RaySegment {
        origin: x.clone(),
        vertices,
        target: a.clone(),
        stable_depth: k,
    })
}

/// The lexicographically largest ray; together with `ray` it brackets the ray family.
pub fn ray_max(x: &Slope, a: &BoundaryPoint, length: u64) -> Result<RaySegment> {
    let (vertices, k) = stabilize(x, a, length, DEFAULT_DEPTH_BUDGET, |p| {
        p.lex_max_ray(length)
    })?;
    check_crossings(x, a, &vertices, k + 2)?;
    Ok(RaySegment {
        origin: x.clone(),
        vertices,
        target: a.clone(),
        stable_depth: k,
    })
}

/// Every nested edge separating `x` from `a` that the segment reaches must be
/// crossed, in order.
fn check_crossings(x: &Slope, a: &BoundaryPoint, path: &[Slope], depth: usize) -> Result<()> {
    let edges = nested_edges(a, depth)?;
    let mut last = 0usize;
    for e in edges {
        let (l, h) = e.endpoints();
        if !strictly_outside(x, l, h) {
            continue;
        }
        let hit = path.iter().position(|v| e.has_endpoint(v));
        let reachable = farey::distance_to_edge(x, &e) < path.len() as u64 - 1;
        match hit {
            Some(i) if i >= last => last = i,
            Some(_) => {
                return Err(Error::Invariant(format!("segment crosses {e} out of order")))
            }
            None if reachable => {
                return Err(Error::Invariant(format!("segment misses {e}")))
            }
            None => break,
        }
    }
    Ok(())
}

/// G(y, a)_t: the vertices at distance t from y on geodesic rays from y to a.
pub fn geodesic_sphere(y: &Slope, a: &BoundaryPoint, t: u64) -> Result<BTreeSet<Slope>> {
    Ok(geodesic_spheres(y, a, t)?.pop().expect("t+1 levels"))
}

/// G(y, a)_t for t = 0..=t_max, certified together.
pub fn geodesic_spheres(y: &Slope, a: &BoundaryPoint, t_max: u64) -> Result<Vec<BTreeSet<Slope>>> {
    geodesic_spheres_with_budget(y, a, t_max, DEFAULT_DEPTH_BUDGET)
}

pub fn geodesic_spheres_with_budget(
    y: &Slope,
    a: &BoundaryPoint,
    t_max: u64,
    budget: usize,
) -> Result<Vec<BTreeSet<Slope>>> {
    Ok(stabilize(y, a, t_max, budget, |p| p.spheres(t_max))?.0)
}

/// All vertices on rays from y toward a up to level t_max (the union of the spheres).
pub fn ray_hull(y: &Slope, a: &BoundaryPoint, t_max: u64) -> Result<BTreeSet<Slope>> {
    Ok(geodesic_spheres(y, a, t_max)?.into_iter().flatten().collect())
}

/// Bracket for the Gromov product (a|b)_base from separating edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBounds {
    /// max over e separating base from both a and b of d(base, e) - 2
    pub low: Option<i64>,
    /// min over e separating one of a, b from base and the other of d(base, e) + 1
    pub high: Option<i64>,
    pub depth: usize,
}

pub fn gromov_product_bounds(
    a: &BoundaryPoint,
    b: &BoundaryPoint,
    base: &Slope,
) -> Result<ProductBounds> {
    let limit = match (a.available_depth(), b.available_depth()) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => 64,
    };
    // find a depth where a and b are told apart
    let mut depth = None;
    for k in 1..=limit {
        if a.term(k)? != b.term(k)? || a.head != b.head {
            depth = Some((k + 2).min(limit));
            break;
        }
    }
    let depth = match depth {
        Some(d) => d,
        None if a == b => return Err(Error::Precondition("a = b".into())),
        None => {
            return Err(Error::Budget(format!(
                "{a} and {b} agree to depth {limit}"
            )))
        }
    };
    let ca = convergent(a, depth)?;
    let cb = convergent(b, depth)?;
    let mut cands: BTreeSet<FareyEdge> = BTreeSet::new();
    cands.extend(farey::separating_edges(base, &ca));
    cands.extend(farey::separating_edges(base, &cb));
    let side = |p: &BoundaryPoint, e: &FareyEdge| -> Result<bool> {
        let (l, h) = e.endpoints();
        p.in_open_arc(l, h)
    };
    let mut low: Option<i64> = None;
    let mut high: Option<i64> = None;
    for e in &cands {
        if e.has_endpoint(base) {
            continue;
        }
        let (l, h) = e.endpoints();
        let sb = farey::in_open_arc(base, l, h);
        let sa = side(a, e)?;
        let sbb = side(b, e)?;
        let d = farey::distance_to_edge(base, e) as i64;
        if sa == sbb && sa != sb {
            low = Some(low.map_or(d - 2, |x: i64| x.max(d - 2)));
        }
        if sa != sbb {
            high = Some(high.map_or(d + 1, |x: i64| x.min(d + 1)));
        }
    }
    Ok(ProductBounds { low, high, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn convergent_examples() {
        let g = BoundaryPoint::golden();
        let c: Vec<String> = g.convergents(3).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(c, vec!["1/1", "2/1", "3/2", "5/3"]);
        let f: BoundaryPoint = "[0;2,2]".parse().unwrap();
        assert_eq!(convergent(&f, 2).unwrap(), s("2/5"));
        assert!(matches!(convergent(&f, 3), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn nested_edges_golden() {
        let e: Vec<String> = nested_edges(&BoundaryPoint::golden(), 3)
            .unwrap()
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(e, vec!["(1/1,2/1)", "(3/2,2/1)", "(3/2,5/3)"]);
    }

    #[test]
    fn parse_and_canonical_form() {
        let a: BoundaryPoint = "[1;1,1,~(1,1)]".parse().unwrap();
        assert_eq!(a, BoundaryPoint::golden());
        assert_eq!(a.to_string(), "[1;~(1)]");
        let b: BoundaryPoint = "[2;3,~(1,4)]".parse().unwrap();
        assert_eq!(b.to_string().parse::<BoundaryPoint>().unwrap(), b);
        assert!("[1;~()]".parse::<BoundaryPoint>().is_err());
    }

    #[test]
    fn quadratic_round_trip() {
        let g = BoundaryPoint::golden().to_quadratic().unwrap();
        assert_eq!(g.to_string(), "(1+√5)/2");
        let s2: BoundaryPoint = "[1;~(2)]".parse().unwrap();
        assert_eq!(s2.to_quadratic().unwrap().to_string(), "(0+√2)/1");
        for t in ["[2;3,~(1,4)]", "[-3;1,1,~(5)]", "[0;~(1,2,3)]"] {
            let a: BoundaryPoint = t.parse().unwrap();
            assert_eq!(a.to_quadratic().unwrap().continued_fraction(), a, "{t}");
        }
    }

    #[test]
    fn sl2_action_on_golden() {
        let t = SL2Matrix::from_i64(1, 1, 0, 1).unwrap();
        let g = BoundaryPoint::golden().apply(&t).unwrap();
        assert_eq!(g.to_string(), "[2;~(1)]");
    }

    #[test]
    fn compare_with_slopes() {
        let g = BoundaryPoint::golden();
        assert_eq!(g.cmp_slope(&s("8/5")).unwrap(), Ordering::Greater);
        assert_eq!(g.cmp_slope(&s("13/8")).unwrap(), Ordering::Less);
        assert_eq!(g.cmp_slope(&s("2")).unwrap(), Ordering::Less);
        assert_eq!(g.cmp_slope(&s("-7")).unwrap(), Ordering::Greater);
        assert_eq!(g.cmp_slope(&Slope::infinity()).unwrap(), Ordering::Less);
    }

    #[test]
    fn golden_sphere_from_infinity() {
        let g = BoundaryPoint::golden();
        let sp: Vec<Slope> = geodesic_sphere(&Slope::infinity(), &g, 1)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(sp, vec![s("1"), s("2")]);
        let sp0 = geodesic_sphere(&s("3/7"), &g, 0).unwrap();
        assert_eq!(sp0.into_iter().collect::<Vec<_>>(), vec![s("3/7")]);
    }

    #[test]
    fn golden_ray_from_zero() {
        let g = BoundaryPoint::golden();
        let r = ray(&s("0"), &g, 4).unwrap();
        assert_eq!(r.vertices.len(), 5);
        let deep = convergent(&g, 14).unwrap();
        let total = farey::distance(&s("0"), &deep);
        for (t, v) in r.vertices.iter().enumerate() {
            assert_eq!(farey::distance(&s("0"), v), t as u64);
            assert_eq!(t as u64 + farey::distance(v, &deep), total);
        }
        let short = ray(&s("0"), &g, 2).unwrap();
        assert_eq!(short.vertices[..], r.vertices[..3]);
    }
}
