//! Busemann functions alpha and beta toward a boundary point, their cocycle
//! defects, and MIN sets of ideal triangles.
//!
//! Both functions are limsups along t; they are evaluated on a finite horizon T
//! and accepted only when the maximum over the tail window [T-w, T] equals the
//! maximum over [T-2w, T].

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{self, BoundaryPoint};
use crate::error::{Error, Result};
use crate::farey::{self, Slope};
use crate::hypgraph::{self, FareyOracle, GraphOracle, HalfInt, RayOracle, Tree3, TreeEnd, TreeVertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Horizon {
    pub t: u64,
    pub window: u64,
}

impl Horizon {
    /// T = d(x,y) + 12 with a window of 4.
    pub fn for_distance(d: u64) -> Horizon {
        Horizon {
            t: d + 12,
            window: 4,
        }
    }

    fn check(&self, d: u64) -> Result<()> {
        if self.t < d + self.window || self.t < 2 * self.window {
            return Err(Error::Precondition(format!(
                "horizon {} too short for d = {d} and window {}",
                self.t, self.window
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Alpha,
    Beta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BusemannValue {
    pub value: i64,
    pub mode: Mode,
    pub horizon: Horizon,
}

/// Tail-window maximum of `f(t)` with the plateau check.
fn plateau(h: &Horizon, f: impl Fn(u64) -> i64) -> Result<i64> {
    let tail = (h.t - h.window..=h.t).map(&f).max().expect("nonempty");
    let full = (h.t - 2 * h.window..=h.t).map(&f).max().expect("nonempty");
    if tail != full {
        return Err(Error::NotStabilized(format!(
            "no plateau at horizon {}: tail max {tail}, window max {full}",
            h.t
        )));
    }
    Ok(tail)
}

/// alpha from precomputed spheres G(y,a)_t, t = 0..=T.
pub fn alpha_from_spheres<G: GraphOracle>(
    g: &G,
    x: &G::Vertex,
    spheres: &[BTreeSet<G::Vertex>],
    h: &Horizon,
) -> Result<i64> {
    plateau(h, |t| {
        let d = spheres[t as usize]
            .iter()
            .map(|v| g.distance(x, v))
            .min()
            .expect("nonempty sphere");
        d as i64 - t as i64
    })
}

/// beta from precomputed spheres: every sphere vertex lies on some ray, and
/// d(x, h(t)) - t is non-increasing along each ray h.
pub fn beta_from_spheres<G: GraphOracle>(
    g: &G,
    x: &G::Vertex,
    spheres: &[BTreeSet<G::Vertex>],
    h: &Horizon,
) -> Result<i64> {
    plateau(h, |t| {
        let d = spheres[t as usize]
            .iter()
            .map(|v| g.distance(x, v))
            .max()
            .expect("nonempty sphere");
        d as i64 - t as i64
    })
}

/// beta_a(x, h) along one explicit ray h (h[0] = y).
pub fn beta_along_ray<G: GraphOracle>(
    g: &G,
    x: &G::Vertex,
    ray: &[G::Vertex],
    h: &Horizon,
) -> Result<i64> {
    if (ray.len() as u64) <= h.t {
        return Err(Error::Precondition("ray shorter than the horizon".into()));
    }
    plateau(h, |t| g.distance(x, &ray[t as usize]) as i64 - t as i64)
}

pub fn alpha<G: RayOracle>(
    g: &G,
    a: &G::End,
    x: &G::Vertex,
    y: &G::Vertex,
    h: &Horizon,
) -> Result<BusemannValue> {
    h.check(g.distance(x, y))?;
    let spheres = g.ray_spheres(y, a, h.t)?;
    Ok(BusemannValue {
        value: alpha_from_spheres(g, x, &spheres, h)?,
        mode: Mode::Alpha,
        horizon: *h,
    })
}

pub fn beta<G: RayOracle>(
    g: &G,
    a: &G::End,
    x: &G::Vertex,
    y: &G::Vertex,
    h: &Horizon,
) -> Result<BusemannValue> {
    h.check(g.distance(x, y))?;
    let spheres = g.ray_spheres(y, a, h.t)?;
    Ok(BusemannValue {
        value: beta_from_spheres(g, x, &spheres, h)?,
        mode: Mode::Beta,
        horizon: *h,
    })
}

/// Both values from one sphere computation, with the four-point delta of the sample
/// {x, y} together with the spheres.
#[derive(Clone, Debug, Serialize)]
pub struct BusemannPair {
    pub alpha: i64,
    pub beta: i64,
    pub delta_hat: HalfInt,
    pub horizon: Horizon,
    pub distance: u64,
}

pub fn busemann_pair<G: RayOracle>(
    g: &G,
    a: &G::End,
    x: &G::Vertex,
    y: &G::Vertex,
    h: &Horizon,
) -> Result<BusemannPair> {
    let d = g.distance(x, y);
    h.check(d)?;
    let spheres = g.ray_spheres(y, a, h.t)?;
    let alpha = alpha_from_spheres(g, x, &spheres, h)?;
    let beta = beta_from_spheres(g, x, &spheres, h)?;
    let mut sample: BTreeSet<G::Vertex> = spheres.iter().flatten().cloned().collect();
    sample.insert(x.clone());
    sample.insert(y.clone());
    let sample: Vec<G::Vertex> = sample.into_iter().collect();
    let delta_hat = if sample.len() >= 4 {
        hypgraph::four_point_delta(g, &sample)?
    } else {
        HalfInt::default()
    };
    Ok(BusemannPair {
        alpha,
        beta,
        delta_hat,
        horizon: *h,
        distance: d,
    })
}

/// (|beta(x,y) + beta(y,x)|, |beta(x,y) + beta(y,z) - beta(x,z)|).
pub fn cocycle_defects<G: RayOracle>(
    g: &G,
    a: &G::End,
    x: &G::Vertex,
    y: &G::Vertex,
    z: &G::Vertex,
    horizon_extra: u64,
) -> Result<(i64, i64)> {
    let b = |p: &G::Vertex, q: &G::Vertex| -> Result<i64> {
        let h = Horizon::for_distance(g.distance(p, q) + horizon_extra);
        Ok(beta(g, a, p, q, &h)?.value)
    };
    let xy = b(x, y)?;
    let yx = b(y, x)?;
    let yz = b(y, z)?;
    let xz = b(x, z)?;
    Ok(((xy + yx).abs(), (xy + yz - xz).abs()))
}

/// Backends that can locate ideal triangles.
pub trait IdealGeometry: RayOracle {
    /// A finite vertex set attached equivariantly to the ideal triangle (a, b, c).
    fn ideal_center(&self, a: &Self::End, b: &Self::End, c: &Self::End) -> Result<Vec<Self::Vertex>>;

    /// Vertices of bi-infinite geodesics from a to b within distance r of `center`.
    fn line_near(
        &self,
        a: &Self::End,
        b: &Self::End,
        center: &[Self::Vertex],
        r: u64,
    ) -> Result<BTreeSet<Self::Vertex>>;
}

fn dist_to_set<G: GraphOracle>(g: &G, v: &G::Vertex, set: &[G::Vertex]) -> u64 {
    set.iter().map(|c| g.distance(c, v)).min().unwrap_or(u64::MAX)
}

impl IdealGeometry for FareyOracle {
    /// The vertices of the Farey triangle whose three sides separate a, b and c.
    fn ideal_center(&self, a: &BoundaryPoint, b: &BoundaryPoint, c: &BoundaryPoint) -> Result<Vec<Slope>> {
        if a == b || b == c || a == c {
            return Err(Error::Precondition("boundary points must be distinct".into()));
        }
        let pts = [a, b, c];
        let mut tri = [Slope::int(0), Slope::int(1), Slope::infinity()];
        for _ in 0..100_000 {
            // arcs (tri[0],tri[1]), (tri[1],tri[2]), (tri[2],tri[0]) in increasing order
            let mut counts = [0usize; 3];
            for p in pts {
                for (i, count) in counts.iter_mut().enumerate() {
                    if p.in_open_arc(&tri[i], &tri[(i + 1) % 3])? {
                        *count += 1;
                    }
                }
            }
            let Some(i) = counts.iter().position(|&n| n >= 2) else {
                let mut out = tri.to_vec();
                out.sort();
                return Ok(out);
            };
            let (lo, hi) = (tri[i].clone(), tri[(i + 1) % 3].clone());
            let inner = across(&lo, &hi)?;
            tri = [lo, inner, hi];
        }
        Err(Error::Budget(format!("no separating tile for {a}, {b}, {c}")))
    }

    fn line_near(
        &self,
        a: &BoundaryPoint,
        b: &BoundaryPoint,
        center: &[Slope],
        r: u64,
    ) -> Result<BTreeSet<Slope>> {
        let mut k = 2usize;
        let budget = boundary::DEFAULT_DEPTH_BUDGET;
        while k + 2 <= budget {
            let (Some(p), Some(q)) = (
                self.line_probe(a, b, k, center, r)?,
                self.line_probe(a, b, k + 2, center, r)?,
            ) else {
                k += 1;
                continue;
            };
            if p == q {
                return Ok(p);
            }
            k += 1;
        }
        Err(Error::NotStabilized(format!("geodesic line {a} to {b}")))
    }
}

/// The Farey neighbor of the edge (lo, hi) inside the open arc from lo to hi.
fn across(lo: &Slope, hi: &Slope) -> Result<Slope> {
    let (p, q, r, s) = (lo.numer(), lo.denom(), hi.numer(), hi.denom());
    for (u, v) in [(p + r, q + s), (p - r, q - s)] {
        let cand = Slope::reduce(u, v)?;
        if farey::in_open_arc(&cand, lo, hi) {
            return Ok(cand);
        }
    }
    Err(Error::Invariant(format!("({lo},{hi}) is not a Farey edge")))
}

impl FareyOracle {
    /// Union of geodesics between the endpoints of the depth-k nested edges of a and b,
    /// cut to the window; None while those edges still meet the window.
    fn line_probe(
        &self,
        a: &BoundaryPoint,
        b: &BoundaryPoint,
        k: usize,
        center: &[Slope],
        r: u64,
    ) -> Result<Option<BTreeSet<Slope>>> {
        let ca = a.convergents(k)?;
        let cb = b.convergents(k)?;
        let ea = [&ca[k - 1], &ca[k]];
        let eb = [&cb[k - 1], &cb[k]];
        let far = |v: &Slope| dist_to_set(self, v, center) > r + 1;
        if !ea.iter().chain(eb.iter()).all(|v| far(v)) {
            return Ok(None);
        }
        // the closed arcs of the two edges must be disjoint
        let arc = |e: &[&Slope; 2]| {
            let (l, h) = if e[0] < e[1] { (e[0], e[1]) } else { (e[1], e[0]) };
            (l.clone(), h.clone())
        };
        let ((al, ah), (bl, bh)) = (arc(&ea), arc(&eb));
        if !(ah < bl || bh < al) {
            return Ok(None);
        }
        let mut out = BTreeSet::new();
        for u in ea {
            for w in eb {
                for v in farey::geodesic_vertices(u, w) {
                    if dist_to_set(self, &v, center) <= r {
                        out.insert(v);
                    }
                }
            }
        }
        Ok(Some(out))
    }
}

impl TreeEnd {
    /// Length of the common prefix with another end, or None if they are equal.
    pub fn common_prefix(&self, o: &TreeEnd) -> Option<usize> {
        let bound = self.prefix_len().max(o.prefix_len())
            + num_integer::lcm(self.period_len(), o.period_len())
            + 1;
        (0..bound).find(|&i| self.letter(i) != o.letter(i))
    }
}

impl IdealGeometry for Tree3 {
    /// The branch vertex where the three ends part.
    fn ideal_center(&self, a: &TreeEnd, b: &TreeEnd, c: &TreeEnd) -> Result<Vec<TreeVertex>> {
        let m = |x: &TreeEnd, y: &TreeEnd| {
            x.common_prefix(y)
                .ok_or_else(|| Error::Precondition("ends must be distinct".into()))
        };
        let (ab, bc, ca) = (m(a, b)?, m(b, c)?, m(c, a)?);
        let depth = ab.max(bc).max(ca);
        let word: Vec<u8> = (0..depth).map(|i| if bc == depth { b.letter(i) } else { a.letter(i) }).collect();
        Ok(vec![TreeVertex::new(word)?])
    }

    fn line_near(
        &self,
        a: &TreeEnd,
        b: &TreeEnd,
        center: &[TreeVertex],
        r: u64,
    ) -> Result<BTreeSet<TreeVertex>> {
        let m = a
            .common_prefix(b)
            .ok_or_else(|| Error::Precondition("ends must be distinct".into()))?;
        let reach = m + r as usize + center.iter().map(|c| c.depth()).max().unwrap_or(0) + 1;
        let mut out = BTreeSet::new();
        for e in [a, b] {
            for len in m..=reach {
                let v = TreeVertex::new((0..len).map(|i| e.letter(i)).collect())?;
                if dist_to_set(self, &v, center) <= r {
                    out.insert(v);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSetConfig {
    /// Window radius around the center.
    pub radius: u64,
    /// Extra horizon beyond the largest base distance.
    pub horizon_extra: u64,
    pub window: u64,
    /// How many times the radius may grow by 2 to obtain a positive margin.
    pub grow: usize,
}

impl Default for MinSetConfig {
    fn default() -> Self {
        MinSetConfig {
            radius: 4,
            horizon_extra: 8,
            window: 4,
            grow: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseMinimum<V> {
    pub base: V,
    pub min_value: i64,
    pub argmin: Vec<V>,
    pub boundary_min: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSetResult<V> {
    pub triple: [String; 3],
    pub center: Vec<V>,
    pub radius: u64,
    pub region: Vec<V>,
    pub bases: Vec<BaseMinimum<V>>,
    pub ms: Vec<V>,
    pub ms_prime: Vec<V>,
    /// min over bases of (least F on the window boundary) - MV.
    pub margin: i64,
    pub delta_hat: HalfInt,
    /// margin > 672 delta_hat + 3
    pub certified: bool,
    /// Largest d(w,y) - F^y(w) over the bases and the region.
    pub m0: i64,
}

/// F^y_{abc}(w) = alpha_a(w,y) + alpha_b(w,y) + alpha_c(w,y).
pub fn minset_eval<G: RayOracle>(
    g: &G,
    ends: [&G::End; 3],
    y: &G::Vertex,
    w: &G::Vertex,
    h: &Horizon,
) -> Result<i64> {
    let mut s = 0;
    for e in ends {
        s += alpha(g, e, w, y, h)?.value;
    }
    Ok(s)
}

/// X(a,b,c) within distance r of the center: rays toward b from G(a,b), toward c
/// from G(b,c), toward a from G(c,a). The range of starting points grows until the
/// windowed set is stable.
pub fn region<G: IdealGeometry>(
    g: &G,
    ends: [&G::End; 3],
    center: &[G::Vertex],
    r: u64,
) -> Result<BTreeSet<G::Vertex>> {
    let attempt = |rx: u64| -> Result<BTreeSet<G::Vertex>> {
        let mut out = BTreeSet::new();
        for i in 0..3 {
            let (p, q) = (ends[i], ends[(i + 1) % 3]);
            let line = g.line_near(p, q, center, rx)?;
            let found: Vec<BTreeSet<G::Vertex>> = line
                .par_iter()
                .map(|x| -> Result<BTreeSet<G::Vertex>> {
                    let t_max = dist_to_set(g, x, center) + r;
                    let spheres = g.ray_spheres(x, q, t_max)?;
                    Ok(spheres
                        .into_iter()
                        .flatten()
                        .filter(|v| dist_to_set(g, v, center) <= r)
                        .collect())
                })
                .collect::<Result<_>>()?;
            out.extend(found.into_iter().flatten());
        }
        Ok(out)
    };
    let mut rx = r;
    let mut cur = attempt(rx)?;
    for _ in 0..8 {
        let next = attempt(rx + 2)?;
        if next == cur {
            return Ok(cur);
        }
        rx += 2;
        cur = next;
    }
    Err(Error::NotStabilized("region X(a,b,c) in the window".into()))
}

/// MIN set of the ideal triangle (a, b, c) with the center vertices as bases.
pub fn min_set<G: IdealGeometry>(
    g: &G,
    a: &G::End,
    b: &G::End,
    c: &G::End,
    cfg: &MinSetConfig,
) -> Result<MinSetResult<G::Vertex>> {
    let center = g.ideal_center(a, b, c)?;
    let bases = center.clone();
    let mut radius = cfg.radius;
    for _ in 0..=cfg.grow {
        let res = min_set_at(g, [a, b, c], &center, &bases, radius, cfg)?;
        if res.margin > 0 {
            return Ok(res);
        }
        radius += 2;
    }
    Err(Error::Budget(format!(
        "nonpositive window margin up to radius {}; enlarge the window",
        radius - 2
    )))
}

/// MIN set with explicit bases and radius.
pub fn min_set_at<G: IdealGeometry>(
    g: &G,
    ends: [&G::End; 3],
    center: &[G::Vertex],
    bases: &[G::Vertex],
    radius: u64,
    cfg: &MinSetConfig,
) -> Result<MinSetResult<G::Vertex>> {
    let region = region(g, ends, center, radius)?;
    let verts: Vec<G::Vertex> = region.iter().cloned().collect();
    let mut per_base = Vec::new();
    let mut ms: BTreeSet<G::Vertex> = BTreeSet::new();
    let mut margin = i64::MAX;
    let mut m0 = i64::MIN;
    for y in bases {
        let f = evaluate_f(g, ends, y, &verts, cfg)?;
        let min_value = *f.values().min().expect("nonempty region");
        let argmin: Vec<G::Vertex> = f
            .iter()
            .filter(|(_, &v)| v == min_value)
            .map(|(w, _)| w.clone())
            .collect();
        let boundary_min = f
            .iter()
            .filter(|(w, _)| dist_to_set(g, w, center) == radius)
            .map(|(_, &v)| v)
            .min()
            .unwrap_or(i64::MAX);
        margin = margin.min(boundary_min.saturating_sub(min_value));
        for (w, &v) in &f {
            m0 = m0.max(g.distance(w, y) as i64 - v);
        }
        ms.extend(argmin.iter().cloned());
        per_base.push(BaseMinimum {
            base: y.clone(),
            min_value,
            argmin,
            boundary_min,
        });
    }
    let ms_prime: Vec<G::Vertex> = verts
        .iter()
        .filter(|w| ms.iter().any(|m| g.distance(m, w) <= 3))
        .cloned()
        .collect();
    let delta_hat = if verts.len() >= 4 {
        hypgraph::four_point_delta(g, &verts)?
    } else {
        HalfInt::default()
    };
    let certified = i128::from(margin) > 336 * i128::from(delta_hat.doubled()) + 3;
    Ok(MinSetResult {
        triple: [ends[0].to_string(), ends[1].to_string(), ends[2].to_string()],
        center: center.to_vec(),
        radius,
        region: verts,
        bases: per_base,
        ms: ms.into_iter().collect(),
        ms_prime,
        margin,
        delta_hat,
        certified,
        m0,
    })
}

/// F^y over a vertex list, sharing the sphere computations from y.
pub fn evaluate_f<G: RayOracle>(
    g: &G,
    ends: [&G::End; 3],
    y: &G::Vertex,
    verts: &[G::Vertex],
    cfg: &MinSetConfig,
) -> Result<BTreeMap<G::Vertex, i64>> {
    let far = verts.iter().map(|w| g.distance(w, y)).max().unwrap_or(0);
    let h = Horizon {
        t: far + 2 * cfg.window + cfg.horizon_extra,
        window: cfg.window,
    };
    let spheres: Vec<Vec<BTreeSet<G::Vertex>>> = ends
        .par_iter()
        .map(|e| g.ray_spheres(y, e, h.t))
        .collect::<Result<_>>()?;
    let vals: Vec<(G::Vertex, i64)> = verts
        .par_iter()
        .map(|w| -> Result<(G::Vertex, i64)> {
            let mut s = 0;
            for sp in &spheres {
                s += alpha_from_spheres(g, w, sp, &h)?;
            }
            Ok((w.clone(), s))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().collect())
}

/// Checks F^y(w) >= d(w,y) - m0 for holdout bases over the region; returns the
/// number of violations.
pub fn properness_violations<G: RayOracle>(
    g: &G,
    ends: [&G::End; 3],
    holdout: &[G::Vertex],
    region: &[G::Vertex],
    m0: i64,
    cfg: &MinSetConfig,
) -> Result<usize> {
    let mut bad = 0;
    for y in holdout {
        let f = evaluate_f(g, ends, y, region, cfg)?;
        bad += f
            .iter()
            .filter(|(w, &v)| v < g.distance(w, y) as i64 - m0)
            .count();
    }
    Ok(bad)
}

/// Height of the largest slope in a set, for reports.
pub fn max_height(vs: &[Slope]) -> BigInt {
    vs.iter().map(|v| v.height()).max().unwrap_or_default()
}
