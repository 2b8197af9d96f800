//! SL(2,Z) acting on slopes: trace classification, fixed points, Dehn twists and the
//! twist inequalities.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boundary::{sign_surd, BoundaryPoint, QuadraticIrrational};
use crate::error::{Error, Result};
use crate::farey::{intersection_number, Slope};

/// [[a,b],[c,d]] with ad - bc = 1, acting on column vectors (p, q) for the slope p/q.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SL2Matrix {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl SL2Matrix {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<SL2Matrix> {
        let m = SL2Matrix { a, b, c, d };
        m.check_det()?;
        Ok(m)
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<SL2Matrix> {
        SL2Matrix::new(a.into(), b.into(), c.into(), d.into())
    }

    pub(crate) fn from_entries_unchecked(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        SL2Matrix { a, b, c, d }
    }

    pub fn identity() -> SL2Matrix {
        SL2Matrix::from_entries_unchecked(BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one())
    }

    pub fn check_det(&self) -> Result<()> {
        let det = self.det();
        if det.is_one() {
            Ok(())
        } else {
            Err(Error::Determinant(format!("{self} has determinant {det}")))
        }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn entries(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn inverse(&self) -> SL2Matrix {
        SL2Matrix::from_entries_unchecked(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn neg(&self) -> SL2Matrix {
        SL2Matrix::from_entries_unchecked(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn mul(&self, o: &SL2Matrix) -> SL2Matrix {
        SL2Matrix::from_entries_unchecked(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    /// m^n for any integer n.
    pub fn pow(&self, n: i64) -> SL2Matrix {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = SL2Matrix::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == SL2Matrix::identity()
    }

    /// Whether m = I or m = -I.
    pub fn is_central(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    /// Moebius action on slopes; det 1 keeps the image vector primitive.
    pub fn apply(&self, v: &Slope) -> Slope {
        let (p, q) = (v.numer(), v.denom());
        Slope::from_primitive(&self.a * p + &self.b * q, &self.c * p + &self.d * q)
    }

    pub fn conjugate(&self, g: &SL2Matrix) -> SL2Matrix {
        g.mul(self).mul(&g.inverse())
    }
}

impl fmt::Display for SL2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for SL2Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<SL2Matrix> {
        let bad = || Error::Parse(format!("bad matrix {s:?}"));
        let cleaned: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '[' && *c != ']')
            .collect();
        let nums: Vec<BigInt> = cleaned
            .split(',')
            .map(|t| t.replace('\u{2212}', "-").parse::<BigInt>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums.len() != 4 || !s.trim().starts_with("[[") {
            return Err(bad());
        }
        let mut it = nums.into_iter();
        let (a, b, c, d) = (
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        );
        SL2Matrix::new(a, b, c, d)
    }
}

impl Serialize for SL2Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SL2Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Nielsen-Thurston type of the projective class of a matrix.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum ElementClass {
    /// `order` is the order of the matrix itself in SL(2,Z).
    FiniteOrder { order: u32 },
    Reducible { fixed: Slope },
    PseudoAnosov {
        f_plus: BoundaryPoint,
        f_minus: BoundaryPoint,
        dilatation: QuadraticIrrational,
    },
}

impl ElementClass {
    pub fn tag(&self) -> &'static str {
        match self {
            ElementClass::FiniteOrder { .. } => "FiniteOrder",
            ElementClass::Reducible { .. } => "Reducible",
            ElementClass::PseudoAnosov { .. } => "PseudoAnosov",
        }
    }
}

pub fn classify(m: &SL2Matrix) -> Result<ElementClass> {
    m.check_det()?;
    let t = m.trace();
    if m.is_central() {
        let order = if m.a.is_one() { 1 } else { 2 };
        return Ok(ElementClass::FiniteOrder { order });
    }
    let t_abs = t.abs();
    let two = BigInt::from(2);
    match t_abs.cmp(&two) {
        Ordering::Less => {
            let order = match t.to_i64().expect("small trace") {
                0 => 4,
                1 => 6,
                _ => 3,
            };
            Ok(ElementClass::FiniteOrder { order })
        }
        Ordering::Equal => {
            let eps = t.signum();
            // kernel of m - eps I, which has rank one
            let (a1, d1) = (&m.a - &eps, &m.d - &eps);
            let fixed = if !m.b.is_zero() || !a1.is_zero() {
                Slope::reduce(-&m.b, a1)?
            } else {
                Slope::reduce(d1, -&m.c)?
            };
            Ok(ElementClass::Reducible { fixed })
        }
        Ordering::Greater => {
            let (f_plus, f_minus) = hyperbolic_fixed_points(m)?;
            let dilatation =
                QuadraticIrrational::new(t_abs.clone(), BigInt::one(), &t * &t - 4u32, two)?;
            Ok(ElementClass::PseudoAnosov {
                f_plus: f_plus.continued_fraction(),
                f_minus: f_minus.continued_fraction(),
                dilatation,
            })
        }
    }
}

/// Attracting and repelling fixed points ((a-d) +- sign(t) sqrt(t^2-4)) / 2c.
pub fn hyperbolic_fixed_points(
    m: &SL2Matrix,
) -> Result<(QuadraticIrrational, QuadraticIrrational)> {
    let t = m.trace();
    if t.abs() <= BigInt::from(2) {
        return Err(Error::Precondition(format!("{m} is not hyperbolic")));
    }
    let disc = &t * &t - 4u32;
    let amd = &m.a - &m.d;
    let c2 = &m.c * 2u32;
    let s = t.signum();
    let plus = QuadraticIrrational::new(amd.clone(), s.clone(), disc.clone(), c2.clone())?;
    let minus = QuadraticIrrational::new(amd, -s, disc, c2)?;
    Ok((plus, minus))
}

/// Twist about alpha = p/q: v -> v + n (v ^ w) w with w = (p, q).
pub fn dehn_twist(alpha: &Slope, n: i64) -> SL2Matrix {
    let (p, q) = (alpha.numer(), alpha.denom());
    let n = BigInt::from(n);
    let npq = &n * p * q;
    SL2Matrix::from_entries_unchecked(
        BigInt::one() + &npq,
        -(&n * p * p),
        &n * q * q,
        BigInt::one() - npq,
    )
}

/// a + b sqrt(d) with integer a, b.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Surd {
    a: BigInt,
    b: BigInt,
}

impl Surd {
    fn mul(&self, o: &Surd, d: &BigInt) -> Surd {
        Surd {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

/// Squared chordal distance on the circle of slopes, num / den, both in Z[sqrt(d)]
/// and den > 0: sin^2 of the angle between the two lines through the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalSq {
    num: Surd,
    den: Surd,
    d: BigInt,
}

impl ChordalSq {
    pub fn between(v: &Slope, f: &QuadraticIrrational) -> ChordalSq {
        let (u, w_v, d, w) = f.parts();
        let (p, q) = (v.numer(), v.denom());
        // f = (u + w_v s)/w; scale the direction vector (f, 1) by w.
        let a = p * w - q * u;
        let b = q * w_v;
        let num = Surd {
            a: &a * &a + &b * &b * d,
            b: -(&a * &b * 2u32),
        };
        let norm_f = Surd {
            a: w * w + u * u + w_v * w_v * d,
            b: u * w_v * 2u32,
        };
        let norm_v = Surd {
            a: p * p + q * q,
            b: BigInt::zero(),
        };
        ChordalSq {
            num,
            den: norm_f.mul(&norm_v, d),
            d: d.clone(),
        }
    }

    /// Exact comparison with a nonnegative rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        // num / den vs r  <=>  num * r.denom vs den * r.numer
        let lhs = Surd {
            a: &self.num.a * r.denom(),
            b: &self.num.b * r.denom(),
        };
        let rhs = Surd {
            a: &self.den.a * r.numer(),
            b: &self.den.b * r.numer(),
        };
        sign_surd(&(&lhs.a - &rhs.a), &(&lhs.b - &rhs.b), &self.d)
    }

    pub fn cmp_same_field(&self, o: &ChordalSq) -> Ordering {
        assert_eq!(self.d, o.d, "values from different quadratic fields");
        let l = self.num.mul(&o.den, &self.d);
        let r = o.num.mul(&self.den, &self.d);
        sign_surd(&(&l.a - &r.a), &(&l.b - &r.b), &self.d)
    }

    pub fn to_f64(&self) -> f64 {
        let s = self.d.to_f64().unwrap_or(f64::NAN).sqrt();
        let ev = |x: &Surd| {
            x.a.to_f64().unwrap_or(f64::NAN) + x.b.to_f64().unwrap_or(f64::NAN) * s
        };
        ev(&self.num) / ev(&self.den)
    }

    /// Chordal distance itself (square root of the exact value), for display.
    pub fn distance_f64(&self) -> f64 {
        self.to_f64().max(0.0).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceStep {
    pub step: usize,
    pub iterate: Slope,
    pub dist_sq: ChordalSq,
}

/// Distances from m^k seed to F+ for k = 0..=steps.
pub fn iterate_convergence(m: &SL2Matrix, seed: &Slope, steps: usize) -> Result<Vec<ConvergenceStep>> {
    let (f_plus, f_minus) = hyperbolic_fixed_points(m)?;
    // a slope is rational and F- is not, so this only guards the contract
    if f_minus.cmp_slope(seed) == Ordering::Equal {
        return Err(Error::Precondition(format!("seed {seed} is the repelling point")));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = seed.clone();
    for step in 0..=steps {
        out.push(ConvergenceStep {
            step,
            iterate: x.clone(),
            dist_sq: ChordalSq::between(&x, &f_plus),
        });
        x = m.apply(&x);
    }
    Ok(out)
}

/// First step from which the distances decrease strictly to the end.
pub fn burn_in(steps: &[ConvergenceStep]) -> usize {
    let mut start = steps.len().saturating_sub(1);
    while start > 0 && steps[start - 1].dist_sq.cmp_same_field(&steps[start].dist_sq) == Ordering::Greater {
        start -= 1;
    }
    start
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistInequality {
    pub lower: BigInt,
    pub middle: BigInt,
    pub upper: BigInt,
    pub holds: bool,
}

/// Bounds on i(t(gamma), beta) for the multitwist t = prod t_{alpha_i}^{n_i}.
/// On the torus two distinct slopes always intersect, so sigma has one element.
pub fn twist_inequality_check(
    sigma: &[(Slope, i64)],
    beta: &Slope,
    gamma: &Slope,
) -> Result<TwistInequality> {
    for (i, (a1, _)) in sigma.iter().enumerate() {
        for (a2, _) in &sigma[i + 1..] {
            if a1 == a2 || !intersection_number(a1, a2).is_zero() {
                return Err(Error::Precondition(format!(
                    "{a1} and {a2} are not disjoint distinct curves"
                )));
            }
        }
    }
    let mut t = SL2Matrix::identity();
    let mut lower = -intersection_number(gamma, beta);
    let mut upper = intersection_number(gamma, beta);
    for (alpha, n) in sigma {
        t = t.mul(&dehn_twist(alpha, *n));
        let prod = intersection_number(gamma, alpha) * intersection_number(alpha, beta);
        lower += (BigInt::from(n.unsigned_abs()) - 2) * &prod;
        upper += BigInt::from(n.unsigned_abs()) * &prod;
    }
    let middle = intersection_number(&t.apply(gamma), beta);
    let holds = lower <= middle && middle <= upper;
    Ok(TwistInequality {
        lower,
        middle,
        upper,
        holds,
    })
}

/// Whether t_alpha^n moves beta; requires i(alpha, beta) != 0.
pub fn twist_nonfix_check(alpha: &Slope, beta: &Slope, n: i64) -> Result<bool> {
    if intersection_number(alpha, beta).is_zero() {
        return Err(Error::Precondition(format!("{alpha} and {beta} are disjoint")));
    }
    Ok(dehn_twist(alpha, n).apply(beta) != *beta)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutingReport {
    pub commute: bool,
    pub disjoint: bool,
}

impl CommutingReport {
    /// Twists commute exactly when the curves are disjoint.
    pub fn consistent(&self) -> bool {
        self.commute == self.disjoint
    }
}

pub fn commuting_check(alpha: &Slope, beta: &Slope, n: i64, m: i64) -> Result<CommutingReport> {
    if n == 0 || m == 0 {
        return Err(Error::Precondition("twist powers must be nonzero".into()));
    }
    let ta = dehn_twist(alpha, n);
    let tb = dehn_twist(beta, m);
    let comm = ta.mul(&tb).mul(&ta.inverse()).mul(&tb.inverse());
    Ok(CommutingReport {
        commute: comm.is_identity(),
        disjoint: intersection_number(alpha, beta).is_zero(),
    })
}

/// A uniformly-ish random SL(2,Z) element as a word in the generators, for tests and scans.
pub fn random_word<R: rand::Rng>(rng: &mut R, len: usize) -> SL2Matrix {
    let s = SL2Matrix::from_i64(0, -1, 1, 0).expect("det 1");
    let t = SL2Matrix::from_i64(1, 1, 0, 1).expect("det 1");
    let mut m = SL2Matrix::identity();
    for _ in 0..len {
        let g = match rng.gen_range(0..4) {
            0 => s.clone(),
            1 => s.inverse(),
            2 => t.clone(),
            _ => t.inverse(),
        };
        m = m.mul(&g);
    }
    m
}

/// Order of the image in PSL(2,Z) for finite-order classes.
pub fn projective_order(order: u32) -> u32 {
    if order % 2 == 0 {
        order / 2
    } else {
        order
    }
}
