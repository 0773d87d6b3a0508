//! Rational self-maps of the projective line over the rationals.
//!
//! A map is stored as a pair of coprime integer polynomials `p/q` in
//! primitive form (the two polynomials share no common integer content and
//! `q` has a positive leading coefficient). All evaluation is projective:
//! a map of degree `d = max(deg p, deg q)` acts on `[a:b]` through the
//! degree-`d` homogenizations of `p` and `q`, so the point at infinity needs
//! no special casing.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::poly::IntPoly;

/// Default cap on coefficient size produced by composition (bits).
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;
/// Cap on the degree produced by composition.
pub const MAX_DEGREE: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map is constant")]
    DegenerateMap,
    #[error("numerator and denominator share a factor after reduction")]
    SharedFactor,
    #[error("point [0:0] is not a point of P^1")]
    ZeroPoint,
    #[error("both homogeneous forms vanish at {0}")]
    IndeterminatePoint(String),
    #[error("coefficient size {bits} bits exceeds cap {cap}")]
    SizeLimit { bits: u64, cap: u64 },
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeLimit { degree: usize, cap: usize },
    #[error("iteration count must be at least 1")]
    ZeroIterate,
    #[error("Möbius transformation is singular")]
    SingularMobius,
    #[error("map is not normalized (need deg p = deg q + 1)")]
    NotNormalized,
    #[error("the identity map has no isolated fixed points")]
    IdentityMap,
    #[error("{0} is not a fixed point")]
    NotFixed(String),
    #[error("multiplier {0} is not p-integral; the point is repelling")]
    MultiplierNotIntegral(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
}

impl MapError {
    pub fn name(&self) -> &'static str {
        match self {
            MapError::DegenerateMap => "DegenerateMap",
            MapError::SharedFactor => "SharedFactor",
            MapError::ZeroPoint => "ZeroPoint",
            MapError::IndeterminatePoint(_) => "IndeterminatePoint",
            MapError::SizeLimit { .. } | MapError::DegreeLimit { .. } => "SizeLimit",
            MapError::ZeroIterate => "ZeroIterate",
            MapError::SingularMobius => "SingularMobius",
            MapError::NotNormalized => "NotNormalized",
            MapError::IdentityMap => "IdentityMap",
            MapError::NotFixed(_) => "NotFixed",
            MapError::MultiplierNotIntegral(_) => "MultiplierNotIntegral",
            MapError::NotPrime(_) => "NotPrime",
        }
    }
}

/// A point of `P^1(Q)` in homogeneous coordinates.
///
/// Canonical form: `gcd(a, b) = 1`, `b >= 0`, and infinity is `[1:0]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    a: BigInt,
    b: BigInt,
}

impl ProjPoint {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self, MapError> {
        if a.is_zero() && b.is_zero() {
            return Err(MapError::ZeroPoint);
        }
        let g = arith::gcd(&a, &b);
        let (mut a, mut b) = (a / &g, b / &g);
        if b.is_negative() || (b.is_zero() && a.is_negative()) {
            a = -a;
            b = -b;
        }
        Ok(ProjPoint { a, b })
    }

    pub fn from_int(a: i64) -> Self {
        ProjPoint { a: BigInt::from(a), b: BigInt::one() }
    }

    pub fn from_ratio(a: i64, b: i64) -> Result<Self, MapError> {
        Self::new(BigInt::from(a), BigInt::from(b))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::new(r.numer().clone(), r.denom().clone()).expect("denominator is nonzero")
    }

    pub fn infinity() -> Self {
        ProjPoint { a: BigInt::one(), b: BigInt::zero() }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn is_infinity(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(BigRational::new(self.a.clone(), self.b.clone()))
        }
    }

    pub fn bits(&self) -> u64 {
        self.a.bits().max(self.b.bits())
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else if self.b.is_one() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}/{}", self.a, self.b)
        }
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.a, self.b))
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        crate::parse::parse_point(&s).map_err(serde::de::Error::custom)
    }
}

/// A fractional linear transformation `x -> (a x + b) / (c x + d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mobius {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mobius {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mobius { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn apply(&self, x: &ProjPoint) -> ProjPoint {
        ProjPoint::new(
            &self.a * x.a() + &self.b * x.b(),
            &self.c * x.a() + &self.d * x.b(),
        )
        .expect("nonsingular Möbius maps never produce [0:0]")
    }

    fn as_map(&self) -> Result<RationalMap, MapError> {
        if self.det().is_zero() {
            return Err(MapError::SingularMobius);
        }
        RationalMap::from_polys(
            IntPoly::new(vec![self.b.clone(), self.a.clone()]),
            IntPoly::new(vec![self.d.clone(), self.c.clone()]),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMap {
    p: IntPoly,
    q: IntPoly,
    normalized: bool,
}

impl RationalMap {
    /// Reduce an integer pair `p/q` to primitive coprime form.
    pub fn from_polys(p: IntPoly, q: IntPoly) -> Result<Self, MapError> {
        if q.is_zero() || p.is_zero() {
            return Err(MapError::DegenerateMap);
        }
        let (mut p, mut q) = (p, q);
        let g = p.gcd(&q);
        if g.deg() > 0 {
            p = p.div_exact(&g).ok_or(MapError::SharedFactor)?;
            q = q.div_exact(&g).ok_or(MapError::SharedFactor)?;
        }
        if p.deg() == 0 && q.deg() == 0 {
            return Err(MapError::DegenerateMap);
        }
        let mut content = p.content().gcd(&q.content());
        if q.leading().is_negative() {
            content = -content;
        }
        let p = IntPoly::new(p.coeffs().iter().map(|c| c / &content).collect());
        let q = IntPoly::new(q.coeffs().iter().map(|c| c / &content).collect());
        if p.resultant(&q).is_zero() {
            return Err(MapError::SharedFactor);
        }
        let normalized = p.deg() == q.deg() + 1;
        Ok(RationalMap { p, q, normalized })
    }

    pub fn from_i64s(p: &[i64], q: &[i64]) -> Result<Self, MapError> {
        Self::from_polys(IntPoly::from_i64s(p), IntPoly::from_i64s(q))
    }

    pub fn identity() -> Self {
        Self::from_i64s(&[0, 1], &[1]).expect("identity is a valid map")
    }

    pub fn p(&self) -> &IntPoly {
        &self.p
    }

    pub fn q(&self) -> &IntPoly {
        &self.q
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn degree(&self) -> usize {
        self.p.deg().max(self.q.deg())
    }

    pub fn is_identity(&self) -> bool {
        self.p == IntPoly::x() && self.q == IntPoly::one()
    }

    pub fn max_bits(&self) -> u64 {
        self.p.max_bits().max(self.q.max_bits())
    }

    /// Evaluate at a projective point through the degree-`d` homogenization.
    pub fn evaluate(&self, x: &ProjPoint) -> Result<ProjPoint, MapError> {
        let d = self.degree();
        let num = self.p.homog_eval(x.a(), x.b(), d);
        let den = self.q.homog_eval(x.a(), x.b(), d);
        ProjPoint::new(num, den).map_err(|_| MapError::IndeterminatePoint(x.to_string()))
    }

    /// `self ∘ inner`, composed on homogeneous forms.
    pub fn compose(&self, inner: &RationalMap, max_bits: u64) -> Result<RationalMap, MapError> {
        let d = self.degree();
        let degree = d * inner.degree();
        if degree > MAX_DEGREE {
            return Err(MapError::DegreeLimit { degree, cap: MAX_DEGREE });
        }
        // inner's forms of degree e, dehomogenized at Y = 1 (padding implied by e)
        let g1 = &inner.p;
        let g2 = &inner.q;
        let mut g1_pows = vec![IntPoly::one()];
        let mut g2_pows = vec![IntPoly::one()];
        for i in 1..=d {
            g1_pows.push(&g1_pows[i - 1] * g1);
            g2_pows.push(&g2_pows[i - 1] * g2);
        }
        let apply = |form: &IntPoly| -> IntPoly {
            let mut acc = IntPoly::zero();
            for i in 0..=d {
                let c = form.coeff(i);
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(&g1_pows[i] * &g2_pows[d - i]).scale(&c);
            }
            acc
        };
        let num = apply(&self.p);
        let den = apply(&self.q);
        let bits = num.max_bits().max(den.max_bits());
        if bits > max_bits {
            return Err(MapError::SizeLimit { bits, cap: max_bits });
        }
        RationalMap::from_polys(num, den)
    }

    /// The `k`-th iterate, by repeated squaring on homogeneous forms.
    pub fn iterate(&self, k: u32) -> Result<RationalMap, MapError> {
        self.iterate_capped(k, DEFAULT_MAX_BITS)
    }

    pub fn iterate_capped(&self, k: u32, max_bits: u64) -> Result<RationalMap, MapError> {
        if k == 0 {
            return Err(MapError::ZeroIterate);
        }
        let mut result: Option<RationalMap> = None;
        let mut base = self.clone();
        let mut k = k;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.compose(&base, max_bits)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.compose(&base, max_bits)?;
        }
        Ok(result.expect("k >= 1"))
    }

    /// `phi ∘ h ∘ phi^{-1}`.
    pub fn conjugate(&self, phi: &Mobius) -> Result<RationalMap, MapError> {
        let fwd = phi.as_map()?;
        let inv = phi.inverse().as_map()?;
        let inner = self.compose(&inv, u64::MAX)?;
        fwd.compose(&inner, u64::MAX)
    }

    /// Fixed-point polynomial and wronskian for a normalized map.
    pub fn fixed_point_data(&self) -> Result<FixedPointData, MapError> {
        if !self.normalized {
            return Err(MapError::NotNormalized);
        }
        FixedPointData::compute(self)
    }

    /// `h'(x0)` at a fixed point, in the affine chart or in `u = 1/x` at infinity.
    pub fn multiplier(&self, x0: &ProjPoint) -> Result<BigRational, MapError> {
        if &self.evaluate(x0)? != x0 {
            return Err(MapError::NotFixed(x0.to_string()));
        }
        match x0.to_rational() {
            Some(r) => {
                let w = wronskian(&self.p, &self.q);
                let qv = self.q.eval_rational(&r);
                Ok(w.eval_rational(&r) / (&qv * &qv))
            }
            None => {
                let flip = Mobius::new(0, 1, 1, 0);
                let g = self.conjugate(&flip)?;
                g.multiplier(&ProjPoint::from_int(0))
            }
        }
    }

    pub fn classify_fixed_point(
        &self,
        x0: &ProjPoint,
        p: u64,
    ) -> Result<FixedPointKind, MapError> {
        if !arith::is_prime(p) {
            return Err(MapError::NotPrime(p));
        }
        let lambda = self.multiplier(x0)?;
        if lambda.is_zero() {
            return Ok(FixedPointKind::Superattracting);
        }
        let v = arith::rational_valuation(&lambda, p);
        match v.cmp(&0) {
            std::cmp::Ordering::Less => Err(MapError::MultiplierNotIntegral(lambda.to_string())),
            std::cmp::Ordering::Equal => Ok(FixedPointKind::Indifferent),
            std::cmp::Ordering::Greater => Ok(FixedPointKind::Attracting),
        }
    }

    /// Primes at which the reduction of `(h, c)` may misbehave.
    ///
    /// Works for any map; normalization is not required because the search
    /// that consumes this set handles the point at infinity projectively.
    pub fn bad_primes(&self, c: &ProjPoint) -> BadPrimeSet {
        let mut gens: Vec<(String, BigInt)> = vec![
            ("2".into(), BigInt::from(2)),
            ("3".into(), BigInt::from(3)),
        ];
        let fp = fixed_point_poly(&self.p, &self.q);
        let w = wronskian(&self.p, &self.q);
        let polys: Vec<(&str, &IntPoly)> =
            vec![("p", &self.p), ("q", &self.q), ("fp", &fp), ("w", &w)];
        for (name, f) in &polys {
            if f.is_zero() {
                continue;
            }
            gens.push((format!("lc_{name}"), f.leading()));
            gens.push((format!("tc_{name}"), f.trailing_nonzero()));
            let disc = f.discriminant();
            if disc.is_zero() {
                gens.push((format!("disc(sqf({name}))"), f.squarefree_part().discriminant()));
                gens.push((
                    format!("lc(gcd({name},{name}'))"),
                    f.gcd(&f.derivative()).leading() * f.content().gcd(&f.derivative().content()),
                ));
            } else {
                gens.push((format!("disc({name})"), disc));
            }
        }
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let (ni, fi) = polys[i];
                let (nj, fj) = polys[j];
                if fi.is_zero() || fj.is_zero() {
                    continue;
                }
                gens.push((format!("res({ni},{nj})"), separated_resultant(fi, fj)));
            }
        }
        if c.is_infinity() {
            gens.push(("q(c)".into(), self.q.leading()));
        } else {
            gens.push(("num(c)".into(), c.a().clone()));
            gens.push(("den(c)".into(), c.b().clone()));
            gens.push(("q(c)".into(), self.q.homog_eval(c.a(), c.b(), self.q.deg())));
        }
        BadPrimeSet::from_generators(gens)
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.p, self.q)
    }
}

impl RationalMap {
    /// Coefficient-array form `"[c0,...]/[d0,...]"`, accepted by the parser.
    pub fn to_array_string(&self) -> String {
        let join = |f: &IntPoly| f.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        format!("[{}]/[{}]", join(&self.p), join(&self.q))
    }
}

impl Serialize for RationalMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_array_string())
    }
}

impl<'de> Deserialize<'de> for RationalMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        crate::parse::parse_map(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn fixed_point_poly(p: &IntPoly, q: &IntPoly) -> IntPoly {
    p - &q.shift(1)
}

pub(crate) fn wronskian(p: &IntPoly, q: &IntPoly) -> IntPoly {
    &(&p.derivative() * q) - &(&q.derivative() * p)
}

/// Resultant of `f` and `g` with any common roots removed first, so the
/// value is nonzero and still vanishes mod every prime at which a root of
/// `f` collides with a different root of `g`.
fn separated_resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let r = f.resultant(g);
    if !r.is_zero() {
        return r;
    }
    let sf = f.squarefree_part();
    let sg = g.squarefree_part();
    let common = sf.gcd(&sg);
    let f_only = sf.div_exact(&common).expect("gcd divides");
    let g_only = sg.div_exact(&common).expect("gcd divides");
    // roots of f not shared with g against all roots of g, and vice versa
    f_only.resultant(&sg) * g_only.resultant(&common)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Indifferent,
    Attracting,
    Superattracting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointData {
    pub fp_poly: IntPoly,
    pub wronskian: IntPoly,
    pub lc_p: BigInt,
    pub lc_fp: BigInt,
    pub lc_w: BigInt,
    pub deg_fp: usize,
    pub deg_w: usize,
}

impl FixedPointData {
    fn compute(h: &RationalMap) -> Result<Self, MapError> {
        let fp = fixed_point_poly(&h.p, &h.q);
        if fp.is_zero() {
            return Err(MapError::IdentityMap);
        }
        let w = wronskian(&h.p, &h.q);
        Ok(FixedPointData {
            lc_p: h.p.leading(),
            lc_fp: fp.leading(),
            lc_w: w.leading(),
            deg_fp: fp.deg(),
            deg_w: w.deg(),
            fp_poly: fp,
            wronskian: w,
        })
    }

    /// Recompute from the map and compare.
    pub fn verify(&self, h: &RationalMap) -> bool {
        FixedPointData::compute(h).map_or(false, |d| &d == self)
    }
}

/// Finite set of primes to avoid, together with the integers it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrimeSet {
    #[serde(with = "crate::serde_big::biguint_vec")]
    primes: Vec<BigUint>,
    generators: Vec<Generator>,
    /// Composite cofactors the factorizer could not split. Membership
    /// queries still account for them through divisibility.
    #[serde(with = "crate::serde_big::biguint_vec")]
    unfactored: Vec<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    #[serde(with = "crate::serde_big::bigint")]
    pub value: BigInt,
}

impl BadPrimeSet {
    pub fn from_generators(gens: Vec<(String, BigInt)>) -> Self {
        let mut primes = BTreeSet::new();
        let mut unfactored = BTreeSet::new();
        let mut generators = Vec::new();
        for (label, value) in gens {
            if value.is_zero() {
                continue;
            }
            let (found, rest) = arith::factor(&value.magnitude().clone());
            primes.extend(found);
            unfactored.extend(rest);
            generators.push(Generator { label, value });
        }
        BadPrimeSet {
            primes: primes.into_iter().collect(),
            generators,
            unfactored: unfactored.into_iter().collect(),
        }
    }

    /// Add one more generator; the set can only grow.
    pub fn with_generator(&self, label: &str, value: BigInt) -> Self {
        let mut gens: Vec<(String, BigInt)> = self
            .generators
            .iter()
            .map(|g| (g.label.clone(), g.value.clone()))
            .collect();
        gens.push((label.to_string(), value));
        Self::from_generators(gens)
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn unfactored(&self) -> &[BigUint] {
        &self.unfactored
    }

    pub fn small_primes(&self) -> Vec<u64> {
        self.primes.iter().filter_map(|p| p.to_u64()).collect()
    }

    /// Exact test: does `p` divide one of the generators?
    pub fn contains(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.generators.iter().any(|g| (&g.value % &p).is_zero())
    }

    /// Is every prime factor of `n` in the set? Factorization-free: strip
    /// common factors with the generators until nothing is left.
    pub fn covers_support(&self, n: &BigInt) -> bool {
        let mut rest = n.abs();
        if rest.is_zero() {
            return false;
        }
        for g in &self.generators {
            // squaring the divisor removes high prime powers in O(log e) rounds
            let mut d = arith::gcd(&rest, &g.value);
            while !d.is_one() {
                rest /= &d;
                d = arith::gcd(&rest, &(&d * &d));
            }
            if rest.is_one() {
                return true;
            }
        }
        rest.is_one()
    }
}

/// `normalize_map` over rational coefficient lists.
pub fn normalize_map(p_raw: &[BigRational], q_raw: &[BigRational]) -> Result<RationalMap, MapError> {
    let denom = p_raw
        .iter()
        .chain(q_raw.iter())
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let clear = |v: &[BigRational]| {
        IntPoly::new(v.iter().map(|r| (r * BigRational::from(denom.clone())).to_integer()).collect())
    };
    RationalMap::from_polys(clear(p_raw), clear(q_raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from(BigInt::from(x))).collect()
    }

    fn hm() -> RationalMap {
        RationalMap::from_i64s(&[2, 0, 1], &[0, 2]).unwrap()
    }

    fn sq() -> RationalMap {
        RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let h = normalize_map(&rat(&[0, 0, 1]), &rat(&[1])).unwrap();
        assert!(!h.is_normalized());
        let h = normalize_map(&rat(&[2, 0, 1]), &rat(&[0, 2])).unwrap();
        assert!(h.is_normalized());
        assert_eq!(
            normalize_map(&rat(&[1, 2]), &rat(&[2, 4])),
            Err(MapError::DegenerateMap)
        );
        assert_eq!(normalize_map(&rat(&[1]), &rat(&[])), Err(MapError::DegenerateMap));
    }

    #[test]
    fn normalize_clears_denominators_and_content() {
        let half = BigRational::new(1.into(), 2.into());
        let h = normalize_map(&[half.clone(), BigRational::zero(), half], &rat(&[0, 1])).unwrap();
        assert_eq!(h.p(), &IntPoly::from_i64s(&[1, 0, 1]));
        assert_eq!(h.q(), &IntPoly::from_i64s(&[0, 2]));
        // shared linear factor (x-1) removed
        let h = RationalMap::from_i64s(&[-1, 0, 1], &[-1, 1]).unwrap();
        assert_eq!(h.p(), &IntPoly::from_i64s(&[1, 1]));
        assert_eq!(h.q(), &IntPoly::from_i64s(&[1]));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(sq().evaluate(&ProjPoint::from_ratio(3, 2).unwrap()).unwrap(), ProjPoint::from_ratio(9, 4).unwrap());
        assert_eq!(hm().evaluate(&ProjPoint::from_int(1)).unwrap(), ProjPoint::from_ratio(3, 2).unwrap());
        assert_eq!(hm().evaluate(&ProjPoint::infinity()).unwrap(), ProjPoint::infinity());
        let inv = RationalMap::from_i64s(&[1], &[0, 1]).unwrap();
        assert_eq!(inv.evaluate(&ProjPoint::from_int(0)).unwrap(), ProjPoint::infinity());
        assert_eq!(inv.evaluate(&ProjPoint::infinity()).unwrap(), ProjPoint::from_int(0));
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(sq().iterate(2).unwrap(), RationalMap::from_i64s(&[0, 0, 0, 0, 1], &[1]).unwrap());
        assert_eq!(hm().iterate(1).unwrap(), hm());
        assert_eq!(
            hm().iterate(2).unwrap(),
            RationalMap::from_i64s(&[4, 0, 12, 0, 1], &[0, 8, 0, 4]).unwrap()
        );
        assert_eq!(sq().iterate(0), Err(MapError::ZeroIterate));
        assert!(matches!(hm().iterate_capped(6, 64), Err(MapError::SizeLimit { .. })));
        assert!(matches!(sq().iterate(30), Err(MapError::DegreeLimit { .. })));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(sq().conjugate(&Mobius::new(1, 0, 0, 1)).unwrap(), sq());
        assert_eq!(sq().conjugate(&Mobius::new(0, 1, 1, 0)).unwrap(), sq());
        assert_eq!(sq().conjugate(&Mobius::new(1, 1, 2, 2)), Err(MapError::SingularMobius));
        // x -> x + 1 conjugates x^2 to (x-1)^2 + 1
        assert_eq!(
            sq().conjugate(&Mobius::new(1, 1, 0, 1)).unwrap(),
            RationalMap::from_i64s(&[2, -2, 1], &[1]).unwrap()
        );
    }

    #[test]
    fn fixed_point_data_examples() {
        let d = hm().fixed_point_data().unwrap();
        assert_eq!(d.fp_poly, IntPoly::from_i64s(&[2, 0, -1]));
        assert_eq!(d.wronskian, IntPoly::from_i64s(&[-4, 0, 2]));
        assert_eq!(d.lc_fp, BigInt::from(-1));
        assert_eq!(d.lc_p, BigInt::from(1));
        assert_eq!(d.lc_w, BigInt::from(2));
        assert!(d.verify(&hm()));
        assert_eq!(sq().fixed_point_data(), Err(MapError::NotNormalized));
        let id = RationalMap::identity();
        assert_eq!(id.fixed_point_data(), Err(MapError::IdentityMap));
    }

    #[test]
    fn bad_primes_examples() {
        let bad = hm().bad_primes(&ProjPoint::from_int(1));
        assert_eq!(bad.small_primes(), vec![2, 3]);
        assert!(bad.contains(2) && bad.contains(3) && !bad.contains(5));
        assert!(bad.unfactored().is_empty());
        let res = bad.generators().iter().find(|g| g.label == "res(p,q)").unwrap();
        assert_eq!(res.value, BigInt::from(8));
        // every listed prime divides some generator
        for p in bad.small_primes() {
            assert!(bad.generators().iter().any(|g| (&g.value % BigInt::from(p)).is_zero()));
        }
    }

    #[test]
    fn bad_primes_monotone() {
        let bad = hm().bad_primes(&ProjPoint::from_int(1));
        let bigger = bad.with_generator("extra", BigInt::from(35));
        for p in bad.small_primes() {
            assert!(bigger.contains(p));
        }
        assert!(bigger.contains(5) && bigger.contains(7));
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(sq().multiplier(&ProjPoint::from_int(0)).unwrap(), BigRational::zero());
        assert_eq!(sq().multiplier(&ProjPoint::from_int(1)).unwrap(), BigRational::from(BigInt::from(2)));
        assert!(matches!(sq().multiplier(&ProjPoint::from_int(3)), Err(MapError::NotFixed(_))));
        // infinity: x^2 superattracting, (x^2+2)/(2x) has multiplier 2
        assert_eq!(sq().multiplier(&ProjPoint::infinity()).unwrap(), BigRational::zero());
        assert_eq!(hm().multiplier(&ProjPoint::infinity()).unwrap(), BigRational::from(BigInt::from(2)));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(sq().classify_fixed_point(&ProjPoint::from_int(0), 7).unwrap(), FixedPointKind::Superattracting);
        assert_eq!(sq().classify_fixed_point(&ProjPoint::from_int(1), 7).unwrap(), FixedPointKind::Indifferent);
        assert_eq!(sq().classify_fixed_point(&ProjPoint::from_int(1), 2).unwrap(), FixedPointKind::Attracting);
        // x/3 fixes 0 with multiplier 1/3, repelling at p = 3
        let h = RationalMap::from_i64s(&[0, 1], &[3]).unwrap();
        assert!(matches!(
            h.classify_fixed_point(&ProjPoint::from_int(0), 3),
            Err(MapError::MultiplierNotIntegral(_))
        ));
        assert_eq!(sq().classify_fixed_point(&ProjPoint::from_int(1), 8), Err(MapError::NotPrime(8)));
    }

    #[test]
    fn proj_point_canonical() {
        let p = ProjPoint::new((-6).into(), (-4).into()).unwrap();
        assert_eq!((p.a().clone(), p.b().clone()), (BigInt::from(3), BigInt::from(2)));
        assert_eq!(ProjPoint::new((-5).into(), 0.into()).unwrap(), ProjPoint::infinity());
        assert_eq!(ProjPoint::new(0.into(), 0.into()), Err(MapError::ZeroPoint));
    }
}
