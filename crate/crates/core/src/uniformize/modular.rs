//! Orbits on `P^1(Z/p^k)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::mod_inv;
use crate::ratmap::{ProjPoint, RationalMap};

/// A point of `P^1(Z/p^k)` in one of its two affine charts.
///
/// `Affine(x)` is `[x : 1]`; `NearInfinity(u)` is `[1 : u]` with `p | u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModPoint {
    Affine(BigInt),
    NearInfinity(BigInt),
}

impl ModPoint {
    /// Reduction of a rational point. Never fails for a primitive pair.
    pub fn reduce(c: &ProjPoint, p: u64, m: &BigInt) -> ModPoint {
        chart(c.a(), c.b(), p, m).expect("canonical coordinates are coprime")
    }

    pub fn affine(&self) -> Option<&BigInt> {
        match self {
            ModPoint::Affine(x) => Some(x),
            ModPoint::NearInfinity(_) => None,
        }
    }

    fn coords(&self) -> (BigInt, BigInt) {
        match self {
            ModPoint::Affine(x) => (x.clone(), BigInt::one()),
            ModPoint::NearInfinity(u) => (BigInt::one(), u.clone()),
        }
    }
}

/// Place `[a : b]` in a chart, or `None` if both coordinates vanish mod `p`.
pub(crate) fn chart(a: &BigInt, b: &BigInt, p: u64, m: &BigInt) -> Option<ModPoint> {
    let pb = BigInt::from(p);
    if !(b % &pb).is_zero() {
        let inv = mod_inv(b, m)?;
        Some(ModPoint::Affine((a * inv).mod_floor(m)))
    } else if !(a % &pb).is_zero() {
        let inv = mod_inv(a, m)?;
        Some(ModPoint::NearInfinity((b * inv).mod_floor(m)))
    } else {
        None
    }
}

/// One step of `h` modulo `m = p^k`; `None` if the reduction is indeterminate.
pub(crate) fn step(h: &RationalMap, x: &ModPoint, p: u64, m: &BigInt) -> Option<ModPoint> {
    let d = h.degree();
    let (a, b) = x.coords();
    let na = h.p().homog_eval(&a, &b, d).mod_floor(m);
    let nb = h.q().homog_eval(&a, &b, d).mod_floor(m);
    chart(&na, &nb, p, m)
}

/// `c_0, ..., c_{len-1}` modulo `m`. On an indeterminate reduction returns
/// the index that could not be computed.
pub(crate) fn orbit_mod(
    h: &RationalMap,
    c: &ProjPoint,
    p: u64,
    m: &BigInt,
    len: usize,
) -> Result<Vec<ModPoint>, usize> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    out.push(ModPoint::reduce(c, p, m));
    for n in 1..len {
        let next = step(h, &out[n - 1], p, m).ok_or(n)?;
        out.push(next);
    }
    Ok(out)
}

pub(crate) enum CycleOutcome {
    Found { mu: usize, lambda: usize },
    Indeterminate(usize),
    StepCap,
}

/// Brent's cycle detection on the orbit of `x0`.
pub(crate) fn brent(h: &RationalMap, x0: &ModPoint, p: u64, m: &BigInt, max_steps: u64) -> CycleOutcome {
    let f = |x: &ModPoint| step(h, x, p, m);
    let mut power = 1usize;
    let mut lambda = 1usize;
    let mut tortoise = x0.clone();
    let mut hare = match f(x0) {
        Some(y) => y,
        None => return CycleOutcome::Indeterminate(1),
    };
    let mut steps = 1u64;
    while tortoise != hare {
        if power == lambda {
            tortoise = hare.clone();
            power *= 2;
            lambda = 0;
        }
        hare = match f(&hare) {
            Some(y) => y,
            None => return CycleOutcome::Indeterminate(steps as usize + 1),
        };
        lambda += 1;
        steps += 1;
        if steps > max_steps {
            return CycleOutcome::StepCap;
        }
    }
    let mut tortoise = x0.clone();
    let mut hare = x0.clone();
    for _ in 0..lambda {
        hare = f(&hare).expect("already computed");
    }
    let mut mu = 0usize;
    while tortoise != hare {
        tortoise = f(&tortoise).expect("already computed");
        hare = f(&hare).expect("already computed");
        mu += 1;
    }
    CycleOutcome::Found { mu, lambda }
}
