//! Good-prime search and independent certificate checks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::modular::{brent, orbit_mod, step, CycleOutcome, ModPoint};
use super::UniformizeError;
use crate::arith;
use crate::ratmap::{ProjPoint, RationalMap};

/// Offset `m` and period `a` at a prime `p` such that `c_m` has a unit
/// denominator, `h^a(c_m) ≡ c_m (mod p^2)` and `(h^a)'(c_m) ≡ 1 (mod p)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPrimeCertificate {
    pub p: u64,
    pub m: usize,
    pub a: u64,
    pub checks: CertificateChecks,
}

/// The three congruences, recomputed from `(h, c, p, m, a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateChecks {
    /// `c_m mod p^2` in the affine chart.
    pub c_m_mod_p2: u64,
    /// The homogenized denominator at `c_m`, mod `p`.
    pub q_at_c_m_mod_p: u64,
    /// `h^a(c_m) mod p^2`.
    pub return_mod_p2: u64,
    /// `(h^a)'(c_m) mod p`.
    pub multiplier_mod_p: u64,
    pub denominator_unit: bool,
    pub returns_mod_p2: bool,
    pub multiplier_is_one: bool,
}

impl CertificateChecks {
    pub fn all_pass(&self) -> bool {
        self.denominator_unit && self.returns_mod_p2 && self.multiplier_is_one
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCaps {
    /// Largest admissible period `a`.
    pub max_period: u64,
    /// Step budget for cycle detection modulo `p^2`.
    pub max_steps: u64,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_period: 1 << 20, max_steps: 1 << 22 }
    }
}

/// Why a prime was accepted or skipped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum PrimeOutcome {
    BadPrime,
    /// Reduction mod `p` of some orbit point is `[0:0]`.
    Indeterminate { index: usize },
    /// The cycle mod `p^2` passes through a pole residue.
    PoleCollision { index: usize },
    /// The cycle multiplier vanishes mod `p`.
    Superattracting,
    PeriodCap { period: u64 },
    StepCap,
    Certified { m: usize, a: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeAttempt {
    pub p: u64,
    #[serde(flatten)]
    pub outcome: PrimeOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSearch {
    pub p_min: u64,
    pub p_max: u64,
    pub attempts: Vec<PrimeAttempt>,
    pub certificates: Vec<GoodPrimeCertificate>,
}

/// Largest prime accepted by the search; keeps `p^2` inside a `u64`.
pub const MAX_SEARCH_PRIME: u64 = 1 << 31;

/// Try primes in increasing order and keep the first `limit` certificates.
pub fn search_good_primes(
    h: &RationalMap,
    c: &ProjPoint,
    p_min: u64,
    p_max: u64,
    caps: SearchCaps,
    limit: usize,
) -> Result<PrimeSearch, UniformizeError> {
    if p_max > MAX_SEARCH_PRIME {
        return Err(UniformizeError::InvalidParameters(format!("p_max must be at most {MAX_SEARCH_PRIME}")));
    }
    if p_min > p_max {
        return Err(UniformizeError::InvalidParameters(format!("empty prime range [{p_min}, {p_max}]")));
    }
    let bad = h.bad_primes(c);
    let mut attempts = Vec::new();
    let mut certificates = Vec::new();
    for p in arith::primes_in(p_min.max(5), p_max) {
        if certificates.len() >= limit {
            break;
        }
        let outcome = if bad.contains(p) {
            PrimeOutcome::BadPrime
        } else {
            try_prime(h, c, p, caps)
        };
        if let PrimeOutcome::Certified { m, a } = outcome {
            let checks = verify_certificate(h, c, p, m, a)?;
            if !checks.all_pass() {
                return Err(UniformizeError::CertificateInvalid(format!(
                    "independent re-check failed for p = {p}, m = {m}, a = {a}"
                )));
            }
            certificates.push(GoodPrimeCertificate { p, m, a, checks });
        }
        attempts.push(PrimeAttempt { p, outcome });
    }
    Ok(PrimeSearch { p_min, p_max, attempts, certificates })
}

/// The smallest good prime in `[p_min, p_max]`, with minimal `m` and `a`.
pub fn find_good_prime(
    h: &RationalMap,
    c: &ProjPoint,
    p_min: u64,
    p_max: u64,
    caps: SearchCaps,
) -> Result<GoodPrimeCertificate, UniformizeError> {
    let search = search_good_primes(h, c, p_min, p_max, caps, 1)?;
    search
        .certificates
        .into_iter()
        .next()
        .ok_or(UniformizeError::NoPrimeFound { p_min, p_max, tried: search.attempts.len() })
}

fn try_prime(h: &RationalMap, c: &ProjPoint, p: u64, caps: SearchCaps) -> PrimeOutcome {
    let p2 = BigInt::from(p * p);
    let x0 = ModPoint::reduce(c, p, &p2);
    let (mu, lambda) = match brent(h, &x0, p, &p2, caps.max_steps) {
        CycleOutcome::Found { mu, lambda } => (mu, lambda),
        CycleOutcome::Indeterminate(index) => return PrimeOutcome::Indeterminate { index },
        CycleOutcome::StepCap => return PrimeOutcome::StepCap,
    };
    let cycle = match orbit_mod(h, c, p, &p2, mu + lambda) {
        Ok(o) => o,
        Err(index) => return PrimeOutcome::Indeterminate { index },
    };
    let pb = BigInt::from(p);
    let w = crate::ratmap::wronskian(h.p(), h.q());
    let mut multiplier = BigInt::from(1);
    for (j, x) in cycle.iter().enumerate().skip(mu) {
        let Some(x) = x.affine() else {
            return PrimeOutcome::PoleCollision { index: j };
        };
        let qx = h.q().eval_mod(x, &pb);
        if qx.is_zero() {
            return PrimeOutcome::PoleCollision { index: j };
        }
        let qinv = arith::mod_inv(&qx, &pb).expect("unit");
        multiplier = (multiplier * w.eval_mod(x, &pb) * &qinv * &qinv).mod_floor(&pb);
    }
    let lam = multiplier.to_u64().expect("reduced mod p");
    if lam == 0 {
        return PrimeOutcome::Superattracting;
    }
    let a = lambda as u64 * arith::order_mod_prime(lam, p);
    if a > caps.max_period {
        return PrimeOutcome::PeriodCap { period: a };
    }
    PrimeOutcome::Certified { m: mu, a }
}

/// `(x, x')` with `ε^2 = 0`, reduced mod a fixed modulus.
#[derive(Clone)]
struct Dual(BigInt, BigInt);

fn dual_mul(u: &Dual, v: &Dual, m: &BigInt) -> Dual {
    Dual((&u.0 * &v.0).mod_floor(m), (&u.0 * &v.1 + &u.1 * &v.0).mod_floor(m))
}

fn dual_homog(f: &crate::poly::IntPoly, a: &Dual, b: &Dual, d: usize, m: &BigInt) -> Dual {
    let mut b_pows = vec![Dual(BigInt::from(1), BigInt::zero())];
    for i in 0..d {
        let next = dual_mul(&b_pows[i], b, m);
        b_pows.push(next);
    }
    let mut acc = Dual(BigInt::zero(), BigInt::zero());
    let mut a_pow = Dual(BigInt::from(1), BigInt::zero());
    for i in 0..=d {
        let c = f.coeff(i);
        if !c.is_zero() {
            let t = dual_mul(&a_pow, &b_pows[d - i], m);
            acc.0 = (acc.0 + &c * t.0).mod_floor(m);
            acc.1 = (acc.1 + &c * t.1).mod_floor(m);
        }
        if i < d {
            a_pow = dual_mul(&a_pow, a, m);
        }
    }
    acc
}

/// Recompute the three congruences along a separate path: raw homogeneous
/// pairs mod `p^2` (no chart normalization) carrying a dual part for the
/// derivative of `h^a`.
pub fn verify_certificate(
    h: &RationalMap,
    c: &ProjPoint,
    p: u64,
    m: usize,
    a: u64,
) -> Result<CertificateChecks, UniformizeError> {
    if p < 5 || !arith::is_prime(p) || p > MAX_SEARCH_PRIME || a == 0 {
        return Err(UniformizeError::InvalidParameters(format!("bad certificate parameters p = {p}, a = {a}")));
    }
    let d = h.degree();
    let p2 = BigInt::from(p * p);
    let pb = BigInt::from(p);
    let mut pa = c.a().mod_floor(&p2);
    let mut pq = c.b().mod_floor(&p2);
    for _ in 0..m {
        let na = h.p().homog_eval(&pa, &pq, d).mod_floor(&p2);
        let nb = h.q().homog_eval(&pa, &pq, d).mod_floor(&p2);
        pa = na;
        pq = nb;
    }
    let invalid = |what: &str| UniformizeError::CertificateInvalid(format!("{what} at p = {p}, m = {m}"));
    let b_inv = arith::mod_inv(&pq, &p2).ok_or_else(|| invalid("c_m is not in the affine chart"))?;
    let x = (&pa * &b_inv).mod_floor(&p2);
    let q_at = h.q().homog_eval(&pa, &pq, d).mod_floor(&pb);
    let denominator_unit = !q_at.is_zero();
    let mut u = Dual(pa.clone(), pq.clone());
    let mut v = Dual(pq.clone(), BigInt::zero());
    for _ in 0..a {
        let nu = dual_homog(h.p(), &u, &v, d, &p2);
        let nv = dual_homog(h.q(), &u, &v, d, &p2);
        u = nu;
        v = nv;
    }
    let (ret, deriv) = match arith::mod_inv(&v.0, &p2) {
        Some(vi) => {
            let ret = (&u.0 * &vi).mod_floor(&p2);
            let deriv = ((&u.1 * &v.0 - &u.0 * &v.1) * &vi * &vi).mod_floor(&pb);
            (ret, deriv)
        }
        None => return Err(invalid("h^a(c_m) is not in the affine chart")),
    };
    let to_u64 = |z: &BigInt| z.to_u64().expect("reduced mod p^2");
    Ok(CertificateChecks {
        c_m_mod_p2: to_u64(&x),
        q_at_c_m_mod_p: to_u64(&q_at),
        return_mod_p2: to_u64(&ret),
        multiplier_mod_p: to_u64(&deriv),
        denominator_unit,
        returns_mod_p2: ret == x,
        multiplier_is_one: deriv == BigInt::from(1),
    })
}

/// Consecutive orbit points mod `p^2`, used only for reporting.
pub fn orbit_residues(h: &RationalMap, c: &ProjPoint, p: u64, len: usize) -> Vec<Option<u64>> {
    let p2 = BigInt::from(p) * BigInt::from(p);
    let mut out = Vec::with_capacity(len);
    let mut x = ModPoint::reduce(c, p, &p2);
    for _ in 0..len {
        out.push(x.affine().and_then(|v| v.to_u64()));
        match step(h, &x, p, &p2) {
            Some(y) => x = y,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> RationalMap {
        RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap()
    }

    #[test]
    fn squaring_at_seven() {
        let cert = find_good_prime(&sq(), &ProjPoint::from_int(2), 7, 50, SearchCaps::default()).unwrap();
        assert_eq!((cert.p, cert.m, cert.a), (7, 0, 6));
        assert_eq!(cert.checks.c_m_mod_p2, 2);
        assert_eq!(cert.checks.return_mod_p2, 2);
        assert_eq!(cert.checks.multiplier_mod_p, 1);
    }

    #[test]
    fn squaring_at_five_has_offset() {
        let cert = find_good_prime(&sq(), &ProjPoint::from_int(2), 5, 5, SearchCaps::default()).unwrap();
        assert_eq!((cert.p, cert.m, cert.a), (5, 2, 4));
    }

    #[test]
    fn translation_period_is_p_squared() {
        let h = RationalMap::from_i64s(&[1, 1], &[1]).unwrap();
        for p in [5u64, 7, 11] {
            let cert = find_good_prime(&h, &ProjPoint::from_int(0), p, p, SearchCaps::default()).unwrap();
            assert_eq!((cert.m, cert.a), (0, p * p));
        }
    }

    #[test]
    fn period_cap_is_reported() {
        let h = RationalMap::from_i64s(&[1, 1], &[1]).unwrap();
        let caps = SearchCaps { max_period: 10, ..SearchCaps::default() };
        let err = find_good_prime(&h, &ProjPoint::from_int(0), 5, 7, caps).unwrap_err();
        assert!(matches!(err, UniformizeError::NoPrimeFound { tried: 2, .. }));
    }

    #[test]
    fn bad_primes_are_skipped() {
        // 5 divides the denominator of c
        let s = search_good_primes(&sq(), &ProjPoint::from_ratio(2, 5).unwrap(), 5, 5, SearchCaps::default(), 1)
            .unwrap();
        assert_eq!(s.attempts[0].outcome, PrimeOutcome::BadPrime);
    }

    #[test]
    fn wrong_period_fails_recheck() {
        let checks = verify_certificate(&sq(), &ProjPoint::from_int(2), 7, 0, 3).unwrap();
        assert!(!checks.returns_mod_p2);
        let checks = verify_certificate(&sq(), &ProjPoint::from_int(2), 7, 0, 12).unwrap();
        assert!(checks.all_pass());
    }
}
