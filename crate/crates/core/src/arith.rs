//! Small number-theoretic helpers shared across modules.

use malachite_nz::natural::Natural;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_prime::nt_funcs;
use num_prime::FactorizationConfig;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Nonnegative gcd. Large operands go through a subquadratic gcd; the
/// binary gcd in `num-integer` is quadratic with a large constant.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    if a.bits() < 1024 || b.bits() < 1024 {
        return a.gcd(b);
    }
    let to_nat = |x: &BigInt| Natural::from_limbs_asc(&x.magnitude().to_u64_digits());
    let g = malachite_base::num::arithmetic::traits::Gcd::gcd(to_nat(a), to_nat(b));
    BigInt::from(BigUint::new(
        g.to_limbs_asc().iter().flat_map(|l| [*l as u32, (*l >> 32) as u32]).collect(),
    ))
}

pub fn is_prime(p: u64) -> bool {
    nt_funcs::is_prime64(p)
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&n| is_prime(n))
}

/// Split `n` into prime factors; returns the distinct primes found and any
/// composite cofactors that resisted factorization.
pub fn factor(n: &BigUint) -> (Vec<BigUint>, Vec<BigUint>) {
    if n.is_zero() || n.is_one() {
        return (Vec::new(), Vec::new());
    }
    if let Some(small) = n.to_u64() {
        return (
            nt_funcs::factorize64(small).into_keys().map(BigUint::from).collect(),
            Vec::new(),
        );
    }
    let mut config = FactorizationConfig::default();
    config.rho_trials = 32;
    let (found, rest) = nt_funcs::factors(n.clone(), Some(config));
    (found.into_keys().collect(), rest.unwrap_or_default())
}

/// `v_p(n)`; `None` for zero.
pub fn valuation(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// `v_p` of a nonzero rational.
pub fn rational_valuation(r: &BigRational, p: u64) -> i64 {
    let num = valuation(r.numer(), p).expect("nonzero rational") as i64;
    let den = valuation(r.denom(), p).expect("nonzero denominator") as i64;
    num - den
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Reduce a projective point `[a:b]` with `b` a unit modulo `m` to `a/b mod m`.
pub fn reduce_ratio(a: &BigInt, b: &BigInt, m: &BigInt) -> Option<BigInt> {
    mod_inv(b, m).map(|inv| (a * inv).mod_floor(m))
}

/// Multiplicative order of `x` modulo the prime `p` (`x` a unit).
pub fn order_mod_prime(x: u64, p: u64) -> u64 {
    let x = x % p;
    assert!(x != 0, "order of zero");
    let n = p - 1;
    let mut ord = n;
    for (q, _) in nt_funcs::factorize64(n) {
        while ord % q == 0 && pow_mod(x, ord / q, p) == 1 {
            ord /= q;
        }
    }
    ord
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base as u128) % m128;
    let mut acc = 1u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small_and_large() {
        let (p, rest) = factor(&BigUint::from(360u32));
        assert_eq!(p, vec![2u32, 3, 5].into_iter().map(BigUint::from).collect::<Vec<_>>());
        assert!(rest.is_empty());
        let big = BigUint::from(1_000_000_007u64) * BigUint::from(998_244_353u64) * BigUint::from(1u64 << 40);
        let (p, rest) = factor(&big);
        assert!(rest.is_empty());
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn orders_and_valuations() {
        assert_eq!(order_mod_prime(2, 7), 3);
        assert_eq!(order_mod_prime(3, 7), 6);
        assert_eq!(valuation(&BigInt::from(7 * 7 * 7 * 5 * 2 * 2 * 3), 7), Some(3));
        assert_eq!(valuation(&BigInt::zero(), 7), None);
        let r = BigRational::new(BigInt::from(49), BigInt::from(3));
        assert_eq!(rational_valuation(&r, 7), 2);
        assert_eq!(rational_valuation(&r, 3), -1);
        assert_eq!(mod_inv(&BigInt::from(2), &BigInt::from(49)), Some(BigInt::from(25)));
        assert_eq!(mod_inv(&BigInt::from(7), &BigInt::from(49)), None);
    }
}
