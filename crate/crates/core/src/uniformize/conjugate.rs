//! The local conjugate `f(x) = (h^a(c_m + p x) - c_m) / p`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::modular::{orbit_mod, ModPoint};
use super::{GoodPrimeCertificate, UniformizeError};
use crate::arith::mod_inv;
use crate::padic::{PadicContext, PadicNumber, TailBound, TateSeries};
use crate::poly::IntPoly;
use crate::ratmap::{ProjPoint, RationalMap};

type Series = Vec<BigInt>;

fn mul_trunc(u: &Series, v: &Series, k: usize, m: &BigInt) -> Series {
    let mut out = vec![BigInt::zero(); k + 1];
    for (i, ui) in u.iter().enumerate().take(k + 1) {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate().take(k + 1 - i) {
            out[i + j] += ui * vj;
        }
    }
    out.iter().map(|x| x.mod_floor(m)).collect()
}

fn inv_trunc(u: &Series, k: usize, m: &BigInt) -> Option<Series> {
    let b0 = mod_inv(&u[0], m)?;
    let mut out = vec![b0.clone()];
    for n in 1..=k {
        let mut acc = BigInt::zero();
        for i in 1..=n.min(u.len() - 1) {
            acc += &u[i] * &out[n - i];
        }
        out.push((-&b0 * acc).mod_floor(m));
    }
    Some(out)
}

fn poly_at(f: &IntPoly, s: &Series, k: usize, m: &BigInt) -> Series {
    let mut acc = vec![BigInt::zero(); k + 1];
    for c in f.coeffs().iter().rev() {
        acc = mul_trunc(&acc, s, k, m);
        acc[0] = (&acc[0] + c).mod_floor(m);
    }
    acc
}

/// `f` as an integral Tate series of degree `k`, at the precision of `ctx`.
///
/// The expansion of `h^a` around `c_m` is carried modulo `p^(N+2)` up to
/// degree `min(k, N+1)`; past that the factor `p^(r-1)` already kills every
/// coefficient at working precision.
pub fn local_conjugate(
    h: &RationalMap,
    c: &ProjPoint,
    cert: &GoodPrimeCertificate,
    ctx: PadicContext,
    k: usize,
) -> Result<TateSeries, UniformizeError> {
    if ctx.p() != cert.p {
        return Err(UniformizeError::InvalidParameters("context prime differs from certificate".into()));
    }
    let p = cert.p;
    let n = ctx.digits();
    let big_m = ctx.pow(n + 2);
    let invalid = |what: String| UniformizeError::CertificateInvalid(what);
    let orbit = orbit_mod(h, c, p, &big_m, cert.m + 1)
        .map_err(|i| invalid(format!("orbit reduction is indeterminate at index {i}")))?;
    let c_m = match &orbit[cert.m] {
        ModPoint::Affine(x) => x.clone(),
        ModPoint::NearInfinity(_) => return Err(invalid("c_m is a pole residue".into())),
    };
    let k_eff = k.min(n as usize + 1).max(1);
    let mut s: Series = vec![BigInt::zero(); k_eff + 1];
    s[0] = c_m.clone();
    s[1] = BigInt::from(1);
    for step in 0..cert.a {
        let num = poly_at(h.p(), &s, k_eff, &big_m);
        let den = poly_at(h.q(), &s, k_eff, &big_m);
        let den_inv = inv_trunc(&den, k_eff, &big_m)
            .ok_or_else(|| invalid(format!("denominator vanishes mod p after {step} steps")))?;
        s = mul_trunc(&num, &den_inv, k_eff, &big_m);
    }
    let pb = BigInt::from(p);
    let shifted = &s[0] - &c_m;
    if !(&shifted % &pb).is_zero() {
        return Err(invalid("h^a(c_m) differs from c_m mod p".into()));
    }
    let modulus = ctx.modulus();
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(PadicNumber::from_residue(ctx, &(shifted / &pb).mod_floor(&modulus), n));
    let mut scale = BigInt::from(1);
    for sr in s.iter().skip(1) {
        coeffs.push(PadicNumber::from_residue(ctx, &(sr * &scale).mod_floor(&modulus), n));
        scale *= &pb;
    }
    while coeffs.len() < k + 1 {
        coeffs.push(PadicNumber::zero_to(ctx, n as i64));
    }
    let f = TateSeries::new(ctx, coeffs, TailBound::AtLeast((k as i64).min(n as i64)))?;
    check_congruent_to_identity(&f)?;
    Ok(f)
}

/// `v(f_0) >= 1`, `v(f_1 - 1) >= 1` and `v(f_r) >= 1` for `r >= 2`.
pub fn check_congruent_to_identity(f: &TateSeries) -> Result<(), UniformizeError> {
    let one = PadicNumber::one(f.ctx());
    for (r, a) in f.coeffs().iter().enumerate() {
        let v = if r == 1 { (a - &one).eff_valuation() } else { a.eff_valuation() };
        if v < 1 {
            return Err(UniformizeError::CertificateInvalid(format!(
                "coefficient {r} of the local conjugate is not congruent to the identity"
            )));
        }
    }
    Ok(())
}
