//! Exact orbit bookkeeping with integer pairs `(A_n, B_n)`.
//!
//! In raw mode the pairs follow the homogeneous recurrence
//! `A_{n+1} = P(A_n, B_n)`, `B_{n+1} = Q(A_n, B_n) · B_n^{deg p - deg q}`
//! with no gcd removal, so common factors accumulate exactly as the
//! recurrence dictates. Reduced mode keeps every pair in lowest terms.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::ratmap::{BadPrimeSet, MapError, ProjPoint, RationalMap};

/// Default step cap for raw orbits; values grow doubly exponentially.
pub const RAW_STEP_CAP: usize = 24;
/// Default step cap for reduced orbits.
pub const REDUCED_STEP_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("orbit value {bits} bits exceeds cap {cap}")]
    SizeLimit { bits: u64, cap: u64 },
    #[error("step count {0} exceeds the cap for this mode")]
    StepCap(usize),
    #[error("orbit reached [0:0] at step {0}")]
    IndeterminateOrbit(usize),
    #[error("cross-term identity fails at step {0}")]
    IdentityViolation(usize),
    #[error("operation needs raw pairs")]
    NotRaw,
    #[error("index {0} is outside the computed orbit")]
    OutOfRange(usize),
}

impl OrbitError {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitError::SizeLimit { .. } => "SizeLimit",
            OrbitError::Map(e) => e.name(),
            OrbitError::StepCap(_) => "StepCap",
            OrbitError::IndeterminateOrbit(_) => "IndeterminateOrbit",
            OrbitError::IdentityViolation(_) => "IdentityViolation",
            OrbitError::NotRaw => "NotRaw",
            OrbitError::OutOfRange(_) => "OutOfRange",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitMode {
    Raw,
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPairs {
    pub map: RationalMap,
    pub start: ProjPoint,
    pub pairs: Vec<(BigInt, BigInt)>,
    pub mode: OrbitMode,
}

/// One step of the cross-term check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTerm {
    pub n: usize,
    #[serde(with = "crate::serde_big::bigint")]
    pub lhs: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub rhs: BigInt,
    pub ell: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitIdealEntry {
    pub n: usize,
    #[serde(with = "crate::serde_big::bigint")]
    pub gcd: BigInt,
    pub covered: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitIdealReport {
    pub entries: Vec<UnitIdealEntry>,
    pub violations: Vec<usize>,
}

impl UnitIdealReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Preperiodicity {
    Preperiodic { m: usize, period: usize },
    NotDetected,
}

/// Orbit pairs of `c` under `h` for `n = 0..=n_max`.
///
/// Raw mode requires a normalized map and starts from the canonical
/// coordinates of `c` (so `B_0` is the denominator of `c`).
pub fn orbit_pairs(
    h: &RationalMap,
    c: &ProjPoint,
    n_max: usize,
    mode: OrbitMode,
    max_bits: u64,
) -> Result<OrbitPairs, OrbitError> {
    let cap = match mode {
        OrbitMode::Raw => RAW_STEP_CAP,
        OrbitMode::Reduced => REDUCED_STEP_CAP,
    };
    if n_max > cap {
        return Err(OrbitError::StepCap(n_max));
    }
    if mode == OrbitMode::Raw && !h.is_normalized() {
        return Err(MapError::NotNormalized.into());
    }
    let d = h.degree();
    let mut pairs = Vec::with_capacity(n_max + 1);
    pairs.push((c.a().clone(), c.b().clone()));
    for n in 0..n_max {
        let (a, b) = &pairs[n];
        let na = h.p().homog_eval(a, b, d);
        let nb = h.q().homog_eval(a, b, d);
        if na.is_zero() && nb.is_zero() {
            return Err(OrbitError::IndeterminateOrbit(n + 1));
        }
        let next = match mode {
            OrbitMode::Raw => (na, nb),
            OrbitMode::Reduced => {
                let p = ProjPoint::new(na, nb).map_err(|_| OrbitError::IndeterminateOrbit(n + 1))?;
                (p.a().clone(), p.b().clone())
            }
        };
        let bits = next.0.bits().max(next.1.bits());
        if bits > max_bits {
            return Err(OrbitError::SizeLimit { bits, cap: max_bits });
        }
        pairs.push(next);
    }
    Ok(OrbitPairs { map: h.clone(), start: c.clone(), pairs, mode })
}

impl OrbitPairs {
    pub fn point(&self, n: usize) -> Result<ProjPoint, OrbitError> {
        let (a, b) = self.pairs.get(n).ok_or(OrbitError::OutOfRange(n))?;
        ProjPoint::new(a.clone(), b.clone()).map_err(|_| OrbitError::IndeterminateOrbit(n))
    }
}

/// `lhs = B_n A_{n+1} - A_n B_{n+1}` against `rhs = B_n^ell · F(A_n, B_n)`,
/// where `F` is the homogenized fixed-point polynomial and
/// `ell = 1 + deg p - deg F`.
pub fn cross_term(orbit: &OrbitPairs, n: usize) -> Result<CrossTerm, OrbitError> {
    if orbit.mode != OrbitMode::Raw {
        return Err(OrbitError::NotRaw);
    }
    if n + 1 >= orbit.pairs.len() {
        return Err(OrbitError::OutOfRange(n + 1));
    }
    let fpd = orbit.map.fixed_point_data()?;
    let (a0, b0) = &orbit.pairs[n];
    let (a1, b1) = &orbit.pairs[n + 1];
    let lhs = b0 * a1 - a0 * b1;
    let deg_p = orbit.map.p().deg();
    let (rhs, ell) = if fpd.fp_poly.is_zero() {
        (BigInt::zero(), 1)
    } else {
        let deg_fp = fpd.deg_fp;
        let ell = 1 + deg_p - deg_fp;
        let f = fpd.fp_poly.homog_eval(a0, b0, deg_fp);
        (num_traits::pow(b0.clone(), ell) * f, ell)
    };
    if lhs != rhs {
        return Err(OrbitError::IdentityViolation(n));
    }
    Ok(CrossTerm { n, lhs, rhs, ell })
}

/// Every prime dividing `gcd(A_n, B_n)` must be a bad prime.
pub fn check_unit_ideal(orbit: &OrbitPairs, bad: &BadPrimeSet) -> Result<UnitIdealReport, OrbitError> {
    if orbit.mode != OrbitMode::Raw {
        return Err(OrbitError::NotRaw);
    }
    let mut entries = Vec::with_capacity(orbit.pairs.len());
    let mut violations = Vec::new();
    for (n, (a, b)) in orbit.pairs.iter().enumerate() {
        let g = arith::gcd(a, b);
        let covered = bad.covers_support(&g);
        if !covered {
            violations.push(n);
        }
        entries.push(UnitIdealEntry { n, gcd: g, covered });
    }
    Ok(UnitIdealReport { entries, violations })
}

/// Exact cycle detection on reduced points for up to `cap` steps.
pub fn detect_preperiodicity(
    h: &RationalMap,
    c: &ProjPoint,
    cap: usize,
    max_bits: u64,
) -> Result<Preperiodicity, OrbitError> {
    let mut seen: HashMap<ProjPoint, usize> = HashMap::new();
    let mut x = c.clone();
    for n in 0..=cap {
        if let Some(&m) = seen.get(&x) {
            return Ok(Preperiodicity::Preperiodic { m, period: n - m });
        }
        seen.insert(x.clone(), n);
        if n == cap {
            break;
        }
        let bits = x.bits();
        if bits > max_bits {
            return Err(OrbitError::SizeLimit { bits, cap: max_bits });
        }
        x = h.evaluate(&x)?;
    }
    Ok(Preperiodicity::NotDetected)
}

/// Prime support of `gcd(A_n, B_n)` restricted to primes below `bound`,
/// used for quick diagnostics in reports.
pub fn small_gcd_primes(a: &BigInt, b: &BigInt, bound: u64) -> Vec<u64> {
    let g = arith::gcd(a, b);
    arith::primes_in(2, bound)
        .filter(|&p| arith::valuation(&g, p).map_or(false, |v| v > 0))
        .collect()
}
