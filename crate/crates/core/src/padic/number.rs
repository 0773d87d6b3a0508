use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{PadicContext, PadicError};
use crate::arith;

/// Absolute precision recorded for an exact zero.
pub const EXACT_ZERO_PREC: i64 = 1 << 40;

/// `unit · p^val`, known modulo `p^(val + rel)`; or zero known modulo `p^abs`.
///
/// Exact integers keep `N` significant digits; the integer zero is exact and
/// carries absolute precision [`EXACT_ZERO_PREC`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PadicJson", into = "PadicJson")]
pub struct PadicNumber {
    ctx: PadicContext,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Zero { abs: i64 },
    Unit { val: i64, unit: BigInt, rel: u32 },
}

fn split_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

impl PadicNumber {
    fn make(ctx: PadicContext, val: i64, unit: BigInt, rel: i64) -> Self {
        let rel = rel.min(ctx.digits() as i64);
        if rel <= 0 {
            return Self::zero_to(ctx, val);
        }
        let m = ctx.pow(rel as u32);
        PadicNumber { ctx, repr: Repr::Unit { val, unit: unit.mod_floor(&m), rel: rel as u32 } }
    }

    /// The exact zero.
    pub fn zero(ctx: PadicContext) -> Self {
        Self::zero_to(ctx, EXACT_ZERO_PREC)
    }

    /// Zero known modulo `p^abs`.
    pub fn zero_to(ctx: PadicContext, abs: i64) -> Self {
        PadicNumber { ctx, repr: Repr::Zero { abs: abs.min(EXACT_ZERO_PREC) } }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs } if abs >= EXACT_ZERO_PREC)
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::from_i64(ctx, 1)
    }

    pub fn from_i64(ctx: PadicContext, n: i64) -> Self {
        Self::from_int(ctx, &BigInt::from(n))
    }

    /// An exact integer, kept to `N` significant digits.
    pub fn from_int(ctx: PadicContext, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(ctx);
        }
        let (v, u) = split_valuation(n, ctx.p());
        Self::make(ctx, v, u, ctx.digits() as i64)
    }

    pub fn from_rational(ctx: PadicContext, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero(ctx);
        }
        let (vn, un) = split_valuation(r.numer(), ctx.p());
        let (vd, ud) = split_valuation(r.denom(), ctx.p());
        let m = ctx.modulus();
        let inv = arith::mod_inv(&ud, &m).expect("unit part is invertible");
        Self::make(ctx, vn - vd, un * inv, ctx.digits() as i64)
    }

    /// An integer known only modulo `p^k`.
    pub fn from_residue(ctx: PadicContext, r: &BigInt, k: u32) -> Self {
        let r = r.mod_floor(&ctx.pow(k));
        if r.is_zero() {
            return Self::zero_to(ctx, k as i64);
        }
        let (v, u) = split_valuation(&r, ctx.p());
        Self::make(ctx, v, u, k as i64 - v)
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Exact valuation, or `None` for a zero at precision.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { val, .. } => Some(*val),
        }
    }

    /// Valuation lower bound: the valuation of a unit, the precision of a zero.
    pub fn eff_valuation(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, .. } => *val,
        }
    }

    /// Absolute precision: the value is known modulo `p^abs_prec`.
    pub fn abs_prec(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, rel, .. } => val + *rel as i64,
        }
    }

    pub fn rel_prec(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Unit { rel, .. } => *rel,
        }
    }

    pub fn unit_part(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { unit, .. } => Some(unit),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.eff_valuation() >= 0
    }

    /// Forget digits beyond `p^abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        if abs >= self.abs_prec() {
            return self.clone();
        }
        match &self.repr {
            Repr::Zero { .. } => Self::zero_to(self.ctx, abs),
            Repr::Unit { val, unit, .. } => Self::make(self.ctx, *val, unit.clone(), abs - val),
        }
    }

    /// The value modulo `p^k` as an integer in `[0, p^k)`.
    pub fn residue(&self, k: u32) -> Result<BigInt, PadicError> {
        if (k as i64) > self.abs_prec() {
            return Err(PadicError::PrecisionLoss { wanted: k as i64, known: self.abs_prec() });
        }
        match &self.repr {
            Repr::Zero { .. } => Ok(BigInt::zero()),
            Repr::Unit { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NonIntegralArgument);
                }
                if *val >= k as i64 {
                    return Ok(BigInt::zero());
                }
                Ok((unit * self.ctx.pow(*val as u32)).mod_floor(&self.ctx.pow(k)))
            }
        }
    }

    /// Smallest non-negative integer agreeing with the value to all known digits.
    pub fn representative(&self) -> Result<BigInt, PadicError> {
        if self.is_zero() {
            return Ok(BigInt::zero());
        }
        let k = self.abs_prec().max(0) as u32;
        self.residue(k)
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { .. } => Err(PadicError::DivisionByZero),
            Repr::Unit { val, unit, rel } => {
                let m = self.ctx.pow(*rel);
                let inv = arith::mod_inv(unit, &m).expect("unit is invertible");
                Ok(Self::make(self.ctx, -val, inv, *rel as i64))
            }
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self, PadicError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.ctx);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiply by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero { abs } => Self::zero_to(self.ctx, abs + k),
            Repr::Unit { val, unit, rel } => PadicNumber {
                ctx: self.ctx,
                repr: Repr::Unit { val: val + k, unit: unit.clone(), rel: *rel },
            },
        }
    }

    /// Agreement modulo `p^k`.
    pub fn eq_mod(&self, o: &Self, k: i64) -> bool {
        (self - o).eff_valuation() >= k
    }
}

impl Add for &PadicNumber {
    type Output = PadicNumber;
    fn add(self, o: &PadicNumber) -> PadicNumber {
        let ctx = self.ctx;
        let abs = self.abs_prec().min(o.abs_prec());
        let units: Vec<(i64, &BigInt)> = [self, o]
            .iter()
            .filter_map(|x| match &x.repr {
                Repr::Unit { val, unit, .. } => Some((*val, unit)),
                Repr::Zero { .. } => None,
            })
            .collect();
        let vmin = match units.iter().map(|u| u.0).min() {
            Some(v) if v < abs => v,
            _ => return PadicNumber::zero_to(ctx, abs),
        };
        let m = ctx.pow((abs - vmin) as u32);
        let mut sum = BigInt::zero();
        for (v, u) in units {
            sum += u * ctx.pow((v - vmin) as u32);
        }
        let sum = sum.mod_floor(&m);
        if sum.is_zero() {
            return PadicNumber::zero_to(ctx, abs);
        }
        let (v2, u) = split_valuation(&sum, ctx.p());
        PadicNumber::make(ctx, vmin + v2, u, abs - vmin - v2)
    }
}

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, unit, rel } => PadicNumber::make(self.ctx, *val, -unit, *rel as i64),
        }
    }
}

impl Sub for &PadicNumber {
    type Output = PadicNumber;
    fn sub(self, o: &PadicNumber) -> PadicNumber {
        self + &(-o)
    }
}

impl Mul for &PadicNumber {
    type Output = PadicNumber;
    fn mul(self, o: &PadicNumber) -> PadicNumber {
        let ctx = self.ctx;
        match (&self.repr, &o.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => PadicNumber::zero_to(ctx, a + b),
            (Repr::Zero { abs }, Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::Zero { abs }) => {
                PadicNumber::zero_to(ctx, abs + val)
            }
            (Repr::Unit { val: v1, unit: u1, rel: r1 }, Repr::Unit { val: v2, unit: u2, rel: r2 }) => {
                PadicNumber::make(ctx, v1 + v2, u1 * u2, (*r1).min(*r2) as i64)
            }
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.p();
        match &self.repr {
            Repr::Zero { .. } if self.is_exact_zero() => write!(f, "0"),
            Repr::Zero { abs } => write!(f, "O({p}^{abs})"),
            Repr::Unit { val, unit, .. } => {
                if *val == 0 {
                    write!(f, "{unit} + O({p}^{})", self.abs_prec())
                } else {
                    write!(f, "{unit}*{p}^{val} + O({p}^{})", self.abs_prec())
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PadicJson {
    p: u64,
    n: u32,
    val: Option<i64>,
    unit: String,
    abs: i64,
}

impl From<PadicNumber> for PadicJson {
    fn from(x: PadicNumber) -> Self {
        let (val, unit) = match &x.repr {
            Repr::Zero { .. } => (None, "0".to_string()),
            Repr::Unit { val, unit, .. } => (Some(*val), unit.to_string()),
        };
        PadicJson { p: x.ctx.p(), n: x.ctx.digits(), val, unit, abs: x.abs_prec() }
    }
}

impl TryFrom<PadicJson> for PadicNumber {
    type Error = String;
    fn try_from(j: PadicJson) -> Result<Self, String> {
        let ctx = PadicContext::new(j.p, j.n).map_err(|e| e.to_string())?;
        match j.val {
            None => Ok(PadicNumber::zero_to(ctx, j.abs)),
            Some(val) => {
                let unit: BigInt = j.unit.parse().map_err(|_| format!("bad unit {:?}", j.unit))?;
                if unit.is_negative() || (&unit % BigInt::from(j.p)).is_zero() {
                    return Err("unit part must be a positive p-adic unit".into());
                }
                let x = PadicNumber::make(ctx, val, unit, j.abs - val);
                if x.abs_prec() != j.abs || x.valuation() != Some(val) {
                    return Err("inconsistent precision".into());
                }
                Ok(x)
            }
        }
    }
}

impl PadicNumber {
    /// `true` when the value is the integer one at its precision.
    pub fn is_one(&self) -> bool {
        matches!(&self.repr, Repr::Unit { val: 0, unit, .. } if unit.is_one())
    }
}
