use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{PadicContext, PadicError, PadicNumber, COMPOSE_DEGREE_CAP};

/// What is known about the coefficients beyond the stored truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "v")]
pub enum TailBound {
    /// The series is a polynomial.
    Exact,
    /// Every omitted coefficient has valuation at least `v`.
    AtLeast(i64),
}

impl TailBound {
    pub fn min(self, o: TailBound) -> TailBound {
        match (self, o) {
            (TailBound::Exact, t) | (t, TailBound::Exact) => t,
            (TailBound::AtLeast(a), TailBound::AtLeast(b)) => TailBound::AtLeast(a.min(b)),
        }
    }

    pub fn cap(self) -> Option<i64> {
        match self {
            TailBound::Exact => None,
            TailBound::AtLeast(v) => Some(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StrassmanBound {
    ZeroSeries,
    /// At most `k0` zeros in `Z_p`. `proved` is false when an unresolved
    /// coefficient or the tail could attain the minimal valuation past `k0`.
    Bound { k0: usize, proved: bool },
}

/// A truncated power series `Σ a_k z^k` with integral coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct TateSeries {
    ctx: PadicContext,
    coeffs: Vec<PadicNumber>,
    tail: TailBound,
}

impl TateSeries {
    pub fn new(ctx: PadicContext, coeffs: Vec<PadicNumber>, tail: TailBound) -> Result<Self, PadicError> {
        if coeffs.iter().any(|c| c.ctx() != ctx) {
            return Err(PadicError::ContextMismatch);
        }
        if coeffs.iter().any(|c| !c.is_integral()) || tail.cap().map_or(false, |v| v < 0) {
            return Err(PadicError::NonIntegral);
        }
        let coeffs = if coeffs.is_empty() { vec![PadicNumber::zero(ctx)] } else { coeffs };
        Ok(TateSeries { ctx, coeffs, tail })
    }

    pub fn from_ints(ctx: PadicContext, coeffs: &[i64]) -> Self {
        let cs = coeffs.iter().map(|&c| PadicNumber::from_i64(ctx, c)).collect();
        Self::new(ctx, cs, TailBound::Exact).expect("integers are integral")
    }

    pub fn from_bigints(ctx: PadicContext, coeffs: &[BigInt]) -> Self {
        let cs = coeffs.iter().map(|c| PadicNumber::from_int(ctx, c)).collect();
        Self::new(ctx, cs, TailBound::Exact).expect("integers are integral")
    }

    /// Coefficients known modulo `p^N`.
    pub fn from_residues(ctx: PadicContext, coeffs: &[BigInt]) -> Self {
        let cs = coeffs.iter().map(|c| PadicNumber::from_residue(ctx, c, ctx.digits())).collect();
        Self::new(ctx, cs, TailBound::Exact).expect("residues are integral")
    }

    /// The series `z`.
    pub fn identity(ctx: PadicContext) -> Self {
        Self::from_ints(ctx, &[0, 1])
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> PadicNumber {
        self.coeffs.get(k).cloned().unwrap_or_else(|| match self.tail {
            TailBound::Exact => PadicNumber::zero(self.ctx),
            TailBound::AtLeast(v) => PadicNumber::zero_to(self.ctx, v),
        })
    }

    pub fn tail(&self) -> TailBound {
        self.tail
    }

    /// Truncation degree `K`.
    pub fn trunc_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn with_tail(mut self, tail: TailBound) -> Result<Self, PadicError> {
        if tail.cap().map_or(false, |v| v < 0) {
            return Err(PadicError::NonIntegral);
        }
        self.tail = tail;
        Ok(self)
    }

    /// Keep degrees `0..=k`; the dropped coefficients fold into the tail bound.
    pub fn truncate(&self, k: usize) -> Self {
        if k + 1 >= self.coeffs.len() {
            return self.clone();
        }
        let dropped = self.coeffs[k + 1..].iter().map(|c| c.eff_valuation()).min().expect("nonempty");
        TateSeries {
            ctx: self.ctx,
            coeffs: self.coeffs[..=k].to_vec(),
            tail: self.tail.min(TailBound::AtLeast(dropped)),
        }
    }

    /// Horner evaluation at an integral argument. The result's precision is
    /// capped by the tail bound.
    pub fn eval(&self, x: &PadicNumber) -> Result<PadicNumber, PadicError> {
        if !x.is_integral() {
            return Err(PadicError::NonIntegralArgument);
        }
        let mut acc = PadicNumber::zero(self.ctx);
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = if i + 1 == self.coeffs.len() { c.clone() } else { &(&acc * x) + c };
        }
        Ok(match self.tail {
            TailBound::Exact => acc,
            TailBound::AtLeast(v) => acc.truncate_abs(v),
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..k).map(|i| &self.coeff_or_zero(i) + &o.coeff_or_zero(i)).collect();
        TateSeries { ctx: self.ctx, coeffs, tail: self.tail.min(o.tail) }
    }

    pub fn neg(&self) -> Self {
        TateSeries { ctx: self.ctx, coeffs: self.coeffs.iter().map(|c| -c).collect(), tail: self.tail }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &PadicNumber) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        let shift = s.eff_valuation().max(0);
        let tail = match self.tail {
            TailBound::Exact => TailBound::Exact,
            TailBound::AtLeast(v) => TailBound::AtLeast(v + shift),
        };
        TateSeries { ctx: self.ctx, coeffs, tail }
    }

    /// Full product, degree `K1 + K2`.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len() + o.coeffs.len() - 1;
        let mut out = vec![PadicNumber::zero(self.ctx); n];
        let mut touched = vec![false; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                let t = a * b;
                out[i + j] = if touched[i + j] { &out[i + j] + &t } else { t };
                touched[i + j] = true;
            }
        }
        TateSeries { ctx: self.ctx, coeffs: out, tail: self.tail.min(o.tail) }
    }

    fn coeff_or_zero(&self, i: usize) -> PadicNumber {
        self.coeffs.get(i).cloned().unwrap_or_else(|| PadicNumber::zero(self.ctx))
    }

    /// `self(g(z))` truncated at degree `k_out`.
    pub fn compose(&self, g: &Self, k_out: usize) -> Result<Self, PadicError> {
        let full = self.trunc_degree() * g.trunc_degree();
        if full > COMPOSE_DEGREE_CAP {
            return Err(PadicError::TruncationOverflow(full));
        }
        let mut acc = TateSeries {
            ctx: self.ctx,
            coeffs: vec![self.coeffs.last().expect("nonempty").clone()],
            tail: TailBound::Exact,
        };
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(g).add(&TateSeries { ctx: self.ctx, coeffs: vec![c.clone()], tail: TailBound::Exact });
        }
        let tail = self.tail.min(g.tail);
        let mut out = acc.truncate(k_out);
        out.tail = out.tail.min(tail);
        Ok(out)
    }

    pub fn derivative(&self) -> Self {
        let coeffs: Vec<PadicNumber> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * &PadicNumber::from_i64(self.ctx, k as i64))
            .collect();
        let coeffs = if coeffs.is_empty() { vec![PadicNumber::zero(self.ctx)] } else { coeffs };
        TateSeries { ctx: self.ctx, coeffs, tail: self.tail }
    }

    /// Valuation profile; zeros report their precision.
    pub fn profile(&self) -> Vec<i64> {
        self.coeffs.iter().map(|c| c.eff_valuation()).collect()
    }

    /// Largest index attaining the minimal coefficient valuation.
    pub fn strassman_bound(&self) -> StrassmanBound {
        let vmin = match self.coeffs.iter().filter_map(|c| c.valuation()).min() {
            Some(v) => v,
            None => return StrassmanBound::ZeroSeries,
        };
        let k0 = self.coeffs.iter().rposition(|c| c.valuation() == Some(vmin)).expect("attained");
        let beyond_ok = self.coeffs[k0 + 1..].iter().all(|c| c.eff_valuation() > vmin);
        let tail_ok = self.tail.cap().map_or(true, |v| v > vmin);
        StrassmanBound::Bound { k0, proved: beyond_ok && tail_ok }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SeriesJson {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    /// `[valuation, unit digits]`; zeros are `[null, "0"]`.
    coeffs: Vec<(Option<i64>, String)>,
    /// Absolute precision of each coefficient.
    prec: Vec<i64>,
    tail: TailBound,
}

impl From<TateSeries> for SeriesJson {
    fn from(s: TateSeries) -> Self {
        SeriesJson {
            p: s.ctx.p(),
            n: s.ctx.digits(),
            coeffs: s
                .coeffs
                .iter()
                .map(|c| (c.valuation(), c.unit_part().map_or("0".into(), |u| u.to_string())))
                .collect(),
            prec: s.coeffs.iter().map(|c| c.abs_prec()).collect(),
            tail: s.tail,
        }
    }
}

impl TryFrom<SeriesJson> for TateSeries {
    type Error = String;
    fn try_from(j: SeriesJson) -> Result<Self, String> {
        let ctx = PadicContext::new(j.p, j.n).map_err(|e| e.to_string())?;
        if j.coeffs.len() != j.prec.len() {
            return Err("coeffs and prec differ in length".into());
        }
        let coeffs = j
            .coeffs
            .iter()
            .zip(&j.prec)
            .map(|((v, u), &abs)| {
                let raw = match v {
                    None => PadicNumber::zero_to(ctx, abs),
                    Some(v) => {
                        let u: BigInt = u.parse().map_err(|_| format!("bad unit {u:?}"))?;
                        PadicNumber::from_int(ctx, &u).shift(*v).truncate_abs(abs)
                    }
                };
                Ok(raw)
            })
            .collect::<Result<Vec<_>, String>>()?;
        TateSeries::new(ctx, coeffs, j.tail).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn ctx() -> PadicContext {
        PadicContext::new(7, 20).unwrap()
    }

    #[test]
    fn eval_identity_and_zero() {
        let z = TateSeries::identity(ctx());
        let x = PadicNumber::from_i64(ctx(), 3);
        assert_eq!(z.eval(&x).unwrap().residue(20).unwrap(), BigInt::from(3));
        let p20 = ctx().modulus();
        let f = TateSeries::from_residues(ctx(), &[p20.clone(), p20.clone() * 5]);
        assert!(f.eval(&x).unwrap().is_zero());
        let bad = PadicNumber::from_i64(ctx(), 7).inv().unwrap();
        assert_eq!(z.eval(&bad), Err(PadicError::NonIntegralArgument));
    }

    #[test]
    fn geometric_sum() {
        let c = ctx();
        let p = BigInt::from(7);
        let coeffs: Vec<BigInt> = (0..=10).map(|k| num_traits::pow(p.clone(), k)).collect();
        let f = TateSeries::from_bigints(c, &coeffs);
        let v = f.eval(&PadicNumber::one(c)).unwrap();
        let expect = (num_traits::pow(p.clone(), 11) - BigInt::one()) / (&p - 1);
        assert_eq!(v.residue(20).unwrap(), expect % c.modulus());
    }

    #[test]
    fn compose_examples() {
        let c = ctx();
        let f = TateSeries::from_ints(c, &[0, 0, 1]);
        let g = TateSeries::from_ints(c, &[1, 1]);
        assert_eq!(f.compose(&g, 8).unwrap(), TateSeries::from_ints(c, &[1, 2, 1]));
        let h = TateSeries::from_ints(c, &[3, 0, 5, 7]);
        assert_eq!(h.compose(&TateSeries::identity(c), 8).unwrap(), h);
    }

    #[test]
    fn strassman_examples() {
        let c = ctx();
        assert_eq!(TateSeries::from_ints(c, &[7, -1]).strassman_bound(), StrassmanBound::Bound { k0: 1, proved: true });
        assert_eq!(TateSeries::from_ints(c, &[7, 7, 1]).strassman_bound(), StrassmanBound::Bound { k0: 2, proved: true });
        let m = c.modulus();
        assert_eq!(TateSeries::from_residues(c, &[m.clone(), m * 3]).strassman_bound(), StrassmanBound::ZeroSeries);
        let f = TateSeries::from_ints(c, &[1, 7]).with_tail(TailBound::AtLeast(0)).unwrap();
        assert_eq!(f.strassman_bound(), StrassmanBound::Bound { k0: 0, proved: false });
    }

    #[test]
    fn non_integral_rejected() {
        let c = ctx();
        let x = PadicNumber::from_i64(c, 7).inv().unwrap();
        assert_eq!(TateSeries::new(c, vec![x], TailBound::Exact), Err(PadicError::NonIntegral));
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        let f = TateSeries::from_ints(c, &[0, 14, -3, 49]).with_tail(TailBound::AtLeast(5)).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: TateSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
