//! Mahler expansions `u(n) = Σ c_k C(n, k)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{PadicContext, PadicError, PadicNumber, TailBound, TateSeries};

/// Number of leading and trailing coefficients compared by the decay check.
pub const DECAY_WINDOW: usize = 6;

/// Mahler coefficients `c_0..c_K` with a tail bound on `c_k`, `k > K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MahlerSeries(TateSeries);

/// Coefficients by forward differences: `c_k = Δ^k u (0)`.
///
/// The tail bound is the minimal valuation over the last few coefficients,
/// an empirical estimate rather than a proof.
pub fn mahler_fit(samples: &[PadicNumber]) -> Result<MahlerSeries, PadicError> {
    let first = samples.first().ok_or(PadicError::ZeroSeries)?;
    let ctx = first.ctx();
    let mut diffs = samples.to_vec();
    let mut coeffs = Vec::with_capacity(samples.len());
    for len in (1..=samples.len()).rev() {
        coeffs.push(diffs[0].clone());
        for i in 0..len - 1 {
            diffs[i] = &diffs[i + 1] - &diffs[i];
        }
    }
    let w = DECAY_WINDOW.min(coeffs.len());
    let est = coeffs[coeffs.len() - w..].iter().map(|c| c.eff_valuation()).min().expect("nonempty");
    let series = TateSeries::new(ctx, coeffs, TailBound::AtLeast(est.max(0)))?;
    Ok(MahlerSeries(series))
}

/// Signed Stirling numbers of the first kind `s(k, j)` for `k <= k_max`.
pub fn stirling_first_kind(k_max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::one()]];
    for k in 0..k_max {
        let prev = &s[k];
        let mut row = vec![BigInt::zero(); k + 2];
        for (j, v) in prev.iter().enumerate() {
            row[j + 1] += v;
            row[j] -= v * BigInt::from(k);
        }
        s.push(row);
    }
    s
}

/// Decay diagnostics for a coefficient profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub valuations: Vec<i64>,
    pub head_min: i64,
    pub tail_min: i64,
    /// Tail window strictly above head window.
    pub decaying: bool,
    /// Minima over consecutive windows never decrease.
    pub monotone: bool,
}

impl MahlerSeries {
    pub fn new(series: TateSeries) -> Self {
        MahlerSeries(series)
    }

    pub fn ctx(&self) -> PadicContext {
        self.0.ctx()
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        self.0.coeffs()
    }

    pub fn tail(&self) -> TailBound {
        self.0.tail()
    }

    pub fn as_series(&self) -> &TateSeries {
        &self.0
    }

    pub fn decay(&self) -> DecayProfile {
        let valuations = self.0.profile();
        let w = DECAY_WINDOW.min(valuations.len());
        let head_min = *valuations[..w].iter().min().expect("nonempty");
        let tail_min = *valuations[valuations.len() - w..].iter().min().expect("nonempty");
        let blocks: Vec<i64> = valuations.chunks(DECAY_WINDOW).map(|b| *b.iter().min().expect("nonempty")).collect();
        let monotone = blocks.windows(2).all(|b| b[0] <= b[1]);
        DecayProfile {
            decaying: valuations.len() >= 2 * DECAY_WINDOW && tail_min > head_min,
            valuations,
            head_min,
            tail_min,
            monotone,
        }
    }

    /// `Σ_{k <= K} c_k C(n, k)` without any tail allowance.
    pub fn eval_nat_truncated(&self, n: u64) -> PadicNumber {
        let ctx = self.ctx();
        let mut acc = PadicNumber::zero(ctx);
        let mut binom = BigInt::one();
        for (k, c) in self.coeffs().iter().enumerate() {
            if k as u64 > n {
                break;
            }
            acc = &acc + &(c * &PadicNumber::from_int(ctx, &binom));
            binom = binom * BigInt::from(n - k as u64) / BigInt::from(k as u64 + 1);
        }
        acc
    }

    /// Value at a natural number; exact inside the fit window, capped by the
    /// tail bound beyond it.
    pub fn eval_nat(&self, n: u64) -> PadicNumber {
        let v = self.eval_nat_truncated(n);
        match self.tail() {
            TailBound::AtLeast(t) if n as usize >= self.coeffs().len() => v.truncate_abs(t),
            _ => v,
        }
    }

    /// Value at a p-adic integer, with binomials `C(n, k)` built p-adically.
    pub fn eval(&self, n: &PadicNumber) -> Result<PadicNumber, PadicError> {
        if !n.is_integral() {
            return Err(PadicError::NonIntegralArgument);
        }
        let ctx = self.ctx();
        let mut acc = PadicNumber::zero(ctx);
        let mut binom = PadicNumber::one(ctx);
        for (k, c) in self.coeffs().iter().enumerate() {
            acc = &acc + &(c * &binom);
            let step = n - &PadicNumber::from_i64(ctx, k as i64);
            binom = (&binom * &step).div(&PadicNumber::from_i64(ctx, k as i64 + 1))?;
        }
        Ok(match self.tail() {
            TailBound::AtLeast(t) => acc.truncate_abs(t),
            TailBound::Exact => acc,
        })
    }

    /// Monomial coefficients `a_j = Σ_k c_k s(k, j) / k!`.
    ///
    /// The tail bound becomes the least excess `v(c_k) - v(k!)` over the
    /// trailing window.
    pub fn to_monomial(&self) -> Result<TateSeries, PadicError> {
        let ctx = self.ctx();
        let kmax = self.coeffs().len() - 1;
        let s = stirling_first_kind(kmax);
        let mut fact = BigInt::one();
        let mut scaled = Vec::with_capacity(kmax + 1);
        for (k, c) in self.coeffs().iter().enumerate() {
            if k > 0 {
                fact *= BigInt::from(k);
            }
            scaled.push(c.div(&PadicNumber::from_int(ctx, &fact))?);
        }
        let mut out = Vec::with_capacity(kmax + 1);
        for j in 0..=kmax {
            let mut acc = PadicNumber::zero(ctx);
            for (k, sk) in scaled.iter().enumerate().skip(j) {
                if s[k][j].is_zero() {
                    continue;
                }
                acc = &acc + &(sk * &PadicNumber::from_int(ctx, &s[k][j]));
            }
            out.push(acc);
        }
        let tail = match self.tail() {
            TailBound::Exact => TailBound::Exact,
            TailBound::AtLeast(_) => {
                let w = DECAY_WINDOW.min(scaled.len());
                TailBound::AtLeast(scaled[scaled.len() - w..].iter().map(|c| c.eff_valuation()).min().expect("nonempty"))
            }
        };
        TateSeries::new(ctx, out, tail)
    }
}
