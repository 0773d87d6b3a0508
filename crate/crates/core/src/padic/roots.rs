//! Zeros in `Z_p` by residue-disc subdivision.
//!
//! On the disc `x0 + p^d Z_p` the series becomes `g(t) = f(x0 + p^d t)`.
//! Strassman's bound for `g` decides the disc: bound 0 means no zero,
//! bound 1 means exactly one (located by Newton's method), anything larger
//! splits the disc into its `p` sub-discs.

use num_bigint::BigInt;
use num_integer::binomial;
use serde::{Deserialize, Serialize};

use super::{PadicError, PadicNumber, StrassmanBound, TailBound, TateSeries};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZpRoot {
    pub value: PadicNumber,
    /// Always true for isolated roots: the disc contained exactly one zero.
    pub simple: bool,
}

/// A disc whose zeros could not be separated at working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    #[serde(with = "crate::serde_big::bigint")]
    pub center: BigInt,
    pub depth: u32,
    /// Strassman count for the disc, `None` if the series vanished there.
    pub bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootScan {
    pub roots: Vec<ZpRoot>,
    pub clusters: Vec<Cluster>,
}

impl TateSeries {
    /// The series on the disc `x0 + p^d Z_p`, as a series in `t`.
    pub fn disc_series(&self, x0: &BigInt, d: u32) -> TateSeries {
        let ctx = self.ctx();
        let k = self.trunc_degree();
        let tail = self.tail();
        let mut out = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc = PadicNumber::zero(ctx);
            let mut x_pow = BigInt::from(1);
            for i in j..=k {
                let w = BigInt::from(binomial(i as u64, j as u64)) * &x_pow;
                acc = &acc + &(&self.coeffs()[i] * &PadicNumber::from_int(ctx, &w));
                x_pow *= x0;
            }
            if let TailBound::AtLeast(v) = tail {
                acc = acc.truncate_abs(v);
            }
            out.push(acc.shift(d as i64 * j as i64));
        }
        let tail = match tail {
            TailBound::Exact => TailBound::Exact,
            TailBound::AtLeast(v) => TailBound::AtLeast(v + d as i64 * (k as i64 + 1)),
        };
        TateSeries::new(ctx, out, tail).expect("shift preserves integrality")
    }

    /// All zeros in `Z_p` together with any unresolved clusters.
    pub fn zp_root_scan(&self) -> Result<RootScan, PadicError> {
        if self.strassman_bound() == StrassmanBound::ZeroSeries {
            return Err(PadicError::ZeroSeries);
        }
        let ctx = self.ctx();
        let p = BigInt::from(ctx.p());
        let max_depth = ctx.digits();
        let mut roots = Vec::new();
        let mut clusters = Vec::new();
        let mut stack = vec![(BigInt::from(0), 0u32)];
        while let Some((x0, d)) = stack.pop() {
            let g = self.disc_series(&x0, d);
            match g.strassman_bound() {
                StrassmanBound::ZeroSeries => clusters.push(Cluster { center: x0, depth: d, bound: None }),
                StrassmanBound::Bound { k0: 0, proved: true } => {}
                StrassmanBound::Bound { k0: 1, proved: true } => {
                    let t = newton_unique(&g)?;
                    let shift = PadicNumber::from_int(ctx, &x0);
                    let value = &shift + &t.shift(d as i64);
                    roots.push(ZpRoot { value, simple: true });
                }
                StrassmanBound::Bound { k0, .. } => {
                    if d >= max_depth {
                        clusters.push(Cluster { center: x0, depth: d, bound: Some(k0) });
                        continue;
                    }
                    let step = num_traits::pow(p.clone(), d as usize);
                    for r in (0..ctx.p()).rev() {
                        stack.push((&x0 + &step * BigInt::from(r), d + 1));
                    }
                }
            }
        }
        roots.sort_by(|a, b| {
            a.value.representative().unwrap_or_default().cmp(&b.value.representative().unwrap_or_default())
        });
        Ok(RootScan { roots, clusters })
    }

    /// All zeros in `Z_p`; fails if any cluster remains unresolved.
    pub fn zp_roots(&self) -> Result<Vec<ZpRoot>, PadicError> {
        let scan = self.zp_root_scan()?;
        if !scan.clusters.is_empty() {
            return Err(PadicError::PrecisionExhausted(scan.clusters.len()));
        }
        Ok(scan.roots)
    }
}

/// Newton iteration for a series whose Strassman bound is exactly 1.
fn newton_unique(g: &TateSeries) -> Result<PadicNumber, PadicError> {
    let dg = g.derivative();
    let b0 = g.coeff(0);
    let b1 = g.coeff(1);
    let mut t = -&b0.div(&b1)?;
    if !t.is_integral() {
        t = PadicNumber::zero(g.ctx());
    }
    for _ in 0..128 {
        let num = g.eval(&t)?;
        let den = dg.eval(&t)?;
        if den.is_zero() {
            break;
        }
        let next = &t - &num.div(&den)?;
        if !next.is_integral() {
            break;
        }
        let stable = next == t;
        t = next;
        if stable {
            break;
        }
    }
    Ok(t)
}
