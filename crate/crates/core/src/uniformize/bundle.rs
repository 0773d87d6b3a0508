//! Per-class Mahler interpolation of an orbit and its validation.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::modular::{orbit_mod, step, ModPoint};
use super::{GoodPrimeCertificate, UniformizeError};
use crate::arith::mod_inv;
use crate::padic::{mahler_fit, DecayProfile, MahlerSeries, PadicContext, PadicNumber, DECAY_WINDOW};
use crate::ratmap::{ProjPoint, RationalMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleParams {
    /// Working precision in digits.
    pub n: u32,
    /// Largest retained Mahler degree.
    pub k: usize,
    /// Fit window: samples at local indices `0..=j`.
    pub j: usize,
    /// Digits of precision the validation may lose.
    pub slack: u32,
}

impl Default for BundleParams {
    fn default() -> Self {
        BundleParams { n: 32, k: 64, j: 32, slack: 4 }
    }
}

/// Interpolation of the orbit indices `a·n + residue`, `n >= first_n`, as
/// `g(n - first_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSeries {
    pub residue: u64,
    pub first_n: u64,
    pub mahler: MahlerSeries,
    pub decay: DecayProfile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Local sample indices `k` of the held-out window, inclusive.
    pub holdout: (u64, u64),
    pub checked: usize,
    /// Least residual valuation per class, capped at `N`.
    pub per_class_min: Vec<i64>,
    pub min_valuation: i64,
    pub threshold: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationBundle {
    pub map: RationalMap,
    pub start: ProjPoint,
    pub cert: GoodPrimeCertificate,
    pub ctx: PadicContext,
    pub params: BundleParams,
    pub classes: Vec<ClassSeries>,
    /// The interpolation covers orbit indices `>= validity_floor`.
    pub validity_floor: usize,
    pub validation: ResidualReport,
}

impl InterpolationBundle {
    pub fn period(&self) -> u64 {
        self.cert.a
    }

    /// The interpolated value of `c_j`, or `None` below the validity floor.
    pub fn value(&self, j: u64) -> Option<PadicNumber> {
        if j < self.validity_floor as u64 {
            return None;
        }
        let a = self.cert.a;
        let class = &self.classes[(j % a) as usize];
        Some(class.mahler.eval_nat(j / a - class.first_n))
    }

    /// Orbit index of local sample `k` in class `i`.
    pub fn orbit_index(&self, i: u64, k: u64) -> u64 {
        self.cert.a * (self.classes[i as usize].first_n + k) + i
    }
}

fn first_n(m: usize, a: u64, i: u64) -> u64 {
    (m as u64).saturating_sub(i).div_ceil(a)
}

/// Fit one Mahler series per residue class mod `a` and validate the result
/// on held-out indices.
pub fn interpolate_orbit(
    h: &RationalMap,
    c: &ProjPoint,
    cert: &GoodPrimeCertificate,
    params: BundleParams,
) -> Result<InterpolationBundle, UniformizeError> {
    if params.j + 1 < 2 * DECAY_WINDOW {
        return Err(UniformizeError::InvalidParameters(format!(
            "at least {} samples are needed for the decay check",
            2 * DECAY_WINDOW
        )));
    }
    if params.slack >= params.n {
        return Err(UniformizeError::InvalidParameters("slack must be below the precision".into()));
    }
    let ctx = PadicContext::new(cert.p, params.n)?;
    let a = cert.a;
    let m = cert.m;
    let modulus = ctx.modulus();
    let last = (0..a).map(|i| a * (first_n(m, a, i) + params.j as u64) + i).max().unwrap_or(0);
    let orbit = orbit_mod(h, c, cert.p, &modulus, last as usize + 1)
        .map_err(|index| UniformizeError::PoleCollision { p: cert.p, index })?;
    let mut classes = Vec::with_capacity(a as usize);
    for i in 0..a {
        let f = first_n(m, a, i);
        let mut samples = Vec::with_capacity(params.j + 1);
        for k in 0..=params.j as u64 {
            let idx = (a * (f + k) + i) as usize;
            let x = orbit[idx]
                .affine()
                .ok_or(UniformizeError::PoleCollision { p: cert.p, index: idx })?;
            samples.push(PadicNumber::from_residue(ctx, x, params.n));
        }
        let fit = mahler_fit(&samples)?;
        let decay = fit.decay();
        if !(decay.decaying || decay.tail_min >= params.n as i64) {
            return Err(UniformizeError::DecayFailure {
                class: i,
                head_min: decay.head_min,
                tail_min: decay.tail_min,
            });
        }
        let supported = fit.coeffs().iter().rposition(|c| c.eff_valuation() < params.n as i64).unwrap_or(0);
        let degree = supported.min(params.k).min(params.j);
        let mahler = MahlerSeries::new(fit.as_series().truncate(degree));
        classes.push(ClassSeries { residue: i, first_n: f, mahler, decay });
    }
    let pending = ResidualReport {
        holdout: (0, 0),
        checked: 0,
        per_class_min: vec![],
        min_valuation: 0,
        threshold: 0,
        pass: false,
    };
    let mut bundle = InterpolationBundle {
        map: h.clone(),
        start: c.clone(),
        cert: cert.clone(),
        ctx,
        params,
        classes,
        validity_floor: m,
        validation: pending,
    };
    let report = validate_bundle(&bundle, h, c, default_holdout(params.j), params.slack);
    if !report.pass {
        return Err(UniformizeError::ValidationFailed {
            min_valuation: report.min_valuation,
            threshold: report.threshold,
        });
    }
    bundle.validation = report;
    Ok(bundle)
}

/// Local indices `(J, 2J]`.
pub fn default_holdout(j: usize) -> (u64, u64) {
    (j as u64 + 1, 2 * j as u64)
}

/// Compare every class against direct iteration on raw homogeneous pairs
/// mod `p^N` at the local indices in `holdout`.
pub fn validate_bundle(
    bundle: &InterpolationBundle,
    h: &RationalMap,
    c: &ProjPoint,
    holdout: (u64, u64),
    slack: u32,
) -> ResidualReport {
    let ctx = bundle.ctx;
    let n = ctx.digits() as i64;
    let a = bundle.cert.a;
    let modulus = ctx.modulus();
    let d = h.degree();
    let last = (0..a).map(|i| bundle.orbit_index(i, holdout.1)).max().unwrap_or(0);
    let mut per_class_min = vec![n; a as usize];
    let mut checked = 0usize;
    let mut pa = c.a().mod_floor(&modulus);
    let mut pb = c.b().mod_floor(&modulus);
    for j in 0..=last {
        let i = j % a;
        let class = &bundle.classes[i as usize];
        let q = j / a;
        if q >= class.first_n && (holdout.0..=holdout.1).contains(&(q - class.first_n)) {
            let k = q - class.first_n;
            let fitted = class.mahler.eval_nat_truncated(k);
            let v = match mod_inv(&pb, &modulus) {
                Some(inv) => {
                    let truth = PadicNumber::from_residue(ctx, &(&pa * inv).mod_floor(&modulus), ctx.digits());
                    (&fitted - &truth).eff_valuation().min(n)
                }
                None => 0,
            };
            per_class_min[i as usize] = per_class_min[i as usize].min(v);
            checked += 1;
        }
        let na = h.p().homog_eval(&pa, &pb, d).mod_floor(&modulus);
        let nb = h.q().homog_eval(&pa, &pb, d).mod_floor(&modulus);
        pa = na;
        pb = nb;
    }
    let min_valuation = per_class_min.iter().copied().min().unwrap_or(n);
    let threshold = n - slack as i64;
    ResidualReport {
        holdout,
        checked,
        per_class_min,
        min_valuation,
        threshold,
        pass: checked > 0 && min_valuation >= threshold,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub checked: usize,
    /// Orbit indices `j` where the check failed.
    pub failures: Vec<u64>,
    pub pass: bool,
}

fn apply_h(h: &RationalMap, x: &PadicNumber, p: u64, digits: u32, times: u64) -> Option<BigInt> {
    let m = num_traits::pow(BigInt::from(p), digits as usize);
    let mut y = ModPoint::Affine(x.residue(digits).ok()?);
    for _ in 0..times {
        y = step(h, &y, p, &m)?;
    }
    y.affine().cloned()
}

/// `h(g(j)) ≡ g(j + 1) (mod p^(N - slack))` for every orbit index `j` in
/// the fit windows; this covers both `h ∘ g_i = g_(i+1)` and the wrap-around
/// `h ∘ g_(a-1)(n) = g_0(n + 1)`.
pub fn progression_compatibility(bundle: &InterpolationBundle, h: &RationalMap, slack: u32) -> CompatibilityReport {
    chain_check(bundle, h, slack, |j, _| (j, 1))
}

/// The composition path: `g_i(n) ≡ h^i(g_0(n))` for every sampled `n`.
pub fn composition_cross_check(bundle: &InterpolationBundle, h: &RationalMap, slack: u32) -> CompatibilityReport {
    let a = bundle.cert.a;
    chain_check(bundle, h, slack, move |j, _| {
        let i = (j + 1) % a;
        (j + 1 - i, i)
    })
}

fn chain_check(
    bundle: &InterpolationBundle,
    h: &RationalMap,
    slack: u32,
    source: impl Fn(u64, u64) -> (u64, u64),
) -> CompatibilityReport {
    let ctx = bundle.ctx;
    let digits = ctx.digits().saturating_sub(slack);
    let modulus = ctx.pow(digits);
    let a = bundle.cert.a;
    let end = (0..a).map(|i| bundle.orbit_index(i, bundle.params.j as u64)).max().unwrap_or(0);
    let mut failures = Vec::new();
    let mut checked = 0;
    for j in bundle.validity_floor as u64..end {
        let (src, times) = source(j, a);
        if src < bundle.validity_floor as u64 {
            continue;
        }
        let (Some(x), Some(y)) = (bundle.value(src), bundle.value(j + 1)) else {
            continue;
        };
        checked += 1;
        let ok = match (apply_h(h, &x, ctx.p(), digits, times), y.residue(digits)) {
            (Some(hx), Ok(y)) => hx == y.mod_floor(&modulus),
            _ => false,
        };
        if !ok {
            failures.push(j);
        }
    }
    CompatibilityReport { checked, pass: failures.is_empty() && checked > 0, failures }
}
