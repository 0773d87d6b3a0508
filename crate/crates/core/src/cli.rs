//! Job specifications, reports and the command-line front end.
//!
//! Every subcommand is translated into a [`JobSpec`] and executed by
//! [`run_job`], so a command line and the equivalent JSON job file produce
//! byte-identical reports.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dml::{
    counterexample_demo, cross_prime_agreement, decide, CounterexampleTable, CrossPrimeReport, DmlParams,
    DmlProblem, ReturnSetReport, Route, SplitMap, TargetLocus,
};
use crate::orbit::{check_unit_ideal, cross_term, orbit_pairs, OrbitError, OrbitMode, UnitIdealReport};
use crate::padic::{PadicContext, TateSeries};
use crate::parse::{parse_curve, parse_map, parse_point};
use crate::poly::IntPoly;
use crate::ratmap::{BadPrimeSet, FixedPointKind, Mobius, ProjPoint, RationalMap, DEFAULT_MAX_BITS};
use crate::uniformize::{
    composition_cross_check, interpolate_orbit, local_conjugate, orbit_residues, progression_compatibility,
    search_good_primes, BundleParams, CompatibilityReport, GoodPrimeCertificate, InterpolationBundle, PrimeSearch,
    SearchCaps, UniformizeError,
};
use crate::{Error, EXIT_INCONCLUSIVE, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

/// A map given as a string (array or expression form) or as
/// `{"p": [...], "q": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapArg(pub RationalMap);

impl Serialize for MapArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MapArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Value::deserialize(d)?;
        match &v {
            Value::String(s) => parse_map(s).map(MapArg).map_err(D::Error::custom),
            Value::Object(o) => {
                let list = |key: &str| -> Result<String, D::Error> {
                    let arr = o
                        .get(key)
                        .and_then(Value::as_array)
                        .ok_or_else(|| D::Error::custom(format!("map object needs an array {key:?}")))?;
                    let items: Result<Vec<String>, D::Error> = arr.iter().map(scalar_text::<D::Error>).collect();
                    Ok(format!("[{}]", items?.join(",")))
                };
                let text = format!("{}/{}", list("p")?, list("q")?);
                parse_map(&text).map(MapArg).map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom("map must be a string or an object with arrays p and q")),
        }
    }
}

/// A point given as a string (`"a/b"`, `"inf"`, ...) or as a pair `[a, b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointArg(pub ProjPoint);

impl Serialize for PointArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Value::deserialize(d)?;
        let text = match &v {
            Value::String(s) => s.clone(),
            Value::Number(_) => v.to_string(),
            Value::Array(a) if a.len() == 2 => {
                format!("[{}:{}]", scalar_text::<D::Error>(&a[0])?, scalar_text::<D::Error>(&a[1])?)
            }
            _ => return Err(D::Error::custom("point must be a string or a pair [a, b]")),
        };
        parse_point(&text).map(PointArg).map_err(D::Error::custom)
    }
}

fn scalar_text<E: serde::de::Error>(v: &Value) -> Result<String, E> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(E::custom(format!("expected a number or numeric string, got {v}"))),
    }
}

/// The target of a `dml` job: exactly one of a point or a curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetArg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<PointArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
}

fn d_pmin() -> u64 {
    5
}
fn d_pmax() -> u64 {
    100
}
fn d_dml_pmax() -> u64 {
    200
}
fn d_true() -> bool {
    true
}
fn d_nmax() -> u64 {
    64
}
fn d_cases() -> usize {
    100
}
fn d_steps() -> usize {
    8
}
fn d_degree() -> usize {
    4
}
fn d_height() -> i64 {
    10
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Orbit {
        map: MapArg,
        start: PointArg,
        n: usize,
        #[serde(default = "d_raw")]
        mode: OrbitMode,
        #[serde(default)]
        check_identity: bool,
    },
    BadPrimes {
        map: MapArg,
        start: PointArg,
    },
    FindPrime {
        map: MapArg,
        start: PointArg,
        #[serde(default = "d_pmin")]
        p_min: u64,
        #[serde(default = "d_pmax")]
        p_max: u64,
        #[serde(default)]
        max_period: Option<u64>,
        #[serde(default)]
        conjugate: Option<[i64; 4]>,
    },
    Classify {
        map: MapArg,
        point: PointArg,
        p: u64,
    },
    Interpolate {
        map: MapArg,
        start: PointArg,
        #[serde(default = "d_pmin")]
        p_min: u64,
        #[serde(default = "d_pmax")]
        p_max: u64,
        #[serde(default)]
        conjugate: Option<[i64; 4]>,
    },
    Dml {
        map: MapArg,
        #[serde(default)]
        g: Option<MapArg>,
        start: PointArg,
        #[serde(default)]
        start2: Option<PointArg>,
        target: TargetArg,
        #[serde(default = "d_pmin")]
        p_min: u64,
        #[serde(default = "d_dml_pmax")]
        p_max: u64,
        #[serde(default = "d_nmax")]
        n_max: u64,
        #[serde(default = "d_true")]
        strict: bool,
        #[serde(default)]
        force_padic: bool,
        #[serde(default)]
        cross_check: bool,
    },
    Counterexample {
        p: u64,
        n: u64,
    },
    Selfcheck {
        #[serde(default = "d_cases")]
        cases: usize,
        #[serde(default = "d_steps")]
        steps: usize,
        #[serde(default = "d_degree")]
        max_degree: usize,
        #[serde(default = "d_height")]
        height: i64,
    },
}

fn d_raw() -> OrbitMode {
    OrbitMode::Raw
}

/// Precision and sampling options shared by every command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub precision: u32,
    pub trunc: usize,
    pub samples: usize,
    pub slack: u32,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { precision: 32, trunc: 64, samples: 32, slack: 4, seed: 0 }
    }
}

impl Options {
    fn bundle(&self) -> BundleParams {
        BundleParams { n: self.precision, k: self.trunc, j: self.samples, slack: self.slack }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub options: Options,
    /// Where the report goes; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl JobSpec {
    pub fn from_json(text: &str) -> Result<JobSpec, Error> {
        let spec: JobSpec = serde_json::from_str(text).map_err(|e| Error::Parse(crate::ParseError(e.to_string())))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Numeric options must be positive and prime bounds at least 5.
    pub fn validate(&self) -> Result<(), Error> {
        let usage = |m: &str| Err(Error::Usage(m.to_string()));
        let o = &self.options;
        if o.precision < 4 {
            return usage("precision must be at least 4");
        }
        if o.trunc == 0 || o.samples == 0 {
            return usage("trunc and samples must be positive");
        }
        if o.slack >= o.precision {
            return usage("slack must be below the precision");
        }
        match &self.command {
            Command::FindPrime { p_min, p_max, .. }
            | Command::Interpolate { p_min, p_max, .. }
            | Command::Dml { p_min, p_max, .. } => {
                if *p_min < 5 {
                    return usage("p_min must be at least 5");
                }
                if p_max < p_min {
                    return usage("p_max must not be below p_min");
                }
            }
            Command::Classify { p, .. } | Command::Counterexample { p, .. } if *p < 2 => {
                return usage("p must be a prime");
            }
            Command::Selfcheck { cases, max_degree, height, .. } => {
                if *cases == 0 || *max_degree == 0 || *height <= 0 {
                    return usage("cases, max_degree and height must be positive");
                }
            }
            _ => {}
        }
        if let Command::Dml { target, g, start2, .. } = &self.command {
            if target.beta.is_some() == target.curve.is_some() {
                return usage("dml needs exactly one of beta or curve");
            }
            if target.curve.is_some() && (g.is_none() || start2.is_none()) {
                return usage("a curve target needs g and start2");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityStep {
    pub n: usize,
    #[serde(with = "crate::serde_big::bigint")]
    pub lhs: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub rhs: BigInt,
    pub ell: usize,
    pub status: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub map: RationalMap,
    pub start: ProjPoint,
    pub mode: OrbitMode,
    #[serde(with = "crate::serde_big::bigint_pairs")]
    pub pairs: Vec<(BigInt, BigInt)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<Vec<IdentityStep>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_ideal: Option<UnitIdealReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrimesReport {
    pub map: RationalMap,
    pub start: ProjPoint,
    pub bad_primes: BadPrimeSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindPrimeReport {
    pub map: RationalMap,
    pub start: ProjPoint,
    pub certificate: GoodPrimeCertificate,
    /// Orbit mod `p^2` through one full return, `null` at points near infinity.
    pub orbit_mod_p2: Vec<Option<u64>>,
    pub search: PrimeSearch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub map: RationalMap,
    pub point: ProjPoint,
    pub p: u64,
    pub multiplier: String,
    pub kind: FixedPointKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolateReport {
    pub bundle: InterpolationBundle,
    pub local_conjugate: TateSeries,
    pub progression_compatibility: CompatibilityReport,
    pub composition_cross_check: CompatibilityReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmlReport {
    pub report: ReturnSetReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossPrimeReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfcheckReport {
    pub seed: u64,
    pub cases: usize,
    pub steps: usize,
    /// Maps with a failing cross-term identity, as coefficient strings.
    pub identity_failures: Vec<String>,
    /// Maps where some `gcd(A_n, B_n)` has a prime outside the bad set.
    pub support_failures: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Orbit(OrbitReport),
    BadPrimes(BadPrimesReport),
    FindPrime(FindPrimeReport),
    Classify(ClassifyReport),
    Interpolate(Box<InterpolateReport>),
    Dml(Box<DmlReport>),
    Counterexample(CounterexampleTable),
    Selfcheck(SelfcheckReport),
}

impl Report {
    /// 0 when decided, 2 with inconclusive branches, 70 when a check failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Report::Orbit(o) if o.passed == Some(false) => EXIT_INTERNAL,
            Report::Dml(d) if !d.report.is_decided() => EXIT_INCONCLUSIVE,
            Report::Dml(d) if d.cross_check.as_ref().is_some_and(|c| !c.agree) => EXIT_INTERNAL,
            Report::Interpolate(i)
                if !(i.progression_compatibility.pass && i.composition_cross_check.pass) =>
            {
                EXIT_INTERNAL
            }
            Report::Counterexample(t) if !t.agrees => EXIT_INTERNAL,
            Report::Selfcheck(s) if !s.pass => EXIT_INTERNAL,
            _ => EXIT_OK,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn conjugated(map: &RationalMap, start: &ProjPoint, phi: Option<[i64; 4]>) -> Result<(RationalMap, ProjPoint), Error> {
    match phi {
        None => Ok((map.clone(), start.clone())),
        Some([a, b, c, d]) => {
            let m = Mobius::new(a, b, c, d);
            Ok((map.conjugate(&m)?, m.apply(start)))
        }
    }
}

/// Execute a validated job.
pub fn run_job(spec: &JobSpec) -> Result<Report, Error> {
    spec.validate()?;
    let opts = spec.options;
    match &spec.command {
        Command::Orbit { map, start, n, mode, check_identity } => {
            let orbit = orbit_pairs(&map.0, &start.0, *n, *mode, DEFAULT_MAX_BITS)?;
            let (identity, unit_ideal, passed) = if *check_identity {
                if *mode != OrbitMode::Raw {
                    return Err(OrbitError::NotRaw.into());
                }
                let mut steps = Vec::new();
                for k in 0..*n {
                    match cross_term(&orbit, k) {
                        Ok(t) => {
                            steps.push(IdentityStep { n: k, lhs: t.lhs, rhs: t.rhs, ell: t.ell, status: Verdict::Pass })
                        }
                        Err(OrbitError::IdentityViolation(_)) => {
                            let (a0, b0) = &orbit.pairs[k];
                            let (a1, b1) = &orbit.pairs[k + 1];
                            let fpd = map.0.fixed_point_data()?;
                            let ell = 1 + map.0.p().deg() - fpd.deg_fp;
                            let lhs = b0 * a1 - a0 * b1;
                            let rhs = num_traits::pow(b0.clone(), ell) * fpd.fp_poly.homog_eval(a0, b0, fpd.deg_fp);
                            steps.push(IdentityStep { n: k, lhs, rhs, ell, status: Verdict::Fail })
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                let unit = check_unit_ideal(&orbit, &map.0.bad_primes(&start.0))?;
                let ok = steps.iter().all(|s| s.status == Verdict::Pass) && unit.passed();
                (Some(steps), Some(unit), Some(ok))
            } else {
                (None, None, None)
            };
            Ok(Report::Orbit(OrbitReport {
                map: map.0.clone(),
                start: start.0.clone(),
                mode: *mode,
                pairs: orbit.pairs,
                identity,
                unit_ideal,
                passed,
            }))
        }
        Command::BadPrimes { map, start } => Ok(Report::BadPrimes(BadPrimesReport {
            map: map.0.clone(),
            start: start.0.clone(),
            bad_primes: map.0.bad_primes(&start.0),
        })),
        Command::FindPrime { map, start, p_min, p_max, max_period, conjugate } => {
            let (h, c) = conjugated(&map.0, &start.0, *conjugate)?;
            let mut caps = SearchCaps::default();
            if let Some(a) = max_period {
                caps.max_period = *a;
            }
            let search = search_good_primes(&h, &c, *p_min, *p_max, caps, 1)?;
            let certificate = search.certificates.first().cloned().ok_or(UniformizeError::NoPrimeFound {
                p_min: *p_min,
                p_max: *p_max,
                tried: search.attempts.len(),
            })?;
            let len = (certificate.m as u64 + certificate.a + 1).min(256) as usize;
            Ok(Report::FindPrime(FindPrimeReport {
                orbit_mod_p2: orbit_residues(&h, &c, certificate.p, len),
                map: h,
                start: c,
                certificate,
                search,
            }))
        }
        Command::Classify { map, point, p } => {
            let lambda = map.0.multiplier(&point.0)?;
            let kind = map.0.classify_fixed_point(&point.0, *p)?;
            Ok(Report::Classify(ClassifyReport {
                map: map.0.clone(),
                point: point.0.clone(),
                p: *p,
                multiplier: lambda.to_string(),
                kind,
            }))
        }
        Command::Interpolate { map, start, p_min, p_max, conjugate } => {
            let (h, c) = conjugated(&map.0, &start.0, *conjugate)?;
            let search = search_good_primes(&h, &c, *p_min, *p_max, SearchCaps::default(), 1)?;
            let cert = search.certificates.first().cloned().ok_or(UniformizeError::NoPrimeFound {
                p_min: *p_min,
                p_max: *p_max,
                tried: search.attempts.len(),
            })?;
            let bundle = interpolate_orbit(&h, &c, &cert, opts.bundle())?;
            let ctx = PadicContext::new(cert.p, opts.precision)?;
            let f = local_conjugate(&h, &c, &cert, ctx, opts.trunc)?;
            Ok(Report::Interpolate(Box::new(InterpolateReport {
                progression_compatibility: progression_compatibility(&bundle, &h, opts.slack),
                composition_cross_check: composition_cross_check(&bundle, &h, opts.slack),
                local_conjugate: f,
                bundle,
            })))
        }
        Command::Dml { map, g, start, start2, target, p_min, p_max, n_max, strict, force_padic, cross_check } => {
            let params = DmlParams {
                p_min: *p_min,
                p_max: *p_max,
                bundle: opts.bundle(),
                n_max: *n_max,
                strict: *strict,
                route: if *force_padic { Route::ForcePadic } else { Route::Auto },
                ..DmlParams::default()
            };
            let problem = match (&target.beta, &target.curve) {
                (Some(beta), None) => DmlProblem::point(&map.0, &start.0, &beta.0),
                (None, Some(curve)) => {
                    let g = &g.as_ref().expect("validated").0;
                    if *strict && g.degree() != 1 {
                        return Err(crate::dml::DmlError::StrictMode(g.degree()).into());
                    }
                    let phi = SplitMap { h: map.0.clone(), g: g.clone() };
                    let c2 = &start2.as_ref().expect("validated").0;
                    DmlProblem::split(&phi, (&start.0, c2), &TargetLocus::curve(parse_curve(curve)?))
                }
                _ => unreachable!("validated"),
            };
            let (report, cross) = if *cross_check {
                let c = cross_prime_agreement(&problem, &params)?;
                (c.primary.clone(), Some(c))
            } else {
                (decide(&problem, &params)?, None)
            };
            Ok(Report::Dml(Box::new(DmlReport { report, cross_check: cross })))
        }
        Command::Counterexample { p, n } => Ok(Report::Counterexample(counterexample_demo(*p, *n)?)),
        Command::Selfcheck { cases, steps, max_degree, height } => {
            Ok(Report::Selfcheck(selfcheck(opts.seed, *cases, *steps, *max_degree, *height)?))
        }
    }
}

/// A random map `p/q` with `deg p = deg q + 1 <= max_degree` and coefficients
/// in `[-height, height]`, retried until it is normalized after reduction.
pub fn random_normalized_map(rng: &mut impl Rng, max_degree: usize, height: i64) -> RationalMap {
    loop {
        let dq = rng.gen_range(0..max_degree);
        let mut coeffs = |deg: usize| -> IntPoly {
            let mut v: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-height..=height)).collect();
            while v[deg] == 0 {
                v[deg] = rng.gen_range(-height..=height);
            }
            IntPoly::from_i64s(&v)
        };
        let q = coeffs(dq);
        let p = coeffs(dq + 1);
        if let Ok(h) = RationalMap::from_polys(p, q) {
            if h.is_normalized() && h.fixed_point_data().is_ok() {
                return h;
            }
        }
    }
}

/// A random rational start with numerator and denominator bounded by `height`.
pub fn random_start(rng: &mut impl Rng, height: i64) -> ProjPoint {
    let a = rng.gen_range(-height..=height);
    let b = rng.gen_range(1..=height);
    ProjPoint::new(BigInt::from(a), BigInt::from(b)).expect("b > 0")
}

/// Bit cap for the randomized suite; degree-4 raw pairs reach about 1.6M bits
/// after nine steps.
pub const SELFCHECK_MAX_BITS: u64 = 1 << 24;

/// Cross-term identity and gcd support over random normalized maps.
pub fn selfcheck(seed: u64, cases: usize, steps: usize, max_degree: usize, height: i64) -> Result<SelfcheckReport, Error> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut identity_failures = Vec::new();
    let mut support_failures = Vec::new();
    for _ in 0..cases {
        let h = random_normalized_map(&mut rng, max_degree, height);
        let c = random_start(&mut rng, height);
        let label = format!("{} @ {}", h.to_array_string(), c);
        let orbit = orbit_pairs(&h, &c, steps + 1, OrbitMode::Raw, SELFCHECK_MAX_BITS)?;
        if (0..=steps).any(|n| cross_term(&orbit, n).is_err()) {
            identity_failures.push(label.clone());
        }
        if !check_unit_ideal(&orbit, &h.bad_primes(&c))?.passed() {
            support_failures.push(label);
        }
    }
    let pass = identity_failures.is_empty() && support_failures.is_empty();
    Ok(SelfcheckReport { seed, cases, steps, identity_failures, support_failures, pass })
}

#[derive(Parser, Debug)]
#[command(name = "padyn", version, about = "p-adic interpolation of rational-map orbits")]
pub struct Cli {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Working p-adic precision N in digits.
    #[arg(long, global = true, default_value_t = 32)]
    pub precision: u32,
    /// Truncation degree K of Tate series.
    #[arg(long, global = true, default_value_t = 64)]
    pub trunc: usize,
    /// Fit window J for Mahler interpolation.
    #[arg(long, global = true, default_value_t = 32)]
    pub samples: usize,
    /// Digits of precision the validation may lose.
    #[arg(long, global = true, default_value_t = 4)]
    pub slack: u32,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Orbit pairs (A_n, B_n), optionally with identity checks.
    Orbit {
        #[arg(long)]
        map: String,
        #[arg(long)]
        start: String,
        #[arg(short = 'n', default_value_t = 8)]
        n: usize,
        #[arg(long, conflicts_with = "reduced")]
        raw: bool,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        check_identity: bool,
    },
    /// The bad-prime set of (h, c).
    BadPrimes {
        #[arg(long)]
        map: String,
        #[arg(long)]
        start: String,
    },
    /// Smallest good prime with its certificate.
    FindPrime {
        #[arg(long)]
        map: String,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 5)]
        pmin: u64,
        #[arg(long, default_value_t = 100)]
        pmax: u64,
        #[arg(long)]
        max_period: Option<u64>,
        /// Conjugate by x -> (a x + b)/(c x + d) first: a,b,c,d.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
        conjugate: Option<Vec<i64>>,
    },
    /// Classify a fixed point at a prime.
    Classify {
        #[arg(long)]
        map: String,
        #[arg(long)]
        point: String,
        #[arg(long = "p")]
        p: u64,
    },
    /// Interpolation bundle with validation.
    Interpolate {
        #[arg(long)]
        map: String,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 5)]
        pmin: u64,
        #[arg(long, default_value_t = 100)]
        pmax: u64,
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
        conjugate: Option<Vec<i64>>,
    },
    /// Return set of a point or curve target.
    Dml {
        #[arg(long)]
        map: String,
        /// Second coordinate map for split targets.
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        start: String,
        #[arg(long)]
        start2: Option<String>,
        #[arg(long, conflicts_with = "curve")]
        beta: Option<String>,
        /// Curve F(x, y) = 0 on P^1 x P^1.
        #[arg(long)]
        curve: Option<String>,
        #[arg(long, default_value_t = 5)]
        pmin: u64,
        #[arg(long, default_value_t = 200)]
        pmax: u64,
        #[arg(long, default_value_t = 64)]
        n_max: u64,
        /// Allow deg g > 1.
        #[arg(long)]
        lax: bool,
        #[arg(long)]
        force_padic: bool,
        /// Repeat the decision on the p-adic path at two primes.
        #[arg(long)]
        cross_check: bool,
    },
    /// v_p(n!) along the orbit of (x + 1, y (x + 1)).
    Counterexample {
        #[arg(long = "p")]
        p: u64,
        #[arg(short = 'n', default_value_t = 50)]
        n: u64,
    },
    /// Run a JSON job file.
    Run {
        #[arg(long)]
        job: PathBuf,
    },
    /// Randomized identity suite.
    Selfcheck {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
}

fn quad(v: Option<Vec<i64>>) -> Result<Option<[i64; 4]>, Error> {
    match v {
        None => Ok(None),
        Some(v) => <[i64; 4]>::try_from(v)
            .map(Some)
            .map_err(|_| Error::Usage("--conjugate takes four integers a,b,c,d".into())),
    }
}

impl Cli {
    /// The job this command line describes.
    pub fn into_job(self) -> Result<JobSpec, Error> {
        let options = Options {
            precision: self.precision,
            trunc: self.trunc,
            samples: self.samples,
            slack: self.slack,
            seed: self.seed,
        };
        let output = self.json_out.as_ref().map(|p| p.display().to_string());
        let map = |s: &str| -> Result<MapArg, Error> { Ok(MapArg(parse_map(s)?)) };
        let point = |s: &str| -> Result<PointArg, Error> { Ok(PointArg(parse_point(s)?)) };
        let command = match self.command {
            Sub::Orbit { map: m, start, n, raw: _, reduced, check_identity } => Command::Orbit {
                map: map(&m)?,
                start: point(&start)?,
                n,
                mode: if reduced { OrbitMode::Reduced } else { OrbitMode::Raw },
                check_identity,
            },
            Sub::BadPrimes { map: m, start } => Command::BadPrimes { map: map(&m)?, start: point(&start)? },
            Sub::FindPrime { map: m, start, pmin, pmax, max_period, conjugate } => Command::FindPrime {
                map: map(&m)?,
                start: point(&start)?,
                p_min: pmin,
                p_max: pmax,
                max_period,
                conjugate: quad(conjugate)?,
            },
            Sub::Classify { map: m, point: x, p } => Command::Classify { map: map(&m)?, point: point(&x)?, p },
            Sub::Interpolate { map: m, start, pmin, pmax, conjugate } => Command::Interpolate {
                map: map(&m)?,
                start: point(&start)?,
                p_min: pmin,
                p_max: pmax,
                conjugate: quad(conjugate)?,
            },
            Sub::Dml { map: m, g, start, start2, beta, curve, pmin, pmax, n_max, lax, force_padic, cross_check } => {
                Command::Dml {
                    map: map(&m)?,
                    g: g.as_deref().map(map).transpose()?,
                    start: point(&start)?,
                    start2: start2.as_deref().map(point).transpose()?,
                    target: TargetArg { beta: beta.as_deref().map(point).transpose()?, curve },
                    p_min: pmin,
                    p_max: pmax,
                    n_max,
                    strict: !lax,
                    force_padic,
                    cross_check,
                }
            }
            Sub::Counterexample { p, n } => Command::Counterexample { p, n },
            Sub::Selfcheck { cases, steps } => Command::Selfcheck {
                cases,
                steps,
                max_degree: d_degree(),
                height: d_height(),
            },
            Sub::Run { job } => {
                let text = std::fs::read_to_string(&job)
                    .map_err(|e| Error::Usage(format!("cannot read {}: {e}", job.display())))?;
                let mut spec = JobSpec::from_json(&text)?;
                if output.is_some() {
                    spec.output = output;
                }
                return Ok(spec);
            }
        };
        let spec = JobSpec { command, options, output };
        spec.validate()?;
        Ok(spec)
    }
}

/// Result of one command-line invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Machine-readable error body.
pub fn error_json(name: &str, message: &str) -> String {
    serde_json::json!({ "error": name, "message": message }).to_string()
}

fn failure(err: &Error) -> CliOutcome {
    CliOutcome { exit_code: err.exit_code(), stdout: String::new(), stderr: error_json(err.name(), &err.to_string()) }
}

/// Parse arguments, run the job and render the outcome; no process exit.
pub fn run_cli<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CliOutcome { exit_code: EXIT_OK, stdout: e.to_string(), stderr: String::new() }
                }
                _ => CliOutcome {
                    exit_code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: error_json("UsageError", e.to_string().trim()),
                },
            };
        }
    };
    let spec = match cli.into_job() {
        Ok(s) => s,
        Err(e) => return failure(&e),
    };
    let report = match run_job(&spec) {
        Ok(r) => r,
        Err(e) => return failure(&e),
    };
    let json = report.to_json();
    let exit_code = report.exit_code();
    match &spec.output {
        Some(path) => match std::fs::write(path, format!("{json}\n")) {
            Ok(()) => CliOutcome { exit_code, stdout: String::new(), stderr: String::new() },
            Err(e) => failure(&Error::Usage(format!("cannot write {path}: {e}"))),
        },
        None => CliOutcome { exit_code, stdout: format!("{json}\n"), stderr: String::new() },
    }
}

/// Run a JSON job and return the report as JSON, with its exit code.
pub fn run_job_json(text: &str) -> Result<(String, i32), Error> {
    let spec = JobSpec::from_json(text)?;
    let report = run_job(&spec)?;
    Ok((report.to_json(), report.exit_code()))
}
