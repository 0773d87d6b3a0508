//! Return sets `{n : Φ^n(c) ∈ Y}` for `Φ = h` on `P^1` and split maps
//! `Φ = (h, g)` on `P^1 × P^1`.
//!
//! Preperiodic coordinates are handled by exact cycle arithmetic. Every
//! other coordinate is interpolated p-adically at a prime shared by all
//! coordinates; along each residue class `n = floor + e·t + r` the target
//! equation becomes a Tate series in `t`, and Strassman's bound together
//! with root isolation in `Z_p` yields the members of that class. Every
//! reported member is confirmed by exact arithmetic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::orbit::{detect_preperiodicity, OrbitError, Preperiodicity};
use crate::padic::{PadicContext, PadicError, PadicNumber, StrassmanBound, TateSeries};
use crate::poly::BiPoly;
use crate::ratmap::{MapError, ProjPoint, RationalMap, DEFAULT_MAX_BITS};
use crate::uniformize::{
    interpolate_orbit, search_good_primes, BundleParams, GoodPrimeCertificate, InterpolationBundle, SearchCaps,
    UniformizeError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmlError {
    #[error("no prime in [{p_min}, {p_max}] is good for every coordinate")]
    NoCommonPrime { p_min: u64, p_max: u64 },
    #[error("strict mode requires deg g = 1, got {0}")]
    StrictMode(usize),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("exact orbit point {n} exceeds the size cap")]
    SizeLimit { n: u64 },
    #[error("exact check refutes the progression at n = {n}")]
    ProgressionRefuted { n: u64 },
    #[error("class {class} has {members} members but Strassman bound {bound}")]
    StrassmanViolation { class: u64, members: usize, bound: usize },
    #[error(transparent)]
    Uniformize(#[from] UniformizeError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

impl DmlError {
    pub fn name(&self) -> &'static str {
        match self {
            DmlError::NoCommonPrime { .. } => "NoCommonPrime",
            DmlError::StrictMode(_) => "StrictModeViolation",
            DmlError::InvalidProblem(_) => "InvalidProblem",
            DmlError::SizeLimit { .. } => "SizeLimit",
            DmlError::ProgressionRefuted { .. } => "ProgressionRefuted",
            DmlError::StrassmanViolation { .. } => "StrassmanViolation",
            DmlError::Uniformize(e) => e.name(),
            DmlError::Orbit(e) => e.name(),
            DmlError::Map(e) => e.name(),
            DmlError::Padic(e) => e.name(),
        }
    }
}

/// A split self-map `(h, g)` of `P^1 × P^1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMap {
    pub h: RationalMap,
    pub g: RationalMap,
}

/// The locus `Y`: a point of `P^1` or a curve `F(x, y) = 0` closed up in
/// `P^1 × P^1` with the given bidegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetLocus {
    Point { beta: ProjPoint },
    Curve { f: BiPoly, bidegree: (usize, usize) },
}

impl TargetLocus {
    pub fn curve(f: BiPoly) -> Self {
        let bidegree = (f.deg_x(), f.deg_y());
        TargetLocus::Curve { f, bidegree }
    }

    /// `b·x - a` in bidegree `(1, 0)` for `β = [a : b]`.
    fn equation(&self) -> (BiPoly, (usize, usize)) {
        match self {
            TargetLocus::Point { beta } => (
                BiPoly::from_terms([((1, 0), beta.b().clone()), ((0, 0), -beta.a().clone())]),
                (1, 0),
            ),
            TargetLocus::Curve { f, bidegree } => (f.clone(), *bidegree),
        }
    }
}

/// One or two coordinates with their start points and a target equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmlProblem {
    pub maps: Vec<RationalMap>,
    pub starts: Vec<ProjPoint>,
    pub f: BiPoly,
    pub bidegree: (usize, usize),
}

impl DmlProblem {
    pub fn point(h: &RationalMap, c: &ProjPoint, beta: &ProjPoint) -> Self {
        let (f, bidegree) = TargetLocus::Point { beta: beta.clone() }.equation();
        DmlProblem { maps: vec![h.clone()], starts: vec![c.clone()], f, bidegree }
    }

    pub fn split(phi: &SplitMap, c: (&ProjPoint, &ProjPoint), target: &TargetLocus) -> Self {
        let (f, bidegree) = target.equation();
        DmlProblem {
            maps: vec![phi.h.clone(), phi.g.clone()],
            starts: vec![c.0.clone(), c.1.clone()],
            f,
            bidegree,
        }
    }

    fn validate(&self) -> Result<(), DmlError> {
        let k = self.maps.len();
        if k == 0 || k > 2 || self.starts.len() != k {
            return Err(DmlError::InvalidProblem("expected one or two coordinates with start points".into()));
        }
        if self.f.deg_x() > self.bidegree.0 || self.f.deg_y() > self.bidegree.1 {
            return Err(DmlError::InvalidProblem("bidegree smaller than the degrees of F".into()));
        }
        if k == 1 && self.bidegree.1 > 0 {
            return Err(DmlError::InvalidProblem("F involves y but there is no second coordinate".into()));
        }
        Ok(())
    }

    fn relevant(&self, coord: usize) -> bool {
        match coord {
            0 => self.bidegree.0 > 0,
            _ => self.maps.len() > 1 && self.bidegree.1 > 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Exact cycle arithmetic for preperiodic coordinates, p-adic otherwise.
    Auto,
    /// p-adic interpolation for every coordinate, used for cross-checks.
    ForcePadic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmlParams {
    pub p_min: u64,
    pub p_max: u64,
    pub bundle: BundleParams,
    /// Candidates above this index are reported but not verified.
    pub n_max: u64,
    /// Exact checks along each progression.
    pub spot_checks: usize,
    /// Require `deg g = 1` for split maps.
    pub strict: bool,
    pub route: Route,
    pub caps: SearchCaps,
    /// Steps of exact cycle detection before a coordinate counts as wandering.
    pub preperiodic_cap: usize,
    pub max_bits: u64,
}

impl Default for DmlParams {
    fn default() -> Self {
        DmlParams {
            p_min: 5,
            p_max: 200,
            bundle: BundleParams::default(),
            n_max: 64,
            spot_checks: 8,
            strict: true,
            route: Route::Auto,
            caps: SearchCaps::default(),
            preperiodic_cap: 64,
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateLevel {
    /// Decided by exact cycle arithmetic alone.
    Exact,
    /// All members up to `n_max` found; any further member is congruent to a
    /// listed root modulo `p^(N - slack)`.
    ProvedAtPrecision,
    Heuristic,
}

/// `{start + modulus·j : j >= 0}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Progression {
    pub residue: u64,
    pub modulus: u64,
    pub start: u64,
}

impl Progression {
    pub fn contains(&self, n: u64) -> bool {
        n >= self.start && n % self.modulus == self.residue
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordinateInfo {
    Skipped,
    Exact { m: usize, period: usize },
    Padic { certificate: GoodPrimeCertificate, residual_valuation: i64, monotone_decay: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCertificate {
    pub level: CertificateLevel,
    pub p: Option<u64>,
    pub n: u32,
    pub k: usize,
    pub slack: u32,
    pub n_max: u64,
    pub spot_checks: usize,
    pub coordinates: Vec<CoordinateInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassOutcome {
    /// The class is eventually constant and was checked exactly.
    Exact { member: bool },
    /// The class series vanishes at precision; corroborated by exact checks.
    Progression { spot_checks_passed: usize, spot_checks_required: usize },
    /// Isolated zeros of the class series.
    Roots {
        strassman: usize,
        proved: bool,
        /// Each zero as a residue modulo `p^digits`.
        roots: Vec<RootResidue>,
        members: Vec<u64>,
        /// Candidates that failed the exact check.
        rejected: Vec<u64>,
        /// Roots whose smallest natural candidate exceeds `n_max`.
        beyond_n_max: usize,
    },
    Inconclusive { reason: String, members: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootResidue {
    #[serde(with = "crate::serde_big::bigint")]
    pub residue: BigInt,
    pub digits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDecision {
    pub class: u64,
    /// Smallest orbit index of the class covered by the decision.
    pub first_index: u64,
    pub outcome: ClassOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnSetReport {
    pub finite_members: Vec<u64>,
    pub progressions: Vec<Progression>,
    pub certificate: ReportCertificate,
    /// The common modulus `e`.
    pub modulus: u64,
    /// Classes are decided for `n >= floor`; smaller `n` are checked exactly.
    pub floor: u64,
    pub classes: Vec<ClassDecision>,
    pub inconclusive: Vec<u64>,
}

impl ReturnSetReport {
    pub fn is_decided(&self) -> bool {
        self.inconclusive.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.finite_members.contains(&n) || self.progressions.iter().any(|p| p.contains(n))
    }

    /// The answer restricted to `[0, n_max]` together with the progressions.
    pub fn summary(&self, n_max: u64) -> (Vec<u64>, Vec<Progression>) {
        let members = self.finite_members.iter().copied().filter(|&n| n <= n_max).collect();
        (members, self.progressions.clone())
    }
}

/// Exact orbit of one coordinate, extended on demand.
struct ExactOrbit {
    h: RationalMap,
    points: Vec<ProjPoint>,
    cycle: Option<(usize, usize)>,
    max_bits: u64,
}

impl ExactOrbit {
    fn new(h: &RationalMap, c: &ProjPoint, cycle: Option<(usize, usize)>, max_bits: u64) -> Self {
        ExactOrbit { h: h.clone(), points: vec![c.clone()], cycle, max_bits }
    }

    fn get(&mut self, n: u64) -> Result<ProjPoint, DmlError> {
        let idx = match self.cycle {
            Some((m, period)) if n as usize >= m + period => m + (n as usize - m) % period,
            _ => usize::try_from(n).map_err(|_| DmlError::SizeLimit { n })?,
        };
        while self.points.len() <= idx {
            let last = self.points.last().expect("nonempty");
            if last.bits() > self.max_bits {
                return Err(DmlError::SizeLimit { n });
            }
            let next = self.h.evaluate(last)?;
            self.points.push(next);
        }
        Ok(self.points[idx].clone())
    }
}

struct ExactChecker<'a> {
    problem: &'a DmlProblem,
    orbits: Vec<Option<ExactOrbit>>,
}

impl<'a> ExactChecker<'a> {
    fn new(problem: &'a DmlProblem, cycles: &[Option<(usize, usize)>], max_bits: u64) -> Self {
        let orbits = (0..problem.maps.len())
            .map(|i| {
                problem
                    .relevant(i)
                    .then(|| ExactOrbit::new(&problem.maps[i], &problem.starts[i], cycles[i], max_bits))
            })
            .collect();
        ExactChecker { problem, orbits }
    }

    fn member(&mut self, n: u64) -> Result<bool, DmlError> {
        let mut pairs = [(BigInt::zero(), BigInt::from(1)), (BigInt::zero(), BigInt::from(1))];
        for (i, orbit) in self.orbits.iter_mut().enumerate() {
            if let Some(o) = orbit {
                let x = o.get(n)?;
                pairs[i] = (x.a().clone(), x.b().clone());
            }
        }
        let v = self.problem.f.eval_bihomog_in(
            self.problem.bidegree,
            &pairs[0].0,
            &pairs[0].1,
            &pairs[1].0,
            &pairs[1].1,
        );
        Ok(v.is_zero())
    }
}

/// Is `Φ^n(c) ∈ Y`? Exact rational arithmetic on reduced points.
pub fn exact_member_check(problem: &DmlProblem, n: u64, max_bits: u64) -> Result<bool, DmlError> {
    problem.validate()?;
    let cycles = vec![None; problem.maps.len()];
    ExactChecker::new(problem, &cycles, max_bits).member(n)
}

/// All members in `[0, n_max]` by exact iteration; the oracle for the
/// p-adic decision.
pub fn exact_scan(problem: &DmlProblem, n_max: u64, max_bits: u64) -> Result<Vec<u64>, DmlError> {
    problem.validate()?;
    let cycles = vec![None; problem.maps.len()];
    let mut checker = ExactChecker::new(problem, &cycles, max_bits);
    let mut out = Vec::new();
    for n in 0..=n_max {
        if checker.member(n)? {
            out.push(n);
        }
    }
    Ok(out)
}

enum Coord {
    Skipped,
    Exact { m: usize, period: usize },
    Padic(Box<InterpolationBundle>),
}

pub fn decide_point_target(
    h: &RationalMap,
    c: &ProjPoint,
    beta: &ProjPoint,
    params: &DmlParams,
) -> Result<ReturnSetReport, DmlError> {
    decide(&DmlProblem::point(h, c, beta), params)
}

pub fn decide_split(
    phi: &SplitMap,
    c: (&ProjPoint, &ProjPoint),
    target: &TargetLocus,
    params: &DmlParams,
) -> Result<ReturnSetReport, DmlError> {
    if params.strict && phi.g.degree() != 1 {
        return Err(DmlError::StrictMode(phi.g.degree()));
    }
    decide(&DmlProblem::split(phi, c, target), params)
}

/// Decide the return set of a problem.
pub fn decide(problem: &DmlProblem, params: &DmlParams) -> Result<ReturnSetReport, DmlError> {
    problem.validate()?;
    if problem.f.is_zero() {
        return Ok(whole_space(problem, params));
    }
    let k = problem.maps.len();
    let mut cycles: Vec<Option<(usize, usize)>> = vec![None; k];
    let mut needs_padic = vec![false; k];
    for i in 0..k {
        if !problem.relevant(i) {
            continue;
        }
        let pre = detect_preperiodicity(&problem.maps[i], &problem.starts[i], params.preperiodic_cap, params.max_bits);
        match pre {
            Ok(Preperiodicity::Preperiodic { m, period }) => cycles[i] = Some((m, period)),
            Ok(Preperiodicity::NotDetected) | Err(OrbitError::SizeLimit { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        needs_padic[i] = cycles[i].is_none() || params.route == Route::ForcePadic;
    }
    let mut coords: Vec<Coord> = (0..k)
        .map(|i| match (problem.relevant(i), cycles[i]) {
            (false, _) => Coord::Skipped,
            (true, Some((m, period))) => Coord::Exact { m, period },
            (true, None) => Coord::Skipped,
        })
        .collect();
    let mut prime = None;
    if needs_padic.iter().any(|&b| b) {
        let (p, bundles) = common_prime_bundles(problem, &needs_padic, params)?;
        prime = Some(p);
        for (i, b) in bundles.into_iter().enumerate() {
            if let Some(b) = b {
                coords[i] = Coord::Padic(Box::new(b));
            }
        }
    }
    let mut e = 1u64;
    let mut floor = 0u64;
    for c in &coords {
        match c {
            Coord::Skipped => {}
            Coord::Exact { m, period } => {
                e = arith::lcm(e, *period as u64);
                floor = floor.max(*m as u64);
            }
            Coord::Padic(b) => {
                e = arith::lcm(e, b.cert.a);
                floor = floor.max(b.validity_floor as u64);
            }
        }
    }
    let mut checker = ExactChecker::new(problem, &cycles, params.max_bits);
    let mut engine = ClassEngine::new(problem, &coords, prime, e, floor, params);
    let mut classes = Vec::with_capacity(e as usize);
    for r in 0..e {
        classes.push(engine.decide_class(r, &mut checker)?);
    }
    assemble(problem, params, &coords, prime, e, floor, classes, &mut checker)
}

fn whole_space(problem: &DmlProblem, params: &DmlParams) -> ReturnSetReport {
    ReturnSetReport {
        finite_members: vec![],
        progressions: vec![Progression { residue: 0, modulus: 1, start: 0 }],
        certificate: ReportCertificate {
            level: CertificateLevel::Exact,
            p: None,
            n: params.bundle.n,
            k: params.bundle.k,
            slack: params.bundle.slack,
            n_max: params.n_max,
            spot_checks: 0,
            coordinates: problem.maps.iter().map(|_| CoordinateInfo::Skipped).collect(),
        },
        modulus: 1,
        floor: 0,
        classes: vec![],
        inconclusive: vec![],
    }
}

/// Smallest prime in range carrying a certificate for every coordinate that
/// needs one, with the corresponding bundles.
fn common_prime_bundles(
    problem: &DmlProblem,
    needs: &[bool],
    params: &DmlParams,
) -> Result<(u64, Vec<Option<InterpolationBundle>>), DmlError> {
    let count = needs.iter().filter(|&&b| b).count();
    'primes: for p in arith::primes_in(params.p_min.max(5), params.p_max) {
        let mut certs = vec![None; needs.len()];
        for (i, &need) in needs.iter().enumerate() {
            if !need {
                continue;
            }
            let s = search_good_primes(&problem.maps[i], &problem.starts[i], p, p, params.caps, 1)?;
            match s.certificates.into_iter().next() {
                Some(c) => certs[i] = Some(c),
                None => continue 'primes,
            }
        }
        let mut bundles = Vec::with_capacity(needs.len());
        for (i, cert) in certs.into_iter().enumerate() {
            bundles.push(match cert {
                Some(cert) => Some(interpolate_orbit(&problem.maps[i], &problem.starts[i], &cert, params.bundle)?),
                None => None,
            });
        }
        return Ok((p, bundles));
    }
    if count == 1 {
        let tried = arith::primes_in(params.p_min.max(5), params.p_max).count();
        return Err(UniformizeError::NoPrimeFound { p_min: params.p_min, p_max: params.p_max, tried }.into());
    }
    Err(DmlError::NoCommonPrime { p_min: params.p_min, p_max: params.p_max })
}

struct ClassEngine<'a> {
    problem: &'a DmlProblem,
    coords: &'a [Coord],
    ctx: Option<PadicContext>,
    e: u64,
    floor: u64,
    params: &'a DmlParams,
    monomial: Vec<Vec<Option<Result<TateSeries, PadicError>>>>,
}

impl<'a> ClassEngine<'a> {
    fn new(
        problem: &'a DmlProblem,
        coords: &'a [Coord],
        prime: Option<u64>,
        e: u64,
        floor: u64,
        params: &'a DmlParams,
    ) -> Self {
        let ctx = prime.map(|p| PadicContext::new(p, params.bundle.n).expect("bundle context is valid"));
        let monomial = coords
            .iter()
            .map(|c| match c {
                Coord::Padic(b) => vec![None; b.cert.a as usize],
                _ => vec![],
            })
            .collect();
        ClassEngine { problem, coords, ctx, e, floor, params, monomial }
    }

    fn decide_class(&mut self, r: u64, checker: &mut ExactChecker) -> Result<ClassDecision, DmlError> {
        let n0 = self.floor + r;
        let outcome = match self.ctx {
            None => ClassOutcome::Exact { member: checker.member(n0)? },
            Some(ctx) => match self.class_series(ctx, r, checker) {
                Ok(series) => self.decide_series(ctx, r, &series, checker)?,
                Err(err) => {
                    let members = self.class_scan(r, checker);
                    ClassOutcome::Inconclusive { reason: format!("class series unavailable: {err}"), members }
                }
            },
        };
        Ok(ClassDecision { class: r, first_index: n0, outcome })
    }

    fn monomial_form(&mut self, coord: usize, i: u64) -> Result<TateSeries, PadicError> {
        let Coord::Padic(b) = &self.coords[coord] else { unreachable!("padic coordinate") };
        let slot = &mut self.monomial[coord][i as usize];
        if slot.is_none() {
            *slot = Some(b.classes[i as usize].mahler.to_monomial());
        }
        slot.clone().expect("filled")
    }

    /// `F(X_1(t), X_2(t))` for `n = floor + e·t + r`.
    fn class_series(&mut self, ctx: PadicContext, r: u64, checker: &mut ExactChecker) -> Result<TateSeries, PadicError> {
        let n0 = self.floor + r;
        let k_out = self.params.bundle.k;
        let mut sides: Vec<(TateSeries, TateSeries)> = Vec::with_capacity(2);
        for coord in 0..2 {
            let one = TateSeries::from_ints(ctx, &[1]);
            if coord >= self.coords.len() {
                sides.push((TateSeries::from_ints(ctx, &[0]), one));
                continue;
            }
            let pair = match &self.coords[coord] {
                Coord::Skipped => (TateSeries::from_ints(ctx, &[0]), one),
                Coord::Exact { .. } => {
                    let x = checker.orbits[coord].as_mut().expect("relevant").get(n0).map_err(|_| {
                        PadicError::InvalidContext("exact cycle point unavailable".into())
                    })?;
                    (TateSeries::from_bigints(ctx, &[x.a().clone()]), TateSeries::from_bigints(ctx, &[x.b().clone()]))
                }
                Coord::Padic(b) => {
                    let a = b.cert.a;
                    let i = n0 % a;
                    let first = b.classes[i as usize].first_n;
                    let d = (n0 - i) / a - first;
                    let s = self.e / a;
                    let t = self.monomial_form(coord, i)?;
                    let lin = TateSeries::from_bigints(ctx, &[BigInt::from(d), BigInt::from(s)]);
                    (t.compose(&lin, k_out)?, one)
                }
            };
            sides.push(pair);
        }
        let powers = |s: &TateSeries, d: usize| -> Vec<TateSeries> {
            let mut out = vec![TateSeries::from_ints(ctx, &[1])];
            for j in 0..d {
                let next = out[j].mul(s).truncate(k_out);
                out.push(next);
            }
            out
        };
        let (dx, dy) = self.problem.bidegree;
        let x1 = powers(&sides[0].0, dx);
        let b1 = powers(&sides[0].1, dx);
        let x2 = powers(&sides[1].0, dy);
        let b2 = powers(&sides[1].1, dy);
        let mut acc = TateSeries::from_ints(ctx, &[0]);
        for (&(i, j), c) in self.problem.f.terms() {
            let term = x1[i].mul(&b1[dx - i]).truncate(k_out).mul(&x2[j].mul(&b2[dy - j]).truncate(k_out));
            acc = acc.add(&term.truncate(k_out).scale(&PadicNumber::from_int(ctx, c)));
        }
        Ok(acc)
    }

    fn decide_series(
        &mut self,
        ctx: PadicContext,
        r: u64,
        series: &TateSeries,
        checker: &mut ExactChecker,
    ) -> Result<ClassOutcome, DmlError> {
        let n0 = self.floor + r;
        match series.strassman_bound() {
            StrassmanBound::ZeroSeries => {
                let mut passed = 0;
                for t in 0..self.params.spot_checks as u64 {
                    let n = n0 + self.e * t;
                    match checker.member(n) {
                        Ok(true) => passed += 1,
                        Ok(false) => return Err(DmlError::ProgressionRefuted { n }),
                        Err(DmlError::SizeLimit { .. }) => break,
                        Err(err) => return Err(err),
                    }
                }
                Ok(ClassOutcome::Progression {
                    spot_checks_passed: passed,
                    spot_checks_required: self.params.spot_checks,
                })
            }
            StrassmanBound::Bound { k0, proved } => {
                let scan = match series.zp_root_scan() {
                    Ok(s) => s,
                    Err(err) => {
                        let members = self.class_scan(r, checker);
                        return Ok(ClassOutcome::Inconclusive { reason: format!("root isolation failed: {err}"), members });
                    }
                };
                if !scan.clusters.is_empty() {
                    let members = self.class_scan(r, checker);
                    return Ok(ClassOutcome::Inconclusive {
                        reason: format!("{} unresolved root cluster(s)", scan.clusters.len()),
                        members,
                    });
                }
                let t_max = if self.params.n_max >= n0 { Some((self.params.n_max - n0) / self.e) } else { None };
                let max_digits = ctx.digits().saturating_sub(self.params.bundle.slack);
                let mut roots = Vec::new();
                let mut members = BTreeSet::new();
                let mut rejected = BTreeSet::new();
                let mut beyond = 0;
                for root in &scan.roots {
                    let digits = (root.value.abs_prec().max(0) as u32).min(max_digits);
                    if digits == 0 {
                        let members = self.class_scan(r, checker);
                        return Ok(ClassOutcome::Inconclusive { reason: "root known to no digits".into(), members });
                    }
                    let residue = root.value.residue(digits)?;
                    roots.push(RootResidue { residue: residue.clone(), digits });
                    let step = ctx.pow(digits);
                    let mut t = residue;
                    let Some(t_max) = t_max else {
                        beyond += 1;
                        continue;
                    };
                    if t > BigInt::from(t_max) {
                        beyond += 1;
                        continue;
                    }
                    while t <= BigInt::from(t_max) {
                        let n = n0 + self.e * t.to_u64().expect("bounded by t_max");
                        match checker.member(n) {
                            Ok(true) => {
                                members.insert(n);
                            }
                            Ok(false) => {
                                rejected.insert(n);
                            }
                            Err(DmlError::SizeLimit { .. }) => {
                                return Ok(ClassOutcome::Inconclusive {
                                    reason: format!("candidate n = {n} exceeds the exact size cap"),
                                    members: members.into_iter().collect(),
                                });
                            }
                            Err(err) => return Err(err),
                        }
                        t += &step;
                    }
                }
                if members.len() > k0 {
                    return Err(DmlError::StrassmanViolation { class: r, members: members.len(), bound: k0 });
                }
                Ok(ClassOutcome::Roots {
                    strassman: k0,
                    proved,
                    roots,
                    members: members.into_iter().collect(),
                    rejected: rejected.into_iter().collect(),
                    beyond_n_max: beyond,
                })
            }
        }
    }

    /// Exact fallback over the class up to `n_max`, stopping at the size cap.
    fn class_scan(&self, r: u64, checker: &mut ExactChecker) -> Vec<u64> {
        let mut out = Vec::new();
        let mut n = self.floor + r;
        while n <= self.params.n_max {
            match checker.member(n) {
                Ok(true) => out.push(n),
                Ok(false) => {}
                Err(_) => break,
            }
            n += self.e;
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    problem: &DmlProblem,
    params: &DmlParams,
    coords: &[Coord],
    prime: Option<u64>,
    e: u64,
    floor: u64,
    classes: Vec<ClassDecision>,
    checker: &mut ExactChecker,
) -> Result<ReturnSetReport, DmlError> {
    let mut finite = BTreeSet::new();
    let mut progressions = Vec::new();
    let mut inconclusive = Vec::new();
    let mut heuristic = false;
    for c in &classes {
        match &c.outcome {
            ClassOutcome::Exact { member: true } => progressions.push(c.first_index),
            ClassOutcome::Exact { member: false } => {}
            ClassOutcome::Progression { spot_checks_passed, spot_checks_required } => {
                heuristic |= spot_checks_passed < spot_checks_required;
                progressions.push(c.first_index);
            }
            ClassOutcome::Roots { members, proved, .. } => {
                heuristic |= !proved;
                finite.extend(members.iter().copied());
            }
            ClassOutcome::Inconclusive { members, .. } => {
                inconclusive.push(c.class);
                finite.extend(members.iter().copied());
            }
        }
    }
    let mut progs = Vec::with_capacity(progressions.len());
    for n0 in progressions {
        let mut start = n0;
        while start >= e && checker.member(start - e)? {
            start -= e;
        }
        progs.push(Progression { residue: start % e, modulus: e, start });
    }
    for n in 0..floor {
        if checker.member(n)? && !progs.iter().any(|p| p.contains(n)) {
            finite.insert(n);
        }
    }
    progs.sort();
    let infos: Vec<CoordinateInfo> = (0..problem.maps.len())
        .map(|i| match &coords[i] {
            Coord::Skipped => CoordinateInfo::Skipped,
            Coord::Exact { m, period } => CoordinateInfo::Exact { m: *m, period: *period },
            Coord::Padic(b) => CoordinateInfo::Padic {
                certificate: b.cert.clone(),
                residual_valuation: b.validation.min_valuation,
                monotone_decay: b.classes.iter().all(|c| c.decay.monotone),
            },
        })
        .collect();
    let monotone = infos.iter().all(|c| !matches!(c, CoordinateInfo::Padic { monotone_decay: false, .. }));
    let level = if prime.is_none() && inconclusive.is_empty() {
        CertificateLevel::Exact
    } else if inconclusive.is_empty() && !heuristic && monotone {
        CertificateLevel::ProvedAtPrecision
    } else {
        CertificateLevel::Heuristic
    };
    Ok(ReturnSetReport {
        finite_members: finite.into_iter().collect(),
        progressions: progs,
        certificate: ReportCertificate {
            level,
            p: prime,
            n: params.bundle.n,
            k: params.bundle.k,
            slack: params.bundle.slack,
            n_max: params.n_max,
            spot_checks: params.spot_checks,
            coordinates: infos,
        },
        modulus: e,
        floor,
        classes,
        inconclusive,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossPrimeReport {
    pub primary: ReturnSetReport,
    pub first: ReturnSetReport,
    pub second: ReturnSetReport,
    pub agree: bool,
}

/// Decide once with the default routing and twice on the p-adic path at
/// two distinct good primes; the three answers must agree on `[0, n_max]`.
pub fn cross_prime_agreement(problem: &DmlProblem, params: &DmlParams) -> Result<CrossPrimeReport, DmlError> {
    let primary = decide(problem, params)?;
    let forced = DmlParams { route: Route::ForcePadic, ..params.clone() };
    let first = decide(problem, &forced)?;
    let next = DmlParams { p_min: first.certificate.p.map_or(forced.p_min, |p| p + 1), ..forced };
    let second = decide(problem, &next)?;
    let base = normalized(&primary, params.n_max);
    let agree = normalized(&first, params.n_max) == base && normalized(&second, params.n_max) == base;
    Ok(CrossPrimeReport { primary, first, second, agree })
}

/// Members in `[0, n_max]` as a plain set; progressions of different moduli
/// describing the same set compare equal this way.
fn normalized(r: &ReturnSetReport, n_max: u64) -> Vec<u64> {
    (0..=n_max).filter(|&n| r.contains(n)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub n: u64,
    pub valuation: u64,
    pub legendre: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleTable {
    pub p: u64,
    pub rows: Vec<CounterexampleRow>,
    pub agrees: bool,
    /// `v_p` strictly increases along `n = p^k`.
    pub grows_along_powers: bool,
}

/// `Σ_i floor(n / p^i)`.
pub fn legendre(n: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = n / p;
    while q > 0 {
        total += q;
        q /= p;
    }
    total
}

/// Iterate `f(x, y) = (x + 1, y (x + 1))` from `(0, 1)`, so `f^n(0, 1) =
/// (n, n!)`, and tabulate `v_p(n!)`.
pub fn counterexample_demo(p: u64, n_max: u64) -> Result<CounterexampleTable, DmlError> {
    if p < 2 || !arith::is_prime(p) {
        return Err(DmlError::InvalidProblem(format!("{p} is not prime")));
    }
    let mut x = BigInt::zero();
    let mut y = BigInt::from(1);
    let mut rows = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let valuation = arith::valuation(&y, p).expect("n! is nonzero");
        rows.push(CounterexampleRow { n, valuation, legendre: legendre(n, p) });
        x += 1;
        y *= &x;
    }
    let agrees = rows.iter().all(|r| r.valuation == r.legendre);
    let mut powers = Vec::new();
    let mut q = p;
    while q <= n_max {
        powers.push(rows[q as usize].valuation);
        q *= p;
    }
    let grows_along_powers = powers.windows(2).all(|w| w[0] < w[1]);
    Ok(CounterexampleTable { p, rows, agrees, grows_along_powers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> RationalMap {
        crate::parse::parse_map(s).unwrap()
    }

    fn pt(n: i64) -> ProjPoint {
        ProjPoint::from_int(n)
    }

    fn quick() -> DmlParams {
        DmlParams { bundle: BundleParams { n: 16, k: 32, j: 16, slack: 4 }, n_max: 24, ..DmlParams::default() }
    }

    #[test]
    fn two_cycle_is_a_progression() {
        let r = decide_point_target(&m("1/x"), &pt(2), &pt(2), &quick()).unwrap();
        assert_eq!(r.progressions, vec![Progression { residue: 0, modulus: 2, start: 0 }]);
        assert!(r.finite_members.is_empty());
        assert_eq!(r.certificate.level, CertificateLevel::Exact);
    }

    #[test]
    fn two_cycle_padic_route_agrees() {
        let params = DmlParams { route: Route::ForcePadic, ..quick() };
        let r = decide_point_target(&m("1/x"), &pt(2), &pt(2), &params).unwrap();
        assert_eq!(r.progressions, vec![Progression { residue: 0, modulus: 2, start: 0 }]);
        assert!(r.finite_members.is_empty());
        assert!(r.certificate.p.is_some());
    }

    #[test]
    fn squaring_hits_sixteen_once() {
        let r = decide_point_target(&m("x^2"), &pt(2), &pt(16), &quick()).unwrap();
        assert_eq!(r.finite_members, vec![2]);
        assert!(r.progressions.is_empty());
        assert!(r.is_decided());
    }

    #[test]
    fn squaring_never_hits_three() {
        let r = decide_point_target(&m("x^2"), &pt(2), &pt(3), &quick()).unwrap();
        assert!(r.finite_members.is_empty() && r.progressions.is_empty());
        assert!(r.is_decided());
    }

    #[test]
    fn split_vertical_line() {
        let phi = SplitMap { h: m("x^2"), g: m("x+1") };
        let y = TargetLocus::curve(crate::parse::parse_curve("x - 16").unwrap());
        let r = decide_split(&phi, (&pt(2), &pt(0)), &y, &quick()).unwrap();
        assert_eq!(r.finite_members, vec![2]);
        assert!(r.progressions.is_empty());
    }

    #[test]
    fn split_second_coordinate_is_n() {
        let phi = SplitMap { h: m("x^2"), g: m("x+1") };
        let y = TargetLocus::curve(crate::parse::parse_curve("y - 3").unwrap());
        let r = decide_split(&phi, (&pt(2), &pt(0)), &y, &quick()).unwrap();
        assert_eq!(r.finite_members, vec![3]);
        assert!(r.progressions.is_empty());
    }

    #[test]
    fn split_ignores_unused_coordinate() {
        let phi = SplitMap { h: m("1/x"), g: m("x+2") };
        let y = TargetLocus::curve(crate::parse::parse_curve("x - 2").unwrap());
        let r = decide_split(&phi, (&pt(2), &pt(0)), &y, &quick()).unwrap();
        assert_eq!(r.progressions, vec![Progression { residue: 0, modulus: 2, start: 0 }]);
    }

    #[test]
    fn strict_mode_rejects_quadratic_g() {
        let phi = SplitMap { h: m("x^2"), g: m("x^2") };
        let y = TargetLocus::curve(crate::parse::parse_curve("x - y").unwrap());
        assert_eq!(decide_split(&phi, (&pt(2), &pt(3)), &y, &quick()), Err(DmlError::StrictMode(2)));
    }

    #[test]
    fn whole_space_and_empty_target() {
        let phi = SplitMap { h: m("x^2"), g: m("x+1") };
        let y = TargetLocus::curve(BiPoly::zero());
        let r = decide_split(&phi, (&pt(2), &pt(0)), &y, &quick()).unwrap();
        assert_eq!(r.progressions, vec![Progression { residue: 0, modulus: 1, start: 0 }]);
        let y = TargetLocus::curve(crate::parse::parse_curve("x^2 + 1").unwrap());
        let r = decide_split(&phi, (&pt(2), &pt(0)), &y, &quick()).unwrap();
        assert!(r.finite_members.is_empty() && r.progressions.is_empty());
    }

    #[test]
    fn exact_member_examples() {
        let p = DmlProblem::point(&m("x^2"), &pt(2), &pt(16));
        assert!(exact_member_check(&p, 2, DEFAULT_MAX_BITS).unwrap());
        assert!(!exact_member_check(&p, 3, DEFAULT_MAX_BITS).unwrap());
        let p = DmlProblem::point(&m("(x^2+2)/(2x)"), &pt(1), &ProjPoint::from_ratio(17, 12).unwrap());
        assert!(exact_member_check(&p, 2, DEFAULT_MAX_BITS).unwrap());
    }

    #[test]
    fn preperiodic_tail_gives_late_start() {
        // 1, 0, -1, 0, -1, ...
        let r = decide_point_target(&m("x^2 - 1"), &pt(1), &pt(-1), &quick()).unwrap();
        assert_eq!(r.progressions, vec![Progression { residue: 0, modulus: 2, start: 2 }]);
        assert!(r.finite_members.is_empty());
    }

    #[test]
    fn legendre_examples() {
        let t = counterexample_demo(7, 49).unwrap();
        assert_eq!(t.rows[7].valuation, 1);
        assert_eq!(t.rows[49].valuation, 8);
        assert_eq!(t.rows[6].valuation, 0);
        assert!(t.agrees && t.grows_along_powers);
    }
}
