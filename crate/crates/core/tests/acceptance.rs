//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use padyn::cli::{random_normalized_map, random_start};
use padyn::dml::{
    counterexample_demo, cross_prime_agreement, exact_scan, DmlParams, DmlProblem, Progression, SplitMap,
    TargetLocus,
};
use padyn::orbit::{check_unit_ideal, cross_term, detect_preperiodicity, orbit_pairs, OrbitMode, Preperiodicity};
use padyn::padic::{PadicContext, PadicNumber, StrassmanBound, TailBound, TateSeries};
use padyn::parse::{parse_curve, parse_map};
use padyn::ratmap::{ProjPoint, RationalMap, DEFAULT_MAX_BITS};
use padyn::uniformize::{
    find_good_prime, interpolate_orbit, local_conjugate, validate_bundle, verify_certificate, BundleParams,
    GoodPrimeCertificate, SearchCaps,
};

const SEED: u64 = 20_241;
const CORPUS: usize = 100;
const STEPS: usize = 8;
const MAX_DEGREE: usize = 4;
const HEIGHT: i64 = 10;
/// Degree-4 raw pairs reach about 1.6M bits by n = 9.
const MAX_BITS: u64 = 1 << 24;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn corpus() -> Vec<(RationalMap, ProjPoint)> {
    let mut rng = StdRng::seed_from_u64(SEED);
    (0..CORPUS)
        .map(|_| {
            let h = random_normalized_map(&mut rng, MAX_DEGREE, HEIGHT);
            let c = random_start(&mut rng, HEIGHT);
            (h, c)
        })
        .collect()
}

fn powers(x: &BigInt, d: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for i in 0..d {
        let next = &out[i] * x;
        out.push(next);
    }
    out
}

fn homog(coeffs: &[BigInt], ap: &[BigInt], bp: &[BigInt], d: usize) -> BigInt {
    coeffs.iter().enumerate().map(|(i, c)| c * &ap[i] * &bp[d - i]).sum()
}

/// Orbit pairs and cross terms recomputed from the coefficient lists alone.
fn criterion_1(maps: &[(RationalMap, ProjPoint)]) -> Outcome {
    let mut bad = Vec::new();
    for (k, (h, c)) in maps.iter().enumerate() {
        let p = h.p().coeffs().to_vec();
        let q = h.q().coeffs().to_vec();
        let d = p.len() - 1;
        let mut fp = p.clone();
        for (i, qi) in q.iter().enumerate() {
            fp[i + 1] -= qi;
        }
        while fp.len() > 1 && fp.last().unwrap().is_zero() {
            fp.pop();
        }
        let dfp = fp.len() - 1;
        let ell = 1 + d - dfp;
        let mut pairs = vec![(c.a().clone(), c.b().clone())];
        for n in 0..=STEPS {
            let (ap, bp) = (powers(&pairs[n].0, d), powers(&pairs[n].1, d));
            let next = (homog(&p, &ap, &bp, d), homog(&q, &ap, &bp, d));
            pairs.push(next);
        }
        let orbit = match orbit_pairs(h, c, STEPS + 1, OrbitMode::Raw, MAX_BITS) {
            Ok(o) => o,
            Err(e) => {
                bad.push(format!("case {k}: {e}"));
                continue;
            }
        };
        if orbit.pairs != pairs {
            bad.push(format!("case {k}: orbit pairs differ"));
            continue;
        }
        for n in 0..=STEPS {
            let (a0, b0) = &pairs[n];
            let (a1, b1) = &pairs[n + 1];
            let lhs = b0 * a1 - a0 * b1;
            let rhs = b0.pow(ell as u32) * homog(&fp, &powers(a0, dfp), &powers(b0, dfp), dfp);
            match cross_term(&orbit, n) {
                Ok(t) if t.lhs == lhs && t.rhs == rhs && lhs == rhs => {}
                _ => bad.push(format!("case {k}, n = {n}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("{} maps, n <= {STEPS}, failures {:?}", maps.len(), bad))
}

/// Strip the bad primes from each gcd; what remains must be built from the
/// unfactored generators.
fn criterion_2(maps: &[(RationalMap, ProjPoint)]) -> Outcome {
    let mut bad = Vec::new();
    for (k, (h, c)) in maps.iter().enumerate() {
        let set = h.bad_primes(c);
        let orbit = orbit_pairs(h, c, STEPS, OrbitMode::Raw, MAX_BITS).expect("orbit");
        let unfactored: BigInt = set.unfactored().iter().map(|u| BigInt::from(u.clone())).product();
        for (n, (a, b)) in orbit.pairs.iter().enumerate() {
            let mut g = padyn::arith::gcd(a, b);
            for p in set.primes() {
                let p = BigInt::from(p.clone());
                let mut pk = p.clone();
                loop {
                    if (&g % &pk).is_zero() {
                        g /= &pk;
                        pk = &pk * &pk;
                    } else if pk == p {
                        break;
                    } else {
                        pk = p.clone();
                    }
                }
            }
            loop {
                let s = padyn::arith::gcd(&g, &unfactored);
                if s.is_one() || g.is_one() {
                    break;
                }
                g /= s;
            }
            if !g.is_one() {
                bad.push(format!("case {k}, n = {n}, residue {g}"));
            }
        }
        if !check_unit_ideal(&orbit, &set).expect("raw orbit").passed() {
            bad.push(format!("case {k}: library report disagrees"));
        }
    }
    outcome(bad.is_empty(), format!("{} maps, n <= {STEPS}, failures {:?}", maps.len(), bad))
}

fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    BigInt::from(b).modpow(&BigInt::from(e), &BigInt::from(m)).try_into().unwrap()
}

/// Orbit of 2 under x^2 mod 49 and the derivative of h^6 at 2, by hand.
fn criterion_3() -> Outcome {
    let h = parse_map("x^2").unwrap();
    let c = ProjPoint::from_int(2);
    let found = find_good_prime(&h, &c, 5, 50, SearchCaps::default());
    let orbit: Vec<u64> = (0..7).map(|n| pow_mod(2, 1 << n, 49)).collect();
    let oracle = orbit == [2, 4, 16, 11, 23, 39, 2]
        && 39 * 39 % 49 == 2
        && pow_mod(2, 21, 49) == 1
        // (h^6)'(2) = 64 * 2^63
        && (64 * pow_mod(2, 63, 49)) % 7 == 1;
    let independent = verify_certificate(&h, &c, 7, 0, 6).map(|k| k.all_pass()).unwrap_or(false);
    let from_seven = find_good_prime(&h, &c, 7, 50, SearchCaps::default()).map(|k| (k.p, k.m, k.a));
    match found {
        Ok(cert) => {
            let want = (7, 0, 6);
            let got = (cert.p, cert.m, cert.a);
            outcome(
                got == want && oracle && independent && cert.checks.all_pass(),
                format!(
                    "search over [5, 50] found {got:?}, expected {want:?}; oracle {oracle}; \
                     (7, 0, 6) re-verified {independent}; search over [7, 50] found {from_seven:?}"
                ),
            )
        }
        Err(e) => outcome(false, format!("search failed: {e}")),
    }
}

/// Held-out residuals against `2^(2^j mod ord(2, 7^N)) mod 7^N`.
fn criterion_4() -> Outcome {
    let n_digits = 32u32;
    let h = parse_map("x^2").unwrap();
    let c = ProjPoint::from_int(2);
    let cert = match find_good_prime(&h, &c, 7, 50, SearchCaps::default()) {
        Ok(c) if c.p == 7 => c,
        other => return outcome(false, format!("no certificate at 7: {other:?}")),
    };
    let params = BundleParams { n: n_digits, k: 64, j: 32, slack: 4 };
    let bundle = match interpolate_orbit(&h, &c, &cert, params) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("interpolation failed: {e}")),
    };
    let ctx = PadicContext::new(7, n_digits).unwrap();
    let modulus = ctx.modulus();
    // ord(2, 7) = 3 and 2^3 = 1 + 7, so ord(2, 7^N) = 3 * 7^(N-1).
    let order = BigInt::from(3) * ctx.pow(n_digits - 1);
    let mut min_v = n_digits as i64;
    let mut checked = 0;
    for (i, class) in bundle.classes.iter().enumerate() {
        for k in 33..=64u64 {
            let j = bundle.orbit_index(i as u64, k);
            let e = BigInt::from(2).modpow(&BigInt::from(j), &order);
            let truth = BigInt::from(2).modpow(&e, &modulus);
            let fitted = class.mahler.eval_nat_truncated(k);
            let v = (&fitted - &PadicNumber::from_int(ctx, &truth)).eff_valuation().min(n_digits as i64);
            min_v = min_v.min(v);
            checked += 1;
        }
    }
    let report = validate_bundle(&bundle, &h, &c, (33, 64), 4);
    let threshold = n_digits as i64 - 4;
    outcome(
        min_v >= threshold && report.pass,
        format!(
            "{checked} held-out values, oracle residual {min_v}, validate_bundle {} (min {}), threshold {threshold}",
            report.pass, report.min_valuation
        ),
    )
}

fn congruent_to_identity(f: &TateSeries) -> bool {
    f.coeffs().iter().enumerate().all(|(r, a)| {
        let shifted = if r == 1 { a - &PadicNumber::one(f.ctx()) } else { a.clone() };
        shifted.eff_valuation() >= 1
    })
}

fn criterion_5(maps: &[(RationalMap, ProjPoint)]) -> Outcome {
    let caps = SearchCaps { max_period: 1 << 12, max_steps: 1 << 16 };
    let mut certs: Vec<(RationalMap, ProjPoint, GoodPrimeCertificate)> = Vec::new();
    let x2 = parse_map("x^2").unwrap();
    for (lo, hi) in [(5, 50), (7, 50)] {
        let c = ProjPoint::from_int(2);
        if let Ok(cert) = find_good_prime(&x2, &c, lo, hi, caps) {
            certs.push((x2.clone(), c, cert));
        }
    }
    for (h, c) in maps {
        if matches!(detect_preperiodicity(h, c, 16, 1 << 16), Ok(Preperiodicity::Preperiodic { .. })) {
            continue;
        }
        if let Ok(cert) = find_good_prime(h, c, 5, 100, caps) {
            certs.push((h.clone(), c.clone(), cert));
        }
    }
    let mut bad = Vec::new();
    for (h, c, cert) in &certs {
        let ctx = PadicContext::new(cert.p, 16).unwrap();
        match local_conjugate(h, c, cert, ctx, 16) {
            Ok(f) if congruent_to_identity(&f) => {}
            Ok(_) => bad.push(format!("{} @ {c}: not congruent to x", h.to_array_string())),
            Err(e) => bad.push(format!("{} @ {c}: {e}", h.to_array_string())),
        }
    }
    outcome(
        !certs.is_empty() && bad.is_empty(),
        format!("{} certificates, K = 16, failures {bad:?}", certs.len()),
    )
}

/// 2^(2^19) is the last iterate of x^2 from 2 under the default bit cap.
const EXACT_WINDOW: u64 = 18;

fn criterion_6() -> Outcome {
    let params = DmlParams { n_max: 40, ..DmlParams::default() };
    let pt = ProjPoint::from_int;
    let cases: Vec<(&str, DmlProblem, Vec<u64>, Vec<Progression>)> = vec![
        (
            "1/x",
            DmlProblem::point(&parse_map("1/x").unwrap(), &pt(2), &pt(2)),
            vec![],
            vec![Progression { residue: 0, modulus: 2, start: 0 }],
        ),
        ("x^2", DmlProblem::point(&parse_map("x^2").unwrap(), &pt(2), &pt(16)), vec![2], vec![]),
        (
            "(x^2, x+1)",
            DmlProblem::split(
                &SplitMap { h: parse_map("x^2").unwrap(), g: parse_map("x+1").unwrap() },
                (&pt(2), &pt(0)),
                &TargetLocus::curve(parse_curve("x = 16").unwrap()),
            ),
            vec![2],
            vec![],
        ),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (label, problem, members, progs) in cases {
        let exact = exact_scan(&problem, EXACT_WINDOW, DEFAULT_MAX_BITS).expect("exact scan");
        let expected: Vec<u64> = (0..=EXACT_WINDOW)
            .filter(|n| members.contains(n) || progs.iter().any(|p| p.contains(*n)))
            .collect();
        let ok = match cross_prime_agreement(&problem, &params) {
            Ok(r) => {
                let (m, p) = r.primary.summary(params.n_max);
                let primes = (r.first.certificate.p, r.second.certificate.p);
                let distinct = matches!(primes, (Some(a), Some(b)) if a != b);
                let padic = r.first.certificate.coordinates.iter().any(|c| {
                    matches!(c, padyn::dml::CoordinateInfo::Padic { .. })
                });
                let exact_agrees = (0..=EXACT_WINDOW).filter(|&n| r.primary.contains(n)).collect::<Vec<_>>() == exact;
                let ok = m == members
                    && p == progs
                    && exact == expected
                    && exact_agrees
                    && r.agree
                    && distinct
                    && padic
                    && r.primary.is_decided();
                lines.push(format!("{label}: members {m:?} progressions {} primes {primes:?} {ok}", p.len()));
                ok
            }
            Err(e) => {
                lines.push(format!("{label}: {e}"));
                false
            }
        };
        pass &= ok;
    }
    outcome(pass, lines.join("; "))
}

fn criterion_7() -> Outcome {
    let table = match counterexample_demo(7, 200) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    // v_7(n!) as a running sum of v_7(k)
    let mut acc = 0u64;
    let mut oracle = vec![0u64];
    for mut k in 1..=200u64 {
        while k % 7 == 0 {
            acc += 1;
            k /= 7;
        }
        oracle.push(acc);
    }
    let matches = table.rows.len() == 201 && table.rows.iter().all(|r| r.valuation == oracle[r.n as usize]);
    let along = [oracle[7], oracle[49]];
    let grows = along[0] < along[1] && table.grows_along_powers;
    outcome(
        matches && grows && table.agrees,
        format!("n <= 200, oracle match {matches}, v at 7, 49 = {along:?}, v(200!) = {}", oracle[200]),
    )
}

fn product_series(ctx: PadicContext, roots: &[i64]) -> TateSeries {
    let mut coeffs = vec![BigInt::one()];
    for &r in roots {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        coeffs = next;
    }
    TateSeries::from_bigints(ctx, &coeffs)
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut bad = Vec::new();
    let trials = 200;
    for t in 0..trials {
        let p = [5u64, 7, 11, 13][rng.gen_range(0..4)];
        let ctx = PadicContext::new(p, 20).unwrap();
        let count = rng.gen_range(1..=5usize.min(p as usize));
        let mut residues: Vec<i64> = (0..p as i64).collect();
        for i in 0..count {
            let j = rng.gen_range(i..residues.len());
            residues.swap(i, j);
        }
        let roots: Vec<i64> = residues[..count]
            .iter()
            .map(|r| r + p as i64 * rng.gen_range(-1000..=1000i64))
            .collect();
        let f = product_series(ctx, &roots);
        assert_eq!(f.tail(), TailBound::Exact);
        let bound = match f.strassman_bound() {
            StrassmanBound::Bound { k0, .. } => k0,
            StrassmanBound::ZeroSeries => {
                bad.push(format!("trial {t}: zero series"));
                continue;
            }
        };
        let found = match f.zp_roots() {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("trial {t}: {e}"));
                continue;
            }
        };
        let all_found = roots.iter().all(|&r| {
            let x = PadicNumber::from_i64(ctx, r);
            found.iter().any(|z| z.value.eq_mod(&x, 20))
        });
        if !all_found || found.len() != roots.len() || found.len() > bound {
            bad.push(format!("trial {t}: p = {p}, roots {roots:?}, found {}, bound {bound}", found.len()));
        }
    }
    outcome(bad.is_empty(), format!("{trials} products at N = 20, failures {bad:?}"))
}

fn main() -> ExitCode {
    let maps = corpus();
    let budgets = [10u64, 10, 1, 30, 30, 60, 1, 5];
    let runs: Vec<Box<dyn Fn() -> Outcome + '_>> = vec![
        Box::new(|| criterion_1(&maps)),
        Box::new(|| criterion_2(&maps)),
        Box::new(criterion_3),
        Box::new(criterion_4),
        Box::new(|| criterion_5(&maps)),
        Box::new(criterion_6),
        Box::new(criterion_7),
        Box::new(criterion_8),
    ];
    let mut failed = 0;
    for (i, run) in runs.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let elapsed = t0.elapsed();
        let budget = Duration::from_secs(budgets[i]);
        let status = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        let over = if elapsed > budget { " (over budget)" } else { "" };
        println!("criterion {} {status} [{:.2}s / {}s{over}] {}", i + 1, elapsed.as_secs_f64(), budgets[i], out.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
