//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use isoperim::asymptotics::{
    coupling_divergence, gaussian_quadrant, ks_ball_exponent, ks_iid_exponent, limit_construction_report,
};
use isoperim::cli::verify::{certificates_suite, krawtchouk_suite, random_codes};
use isoperim::exactmath::{binom, binom_cum, int, ratio, rpow, Rational};
use isoperim::hypercube::{
    dual_distribution, even_part, fourier_spectrum, macwilliams_forward, macwilliams_inverse, odd_part,
    pair_counts_direct, subcube, Code, DistanceDistribution,
};
use isoperim::krawtchouk::{krawtchouk, shared_table};
use isoperim::lpbound::{
    build_dual, build_primal, lp_upper_bound, solve_exact, BoundMode, BoundQuery, LpStatus, Relation,
};
use isoperim::oracle::{gamma_exact, OracleModel};
use isoperim::stability::{
    cross_stability, proposition1_identity, stab_spectral, stab_sphere, theorem31_gap_report, NoiseModel,
};

const SEED: u64 = 0x150_9e41;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(ctx: impl std::fmt::Display) -> impl FnOnce(E) -> String {
    move |e| format!("{ctx}: {e}")
}

fn q(n: u32, r: u32, m: impl Into<BigInt>) -> Result<BoundQuery, String> {
    BoundQuery::new(n, r, m).map_err(|e| e.to_string())
}

/// `C(n-k, <=r) / (2^k C(n, <=r))`.
fn subcube_ball_formula(n: u32, k: u32, r: u32) -> Rational {
    Rational::new(binom_cum(n - k, i64::from(r)), binom_cum(n, i64::from(r)) << k as usize)
}

fn c1_half_cube() -> Outcome {
    let n = 4;
    for r in 1..=n {
        let query = q(n, r, 8u32)?;
        let expected = subcube_ball_formula(n, 1, r);
        let oracle = gamma_exact(&query, &OracleModel::Ball).map_err(err(format!("r={r}")))?;
        ensure(oracle.optimum == expected, || format!("r={r}: oracle {} != {expected}", oracle.optimum))?;
        ensure(oracle.subsets_examined == 12870, || format!("r={r}: examined {}", oracle.subsets_examined))?;
        for mode in [BoundMode::ClosedForm, BoundMode::ExactLp] {
            let b = lp_upper_bound(&query, mode).map_err(err(format!("r={r}")))?.bstab_bound;
            ensure(b == expected, || format!("r={r} {mode:?}: bound {b} != {expected}"))?;
        }
    }
    Ok("n=4, r=1..4: oracle = bound = C(3,<=r)/(2 C(4,<=r))".into())
}

fn c2_quarter_cube() -> Outcome {
    let query = q(4, 1, 4u32)?;
    let oracle = gamma_exact(&query, &OracleModel::Ball).map_err(err("(4,1)"))?.optimum;
    let bound = lp_upper_bound(&query, BoundMode::ClosedForm).map_err(err("(4,1)"))?.bstab_bound;
    ensure(oracle == ratio(3, 20) && bound == ratio(3, 20), || format!("(4,1): oracle {oracle}, bound {bound}"))?;
    let mut cases = 0;
    for n in 4..=20u32 {
        let c = subcube(n, 2).map_err(err(n))?;
        let spec = fourier_spectrum(&c);
        for r in 1..n / 2 {
            let query = q(n, r, 1u64 << (n - 2))?;
            let bound = lp_upper_bound(&query, BoundMode::ClosedForm).map_err(err(format!("n={n} r={r}")))?.bstab_bound;
            let value = stab_spectral(&spec, &NoiseModel::Ball { r }).map_err(err(format!("n={n} r={r}")))?.value;
            ensure(bound == value, || format!("n={n} r={r}: bound {bound} != stab {value}"))?;
            let formula = subcube_ball_formula(n, 2, r);
            ensure(value == formula, || format!("n={n} r={r}: stab {value} != formula {formula}"))?;
            cases += 1;
        }
    }
    Ok(format!("(4,1) oracle = bound = 3/20; {cases} (n, r) cases tight for n in 4..=20"))
}

fn c3_duality() -> Outcome {
    let mut cases = 0;
    for n in 1..=14u32 {
        let full = 1u64 << n;
        let mut sizes: Vec<u64> =
            [full / 8, full / 4, 3 * full / 8, full / 2].into_iter().filter(|&m| m >= 1).collect();
        sizes.dedup();
        for r in 1..=n {
            for &m in &sizes {
                let ctx = format!("n={n} r={r} M={m}");
                let query = q(n, r, m)?;
                let (plp, dlp) = (build_primal(&query), build_dual(&query));
                let p = solve_exact(&plp).map_err(err(&ctx))?;
                let d = solve_exact(&dlp).map_err(err(&ctx))?;
                ensure(p.status == LpStatus::Optimal && d.status == LpStatus::Optimal, || {
                    format!("{ctx}: not optimal")
                })?;
                ensure(p.value == d.value, || format!("{ctx}: primal {:?} != dual {:?}", p.value, d.value))?;
                p.verify(&plp).map_err(err(format!("{ctx} primal")))?;
                d.verify(&dlp).map_err(err(format!("{ctx} dual")))?;
                // re-check the dual point against the raw rows
                for (row, con) in dlp.constraints.iter().enumerate() {
                    let lhs: Rational = con.coeffs.iter().zip(&d.primal).map(|(a, x)| a * x).sum();
                    let ok = match con.relation {
                        Relation::Le => lhs <= con.rhs,
                        Relation::Ge => lhs >= con.rhs,
                        Relation::Eq => lhs == con.rhs,
                    };
                    ensure(ok, || format!("{ctx}: dual row {row} violated"))?;
                }
                ensure(d.primal.iter().all(|x| !x.is_negative()), || format!("{ctx}: negative dual variable"))?;
                let obj: Rational = dlp.objective.iter().zip(&d.primal).map(|(c, x)| c * x).sum();
                ensure(Some(&obj) == p.value.as_ref(), || format!("{ctx}: dual objective {obj} != primal"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} grid points, primal = dual with verified certificates"))
}

fn c4_certificates() -> Outcome {
    let rep = certificates_suite(20);
    if !rep.passed() {
        return Err(format!("{} failures; first: {:?}", rep.failures.len(), rep.failures.first()));
    }
    Ok(format!("{} checks; {} printed-formula discrepancies reported as notes", rep.checks, rep.notes.len()))
}

/// Stability from ordered pair counts, straight from the definitions.
fn stab_from_pairs(counts: &[u64], n: u32, model: &NoiseModel) -> Rational {
    let cube = BigInt::one() << n as usize;
    let c = |i: usize| Rational::from_integer(BigInt::from(counts[i]));
    match model {
        NoiseModel::Sphere { r } => c(*r as usize) / Rational::from_integer(&cube * binom(i64::from(n), i64::from(*r))),
        NoiseModel::Ball { r } => {
            (0..=*r as usize).map(c).sum::<Rational>() / Rational::from_integer(&cube * binom_cum(n, i64::from(*r)))
        }
        NoiseModel::Iid { beta } => {
            let stay = Rational::one() - beta;
            (0..=n as usize).map(|i| c(i) * rpow(beta, i as u32) * rpow(&stay, n - i as u32)).sum::<Rational>()
                / Rational::from_integer(cube)
        }
    }
}

fn corpus() -> Vec<Code> {
    random_codes(SEED, 200, 12)
}

fn c5_spectral(codes: &[Code]) -> Outcome {
    let mut checks = 0;
    for (j, c) in codes.iter().enumerate() {
        let n = c.n();
        let counts = pair_counts_direct(c);
        let spec = fourier_spectrum(c);
        let mut models: Vec<NoiseModel> =
            (0..=n).flat_map(|r| [NoiseModel::Sphere { r }, NoiseModel::Ball { r }]).collect();
        models.extend([ratio(1, 3), ratio(1, 10), ratio(1, 2)].map(|beta| NoiseModel::Iid { beta }));
        for model in &models {
            let direct = stab_from_pairs(&counts, n, model);
            let spectral = stab_spectral(&spec, model).map_err(err(format!("code {j}")))?.value;
            ensure(direct == spectral, || format!("code {j} n={n} {model:?}: {direct} != {spectral}"))?;
            checks += 1;
        }
        for r in 0..=n {
            let (l, rhs) = proposition1_identity(c, r).map_err(err(format!("code {j}")))?;
            ensure(l == rhs, || format!("code {j} r={r}: ball identity {l} != {rhs}"))?;
            checks += 1;
        }
    }
    Ok(format!("{} codes, {checks} exact comparisons", codes.len()))
}

fn c6_macwilliams(codes: &[Code]) -> Outcome {
    for (j, c) in codes.iter().enumerate() {
        let n = c.n();
        let counts = pair_counts_direct(c);
        let total = Rational::from_integer(BigInt::from(c.size()).pow(2));
        let p = DistanceDistribution {
            n,
            entries: counts.iter().map(|&x| Rational::from_integer(x.into()) / &total).collect(),
        };
        let qd = macwilliams_forward(&p);
        ensure(qd == dual_distribution(c).map_err(err(j))?, || format!("code {j}: forward != spectral dual"))?;
        ensure(macwilliams_inverse(&qd) == p, || format!("code {j}: P -> Q -> P failed"))?;
        let t = shared_table(n);
        for k in 0..=n {
            let s: Rational = (0..=n).map(|i| &p.entries[i as usize] * Rational::from(t.get(k, i).clone())).sum();
            ensure(!s.is_negative(), || format!("code {j} k={k}: sum_i P(i) K_k(i) = {s} < 0"))?;
            let s: Rational = (0..=n).map(|i| &qd.entries[i as usize] * Rational::from(t.get(k, i).clone())).sum();
            ensure(!s.is_negative(), || format!("code {j} k={k}: sum_i Q(i) K_k(i) = {s} < 0"))?;
        }
    }
    Ok(format!("{} codes roundtrip exactly, all transforms nonnegative", codes.len()))
}

fn c7_krawtchouk() -> Outcome {
    let rep = krawtchouk_suite(60);
    if !rep.passed() {
        return Err(format!("{} failures; first: {:?}", rep.failures.len(), rep.failures.first()));
    }
    for n in 1..=60u32 {
        for r in 0..n {
            let v = krawtchouk(n - 1, r, -1).map_err(err(format!("n={n} r={r}")))?;
            ensure(v == binom_cum(n, i64::from(r)), || format!("n={n} r={r}: K_r^(n-1)(-1) = {v}"))?;
        }
        // explicit coefficient sum at a few points
        for (k, x) in [(n / 3, n / 2), (n, 1), (1, n)] {
            let direct: BigInt = (0..=k)
                .map(|j| {
                    let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    sign * binom(i64::from(x), i64::from(j)) * binom(i64::from(n - x), i64::from(k - j))
                })
                .sum();
            let v = krawtchouk(n, k, i64::from(x)).map_err(err(n))?;
            ensure(v == direct, || format!("n={n} k={k} x={x}: {v} != {direct}"))?;
        }
    }
    Ok(format!("n <= 60: {} checks", rep.checks))
}

fn c8_orthogonality() -> Outcome {
    let codes = random_codes(SEED ^ 8, 100, 10);
    let mut checks = 0;
    for (j, c) in codes.iter().enumerate() {
        let (e, o) = (even_part(c), odd_part(c));
        for r in (0..=c.n()).step_by(2) {
            let v = cross_stability(&e, &o, &NoiseModel::Sphere { r }).map_err(err(j))?;
            ensure(v.is_zero(), || format!("code {j} r={r}: cross stability {v}"))?;
            checks += 1;
        }
    }
    Ok(format!("100 codes, {checks} (code, even r) pairs vanish"))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

fn c9_theta_star() -> Outcome {
    let mut worst: f64 = 0.0;
    for si in 1..=20 {
        let sigma = f64::from(si) / 42.0;
        for bi in 1..=20 {
            let beta = f64::from(bi) / 40.0;
            let d = |t: f64| coupling_divergence(sigma, t, beta).expect("theta within [0, 2 sigma]");
            let grid = 4000;
            let step = 2.0 * sigma / f64::from(grid);
            let best = (0..=grid).map(|i| f64::from(i) * step).min_by(|a, b| d(*a).total_cmp(&d(*b))).unwrap();
            let theta = golden_min(d, (best - step).max(0.0), (best + step).min(2.0 * sigma));
            let e = ks_iid_exponent(sigma, beta).map_err(err(format!("sigma={sigma} beta={beta}")))?;
            let gap = (e.theta_star - theta).abs().max((e.value - d(theta)).abs());
            ensure(gap < 1e-6, || format!("sigma={sigma} beta={beta}: theta* {} vs grid {theta}", e.theta_star))?;
            worst = worst.max(gap);
        }
        let edge = 2.0 * sigma * (1.0 - sigma);
        let inner = ks_ball_exponent(sigma, edge).map_err(err(sigma))?;
        let outer = ks_ball_exponent(sigma, edge * (1.0 + 1e-15)).map_err(err(sigma))?;
        ensure((inner - outer).abs() < 1e-10, || format!("sigma={sigma}: ball exponent jumps {inner} -> {outer}"))?;
    }
    Ok(format!("20x20 grid, max deviation {worst:.2e}; ball exponent continuous"))
}

fn c10_quadrant() -> Outcome {
    for alpha in [0.01, 0.1, 0.25, 0.4, 0.5, 0.8] {
        let v = gaussian_quadrant(alpha, 0.0).map_err(err(alpha))?;
        ensure((v - alpha * alpha).abs() < 1e-10, || format!("alpha={alpha}: {v}"))?;
    }
    let mut prev = f64::NEG_INFINITY;
    for i in -9..=9 {
        let rho = f64::from(i) / 10.0;
        let v = gaussian_quadrant(0.5, rho).map_err(err(rho))?;
        let exact = 0.25 + rho.asin() / (2.0 * PI);
        ensure((v - exact).abs() < 1e-9, || format!("rho={rho}: {v} vs {exact}"))?;
        ensure(v >= prev, || format!("rho={rho}: not monotone"))?;
        prev = v;
    }
    for alpha in [0.05, 0.2] {
        let mut prev = f64::NEG_INFINITY;
        for i in -19..=19 {
            let v = gaussian_quadrant(alpha, f64::from(i) / 20.0).map_err(err(alpha))?;
            ensure(v >= prev, || format!("alpha={alpha} rho={}: not monotone", f64::from(i) / 20.0))?;
            prev = v;
        }
    }
    Ok("rho = 0 product, arcsine law at alpha = 1/2, monotone in rho".into())
}

fn c11_limit() -> Outcome {
    let c = subcube(3, 1).map_err(err("subcube"))?;
    let rep = limit_construction_report(&c, &ratio(1, 3), &[3, 9, 15, 21]).map_err(err("report"))?;
    ensure(rep.stab_iid == ratio(1, 3), || format!("Stab = {}", rep.stab_iid))?;
    let gaps: Vec<Rational> = rep.steps.iter().map(|s| (&s.sstab - &rep.stab_iid).abs()).collect();
    ensure(gaps.windows(2).all(|w| w[1] <= w[0]), || format!("gaps not monotone: {gaps:?}"))?;
    ensure(gaps[3] < gaps[0], || "no progress from k=3 to k=21".into())?;
    // product with a full cube keeps the iid value, so the sphere value is the only moving part
    let last = &rep.steps[3];
    let direct = stab_sphere(&isoperim::hypercube::product_extend(&c, 21).map_err(err("extend"))?, last.radius)
        .map_err(err("sphere"))?
        .value;
    ensure(direct == last.sstab, || "reported sphere stability differs from direct value".into())?;
    let fmt: Vec<String> = rep.steps.iter().map(|s| format!("k={}:{:.5}", s.k, s.sstab_f64)).collect();
    Ok(format!("{} -> 1/3, side {}", fmt.join(" "), rep.side))
}

fn c12_asymptotic() -> Outcome {
    let mut reports = 0;
    for n in [8u32, 12, 16] {
        let c = subcube(n, 1).map_err(err(n))?;
        for r in 1..=n / 2 {
            let g = theorem31_gap_report(&c, r).map_err(err(format!("n={n} r={r}")))?;
            ensure(g.stab_iid == (int(1) - &g.beta) / int(2), || format!("n={n} r={r}: half-cube iid value"))?;
            reports += 1;
        }
    }
    Ok(format!(
        "limit statements not reproducible at finite n; covered by 1-2 and 5-11 plus {reports} finite-n gap reports"
    ))
}

fn main() -> ExitCode {
    let codes = corpus();
    let criteria: Vec<Criterion> = vec![
        ("1 tight half-cube", Box::new(c1_half_cube)),
        ("2 tight quarter-cube", Box::new(c2_quarter_cube)),
        ("3 strong duality n<=14", Box::new(c3_duality)),
        ("4 dual certificates n<=20", Box::new(c4_certificates)),
        ("5 spectral equivalence", Box::new(|| c5_spectral(&codes))),
        ("6 MacWilliams roundtrip", Box::new(|| c6_macwilliams(&codes))),
        ("7 Krawtchouk suite n<=60", Box::new(c7_krawtchouk)),
        ("8 even/odd orthogonality", Box::new(c8_orthogonality)),
        ("9 theta* closed form", Box::new(c9_theta_star)),
        ("10 Gaussian quadrant", Box::new(c10_quadrant)),
        ("11 limit construction", Box::new(c11_limit)),
        ("12 asymptotic claims", Box::new(c12_asymptotic)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS  {name:<28} {secs:>7.2}s  {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name:<28} {secs:>7.2}s  {e}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
