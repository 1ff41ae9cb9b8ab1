use clap::ValueEnum;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exactmath::Rational;
use crate::hypercube::{
    distance_distribution, distance_distribution_spectral, dual_distribution, even_part, macwilliams_forward,
    macwilliams_inverse, odd_part, Code,
};
use crate::krawtchouk::{check_extremal, shared_table, table, ExtremalStatement, VerificationReport};
use crate::lpbound::{build_dual, build_primal, dual_certificate, lp_optimum, psi, solve_exact, BoundQuery, LpStatus};
use crate::stability::{cross_stability, proposition1_identity, stab, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Krawtchouk,
    Macwilliams,
    Duality,
    Certificates,
    Stability,
    All,
}

impl Suite {
    pub fn default_max_n(self) -> u32 {
        match self {
            Suite::Krawtchouk => 60,
            Suite::Macwilliams | Suite::Stability => 12,
            Suite::Duality => 12,
            Suite::Certificates => 20,
            Suite::All => 12,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: u64,
    pub failures: Vec<String>,
    /// Non-failing observations worth listing (e.g. closed-form variants).
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), ..Default::default() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn absorb(&mut self, rep: VerificationReport) {
        self.checks += rep.cases_checked;
        if !rep.passed() {
            self.failures.push(format!(
                "{} at n={}: {} violations, first {:?}",
                rep.check,
                rep.n,
                rep.violation_count,
                rep.violations.first()
            ));
        }
    }

    fn error(&mut self, context: String, e: crate::Error) {
        self.checks += 1;
        self.failures.push(format!("{context}: {e}"));
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const RANDOM_CODES: usize = 200;

/// `count` random codes with `n` in `[2, max_n]`, non-empty.
pub fn random_codes(seed: u64, count: usize, max_n: u32) -> Vec<Code> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n.max(2));
            let density: f64 = rng.random_range(0.05..0.95);
            let mut idx: Vec<u32> = (0..1u32 << n).filter(|_| rng.random_bool(density)).collect();
            if idx.is_empty() {
                idx.push(rng.random_range(0..1u32 << n));
            }
            Code::from_indices(n, idx).expect("indices below 2^n")
        })
        .collect()
}

pub fn krawtchouk_suite(max_n: u32) -> SuiteReport {
    let mut rep = SuiteReport::new("krawtchouk");
    let mut prev = table(0);
    for n in 0..=max_n {
        let t = shared_table(n);
        rep.absorb(t.verify_defining_sum());
        rep.absorb(t.verify_generating_function());
        rep.absorb(t.verify_identities());
        rep.absorb(t.verify_omega());
        if n >= 1 {
            rep.absorb(t.verify_recurrence(&prev));
        }
        for s in [ExtremalStatement::AtZero, ExtremalStatement::AtOne, ExtremalStatement::AtTwo] {
            rep.absorb(check_extremal(n, s));
        }
        prev = table(n);
    }
    rep
}

pub fn macwilliams_suite(max_n: u32, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("macwilliams");
    for c in random_codes(seed, RANDOM_CODES, max_n.min(12)) {
        let n = c.n();
        let (p, ps, q) = match (distance_distribution(&c), distance_distribution_spectral(&c), dual_distribution(&c)) {
            (Ok(p), Ok(ps), Ok(q)) => (p, ps, q),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                rep.error(format!("n={n} M={}", c.size()), e);
                continue;
            }
        };
        rep.check(p == ps, || format!("n={n} M={}: direct and spectral distance distributions differ", c.size()));
        rep.check(macwilliams_forward(&p) == q, || format!("n={n}: forward transform differs from spectrum"));
        rep.check(macwilliams_inverse(&q) == p, || format!("n={n}: P -> Q -> P roundtrip failed"));
        let t = shared_table(n);
        for k in 0..=n {
            let s: Rational = (0..=n).map(|i| &q.entries[i as usize] * Rational::from(t.get(k, i).clone())).sum();
            rep.check(!s.is_negative(), || format!("n={n} k={k}: sum_i Q(i) K_k(i) = {s} < 0"));
        }
    }
    rep
}

fn duality_sizes(n: u32) -> Vec<u64> {
    let base = 1u64 << n;
    let mut v: Vec<u64> = [base / 8, base / 4, 3 * base / 8, base / 2].into_iter().filter(|&m| m >= 1).collect();
    v.dedup();
    v
}

pub fn duality_suite(max_n: u32) -> SuiteReport {
    let mut rep = SuiteReport::new("duality");
    for n in 1..=max_n {
        for r in 1..=n {
            for m in duality_sizes(n) {
                let q = BoundQuery::new(n, r, m).expect("valid grid point");
                let ctx = format!("n={n} r={r} M={m}");
                let (p, d) = match (solve_exact(&build_primal(&q)), solve_exact(&build_dual(&q))) {
                    (Ok(p), Ok(d)) => (p, d),
                    (Err(e), _) | (_, Err(e)) => {
                        rep.error(ctx, e);
                        continue;
                    }
                };
                rep.check(p.status == LpStatus::Optimal && d.status == LpStatus::Optimal, || {
                    format!("{ctx}: not optimal")
                });
                rep.check(p.value == d.value, || format!("{ctx}: primal {:?} != dual {:?}", p.value, d.value));
                rep.check(p.verify(&build_primal(&q)).is_ok(), || format!("{ctx}: primal certificate rejected"));
                rep.check(d.verify(&build_dual(&q)).is_ok(), || format!("{ctx}: dual certificate rejected"));
            }
        }
    }
    rep
}

pub const CERTIFICATE_ALPHAS: [(u64, u64); 4] = [(1, 8), (1, 4), (3, 8), (1, 2)];

pub fn certificates_suite(max_n: u32) -> SuiteReport {
    let mut rep = SuiteReport::new("certificates");
    for n in 3..=max_n {
        for r in 1..=n {
            for (a, b) in CERTIFICATE_ALPHAS {
                let m = (BigInt::from(a) << n as usize) / b;
                let q = BoundQuery::new(n, r, m.clone()).expect("valid grid point");
                let ctx = format!("n={n} r={r} M={m}");
                let res = (|| -> crate::Result<()> {
                    let opt = lp_optimum(&q)?.value.expect("optimal");
                    let p = psi(&q)?;
                    rep.check(opt >= p.plus(), || format!("{ctx}: LP optimum {opt} < psi+"));
                    for &k in &p.candidates {
                        let c = dual_certificate(&q, k)?;
                        rep.check(c.certificate.feasible, || format!("{ctx} k={k}: certificate infeasible"));
                        rep.check(opt >= c.certificate.objective, || {
                            format!("{ctx} k={k}: objective above LP optimum")
                        });
                        rep.check(c.certificate.objective >= c.clause_value, || {
                            format!("{ctx} k={k}: objective below clause")
                        });
                        if let Some(d) = c.discrepancy {
                            rep.notes.push(format!("{ctx} k={k}: {d}"));
                        }
                    }
                    Ok(())
                })();
                if let Err(e) = res {
                    rep.error(ctx, e);
                }
            }
        }
    }
    rep
}

pub fn stability_suite(max_n: u32, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("stability");
    let beta = Rational::new(1.into(), 3.into());
    for c in random_codes(seed, RANDOM_CODES, max_n.min(12)) {
        let n = c.n();
        for r in 0..=n {
            for model in [NoiseModel::Sphere { r }, NoiseModel::Ball { r }] {
                // stab() compares the pair-count and spectral values internally
                if let Err(e) = stab(&c, &model) {
                    rep.error(format!("n={n} {model:?}"), e);
                } else {
                    rep.checks += 1;
                }
            }
            match proposition1_identity(&c, r) {
                Ok((l, rr)) => rep.check(l == rr, || format!("n={n} r={r}: ball identity {l} != {rr}")),
                Err(e) => rep.error(format!("n={n} r={r}"), e),
            }
            if r % 2 == 0 {
                let (e, o) = (even_part(&c), odd_part(&c));
                match cross_stability(&e, &o, &NoiseModel::Sphere { r }) {
                    Ok(v) => rep.check(v.is_zero(), || format!("n={n} r={r}: even/odd cross stability {v}")),
                    Err(err) => rep.error(format!("n={n} r={r}"), err),
                }
            }
        }
        if let Err(e) = stab(&c, &NoiseModel::Iid { beta: beta.clone() }) {
            rep.error(format!("n={n} iid"), e);
        }
    }
    rep
}

pub fn run_suite(suite: Suite, max_n: Option<u32>, seed: u64) -> Vec<SuiteReport> {
    let pick = |s: Suite| max_n.unwrap_or(s.default_max_n());
    match suite {
        Suite::Krawtchouk => vec![krawtchouk_suite(pick(suite))],
        Suite::Macwilliams => vec![macwilliams_suite(pick(suite), seed)],
        Suite::Duality => vec![duality_suite(pick(suite))],
        Suite::Certificates => vec![certificates_suite(pick(suite))],
        Suite::Stability => vec![stability_suite(pick(suite), seed)],
        Suite::All => [Suite::Krawtchouk, Suite::Macwilliams, Suite::Duality, Suite::Certificates, Suite::Stability]
            .into_iter()
            .flat_map(|s| run_suite(s, max_n, seed))
            .collect(),
    }
}
