//! Exhaustive maximization of stability over all `M`-subsets of a small cube.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmath::{binom, binom_cum, serde_ratio, Rational};
use crate::hypercube::{even_part, hamming_ball, lex_segment, subcube, Code};
use crate::lpbound::{lp_upper_bound, BoundMode, BoundQuery};
use crate::stability::{stab, NoiseModel};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const BUDGET_ENV: &str = "ISOPERIM_BUDGET";
/// Steps between full histogram recounts.
const RECOUNT_INTERVAL: u64 = 1 << 16;

/// Enumeration budget: `ISOPERIM_BUDGET` if set and valid, else the default.
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Objective maximized by the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "model")]
pub enum OracleModel {
    Sphere,
    Ball,
    Iid {
        #[serde(with = "serde_ratio")]
        beta: Rational,
    },
    /// `sum_{i<=r} P(i)`.
    Cdf,
}

impl OracleModel {
    /// Integer weight per ordered pair at distance `d`, and the divisor that
    /// turns a weighted count into the objective value.
    fn weights(&self, q: &BoundQuery) -> Result<(Vec<u128>, Rational)> {
        let n = q.n;
        let r = q.r;
        let cube = BigInt::one() << n as usize;
        Ok(match self {
            OracleModel::Sphere => (
                (0..=n).map(|d| u128::from(d == r)).collect(),
                Rational::from_integer(&cube * binom(i64::from(n), i64::from(r))),
            ),
            OracleModel::Ball => (
                (0..=n).map(|d| u128::from(d <= r)).collect(),
                Rational::from_integer(&cube * binom_cum(n, i64::from(r))),
            ),
            OracleModel::Cdf => ((0..=n).map(|d| u128::from(d <= r)).collect(), Rational::from_integer(&q.m * &q.m)),
            OracleModel::Iid { beta } => {
                if *beta < Rational::zero() || *beta > Rational::one() {
                    return Err(Error::Domain(format!("flip probability {beta} outside [0, 1]")));
                }
                let p = beta.numer().to_u128();
                let den = beta.denom().to_u128();
                let (Some(p), Some(den)) = (p, den) else {
                    return Err(Error::Domain(format!("beta = {beta} is too large a fraction")));
                };
                let w: Option<Vec<u128>> = (0..=n)
                    .map(|d| p.checked_pow(d).and_then(|a| (den - p).checked_pow(n - d).and_then(|b| a.checked_mul(b))))
                    .collect();
                let w = w.ok_or_else(|| Error::Domain(format!("beta = {beta} overflows integer pair weights")))?;
                (w, Rational::from_integer(BigInt::from(den).pow(n) * &cube))
            }
        })
    }

    pub fn noise_model(&self, r: u32) -> Option<NoiseModel> {
        match self {
            OracleModel::Sphere => Some(NoiseModel::Sphere { r }),
            OracleModel::Ball => Some(NoiseModel::Ball { r }),
            OracleModel::Iid { beta } => Some(NoiseModel::Iid { beta: beta.clone() }),
            OracleModel::Cdf => None,
        }
    }

    /// The objective value of one code.
    pub fn evaluate(&self, c: &Code, r: u32) -> Result<Rational> {
        match self.noise_model(r) {
            Some(m) => Ok(stab(c, &m)?.value),
            None => crate::hypercube::cdf_distance(c, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub query: BoundQuery,
    #[serde(flatten)]
    pub model: OracleModel,
    #[serde(with = "serde_ratio")]
    pub optimum: Rational,
    pub witness: Code,
    pub subsets_examined: u64,
}

/// Best `(score, witness)`; ties go to the lexicographically smaller witness.
#[derive(Clone)]
struct Best {
    score: u128,
    witness: Vec<u32>,
}

impl Best {
    fn better(self, other: Best) -> Best {
        if other.score > self.score || (other.score == self.score && other.witness < self.witness) {
            other
        } else {
            self
        }
    }
}

fn histogram(set: &[u32], n: u32) -> Vec<u64> {
    let mut h = vec![0u64; n as usize + 1];
    for &x in set {
        for &y in set {
            h[(x ^ y).count_ones() as usize] += 1;
        }
    }
    h
}

fn score(h: &[u64], w: &[u128]) -> u128 {
    h.iter().zip(w).map(|(&c, &w)| u128::from(c) * w).sum()
}

/// All `(m-1)`-subsets of `[0, top)` joined with `top`, in colex order.
fn scan_with_top(n: u32, m: usize, top: u32, w: &[u128]) -> Result<(Best, u64)> {
    // set[..m-1] is the moving part in increasing order, set[m-1] = top
    let mut set: Vec<u32> = (0..m as u32 - 1).chain(std::iter::once(top)).collect();
    let mut h = histogram(&set, n);
    let mut best = Best { score: score(&h, w), witness: set.clone() };
    let mut steps = 1u64;
    let k = m - 1;
    loop {
        // colex successor of set[..k] inside [0, top)
        let mut j = 0;
        while j < k {
            let limit = if j + 1 < k { set[j + 1] } else { top };
            if set[j] + 1 < limit {
                break;
            }
            j += 1;
        }
        if j == k {
            break;
        }
        let bumped = set[j] + 1;
        // remove the j+1 lowest points, then insert 0..j and the bumped one
        for i in 0..=j {
            let x = set[i];
            for &y in &set[i + 1..] {
                h[(x ^ y).count_ones() as usize] -= 2;
            }
        }
        for i in (0..=j).rev() {
            let x = if i == j { bumped } else { i as u32 };
            set[i] = x;
            for &y in &set[i + 1..] {
                h[(x ^ y).count_ones() as usize] += 2;
            }
        }
        steps += 1;
        if steps.is_multiple_of(RECOUNT_INTERVAL) && h != histogram(&set, n) {
            return Err(Error::Inconsistent(format!("incremental histogram drifted at subset {set:?}")));
        }
        let s = score(&h, w);
        if s >= best.score {
            best = best.better(Best { score: s, witness: set.clone() });
        }
    }
    Ok((best, steps))
}

/// Number of `M`-subsets of the cube.
pub fn subset_count(n: u32, m: &BigInt) -> BigInt {
    match m.to_i64() {
        Some(m) => binom(1i64 << n, m),
        None => BigInt::zero(),
    }
}

pub fn gamma_exact(q: &BoundQuery, model: &OracleModel) -> Result<OracleResult> {
    gamma_exact_with_budget(q, model, default_budget())
}

pub fn gamma_exact_with_budget(q: &BoundQuery, model: &OracleModel, budget: u64) -> Result<OracleResult> {
    let n = q.n;
    let required = subset_count(n, &q.m);
    if required > BigInt::from(budget) {
        return Err(Error::BudgetExceeded { required: required.to_string(), budget });
    }
    let m = q.m.to_usize().expect("within budget implies small");
    let (w, divisor) = model.weights(q)?;
    let cube = 1u32 << n;
    let results: Vec<(Best, u64)> =
        (m as u32 - 1..cube).into_par_iter().map(|top| scan_with_top(n, m, top, &w)).collect::<Result<_>>()?;
    let examined = results.iter().map(|(_, s)| s).sum::<u64>();
    let best = results.into_iter().map(|(b, _)| b).reduce(Best::better).expect("at least one subset");
    let optimum = Rational::from_integer(BigInt::from(best.score)) / divisor;
    let witness = Code::from_indices(n, best.witness)?;
    let check = model.evaluate(&witness, q.r)?;
    if check != optimum {
        return Err(Error::Inconsistent(format!("oracle score {optimum} but witness evaluates to {check}")));
    }
    Ok(OracleResult { query: q.clone(), model: model.clone(), optimum, witness, subsets_examined: examined })
}

/// A named code of size `M` and its ball stability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstructionValue {
    pub name: String,
    #[serde(with = "serde_ratio")]
    pub value: Rational,
}

/// Standard size-`M` codes available for `(n, M)`: subcube, Hamming ball,
/// even part of a subcube, and the lexicographic initial segment.
pub fn construction_codes(n: u32, m: &BigInt) -> Result<Vec<(String, Code)>> {
    let mut out = Vec::new();
    let mu = m.to_u64().ok_or_else(|| Error::InvalidQuery(format!("M = {m} too large")))?;
    if mu.is_power_of_two() && mu <= 1u64 << n {
        let k = n - mu.trailing_zeros();
        out.push((format!("subcube(k={k})"), subcube(n, k)?));
        if k >= 1 {
            out.push((format!("even_part(subcube(k={}))", k - 1), even_part(&subcube(n, k - 1)?)));
        }
    }
    for radius in 0..=n {
        let size = binom_cum(n, i64::from(radius));
        if size == *m {
            out.push((format!("hamming_ball(radius={radius})"), hamming_ball(n, radius)?));
        }
        if size > *m {
            break;
        }
    }
    out.push(("lex_segment".to_string(), lex_segment(n, mu)?));
    Ok(out)
}

pub fn construction_values(q: &BoundQuery, model: &OracleModel) -> Result<Vec<ConstructionValue>> {
    construction_codes(q.n, &q.m)?
        .into_iter()
        .map(|(name, c)| Ok(ConstructionValue { name, value: model.evaluate(&c, q.r)? }))
        .collect()
}

/// Upper bounds, ground truth and constructions for one query (ball noise).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleComparison {
    pub query: BoundQuery,
    #[serde(with = "serde_ratio")]
    pub bound_closed: Rational,
    #[serde(with = "serde_ratio")]
    pub bound_exact_lp: Rational,
    pub oracle: OracleResult,
    pub constructions: Vec<ConstructionValue>,
    #[serde(with = "serde_ratio")]
    pub best_construction: Rational,
    /// `closed >= exact >= oracle >= best construction`.
    pub ordering_holds: bool,
    /// `exact LP bound == oracle`.
    pub tight: bool,
}

pub fn verify_bound_vs_oracle(q: &BoundQuery) -> Result<OracleComparison> {
    verify_bound_vs_oracle_with_budget(q, default_budget())
}

pub fn verify_bound_vs_oracle_with_budget(q: &BoundQuery, budget: u64) -> Result<OracleComparison> {
    let closed = lp_upper_bound(q, BoundMode::ClosedForm)?.bstab_bound;
    let exact = lp_upper_bound(q, BoundMode::ExactLp)?.bstab_bound;
    let oracle = gamma_exact_with_budget(q, &OracleModel::Ball, budget)?;
    let constructions = construction_values(q, &OracleModel::Ball)?;
    let best = constructions.iter().map(|c| c.value.clone()).max().expect("lex segment always present");
    let ordering_holds = closed >= exact && exact >= oracle.optimum && oracle.optimum >= best;
    let tight = exact == oracle.optimum;
    Ok(OracleComparison {
        query: q.clone(),
        bound_closed: closed,
        bound_exact_lp: exact,
        oracle,
        constructions,
        best_construction: best,
        ordering_holds,
        tight,
    })
}

/// `alpha^2 2^n / C(n,<=r)`: ball optimum over cdf optimum.
pub fn cdf_to_ball_factor(q: &BoundQuery) -> Rational {
    let a = q.alpha();
    &a * &a * Rational::new(BigInt::one() << q.n as usize, binom_cum(q.n, i64::from(q.r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::ratio;
    use crate::stability::stab_ball;

    fn bq(n: u32, r: u32, m: u64) -> BoundQuery {
        BoundQuery::new(n, r, m).unwrap()
    }

    /// Plain scan over all bitmasks of the cube.
    fn brute(n: u32, r: u32, m: u32, model: &OracleModel) -> (Rational, Vec<u32>) {
        let mut best: Option<(Rational, Vec<u32>)> = None;
        for mask in 0u64..(1u64 << (1u32 << n)) {
            if mask.count_ones() != m {
                continue;
            }
            let idx: Vec<u32> = (0..1u32 << n).filter(|&j| mask >> j & 1 == 1).collect();
            let v = model.evaluate(&Code::from_indices(n, idx.clone()).unwrap(), r).unwrap();
            let replace = match &best {
                None => true,
                Some((b, w)) => v > *b || (v == *b && idx < *w),
            };
            if replace {
                best = Some((v, idx));
            }
        }
        best.unwrap()
    }

    #[test]
    fn small_examples() {
        let res = gamma_exact(&bq(2, 1, 2), &OracleModel::Ball).unwrap();
        assert_eq!(res.optimum, ratio(1, 3));
        assert_eq!(res.witness, subcube(2, 1).unwrap());
        assert_eq!(res.subsets_examined, 6);
        for r in 1..=4u32 {
            let res = gamma_exact(&bq(4, r, 8), &OracleModel::Ball).unwrap();
            let expected = Rational::new(binom_cum(3, i64::from(r)), BigInt::from(2) * binom_cum(4, i64::from(r)));
            assert_eq!(res.optimum, expected, "r={r}");
            assert_eq!(res.witness.size(), 8);
            assert_eq!(res.subsets_examined, 12870);
        }
        let res = gamma_exact(&bq(4, 1, 4), &OracleModel::Ball).unwrap();
        assert_eq!(res.optimum, ratio(3, 20));
        assert_eq!(res.witness, subcube(4, 2).unwrap());
        let res = gamma_exact(&bq(3, 1, 4), &OracleModel::Iid { beta: ratio(1, 4) }).unwrap();
        assert_eq!(res.optimum, ratio(3, 8));
    }

    #[test]
    fn matches_plain_scan() {
        let models = [OracleModel::Sphere, OracleModel::Ball, OracleModel::Cdf, OracleModel::Iid { beta: ratio(1, 3) }];
        for n in 2..=3u32 {
            for r in 1..=n {
                for m in 1..=(1u32 << n) {
                    for model in &models {
                        let res = gamma_exact(&bq(n, r, m.into()), model).unwrap();
                        let (v, w) = brute(n, r, m, model);
                        assert_eq!(res.optimum, v, "n={n} r={r} m={m} {model:?}");
                        assert_eq!(res.witness.indices(), w);
                    }
                }
            }
        }
        for m in [3u32, 5] {
            let res = gamma_exact(&bq(4, 2, m.into()), &OracleModel::Sphere).unwrap();
            let (v, w) = brute(4, 2, m, &OracleModel::Sphere);
            assert_eq!((res.optimum, res.witness.indices()), (v, w));
        }
    }

    #[test]
    fn long_scan_with_recounts() {
        let res = gamma_exact(&bq(5, 1, 6), &OracleModel::Ball).unwrap();
        assert_eq!(res.subsets_examined, 906_192);
        for (_, c) in construction_codes(5, &BigInt::from(6)).unwrap() {
            assert!(stab_ball(&c, 1).unwrap().value <= res.optimum);
        }
    }

    #[test]
    fn cdf_and_ball_agree() {
        for n in 2..=4u32 {
            for r in 1..=n {
                for m in [2u64, 3, 4] {
                    let q = bq(n, r, m);
                    let cdf = gamma_exact(&q, &OracleModel::Cdf).unwrap().optimum;
                    let ball = gamma_exact(&q, &OracleModel::Ball).unwrap().optimum;
                    assert_eq!(cdf * cdf_to_ball_factor(&q), ball);
                }
            }
        }
        let mut prev = Rational::zero();
        for r in 1..=4 {
            let v = gamma_exact(&bq(4, r, 5), &OracleModel::Cdf).unwrap().optimum;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn budget_refusal() {
        match gamma_exact_with_budget(&bq(4, 1, 8), &OracleModel::Ball, 100) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, "12870");
                assert_eq!(budget, 100);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn bound_comparisons() {
        for (m, v) in [(8u64, ratio(2, 5)), (4, ratio(3, 20))] {
            let rep = verify_bound_vs_oracle(&bq(4, 1, m)).unwrap();
            assert_eq!(rep.oracle.optimum, v);
            assert_eq!(rep.bound_closed, v);
            assert!(rep.tight && rep.ordering_holds);
        }
        let rep = verify_bound_vs_oracle(&bq(3, 1, 3)).unwrap();
        assert!(rep.ordering_holds);
        assert!(rep.constructions.iter().any(|c| c.name == "lex_segment"));
    }
}
