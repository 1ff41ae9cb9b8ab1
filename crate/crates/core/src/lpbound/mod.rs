//! Linear-programming upper bounds on ball-noise stability.
//!
//! For a code of size `M = alpha 2^n`, `sum_{k<=r} P(k)` equals
//! `2^{-n} [omega_0 + (1/alpha - 1) omega_1 - sum_{i>=2} Q(i)(omega_1 - omega_i)]`.
//! The last sum is bounded below by a primal LP over relaxed dual
//! distributions; its dual supplies explicit certificates, and the closed
//! form `psi` comes from sparse ones.

pub mod simplex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmath::{binom, binom_cum, int, serde_ratio, to_f64, Rational};
use crate::hypercube::{even_part, subcube, Code};
use crate::krawtchouk::{krawtchouk_sum, le_tau, shared_table, SHARED_TABLE_MAX};
use crate::stability::{stab_ball, stab_sphere};

pub use simplex::{solve_exact, Constraint, LpSolution, LpStatus, RationalLp, Relation, Sense};

/// An `(n, r, M)` query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundQuery {
    pub n: u32,
    pub r: u32,
    #[serde(serialize_with = "ser_bigint")]
    pub m: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl BoundQuery {
    /// Validates `1 <= r <= n` and `1 <= M <= 2^n`.
    pub fn new(n: u32, r: u32, m: impl Into<BigInt>) -> Result<Self> {
        let m = m.into();
        if n == 0 {
            return Err(Error::InvalidQuery("n must be at least 1".into()));
        }
        if r == 0 || r > n {
            return Err(Error::InvalidQuery(format!("r must satisfy 1 <= r <= n; got r={r}, n={n}")));
        }
        if m < BigInt::one() || m > BigInt::one() << n as usize {
            return Err(Error::InvalidQuery(format!("M must satisfy 1 <= M <= 2^n; got M={m}, n={n}")));
        }
        Ok(BoundQuery { n, r, m })
    }

    /// `alpha = M / 2^n`.
    pub fn alpha(&self) -> Rational {
        Rational::new(self.m.clone(), BigInt::one() << self.n as usize)
    }

    /// `beta = r / n`.
    pub fn beta(&self) -> Rational {
        Rational::new(BigInt::from(self.r), BigInt::from(self.n))
    }

    /// Rejects `alpha > 1/2`.
    pub fn require_half(&self) -> Result<()> {
        if BigInt::from(2) * &self.m > BigInt::one() << self.n as usize {
            return Err(Error::InvalidQuery(format!(
                "alpha = {}/2^{} exceeds 1/2; bounds are stated for alpha <= 1/2",
                self.m, self.n
            )));
        }
        Ok(())
    }

    fn inv_alpha_minus_one(&self) -> Rational {
        self.alpha().recip() - int(1)
    }
}

/// `C(a, b)` with zero outside `0 <= b <= a`.
fn choose(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        BigInt::zero()
    } else {
        binom(a, b)
    }
}

fn q_int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// `K_k^(n)(i)`, from the cached table when it is small enough.
fn kraw(n: u32, k: u32, i: u32) -> BigInt {
    if n <= SHARED_TABLE_MAX {
        shared_table(n).get(k, i).clone()
    } else {
        krawtchouk_sum(i64::from(n), i64::from(k), i64::from(i))
    }
}

/// `omega_i = K_r^(n-1)(i - 1)`.
fn omega_value(n: u32, r: u32, i: u32) -> BigInt {
    krawtchouk_sum(i64::from(n) - 1, i64::from(r), i64::from(i) - 1)
}

/// Problem 1 data: variables `u_2..u_n`, one row per `k = 1..n`.
pub fn build_primal(q: &BoundQuery) -> RationalLp {
    let n = q.n;
    let t = shared_table(n);
    let w1 = omega_value(n, q.r, 1);
    let objective = (2..=n).map(|i| q_int(&w1 - omega_value(n, q.r, i))).collect();
    let mut lp = RationalLp::new(Sense::Minimize, objective);
    let s = q.inv_alpha_minus_one();
    for k in 1..=n {
        let row = (2..=n).map(|i| q_int(t.get(k, 1) - t.get(k, i))).collect();
        let rhs = q_int(t.get(k, 0).clone()) + q_int(t.get(k, 1).clone()) * &s;
        lp.add_constraint(row, Relation::Le, rhs).expect("row width matches");
    }
    lp
}

/// Problem 2 data: variables `x_1..x_n >= 0`, one row per `i = 2..n`.
pub fn build_dual(q: &BoundQuery) -> RationalLp {
    let n = q.n;
    let t = shared_table(n);
    let s = q.inv_alpha_minus_one();
    let objective = (1..=n).map(|k| -(q_int(t.get(k, 0).clone()) + q_int(t.get(k, 1).clone()) * &s)).collect();
    let mut lp = RationalLp::new(Sense::Maximize, objective);
    let w1 = omega_value(n, q.r, 1);
    for i in 2..=n {
        let row = (1..=n).map(|k| q_int(t.get(k, 1) - t.get(k, i))).collect();
        let rhs = q_int(omega_value(n, q.r, i) - &w1);
        lp.add_constraint(row, Relation::Ge, rhs).expect("row width matches");
    }
    lp
}

/// `Lambda_n(alpha, r)`, solved exactly from the primal; the returned
/// solution's dual vector is an optimal certificate for Problem 2.
pub fn lp_optimum(q: &BoundQuery) -> Result<LpSolution> {
    let sol = solve_exact(&build_primal(q))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Inconsistent(format!("primal LP for {q:?} is {:?}", sol.status)));
    }
    Ok(sol)
}

/// Which clause of `psi` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiCase {
    /// Even `r <= n/2 - 1`: odd `k` near `n`, 2-sparse certificate.
    EvenSmall = 1,
    /// Odd `r <= n/2 - 1`: `k` near `n` and in `F`, 1-sparse certificate.
    OddSmall = 2,
    /// Even `r > n/2 - 1`: reuses the certificate for `r + 1`.
    EvenLarge = 3,
    /// Odd `r > n/2 - 1`: odd `k >= n/2 + 1`, 1-sparse certificate.
    OddLarge = 4,
}

pub fn psi_case(n: u32, r: u32) -> PsiCase {
    let small = 2 * i64::from(r) <= i64::from(n) - 2;
    match (small, r.is_multiple_of(2)) {
        (true, true) => PsiCase::EvenSmall,
        (true, false) => PsiCase::OddSmall,
        (false, true) => PsiCase::EvenLarge,
        (false, false) => PsiCase::OddLarge,
    }
}

/// Membership in `F` for the odd-`r` small case.
pub fn in_f(n: u32, r: u32, k: u32) -> bool {
    let (n, r, k) = (i64::from(n), i64::from(r), i64::from(k));
    if k % 2 == 0 {
        return 2 * k > n + r;
    }
    if n - 1 - r <= 0 {
        return false;
    }
    let a = Rational::new((n + 1).into(), 2.into()).max(Rational::new(((n - 1) * r).into(), (n - 1 - r).into()));
    let d = q_int(k) - a;
    let bound = Rational::new(((n + 1) * r).into(), (2 * (n - 1 - r)).into());
    !d.is_negative() && &d * &d >= bound
}

/// Candidate indices `k` for the case of `(n, r)`.
pub fn psi_candidates(n: u32, r: u32) -> Vec<u32> {
    let window = |k: u32| le_tau(n, i64::from(n - k));
    let upper_odd = |k: u32| k % 2 == 1 && 2 * k >= n + 2;
    match psi_case(n, r) {
        PsiCase::EvenSmall => (1..=n).filter(|&k| k % 2 == 1 && window(k) && 2 * k > n).collect(),
        PsiCase::OddSmall => (1..=n).filter(|&k| window(k) && in_f(n, r, k) && 2 * k > n + 1).collect(),
        PsiCase::EvenLarge | PsiCase::OddLarge => (1..=n).filter(|&k| upper_odd(k)).collect(),
    }
}

/// The clause value of `psi` at one candidate `k`.
pub fn psi_clause_value(q: &BoundQuery, k: u32) -> Rational {
    let (n, r) = (i64::from(q.n), i64::from(q.r));
    let kk = i64::from(k);
    let a = q.alpha();
    let s2 = int(2) * q.inv_alpha_minus_one();
    match psi_case(q.n, q.r) {
        PsiCase::EvenSmall => {
            let head = q_int(n * choose(n - 2, r - 1)) / q_int(2 * kk - n);
            head * (s2 - q_int(n + 1) / (a * q_int(kk + 1)))
        }
        PsiCase::OddSmall => {
            let head = q_int((n - 1) * choose(n - 2, r - 1)) / q_int(2 * kk - n - 1);
            head * (s2 - q_int(n) / (a * q_int(kk)))
        }
        PsiCase::EvenLarge => {
            let head = q_int(kk * choose(n - 2, r + 1)) / q_int(2 * kk - n);
            head * (s2 - q_int(n) / (a * q_int(kk)))
        }
        PsiCase::OddLarge => {
            let head = q_int(kk * choose(n - 2, r)) / q_int(2 * kk - n);
            head * (s2 - q_int(n) / (a * q_int(kk)))
        }
    }
}

/// `psi_n(alpha, r)` with its argmax; `value = None` encodes `-inf`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PsiValue {
    pub case: PsiCase,
    pub candidates: Vec<u32>,
    #[serde(with = "serde_ratio::option")]
    pub value: Option<Rational>,
    pub argmax: Option<u32>,
}

impl PsiValue {
    /// `max(psi, 0)`.
    pub fn plus(&self) -> Rational {
        match &self.value {
            Some(v) if v.is_positive() => v.clone(),
            _ => Rational::zero(),
        }
    }
}

/// Closed-form `psi`; ties in the maximum go to the largest `k`.
pub fn psi(q: &BoundQuery) -> Result<PsiValue> {
    q.require_half()?;
    let candidates = psi_candidates(q.n, q.r);
    let mut best: Option<(u32, Rational)> = None;
    for &k in &candidates {
        let v = psi_clause_value(q, k);
        if best.as_ref().is_none_or(|(_, b)| v >= *b) {
            best = Some((k, v));
        }
    }
    let (argmax, value) = match best {
        Some((k, v)) => (Some(k), Some(v)),
        None => (None, None),
    };
    Ok(PsiValue { case: psi_case(q.n, q.r), candidates, value, argmax })
}

/// A sparse dual vector with its exact feasibility verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateVector {
    /// `x_1..x_n`.
    #[serde(with = "serde_ratio::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "serde_ratio")]
    pub objective: Rational,
    pub feasible: bool,
    /// Smallest `lhs - rhs` over the dual constraints (negative when infeasible).
    #[serde(with = "serde_ratio::option")]
    pub min_slack: Option<Rational>,
}

/// Explicit dual certificate for one candidate `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualCertificate {
    pub case: PsiCase,
    pub k: u32,
    pub certificate: CertificateVector,
    #[serde(with = "serde_ratio")]
    pub clause_value: Rational,
    /// Whether the certificate objective equals the `psi` clause value.
    pub matches_clause: bool,
    /// For the large-odd family, the vector with the alternative closed form
    /// `n(n-1)C(n-2,r-1) / (C(n,k) k (2k-n-1))`, evaluated for comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<CertificateVector>,
    /// Human-readable note when the alternative disagrees with the clause.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
}

fn evaluate_certificate(q: &BoundQuery, x: Vec<Rational>) -> CertificateVector {
    let n = q.n;
    let s = q.inv_alpha_minus_one();
    let binoms: Vec<BigInt> = (0..=n).map(|k| binom(i64::from(n), i64::from(k))).collect();
    // K_k(0) + K_k(1)(1/alpha - 1) with K_k(1) = C(n,k)(n - 2k)/n
    let objective: Rational = x
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| {
            let k = j as i64 + 1;
            let c = q_int(binoms[k as usize].clone());
            let k1 = &c * q_int(i64::from(n) - 2 * k) / q_int(n);
            -(c + k1 * &s) * v
        })
        .sum();
    let support: Vec<(u32, &Rational)> =
        x.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j as u32 + 1, v)).collect();
    let mut feasible = x.iter().all(|v| !v.is_negative());
    let w1 = omega_value(n, q.r, 1);
    let mut min_slack: Option<Rational> = None;
    for i in 2..=n {
        let lhs: Rational = support.iter().map(|&(k, v)| q_int(kraw(n, k, 1) - kraw(n, k, i)) * v).sum();
        let rhs = q_int(omega_value(n, q.r, i) - &w1);
        let slack = lhs - rhs;
        if slack.is_negative() {
            feasible = false;
        }
        if min_slack.as_ref().is_none_or(|m| slack < *m) {
            min_slack = Some(slack);
        }
    }
    CertificateVector { x, objective, feasible, min_slack }
}

/// Builds the sparse certificate for candidate `k` and checks every dual
/// constraint exactly.
pub fn dual_certificate(q: &BoundQuery, k: u32) -> Result<DualCertificate> {
    q.require_half()?;
    let case = psi_case(q.n, q.r);
    if !psi_candidates(q.n, q.r).contains(&k) {
        return Err(Error::Domain(format!("k = {k} is not a candidate for n = {}, r = {} ({case:?})", q.n, q.r)));
    }
    let (n, r, kk) = (i64::from(q.n), i64::from(q.r), i64::from(k));
    let cnk = q_int(binom(n, kk));
    let mut x = vec![Rational::zero(); q.n as usize];
    let mut alternative = None;
    match case {
        PsiCase::EvenSmall => {
            let v = q_int(n * choose(n - 2, r - 1)) / (&cnk * q_int(2 * kk - n));
            x[k as usize - 1] = v.clone();
            if k < q.n {
                x[k as usize] = v;
            }
        }
        PsiCase::OddSmall => {
            x[k as usize - 1] = q_int(n * (n - 1) * choose(n - 2, r - 1)) / (&cnk * q_int(kk * (2 * kk - n - 1)));
        }
        PsiCase::EvenLarge | PsiCase::OddLarge => {
            // odd-large family at radius r' (r' = r + 1 for even r): the
            // equation 2 K_{n-k}(1) x + K_{n-1-r'}^(n-1)(1) - K_{n-1-r'}^(n-1)(0) = 0
            // gives x = n C(n-2, r') / (C(n,k)(2k - n)).
            let rr = if case == PsiCase::EvenLarge { r + 1 } else { r };
            x[k as usize - 1] = q_int(n * choose(n - 2, rr)) / (&cnk * q_int(2 * kk - n));
            let mut alt = vec![Rational::zero(); q.n as usize];
            alt[k as usize - 1] = q_int(n * (n - 1) * choose(n - 2, rr - 1)) / (&cnk * q_int(kk * (2 * kk - n - 1)));
            alternative = Some(evaluate_certificate(q, alt));
        }
    }
    let certificate = evaluate_certificate(q, x);
    let clause_value = psi_clause_value(q, k);
    let matches_clause = certificate.objective == clause_value;
    let discrepancy = alternative.as_ref().and_then(|alt| {
        (alt.objective != clause_value).then(|| {
            format!(
                "alternative closed form gives objective {} (feasible: {}) against clause value {}",
                crate::exactmath::fmt_ratio(&alt.objective),
                alt.feasible,
                crate::exactmath::fmt_ratio(&clause_value)
            )
        })
    });
    Ok(DualCertificate { case, k, certificate, clause_value, matches_clause, alternative, discrepancy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    ClosedForm,
    ExactLp,
}

/// Upper bounds on `sum_{k<=r} P(k)` and on ball-noise stability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpperBound {
    pub mode: BoundMode,
    /// The value subtracted: `psi^+` or `max(Lambda, 0)`.
    #[serde(with = "serde_ratio")]
    pub lower_objective: Rational,
    #[serde(with = "serde_ratio")]
    pub cdf_bound: Rational,
    #[serde(with = "serde_ratio")]
    pub bstab_bound: Rational,
}

/// `2^{-n}[omega_0 + (1/alpha - 1) omega_1 - t]` and its ball-stability form.
pub fn bound_from_objective(q: &BoundQuery, mode: BoundMode, t: Rational) -> UpperBound {
    let n = q.n;
    let w0 = q_int(binom_cum(n, i64::from(q.r)));
    let w1 = q_int(choose(i64::from(n) - 1, i64::from(q.r)));
    let cube = q_int(BigInt::one() << n as usize);
    let cdf_bound = (&w0 + q.inv_alpha_minus_one() * w1 - &t) / &cube;
    let a = q.alpha();
    let bstab_bound = &a * &a * &cube / &w0 * &cdf_bound;
    UpperBound { mode, lower_objective: t, cdf_bound, bstab_bound }
}

pub fn lp_upper_bound(q: &BoundQuery, mode: BoundMode) -> Result<UpperBound> {
    q.require_half()?;
    let t = match mode {
        BoundMode::ClosedForm => psi(q)?.plus(),
        BoundMode::ExactLp => {
            let v = lp_optimum(q)?.value.expect("optimal");
            if v.is_positive() {
                v
            } else {
                Rational::zero()
            }
        }
    };
    Ok(bound_from_objective(q, mode, t))
}

/// `sum_{i>=2} Q(i)(omega_1 - omega_i)` for an actual code: a feasible
/// primal objective, hence at least the LP optimum.
pub fn code_primal_objective(c: &Code, r: u32) -> Result<Rational> {
    let qd = crate::hypercube::dual_distribution(c)?;
    let n = c.n();
    let w1 = omega_value(n, r, 1);
    Ok((2..=n).map(|i| &qd.entries[i as usize] * q_int(&w1 - omega_value(n, r, i))).sum())
}

/// Leading-order asymptotic bound; every vanishing term is dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticBound {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub phi_hat: f64,
    pub eta_hat: f64,
    pub phi_n: f64,
    pub bound: f64,
    /// Leading term of the large-`n` lower bound on the LP optimum.
    pub kappa_leading: f64,
    pub note: &'static str,
}

pub fn phi(alpha: f64) -> f64 {
    if alpha < 0.25 {
        2.0 * (1.0 - alpha.sqrt()).powi(2) / alpha
    } else {
        1.0 / alpha - 2.0
    }
}

pub fn eta_hat(alpha: f64, beta: f64) -> f64 {
    let inner = if beta >= 1.0 { (1.0 + beta) / 2.0 } else { ((1.0 + beta) / 2.0).min(beta / (1.0 - beta)) };
    (1.0 / (2.0 * (1.0 - alpha.sqrt()))).max(inner)
}

pub fn phi_hat(alpha: f64, beta: f64) -> f64 {
    if alpha < 0.25 {
        let eta = eta_hat(alpha, beta);
        (2.0 * (1.0 / alpha - 1.0) - 1.0 / (alpha * eta)) / (2.0 * eta - 1.0)
    } else {
        1.0 / alpha - 2.0
    }
}

pub fn asymptotic_bound(q: &BoundQuery) -> Result<AsymptoticBound> {
    q.require_half()?;
    let alpha = to_f64(&q.alpha());
    let beta = to_f64(&q.beta());
    if !(alpha > 0.0 && alpha <= 0.5) || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!(
            "asymptotic bound needs 0 < alpha <= 1/2, 0 < beta <= 1; got {alpha}, {beta}"
        )));
    }
    let (p, ph, eta) = (phi(alpha), phi_hat(alpha, beta), eta_hat(alpha, beta));
    let case = psi_case(q.n, q.r);
    let phi_n = match case {
        PsiCase::EvenSmall => beta * p - (1.0 / alpha - 1.0),
        PsiCase::OddSmall => beta * ph - (1.0 / alpha - 1.0),
        _ => 0.0,
    };
    let (n, r) = (i64::from(q.n), i64::from(q.r));
    let c = |j: i64| choose(n - 2, j).to_f64().unwrap_or(f64::INFINITY);
    let kappa_leading = match case {
        PsiCase::EvenSmall => c(r - 1) * p,
        PsiCase::OddSmall => c(r - 1) * ph,
        PsiCase::EvenLarge => c(r + 1) * p,
        PsiCase::OddLarge => c(r) * p,
    };
    Ok(AsymptoticBound {
        alpha,
        beta,
        phi: p,
        phi_hat: ph,
        eta_hat: eta,
        phi_n,
        bound: alpha * alpha * (1.0 - (1.0 - 2.0 * beta) * phi_n),
        kappa_leading,
        note: "leading term only",
    })
}

/// Closed-form stabilities of `{1}^k x {-1,1}^(n-k)` and of the even part
/// of the `(n-k+1)`-dimensional subcube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubcubeValues {
    #[serde(with = "serde_ratio")]
    pub ball: Rational,
    #[serde(with = "serde_ratio")]
    pub sphere: Rational,
    /// `None` when `k = 0`.
    #[serde(with = "serde_ratio::option")]
    pub even_part_sphere: Option<Rational>,
}

/// Dimension up to which closed forms are re-derived from explicit codes.
pub const CONSTRUCTIVE_CHECK_MAX_N: u32 = 16;

pub fn subcube_values(n: u32, k: u32, r: u32) -> Result<SubcubeValues> {
    if k > n || r > n {
        return Err(Error::Domain(format!("need k, r <= n; got n={n} k={k} r={r}")));
    }
    let (ni, ki, ri) = (i64::from(n), i64::from(k), i64::from(r));
    let alpha = Rational::new(BigInt::one(), BigInt::one() << k as usize);
    let ball = &alpha * q_int(binom_cum(n - k, ri)) / q_int(binom_cum(n, ri));
    let sphere = &alpha * q_int(choose(ni - ki, ri)) / q_int(binom(ni, ri));
    let even_part_sphere = (k >= 1).then(|| {
        if r.is_multiple_of(2) {
            &alpha * q_int(choose(ni - ki + 1, ri)) / q_int(binom(ni, ri))
        } else {
            Rational::zero()
        }
    });
    if n <= CONSTRUCTIVE_CHECK_MAX_N {
        let c = subcube(n, k)?;
        let direct_ball = stab_ball(&c, r)?.value;
        let direct_sphere = stab_sphere(&c, r)?.value;
        if direct_ball != ball || direct_sphere != sphere {
            return Err(Error::Inconsistent(format!(
                "subcube(n={n}, k={k}), r={r}: closed forms ({ball}, {sphere}) vs codes ({direct_ball}, {direct_sphere})"
            )));
        }
        if let Some(ev) = &even_part_sphere {
            let direct = stab_sphere(&even_part(&subcube(n, k - 1)?), r)?.value;
            if direct != *ev {
                return Err(Error::Inconsistent(format!("even-part sphere value {ev} vs code {direct}")));
            }
        }
    }
    Ok(SubcubeValues { ball, sphere, even_part_sphere })
}

/// Ball-noise stability of the even part of the `m`-dimensional subcube,
/// `m = n - k + 1`: `sum_{even d <= r} 2^{m-1} C(m, d) / (2^n C(n, <=r))`.
pub fn even_part_ball_value(n: u32, k: u32, r: u32) -> Result<Rational> {
    if k == 0 || k > n || r > n {
        return Err(Error::Domain(format!("need 1 <= k <= n and r <= n; got n={n} k={k} r={r}")));
    }
    let m = i64::from(n - k + 1);
    let num: BigInt = (0..=i64::from(r)).step_by(2).map(|d| choose(m, d)).sum::<BigInt>() << (m - 1) as usize;
    let value = Rational::new(num, binom_cum(n, i64::from(r)) << n as usize);
    if n <= CONSTRUCTIVE_CHECK_MAX_N {
        let direct = stab_ball(&even_part(&subcube(n, k - 1)?), r)?.value;
        if direct != value {
            return Err(Error::Inconsistent(format!("even-part ball value {value} vs code {direct}")));
        }
    }
    Ok(value)
}
