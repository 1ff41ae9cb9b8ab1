use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::asymptotics::hc_bounds;
use crate::error::{Error, Result};
use crate::exactmath::{binom_cum, serde_ratio, to_f64, Rational};
use crate::hypercube::{hamming_ball, lex_segment, MAX_CODE_DIM};
use crate::lpbound::{
    dual_certificate, even_part_ball_value, lp_upper_bound, psi, subcube_values, BoundMode, BoundQuery,
};
use crate::oracle::{gamma_exact_with_budget, OracleModel};
use crate::stability::stab_ball;

/// An exact rational with a decimal rendering beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Num {
    #[serde(with = "serde_ratio")]
    pub exact: Rational,
    pub decimal: f64,
}

impl From<Rational> for Num {
    fn from(exact: Rational) -> Self {
        Num { decimal: to_f64(&exact), exact }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySummary {
    pub n: u32,
    pub r: u32,
    pub m: String,
    pub alpha: Num,
    pub beta: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lp_closed_form: Num,
    pub lp_exact: Option<Num>,
    /// Limit-level hypercontractive bound at `beta = r/n`; not a finite-n bound.
    pub hc_upper: Option<f64>,
    /// `BStab <= alpha`.
    pub trivial_one: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Achievability {
    pub subcube: Option<Num>,
    pub ball: Option<Num>,
    pub lex: Option<Num>,
    pub even_part: Option<Num>,
}

impl Achievability {
    pub fn values(&self) -> Vec<(&'static str, &Num)> {
        [("subcube", &self.subcube), ("ball", &self.ball), ("lex", &self.lex), ("even_part", &self.even_part)]
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect()
    }

    pub fn best(&self) -> Option<&Num> {
        self.values().into_iter().map(|(_, v)| v).max_by(|a, b| a.exact.cmp(&b.exact))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub optimum: Num,
    pub witness_n: u32,
    pub witness_bitmap_hex: String,
    pub subsets_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub k: u32,
    pub objective: Num,
    pub clause_value: Num,
    pub feasible: bool,
    pub matches_clause: bool,
    pub discrepancy: Option<String>,
}

/// Upper bounds, constructions and optional ground truth for ball noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub query: QuerySummary,
    pub psi: Option<Num>,
    pub psi_argmax: Option<u32>,
    pub bounds: Bounds,
    pub achievability: Achievability,
    pub oracle: Option<OracleSummary>,
    pub certificates: Option<Vec<CertificateSummary>>,
    /// Least finite-n upper bound equals the best value reached.
    pub tight: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub exact_lp: bool,
    pub oracle_budget: Option<u64>,
    pub certificates: bool,
}

/// `k` with `M = 2^(n-k)`, if any.
pub fn subcube_codim(q: &BoundQuery) -> Option<u32> {
    let m = q.m.to_u64()?;
    (m.is_power_of_two() && m <= 1u64 << q.n).then(|| q.n - m.trailing_zeros())
}

/// Ball stability of the standard size-`M` constructions that exist.
pub fn achievability(q: &BoundQuery) -> Result<Achievability> {
    let (n, r) = (q.n, q.r);
    let k = subcube_codim(q);
    let subcube = k.map(|k| subcube_values(n, k, r).map(|v| Num::from(v.ball))).transpose()?;
    let even_part = k.filter(|&k| k >= 1).map(|k| even_part_ball_value(n, k, r).map(Num::from)).transpose()?;
    let mut ball = None;
    let mut lex = None;
    if n <= MAX_CODE_DIM {
        for radius in 0..=n {
            let size = binom_cum(n, i64::from(radius));
            if size == q.m {
                ball = Some(Num::from(stab_ball(&hamming_ball(n, radius)?, r)?.value));
            }
            if size >= q.m {
                break;
            }
        }
        let m = q.m.to_u64().expect("M <= 2^24");
        lex = Some(Num::from(stab_ball(&lex_segment(n, m)?, r)?.value));
    }
    Ok(Achievability { subcube, ball, lex, even_part })
}

/// Limit-level upper bound for the parity of `r`, when `r/n <= 1/2`.
pub fn hc_pair(q: &BoundQuery) -> Result<Option<(f64, f64)>> {
    let alpha = to_f64(&q.alpha());
    let beta = to_f64(&q.beta());
    if beta > 0.5 {
        return Ok(None);
    }
    let hc = hc_bounds(alpha, beta)?;
    Ok(Some(if q.r % 2 == 1 { (hc.odd_lower, hc.odd_upper) } else { (hc.even_ball_lower, hc.even_ball_upper) }))
}

pub fn build_report(q: &BoundQuery, opts: ReportOptions) -> Result<BoundReport> {
    q.require_half()?;
    let p = psi(q)?;
    let closed = lp_upper_bound(q, BoundMode::ClosedForm)?.bstab_bound;
    let exact = if opts.exact_lp { Some(lp_upper_bound(q, BoundMode::ExactLp)?.bstab_bound) } else { None };
    let trivial = q.alpha();
    let achievability = achievability(q)?;
    let oracle = match opts.oracle_budget {
        Some(budget) => {
            let res = gamma_exact_with_budget(q, &OracleModel::Ball, budget)?;
            Some(OracleSummary {
                optimum: res.optimum.into(),
                witness_n: res.witness.n(),
                witness_bitmap_hex: res.witness.to_bitmap_hex(),
                subsets_examined: res.subsets_examined,
            })
        }
        None => None,
    };
    let certificates = if opts.certificates {
        let mut out = Vec::new();
        for &k in &p.candidates {
            let c = dual_certificate(q, k)?;
            out.push(CertificateSummary {
                k,
                objective: c.certificate.objective.into(),
                clause_value: c.clause_value.into(),
                feasible: c.certificate.feasible,
                matches_clause: c.matches_clause,
                discrepancy: c.discrepancy,
            });
        }
        Some(out)
    } else {
        None
    };
    let least_upper = exact.clone().unwrap_or_else(|| closed.clone()).min(trivial.clone());
    let reached = match (&oracle, achievability.best()) {
        (Some(o), _) => Some(o.optimum.exact.clone()),
        (None, Some(b)) => Some(b.exact.clone()),
        (None, None) => None,
    };
    let tight = reached.as_ref() == Some(&least_upper);
    let report = BoundReport {
        query: QuerySummary { n: q.n, r: q.r, m: q.m.to_string(), alpha: q.alpha().into(), beta: q.beta().into() },
        psi: p.value.map(Num::from),
        psi_argmax: p.argmax,
        bounds: Bounds {
            lp_closed_form: closed.into(),
            lp_exact: exact.map(Num::from),
            hc_upper: hc_pair(q)?.map(|(_, u)| u),
            trivial_one: trivial.into(),
        },
        achievability,
        oracle,
        certificates,
        tight,
    };
    check_report(&report)?;
    Ok(report)
}

/// Every construction and the oracle sit below every finite-n upper bound,
/// and the oracle sits above every construction.
pub fn check_report(rep: &BoundReport) -> Result<()> {
    let mut uppers = vec![("lp_closed_form", &rep.bounds.lp_closed_form), ("trivial_one", &rep.bounds.trivial_one)];
    if let Some(e) = &rep.bounds.lp_exact {
        uppers.push(("lp_exact", e));
    }
    let mut lowers = rep.achievability.values();
    if let Some(o) = &rep.oracle {
        lowers.push(("oracle", &o.optimum));
        for (name, v) in rep.achievability.values() {
            if v.exact > o.optimum.exact {
                return Err(Error::Inconsistent(format!("construction {name} = {} exceeds oracle", v.exact)));
            }
        }
    }
    for (un, u) in &uppers {
        for (ln, l) in &lowers {
            if l.exact > u.exact {
                return Err(Error::Inconsistent(format!("{ln} = {} exceeds upper bound {un} = {}", l.exact, u.exact)));
            }
        }
    }
    Ok(())
}

/// `M = alpha 2^n`, rejecting non-integral sizes.
pub fn size_from_alpha(n: u32, alpha: &Rational) -> Result<BigInt> {
    let m = alpha * Rational::from_integer(BigInt::from(1) << n as usize);
    if !m.is_integer() {
        return Err(Error::InvalidQuery(format!("alpha = {alpha} times 2^{n} is not an integer")));
    }
    Ok(m.to_integer())
}
