use std::io::Write;

use crate::error::{Error, Result};
use crate::exactmath::{fmt_ratio, to_f64, Rational};
use crate::lpbound::{lp_upper_bound, BoundMode, BoundQuery};

use super::report::{achievability, hc_pair, size_from_alpha};

pub const SWEEP_HEADER: [&str; 12] = [
    "n",
    "r",
    "M",
    "alpha",
    "beta",
    "bound_closed",
    "bound_exact_lp",
    "subcube",
    "ball",
    "even_part",
    "hc_upper",
    "hc_lower",
];

/// Largest `n` at which the sweep also solves the LP exactly.
pub const SWEEP_EXACT_LP_MAX_N: u32 = 20;

/// `p/q=decimal`.
pub fn cell(q: &Rational) -> String {
    format!("{}={}", fmt_ratio(q), to_f64(q))
}

fn opt_cell(q: Option<&Rational>) -> String {
    q.map(cell).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub query: BoundQuery,
    pub bound_closed: Rational,
    pub bound_exact_lp: Option<Rational>,
    pub subcube: Option<Rational>,
    pub ball: Option<Rational>,
    pub even_part: Option<Rational>,
    pub hc_upper: Option<f64>,
    pub hc_lower: Option<f64>,
}

impl SweepRow {
    pub fn cells(&self) -> Vec<String> {
        let q = &self.query;
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            q.n.to_string(),
            q.r.to_string(),
            q.m.to_string(),
            cell(&q.alpha()),
            cell(&q.beta()),
            cell(&self.bound_closed),
            opt_cell(self.bound_exact_lp.as_ref()),
            opt_cell(self.subcube.as_ref()),
            opt_cell(self.ball.as_ref()),
            opt_cell(self.even_part.as_ref()),
            f(self.hc_upper),
            f(self.hc_lower),
        ]
    }
}

pub fn sweep_row(q: &BoundQuery) -> Result<SweepRow> {
    let bound_closed = lp_upper_bound(q, BoundMode::ClosedForm)?.bstab_bound;
    let bound_exact_lp =
        if q.n <= SWEEP_EXACT_LP_MAX_N { Some(lp_upper_bound(q, BoundMode::ExactLp)?.bstab_bound) } else { None };
    let a = achievability(q)?;
    let hc = hc_pair(q)?;
    let row = SweepRow {
        query: q.clone(),
        bound_closed,
        bound_exact_lp,
        subcube: a.subcube.map(|v| v.exact),
        ball: a.ball.map(|v| v.exact),
        even_part: a.even_part.map(|v| v.exact),
        hc_upper: hc.map(|p| p.1),
        hc_lower: hc.map(|p| p.0),
    };
    for (name, v) in [("subcube", &row.subcube), ("ball", &row.ball), ("even_part", &row.even_part)] {
        let Some(v) = v else { continue };
        let upper = row.bound_exact_lp.as_ref().unwrap_or(&row.bound_closed);
        if v > &row.bound_closed || v > upper {
            return Err(Error::Inconsistent(format!("{name} = {v} exceeds the upper bound for {q:?}")));
        }
    }
    Ok(row)
}

/// One row per `(alpha, r)` pair, alphas outermost.
pub fn sweep(n: u32, alphas: &[Rational], rs: &[u32]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * rs.len());
    for alpha in alphas {
        let m = size_from_alpha(n, alpha)?;
        for &r in rs {
            let q = BoundQuery::new(n, r, m.clone())?;
            q.require_half()?;
            rows.push(sweep_row(&q)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    w.flush()
}
