//! Dense two-phase tableau simplex over exact rationals.
//!
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable on ratio ties) rules out cycling. Every optimal solution carries
//! a dual vector and is checked as a certificate before it is returned.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{int, serde_ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_ratio::vec")]
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    #[serde(with = "serde_ratio")]
    pub rhs: Rational,
}

/// `min/max c^T x` subject to row constraints; each variable is either
/// nonnegative or free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalLp {
    pub sense: Sense,
    #[serde(with = "serde_ratio::vec")]
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

impl RationalLp {
    /// LP with nonnegative variables and no constraints yet.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let free = vec![false; objective.len()];
        RationalLp { sense, objective, constraints: Vec::new(), free }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Domain(format!(
                "constraint has {} coefficients, LP has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.free.len() != self.num_vars() {
            return Err(Error::Domain("free-variable flags do not match the variable count".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars() {
                return Err(Error::Domain(format!("constraint {i} has the wrong width")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_exact`]. At `Optimal`, `primal` and `dual` form a
/// verified certificate pair with equal objective values.
///
/// Dual signs: for a minimization, `<=` rows carry `y <= 0` and `>=` rows
/// `y >= 0`; for a maximization the signs are reversed. In both cases the
/// optimum equals `b^T y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(with = "serde_ratio::option")]
    pub value: Option<Rational>,
    #[serde(with = "serde_ratio::vec")]
    pub primal: Vec<Rational>,
    #[serde(with = "serde_ratio::vec")]
    pub dual: Vec<Rational>,
    pub pivots: u64,
}

impl LpSolution {
    /// Checks primal feasibility, dual feasibility and equal objectives exactly.
    pub fn verify(&self, lp: &RationalLp) -> std::result::Result<(), String> {
        if self.status != LpStatus::Optimal {
            return Err(format!("status is {:?}", self.status));
        }
        let value = self.value.as_ref().ok_or("optimal solution without a value")?;
        let (x, y) = (&self.primal, &self.dual);
        if x.len() != lp.num_vars() || y.len() != lp.constraints.len() {
            return Err("certificate dimensions do not match the LP".into());
        }
        for (j, xj) in x.iter().enumerate() {
            if !lp.free[j] && xj.is_negative() {
                return Err(format!("primal variable {j} is negative"));
            }
        }
        for (i, c) in lp.constraints.iter().enumerate() {
            let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            };
            if !ok {
                return Err(format!("primal row {i} violated: {lhs} vs {}", c.rhs));
            }
            let sign_ok = match (lp.sense, c.relation) {
                (_, Relation::Eq) => true,
                (Sense::Minimize, Relation::Le) | (Sense::Maximize, Relation::Ge) => !y[i].is_positive(),
                (Sense::Minimize, Relation::Ge) | (Sense::Maximize, Relation::Le) => !y[i].is_negative(),
            };
            if !sign_ok {
                return Err(format!("dual variable {i} has the wrong sign: {}", y[i]));
            }
        }
        for j in 0..lp.num_vars() {
            let aty: Rational = lp.constraints.iter().zip(y).map(|(c, yi)| &c.coeffs[j] * yi).sum();
            let cj = &lp.objective[j];
            let ok = if lp.free[j] {
                aty == *cj
            } else {
                match lp.sense {
                    Sense::Minimize => aty <= *cj,
                    Sense::Maximize => aty >= *cj,
                }
            };
            if !ok {
                return Err(format!("dual constraint {j} violated: {aty} vs {cj}"));
            }
        }
        let primal_value: Rational = lp.objective.iter().zip(x).map(|(a, b)| a * b).sum();
        let dual_value: Rational = lp.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
        if primal_value != *value || dual_value != *value {
            return Err(format!("objective mismatch: primal {primal_value}, dual {dual_value}, reported {value}"));
        }
        Ok(())
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    obj: Vec<Rational>,
    obj_rhs: Rational,
    pivots: u64,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn set_costs(&mut self, cost: &[Rational]) {
        self.obj = cost.to_vec();
        self.obj_rhs = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in self.obj.iter_mut().zip(&self.rows[i]) {
                *o -= cb * a;
            }
            self.obj_rhs -= cb * &self.rhs[i];
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for a in self.rows[r].iter_mut() {
            *a /= &p;
        }
        self.rhs[r] /= &p;
        let (prow, prhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (a, b) in self.rows[i].iter_mut().zip(&prow) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (a, b) in self.obj.iter_mut().zip(&prow) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
            self.obj_rhs -= &f * &prhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Phase {
        loop {
            let Some(c) = (0..self.obj.len()).find(|&j| allowed(j) && self.obj[j].is_negative()) else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Phase::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves an LP exactly. Errors only on malformed input or a failed
/// internal certificate check.
pub fn solve_exact(lp: &RationalLp) -> Result<LpSolution> {
    lp.validate()?;
    let nv = lp.num_vars();
    let m = lp.constraints.len();

    // structural columns: one per variable, plus a negative part for free ones
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(nv);
    let mut ncols = 0;
    for j in 0..nv {
        if lp.free[j] {
            col_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        } else {
            col_of.push((ncols, None));
            ncols += 1;
        }
    }
    let nstruct = ncols;

    let mut flip = vec![false; m];
    let mut rel = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        flip[i] = c.rhs.is_negative();
        rel.push(if flip[i] { c.relation.flipped() } else { c.relation });
    }
    let mut slack_col = vec![None; m];
    for i in 0..m {
        if rel[i] != Relation::Eq {
            slack_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let mut art_col = vec![None; m];
    for i in 0..m {
        if rel[i] != Relation::Le {
            art_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let first_art = nstruct + slack_col.iter().flatten().count();

    let mut rows = vec![vec![Rational::zero(); ncols]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = if flip[i] { int(-1) } else { int(1) };
        for (coef, &(p, q)) in c.coeffs.iter().zip(&col_of) {
            let a = coef * &s;
            if let Some(q) = q {
                rows[i][q] = -a.clone();
            }
            rows[i][p] = a;
        }
        rhs.push(&c.rhs * &s);
        if let Some(sc) = slack_col[i] {
            rows[i][sc] = if rel[i] == Relation::Le { int(1) } else { int(-1) };
        }
        if let Some(ac) = art_col[i] {
            rows[i][ac] = int(1);
            basis.push(ac);
        } else {
            basis.push(slack_col[i].expect("<= rows have a slack"));
        }
    }
    let mut t = Tableau { rows, rhs, basis, obj: Vec::new(), obj_rhs: Rational::zero(), pivots: 0 };

    if first_art < ncols {
        let cost: Vec<Rational> = (0..ncols).map(|j| if j >= first_art { int(1) } else { int(0) }).collect();
        t.set_costs(&cost);
        t.run(&|_| true);
        if !t.obj_rhs.is_zero() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: None,
                primal: Vec::new(),
                dual: Vec::new(),
                pivots: t.pivots,
            });
        }
        for i in 0..m {
            if t.basis[i] >= first_art {
                if let Some(c) = (0..first_art).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, c);
                }
            }
        }
    }

    let sign = match lp.sense {
        Sense::Minimize => Rational::from_integer(1.into()),
        Sense::Maximize => Rational::from_integer((-1).into()),
    };
    let mut cost = vec![Rational::zero(); ncols];
    for (obj, &(p, q)) in lp.objective.iter().zip(&col_of) {
        let cj = obj * &sign;
        if let Some(q) = q {
            cost[q] = -cj.clone();
        }
        cost[p] = cj;
    }
    t.set_costs(&cost);
    if let Phase::Unbounded = t.run(&|j| j < first_art) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: None,
            primal: Vec::new(),
            dual: Vec::new(),
            pivots: t.pivots,
        });
    }

    let mut z = vec![Rational::zero(); ncols];
    for (i, &b) in t.basis.iter().enumerate() {
        z[b] = t.rhs[i].clone();
    }
    let primal: Vec<Rational> = col_of
        .iter()
        .map(|&(p, q)| match q {
            Some(q) => &z[p] - &z[q],
            None => z[p].clone(),
        })
        .collect();
    let dual: Vec<Rational> = (0..m)
        .map(|i| {
            // reduced cost of the row's identity column is -y_i
            let y = match (art_col[i], slack_col[i]) {
                (Some(ac), _) => -t.obj[ac].clone(),
                (None, Some(sc)) => -t.obj[sc].clone(),
                (None, None) => unreachable!("every row has an identity column"),
            };
            let y = if flip[i] { -y } else { y };
            y * &sign
        })
        .collect();
    let value: Rational = lp.objective.iter().zip(&primal).map(|(a, b)| a * b).sum();
    let sol = LpSolution { status: LpStatus::Optimal, value: Some(value), primal, dual, pivots: t.pivots };
    sol.verify(lp).map_err(|e| Error::Inconsistent(format!("simplex certificate rejected: {e}")))?;
    Ok(sol)
}
