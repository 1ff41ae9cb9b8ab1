//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 property failure, 2 invalid query, 3 enumeration
//! budget exceeded, 4 I/O error.

pub mod report;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use crate::error::Error;
use crate::exactmath::{parse_ratio, to_f64, Rational};
use crate::krawtchouk::{krawtchouk, shared_table};
use crate::lpbound::{
    dual_certificate, lp_optimum, lp_upper_bound, psi, BoundMode, BoundQuery, DualCertificate, PsiValue, UpperBound,
};
use crate::oracle::{gamma_exact_with_budget, OracleModel, OracleResult, BUDGET_ENV, DEFAULT_BUDGET};

use report::{build_report, BoundReport, Num, ReportOptions};
use verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(std::io::Error),
    Property(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Lib(Error::Inconsistent(_)) | CliError::Property(_) => EXIT_PROPERTY,
            CliError::Lib(_) | CliError::Usage(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Property(s) => write!(f, "property failure: {s}"),
            CliError::Usage(s) => write!(f, "{s}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "isoperim", version, about = "Exact noise-stability and edge-isoperimetric bounds on the hypercube")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Sphere,
    Ball,
    Iid,
    Cdf,
}

#[derive(Debug, Clone, clap::Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub r: u32,
    /// Code size M (decimal integer, may exceed 64 bits).
    #[arg(long)]
    pub m: BigInt,
}

impl QueryArgs {
    fn query(&self) -> CliResult<BoundQuery> {
        Ok(BoundQuery::new(self.n, self.r, self.m.clone())?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bounds and constructions for ball-noise stability.
    Bounds {
        #[command(flatten)]
        q: QueryArgs,
        /// Also solve the LP exactly.
        #[arg(long)]
        exact_lp: bool,
        /// Also run the exhaustive oracle (subject to the budget).
        #[arg(long)]
        oracle: bool,
        /// Include every closed-form dual certificate.
        #[arg(long)]
        certificates: bool,
        #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exhaustive maximum over all M-subsets.
    Oracle {
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long, value_enum, default_value_t = ModelArg::Ball)]
        model: ModelArg,
        /// Flip probability for `--model iid` (p/q or decimal).
        #[arg(long)]
        beta: Option<String>,
        #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Krawtchouk values: one entry, one row, or the full table.
    Krawtchouk {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<i64>,
    },
    /// Exact LP optimum, dual solution, psi and certificates.
    Lp {
        #[command(flatten)]
        q: QueryArgs,
    },
    /// CSV table over a grid of (alpha, r).
    Sweep {
        #[arg(long)]
        n: u32,
        /// Comma-separated volumes (p/q or exact decimals).
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        rs: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        max_n: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    #[serde(flatten)]
    result: &'a OracleResult,
    optimum_decimal: f64,
    witness_indices: Vec<u32>,
}

#[derive(Serialize)]
struct LpOutput {
    query: BoundQuery,
    lambda: Num,
    primal_u: Vec<Num>,
    dual_x: Vec<Num>,
    pivots: u64,
    psi: PsiValue,
    certificates: Vec<DualCertificate>,
    closed_form: UpperBound,
    exact_lp: UpperBound,
}

fn print_json<T: Serialize>(out: &mut impl Write, v: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn print_table(out: &mut impl Write, rep: &BoundReport) -> CliResult<()> {
    let q = &rep.query;
    let line = |v: &Num| format!("{} ({:.12})", crate::exactmath::fmt_ratio(&v.exact), v.decimal);
    writeln!(out, "n = {}, r = {}, M = {}, alpha = {}, beta = {}", q.n, q.r, q.m, line(&q.alpha), line(&q.beta))?;
    writeln!(out, "upper  lp_closed_form  {}", line(&rep.bounds.lp_closed_form))?;
    if let Some(e) = &rep.bounds.lp_exact {
        writeln!(out, "upper  lp_exact        {}", line(e))?;
    }
    writeln!(out, "upper  trivial_one     {}", line(&rep.bounds.trivial_one))?;
    if let Some(h) = rep.bounds.hc_upper {
        writeln!(out, "limit  hc_upper        {h:.12}")?;
    }
    for (name, v) in rep.achievability.values() {
        writeln!(out, "lower  {name:<15} {}", line(v))?;
    }
    if let Some(o) = &rep.oracle {
        writeln!(out, "exact  oracle          {}", line(&o.optimum))?;
    }
    writeln!(out, "tight  {}", rep.tight)?;
    Ok(())
}

fn print_csv(out: &mut impl Write, rep: &BoundReport) -> CliResult<()> {
    let cell = |v: Option<&Num>| v.map(|v| sweep::cell(&v.exact)).unwrap_or_default();
    let a = &rep.achievability;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record([
        "n",
        "r",
        "M",
        "alpha",
        "beta",
        "lp_closed_form",
        "lp_exact",
        "trivial_one",
        "hc_upper",
        "subcube",
        "ball",
        "lex",
        "even_part",
        "oracle",
        "tight",
    ])
    .map_err(|e| CliError::Io(e.into()))?;
    w.write_record([
        rep.query.n.to_string(),
        rep.query.r.to_string(),
        rep.query.m.clone(),
        cell(Some(&rep.query.alpha)),
        cell(Some(&rep.query.beta)),
        cell(Some(&rep.bounds.lp_closed_form)),
        cell(rep.bounds.lp_exact.as_ref()),
        cell(Some(&rep.bounds.trivial_one)),
        rep.bounds.hc_upper.map(|h| h.to_string()).unwrap_or_default(),
        cell(a.subcube.as_ref()),
        cell(a.ball.as_ref()),
        cell(a.lex.as_ref()),
        cell(a.even_part.as_ref()),
        cell(rep.oracle.as_ref().map(|o| &o.optimum)),
        rep.tight.to_string(),
    ])
    .map_err(|e| CliError::Io(e.into()))?;
    w.flush()?;
    Ok(())
}

fn oracle_model(model: ModelArg, beta: Option<&str>) -> CliResult<OracleModel> {
    Ok(match model {
        ModelArg::Sphere => OracleModel::Sphere,
        ModelArg::Ball => OracleModel::Ball,
        ModelArg::Cdf => OracleModel::Cdf,
        ModelArg::Iid => {
            let b = beta.ok_or_else(|| CliError::Usage("--model iid needs --beta".into()))?;
            OracleModel::Iid { beta: parse_ratio(b)? }
        }
    })
}

pub fn execute(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> CliResult<()> {
    match cli.command {
        Command::Bounds { q, exact_lp, oracle, certificates, budget, format } => {
            let q = q.query()?;
            let opts = ReportOptions { exact_lp, oracle_budget: oracle.then_some(budget), certificates };
            let rep = build_report(&q, opts)?;
            match format {
                Format::Json => print_json(out, &rep),
                Format::Table => print_table(out, &rep),
                Format::Csv => print_csv(out, &rep),
            }
        }
        Command::Oracle { q, model, beta, budget } => {
            let q = q.query()?;
            let model = oracle_model(model, beta.as_deref())?;
            let res = gamma_exact_with_budget(&q, &model, budget)?;
            let output = OracleOutput {
                result: &res,
                optimum_decimal: to_f64(&res.optimum),
                witness_indices: res.witness.indices(),
            };
            print_json(out, &output)
        }
        Command::Krawtchouk { n, k, x } => match (k, x) {
            (Some(k), Some(x)) => print_json(out, &krawtchouk(n, k, x)?.to_string()),
            (Some(k), None) => {
                if k > n {
                    return Err(Error::Domain(format!("k = {k} exceeds n = {n}")).into());
                }
                print_json(out, &shared_table(n).row(k).iter().map(|v| v.to_string()).collect::<Vec<_>>())
            }
            (None, None) => {
                let rows: Vec<Vec<String>> =
                    shared_table(n).to_rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
                print_json(out, &rows)
            }
            (None, Some(_)) => Err(CliError::Usage("--x needs --k".into())),
        },
        Command::Lp { q } => {
            let q = q.query()?;
            q.require_half()?;
            let sol = lp_optimum(&q)?;
            let p = psi(&q)?;
            let certificates =
                p.candidates.iter().map(|&k| dual_certificate(&q, k)).collect::<crate::Result<Vec<_>>>()?;
            let output = LpOutput {
                lambda: sol.value.clone().expect("optimal").into(),
                primal_u: sol.primal.iter().cloned().map(Num::from).collect(),
                dual_x: sol.dual.iter().map(|y| Num::from(-y)).collect(),
                pivots: sol.pivots as u64,
                closed_form: lp_upper_bound(&q, BoundMode::ClosedForm)?,
                exact_lp: lp_upper_bound(&q, BoundMode::ExactLp)?,
                psi: p,
                certificates,
                query: q,
            };
            print_json(out, &output)
        }
        Command::Sweep { n, alphas, rs, out: path } => {
            let alphas = alphas.iter().map(|a| parse_ratio(a)).collect::<crate::Result<Vec<Rational>>>()?;
            if alphas.is_empty() || rs.is_empty() {
                return Err(CliError::Usage("--alphas and --rs must be non-empty".into()));
            }
            let rows = sweep::sweep(n, &alphas, &rs)?;
            let file = std::fs::File::create(&path)?;
            sweep::write_csv(std::io::BufWriter::new(file), &rows)?;
            writeln!(err, "wrote {} rows to {}", rows.len(), path.display())?;
            Ok(())
        }
        Command::Verify { suite, max_n, seed } => {
            let reports = run_suite(suite, max_n, seed);
            let mut failed = 0;
            for r in &reports {
                let status = if r.passed() { "ok" } else { "FAILED" };
                writeln!(out, "{:<13} {:>10} checks  {status}", r.suite, r.checks)?;
                for f in &r.failures {
                    writeln!(out, "  failure: {f}")?;
                }
                for note in r.notes.iter().take(5) {
                    writeln!(out, "  note: {note}")?;
                }
                if r.notes.len() > 5 {
                    writeln!(out, "  note: ... {} more", r.notes.len() - 5)?;
                }
                failed += r.failures.len();
            }
            if failed > 0 {
                return Err(CliError::Property(format!("{failed} failed checks")));
            }
            Ok(())
        }
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INVALID;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
