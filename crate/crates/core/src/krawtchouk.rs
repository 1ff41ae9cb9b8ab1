//! Krawtchouk polynomials over the binary Hamming scheme.
//!
//! `K_k^(n)(x) = sum_j (-1)^j C(x, j) C(n - x, k - j)`. Tables are built from
//! the generating function `(1 - z)^i (1 + z)^(n - i)` through the column
//! recurrence `K_k(i+1) = K_k(i) - K_{k-1}(i) - K_{k-1}(i+1)`; the defining sum
//! is kept as an independent evaluation path.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmath::{binom, binom_cum, binom_row, Rational};

/// Beyond this length, point evaluations skip the cached table.
pub const SHARED_TABLE_MAX: u32 = 256;

/// Maximum number of counterexamples kept in a [`VerificationReport`].
pub const MAX_REPORTED_VIOLATIONS: usize = 16;

/// Exact Krawtchouk value with the library's range check (`k <= n`).
pub fn krawtchouk(n: u32, k: u32, x: i64) -> Result<BigInt> {
    if k > n {
        return Err(Error::Domain(format!("Krawtchouk degree k = {k} exceeds n = {n}")));
    }
    Ok(krawtchouk_sum(i64::from(n), i64::from(k), x))
}

/// Defining sum for arbitrary integers, using generalized binomials.
///
/// Used internally where the degree may exceed the length (the ball-noise
/// eigenvalue at `r = n` evaluates `K_n^(n-1)`).
pub(crate) fn krawtchouk_sum(n: i64, k: i64, x: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    let ku = k as usize;
    // C(x, j) for j = 0..=k, ascending; exact for any integer x.
    let mut cx = Vec::with_capacity(ku + 1);
    // C(n - x, t) for t = 0..=k, ascending.
    let mut cy = Vec::with_capacity(ku + 1);
    let y = n - x;
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for j in 0..=k {
        cx.push(a.clone());
        cy.push(b.clone());
        a = a * BigInt::from(x - j) / BigInt::from(j + 1);
        b = b * BigInt::from(y - j) / BigInt::from(j + 1);
    }
    let mut acc = BigInt::zero();
    for j in 0..=ku {
        let term = &cx[j] * &cy[ku - j];
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Full table `K_k^(n)(i)` for `0 <= k, i <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KrawtchoukTable {
    n: u32,
    values: Vec<BigInt>,
}

impl KrawtchoukTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `K_k(i)`.
    pub fn get(&self, k: u32, i: u32) -> &BigInt {
        let w = self.n as usize + 1;
        &self.values[k as usize * w + i as usize]
    }

    /// Row `k` as a slice over `i = 0..=n`.
    pub fn row(&self, k: u32) -> &[BigInt] {
        let w = self.n as usize + 1;
        &self.values[k as usize * w..(k as usize + 1) * w]
    }

    /// Rows as nested vectors (row `k`, column `i`).
    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..=self.n).map(|k| self.row(k).to_vec()).collect()
    }

    /// Checks every entry against the defining sum.
    pub fn verify_defining_sum(&self) -> VerificationReport {
        let n = self.n;
        let mut rep = VerificationReport::new("defining-sum", n);
        for k in 0..=n {
            for i in 0..=n {
                let direct = krawtchouk_sum(i64::from(n), i64::from(k), i64::from(i));
                rep.record(direct == *self.get(k, i), k, i, || format!("table {} vs sum {}", self.get(k, i), direct));
            }
        }
        rep
    }

    /// Expands `(1 - z)^i (1 + z)^(n - i)` coefficient by coefficient and
    /// compares with column `i`.
    pub fn verify_generating_function(&self) -> VerificationReport {
        let n = self.n;
        let mut rep = VerificationReport::new("generating-function", n);
        for i in 0..=n {
            let minus: Vec<BigInt> =
                binom_row(i).into_iter().enumerate().map(|(j, c)| if j % 2 == 1 { -c } else { c }).collect();
            let plus = binom_row(n - i);
            let mut coeffs = vec![BigInt::zero(); n as usize + 1];
            for (a, ca) in minus.iter().enumerate() {
                for (b, cb) in plus.iter().enumerate() {
                    coeffs[a + b] += ca * cb;
                }
            }
            for k in 0..=n {
                let c = &coeffs[k as usize];
                rep.record(c == self.get(k, i), k, i, || format!("coefficient {} vs table {}", c, self.get(k, i)));
            }
        }
        rep
    }

    /// Special values, reciprocity and both reflection identities.
    pub fn verify_identities(&self) -> VerificationReport {
        let n = self.n;
        let ni = BigInt::from(n);
        let binoms = binom_row(n);
        let mut rep = VerificationReport::new("identities", n);
        for k in 0..=n {
            let c = &binoms[k as usize];
            let kk = BigInt::from(k);
            rep.record(*self.get(0, k) == BigInt::one(), 0, k, || "K_0(i) != 1".into());
            rep.record(self.get(k, 0) == c, k, 0, || "K_k(0) != C(n,k)".into());
            if n >= 1 {
                // n K_k(1) = C(n,k)(n - 2k)
                let lhs = &ni * self.get(k, 1);
                let rhs = c * (&ni - BigInt::from(2) * &kk);
                rep.record(lhs == rhs, k, 1, || "K_k(1) closed form".into());
            }
            if n >= 2 {
                // n(n-1) K_k(2) = C(n,k)(n(n-1) - 4k(n-k))
                let nn1 = &ni * (&ni - 1);
                let lhs = &nn1 * self.get(k, 2);
                let rhs = c * (&nn1 - BigInt::from(4) * &kk * (&ni - &kk));
                rep.record(lhs == rhs, k, 2, || "K_k(2) closed form".into());
            }
            for i in 0..=n {
                let v = self.get(k, i);
                let recip = &binoms[i as usize] * v == c * self.get(i, k);
                rep.record(recip, k, i, || "reciprocity".into());
                let sign_k = if k % 2 == 0 { v.clone() } else { -v };
                rep.record(sign_k == *self.get(k, n - i), k, i, || "reflection in i".into());
                let sign_i = if i % 2 == 0 { v.clone() } else { -v };
                rep.record(sign_i == *self.get(n - k, i), k, i, || "reflection in k".into());
            }
        }
        rep
    }

    /// `K_k^(n)(i) = K_k^(n-1)(i) + K_{k-1}^(n-1)(i)` for `1 <= k <= n`, `0 <= i <= n - 1`.
    ///
    /// Column `i = n` is covered through the defining sum of the shorter length.
    pub fn verify_recurrence(&self, shorter: &KrawtchoukTable) -> VerificationReport {
        let n = self.n;
        let mut rep = VerificationReport::new("length-recurrence", n);
        assert_eq!(shorter.n + 1, n, "recurrence needs the table of length n - 1");
        for k in 1..=n {
            for i in 0..=n {
                let prev = |kk: u32| -> BigInt {
                    if kk <= shorter.n && i <= shorter.n {
                        shorter.get(kk, i).clone()
                    } else {
                        krawtchouk_sum(i64::from(shorter.n), i64::from(kk), i64::from(i))
                    }
                };
                let rhs = prev(k) + prev(k - 1);
                rep.record(rhs == *self.get(k, i), k, i, || "K_k^(n) recurrence".into());
            }
        }
        rep
    }

    /// `sum_{k<=r} K_k^(n)(i) = K_r^(n-1)(i - 1)` for every `r` and `i`,
    /// including `i = 0` through the generalized evaluation at `-1`.
    pub fn verify_omega(&self) -> VerificationReport {
        let n = self.n;
        let mut rep = VerificationReport::new("omega-identity", n);
        if n == 0 {
            return rep;
        }
        for i in 0..=n {
            let mut partial = BigInt::zero();
            for r in 0..=n {
                partial += self.get(r, i);
                let closed = krawtchouk_sum(i64::from(n) - 1, i64::from(r), i64::from(i) - 1);
                rep.record(partial == closed, r, i, || format!("{partial} vs {closed}"));
            }
        }
        rep
    }
}

/// Builds the full table through the generating-function column recurrence.
pub fn table(n: u32) -> KrawtchoukTable {
    let w = n as usize + 1;
    let mut values = vec![BigInt::zero(); w * w];
    for (k, c) in binom_row(n).into_iter().enumerate() {
        values[k * w] = c;
    }
    // (1 + z) G_{i+1}(z) = (1 - z) G_i(z)
    for i in 0..n as usize {
        values[i + 1] = BigInt::one();
        for k in 1..w {
            let v = &values[k * w + i] - &values[(k - 1) * w + i] - &values[(k - 1) * w + i + 1];
            values[k * w + i + 1] = v;
        }
    }
    KrawtchoukTable { n, values }
}

/// Process-wide cache of tables; tables are immutable once built.
pub fn shared_table(n: u32) -> Arc<KrawtchoukTable> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<KrawtchoukTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&n) {
        return Arc::clone(t);
    }
    let t = Arc::new(table(n));
    cache.lock().expect("table cache poisoned").entry(n).or_insert_with(|| Arc::clone(&t)).clone()
}

/// `omega_i^(r) = sum_{k=0}^r K_k(i) = K_r^(n-1)(i - 1)`; both sides are
/// evaluated and must agree.
pub fn omega(n: u32, r: u32, i: u32) -> Result<BigInt> {
    if n == 0 || r > n || i > n {
        return Err(Error::Domain(format!("omega needs 0 <= r, i <= n and n >= 1; got n={n} r={r} i={i}")));
    }
    let t = shared_table(n);
    let lhs: BigInt = (0..=r).map(|k| t.get(k, i)).sum();
    let rhs = krawtchouk_sum(i64::from(n) - 1, i64::from(r), i64::from(i) - 1);
    if lhs != rhs {
        return Err(Error::Inconsistent(format!(
            "omega(n={n}, r={r}, i={i}): partial sum {lhs} != K_r^(n-1)(i-1) = {rhs}"
        )));
    }
    Ok(lhs)
}

/// The vector `(omega_0, ..., omega_n)` for radius `r`.
pub fn omega_vector(n: u32, r: u32) -> Result<Vec<BigInt>> {
    (0..=n).map(|i| omega(n, r, i)).collect()
}

/// Which uniform noise acts on the coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseShape {
    Sphere,
    Ball,
}

/// `2 P[Z_1 ... Z_k = 1] - 1` for `Z` uniform on the radius-`r` sphere or ball.
pub fn noise_eigenvalue(n: u32, r: u32, k: u32, shape: NoiseShape) -> Result<Rational> {
    if r > n || k > n {
        return Err(Error::Domain(format!("noise eigenvalue needs r, k <= n; got n={n} r={r} k={k}")));
    }
    let (num, den) = match shape {
        NoiseShape::Sphere => {
            let v = if n <= SHARED_TABLE_MAX {
                shared_table(n).get(r, k).clone()
            } else {
                krawtchouk_sum(i64::from(n), i64::from(r), i64::from(k))
            };
            (v, binom(i64::from(n), i64::from(r)))
        }
        NoiseShape::Ball => {
            (krawtchouk_sum(i64::from(n) - 1, i64::from(r), i64::from(k) - 1), binom_cum(n, i64::from(r)))
        }
    };
    Ok(Rational::new(num, den))
}

/// All eigenvalues `k = 0..=n` for one noise.
pub fn noise_eigenvalues(n: u32, r: u32, shape: NoiseShape) -> Result<Vec<Rational>> {
    (0..=n).map(|k| noise_eigenvalue(n, r, k, shape)).collect()
}

/// `tau(n) = (n/2 + 2 - sqrt(n/2 + 2)) / 2` as a float, for display.
pub fn tau(n: u32) -> f64 {
    let m = f64::from(n) / 2.0 + 2.0;
    0.5 * (m - m.sqrt())
}

/// Exact test of `d <= tau(n)` for an integer `d`.
///
/// With `m = (n + 4)/2`, `d <= (m - sqrt m)/2` iff `n + 4 - 4d >= 0` and
/// `(n + 4 - 4d)^2 >= 2(n + 4)`.
pub fn le_tau(n: u32, d: i64) -> bool {
    let a = i128::from(n) + 4 - 4 * i128::from(d);
    a >= 0 && a * a >= 2 * (i128::from(n) + 4)
}

/// Integers `k` with `n - tau(n) <= k <= n`.
pub fn tau_window(n: u32) -> impl Iterator<Item = u32> {
    (0..=n).filter(move |&k| le_tau(n, i64::from(n - k)))
}

/// The three extremal statements about `K_k(0)`, `K_k(1)`, `K_k(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremalStatement {
    /// `K_k(0) >= |K_k(i)|`, all `0 <= k, i <= n`.
    AtZero = 1,
    /// `K_k(1) >= |K_k(i)|`, `0 <= k <= (n-1)/2`, `1 <= i <= n-1`.
    AtOne = 2,
    /// `K_k(2) >= |K_k(i)|`, `0 <= k <= tau(n)`, `2 <= i <= n-2`.
    AtTwo = 3,
}

impl ExtremalStatement {
    pub fn from_number(s: u8) -> Result<Self> {
        match s {
            1 => Ok(Self::AtZero),
            2 => Ok(Self::AtOne),
            3 => Ok(Self::AtTwo),
            _ => Err(Error::Domain(format!("extremal statement must be 1, 2 or 3; got {s}"))),
        }
    }
}

/// One failed instance of a checked identity or inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub k: i64,
    pub i: i64,
    pub detail: String,
}

/// Outcome of an exhaustive check over a finite index range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub n: u32,
    pub cases_checked: u64,
    pub violation_count: u64,
    /// First few violations; at most [`MAX_REPORTED_VIOLATIONS`].
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, n: u32) -> Self {
        VerificationReport { check: check.into(), n, cases_checked: 0, violation_count: 0, violations: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub(crate) fn record(&mut self, ok: bool, k: u32, i: u32, detail: impl FnOnce() -> String) {
        self.record_at(ok, i64::from(k), i64::from(i), detail)
    }

    pub(crate) fn record_at(&mut self, ok: bool, k: i64, i: i64, detail: impl FnOnce() -> String) {
        self.cases_checked += 1;
        if !ok {
            self.violation_count += 1;
            if self.violations.len() < MAX_REPORTED_VIOLATIONS {
                self.violations.push(Violation { k, i, detail: detail() });
            }
        }
    }
}

/// Exhaustive check of one extremal statement at length `n`.
pub fn check_extremal(n: u32, statement: ExtremalStatement) -> VerificationReport {
    let mut rep = VerificationReport::new(format!("extremal-statement-{}", statement as u8), n);
    if n == 0 {
        return rep;
    }
    let t = shared_table(n);
    let (anchor, ks, is): (u32, Vec<u32>, Vec<u32>) = match statement {
        ExtremalStatement::AtZero => (0, (0..=n).collect(), (0..=n).collect()),
        ExtremalStatement::AtOne => (1, (0..=(n - 1) / 2).collect(), (1..n).collect()),
        ExtremalStatement::AtTwo => (
            2,
            (0..=n).filter(|&k| le_tau(n, i64::from(k))).collect(),
            if n >= 4 { (2..=n - 2).collect() } else { Vec::new() },
        ),
    };
    for &k in &ks {
        let top = t.get(k, anchor);
        for &i in &is {
            let v = t.get(k, i);
            rep.record(top >= &v.abs(), k, i, || format!("K_{k}({anchor}) = {top} < |K_{k}({i})| = {}", v.abs()));
        }
    }
    rep
}

/// Largest `K` such that `K_k(2) >= |K_k(i)|` for every `k <= K` and
/// `2 <= i <= n - 2`; `None` when the range of `i` is empty.
pub fn empirical_statement3_threshold(n: u32) -> Option<u32> {
    if n < 4 {
        return None;
    }
    let t = shared_table(n);
    let mut best = None;
    for k in 0..=n {
        let top = t.get(k, 2);
        if (2..=n - 2).all(|i| top >= &t.get(k, i).abs()) {
            best = Some(k);
        } else {
            break;
        }
    }
    best
}

/// Diagnostic for the large-`n` extremal property at anchor `i`:
/// `K_k(i) >= |K_k(x)|` for integer `x` in `[i, n - i]` and integer `k` in
/// `[delta n, (1/2 - delta) n]`. Failures at small `n` are expected.
pub fn check_asym_extremal(n: u32, i: u32, delta: f64) -> Result<VerificationReport> {
    if n == 0 || !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Domain(format!("need n >= 1 and 0 < delta < 1/4; got n={n} delta={delta}")));
    }
    let mut rep = VerificationReport::new(format!("asym-extremal-i{i}"), n);
    if 2 * i > n {
        return Ok(rep);
    }
    let t = shared_table(n);
    let nf = f64::from(n);
    let k_lo = (delta * nf).ceil().max(0.0) as u32;
    let k_hi = ((0.5 - delta) * nf).floor().min(nf) as u32;
    for k in k_lo..=k_hi.max(k_lo).min(n) {
        if f64::from(k) > (0.5 - delta) * nf {
            break;
        }
        let top = t.get(k, i);
        for x in i..=n - i {
            let v = t.get(k, x);
            rep.record(top >= &v.abs(), k, x, || format!("K_{k}({i}) = {top} < |K_{k}({x})| = {}", v.abs()));
        }
    }
    Ok(rep)
}
