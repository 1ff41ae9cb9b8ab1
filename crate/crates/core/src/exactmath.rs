//! Exact integer/rational helpers and the entropy functionals.
//!
//! Every set-level quantity in this crate is a [`BigRational`]; floating point
//! is reserved for entropies, Gaussian probabilities and asymptotic formulas.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Tolerance on the total mass of a [`ProbVector`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Generalized binomial coefficient `x(x-1)...(x-j+1)/j!`.
///
/// Defined for every integer `x` (negative included); zero for `j < 0`.
pub fn binom(x: i64, j: i64) -> BigInt {
    if j < 0 {
        return BigInt::zero();
    }
    if j == 0 {
        return BigInt::one();
    }
    if x >= 0 && j > x {
        return BigInt::zero();
    }
    // Use symmetry for nonnegative x to keep the product short.
    let j = if x >= 0 && j > x - j { x - j } else { j };
    let mut acc = BigInt::one();
    for t in 0..j {
        acc *= BigInt::from(x - t);
        acc /= BigInt::from(t + 1);
    }
    acc
}

/// Cumulative binomial `sum_{i=0}^{r} C(n, i)`, the size of a radius-`r` Hamming ball.
pub fn binom_cum(n: u32, r: i64) -> BigInt {
    if r < 0 {
        return BigInt::zero();
    }
    if r >= i64::from(n) {
        return BigInt::one() << n;
    }
    let mut term = BigInt::one();
    let mut acc = BigInt::one();
    for i in 1..=r {
        term = term * BigInt::from(i64::from(n) - i + 1) / BigInt::from(i);
        acc += &term;
    }
    acc
}

/// Row `n` of Pascal's triangle, `C(n, 0..=n)`.
pub fn binom_row(n: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut term = BigInt::one();
    row.push(term.clone());
    for i in 1..=i64::from(n) {
        term = term * BigInt::from(i64::from(n) - i + 1) / BigInt::from(i);
        row.push(term.clone());
    }
    row
}

/// `2^e` as a rational.
pub fn pow2(e: u32) -> Rational {
    Rational::from_integer(BigInt::one() << e)
}

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Nearest `f64` of an exact rational; handles values whose numerator and
/// denominator individually overflow `f64`.
pub fn to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 {
        let n2 = (q.numer() >> q.denom().bits()).to_f64().unwrap_or(f64::INFINITY);
        return if q.is_negative() { -n2.abs() } else { n2.abs() };
    }
    n / d
}

/// Integer power of a rational.
pub fn rpow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Formats a rational as `"p/q"`; integers keep the explicit `/1`.
pub fn fmt_ratio(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"`, an integer, or an exact decimal such as `"0.375"`.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || !whole_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        return Ok(Rational::new(num, den));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Floor of a nonnegative rational as `i64`.
pub fn floor_i64(q: &Rational) -> i64 {
    q.numer().div_floor(q.denom()).to_i64().expect("floor fits in i64")
}

/// Ceiling of a rational as `i64`.
pub fn ceil_i64(q: &Rational) -> i64 {
    q.numer().div_ceil(q.denom()).to_i64().expect("ceil fits in i64")
}

/// Binary entropy `H(p)` in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!("binary entropy needs p in [0,1], got {p}")));
    }
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// A finite probability vector (nonnegative entries summing to one).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|p| p.is_nan() || *p < 0.0 || !p.is_finite()) {
            return Err(Error::Support(format!("negative or non-finite entry in {entries:?}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Support(format!("entries sum to {total}, not 1")));
        }
        Ok(ProbVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Relative entropy `D(q || p)` in bits.
pub fn relative_entropy(q: &ProbVector, p: &ProbVector) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::Support(format!("length mismatch: {} vs {}", q.len(), p.len())));
    }
    let mut d = 0.0;
    for (i, (&qi, &pi)) in q.0.iter().zip(&p.0).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::Support(format!("q({i}) = {qi} > 0 but p({i}) = 0")));
        }
        d += qi * (qi / pi).log2();
    }
    Ok(d)
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod serde_ratio {
    use super::{fmt_ratio, parse_ratio, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_ratio(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&fmt_ratio(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| parse_ratio(s).map_err(D::Error::custom)).collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(q) => s.serialize_some(&fmt_ratio(q)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let v = Option::<String>::deserialize(d)?;
            v.map(|s| parse_ratio(&s).map_err(D::Error::custom)).transpose()
        }
    }
}
