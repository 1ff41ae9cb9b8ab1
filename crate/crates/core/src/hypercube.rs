//! Codes in `{-1,1}^n`, distance distributions and Fourier weights.
//!
//! Point encoding: index `j` stands for `x` with `x_i = (-1)^{b}` where `b` is
//! bit `n - i` of `j`, so coordinate 1 is the most significant bit. Then the
//! all-ones point is index 0, `d_H(x, 1) = popcount(j)`, and the lexicographic
//! order of points (with `1 < -1` per coordinate) is the index order.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactmath::{binom_cum, ratio, serde_ratio, Rational};
use crate::krawtchouk::shared_table;

/// Largest supported dimension for explicit codes.
pub const MAX_CODE_DIM: u32 = 24;

/// Largest dimension at which distance distributions use the direct pair count.
pub const DIRECT_PAIR_MAX_DIM: u32 = 14;

/// A subset of `{-1,1}^n` stored as a membership bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    n: u32,
    bits: Vec<u64>,
    size: u64,
}

fn check_dim(n: u32) -> Result<()> {
    if n > MAX_CODE_DIM {
        return Err(Error::Domain(format!("code dimension {n} exceeds {MAX_CODE_DIM}")));
    }
    Ok(())
}

impl Code {
    /// The empty code in dimension `n`.
    pub fn empty(n: u32) -> Result<Self> {
        check_dim(n)?;
        let words = (1usize << n).div_ceil(64);
        Ok(Code { n, bits: vec![0; words], size: 0 })
    }

    /// Code from point indices; duplicates are ignored.
    pub fn from_indices(n: u32, indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut c = Code::empty(n)?;
        let len = 1u64 << n;
        for j in indices {
            if u64::from(j) >= len {
                return Err(Error::Domain(format!("point index {j} out of range for n = {n}")));
            }
            c.insert(j);
        }
        Ok(c)
    }

    /// Code of all indices satisfying `keep`.
    pub fn from_predicate(n: u32, keep: impl Fn(u32) -> bool) -> Result<Self> {
        let mut c = Code::empty(n)?;
        for j in 0..(1u32 << n) {
            if keep(j) {
                c.insert(j);
            }
        }
        Ok(c)
    }

    fn insert(&mut self, j: u32) {
        let (w, b) = ((j / 64) as usize, j % 64);
        if self.bits[w] & (1 << b) == 0 {
            self.bits[w] |= 1 << b;
            self.size += 1;
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of points `M`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `alpha = M / 2^n`.
    pub fn alpha(&self) -> Rational {
        ratio(self.size, BigInt::from(1u64 << self.n))
    }

    pub fn contains(&self, j: u32) -> bool {
        u64::from(j) < (1u64 << self.n) && self.bits[(j / 64) as usize] & (1 << (j % 64)) != 0
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.size as usize);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let b = rest.trailing_zeros();
                out.push(w as u32 * 64 + b);
                rest &= rest - 1;
            }
        }
        out
    }

    /// Indicator as a dense `0/1` vector of length `2^n`.
    pub fn indicator(&self) -> Vec<i32> {
        (0..(1u32 << self.n)).map(|j| i32::from(self.contains(j))).collect()
    }

    /// Membership bitmap as lowercase hex: byte `b` holds indices `8b..8b+8`,
    /// least significant bit first.
    pub fn to_bitmap_hex(&self) -> String {
        let nbytes = (1usize << self.n).div_ceil(8);
        let mut s = String::with_capacity(2 * nbytes);
        for b in 0..nbytes {
            let byte = (self.bits[b / 8] >> (8 * (b % 8))) & 0xff;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_bitmap_hex(n: u32, hex: &str) -> Result<Self> {
        let mut c = Code::empty(n)?;
        let nbytes = (1usize << n).div_ceil(8);
        if hex.len() != 2 * nbytes || !hex.is_ascii() {
            return Err(Error::Domain(format!("bitmap for n = {n} needs {} hex digits", 2 * nbytes)));
        }
        for b in 0..nbytes {
            let byte = u8::from_str_radix(&hex[2 * b..2 * b + 2], 16)
                .map_err(|e| Error::Domain(format!("bad bitmap hex: {e}")))?;
            for t in 0..8 {
                let j = (8 * b + t) as u32;
                if byte & (1 << t) != 0 {
                    if u64::from(j) >= 1u64 << n {
                        return Err(Error::Domain("bitmap sets a bit beyond 2^n".into()));
                    }
                    c.insert(j);
                }
            }
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    n: u32,
    bitmap_hex: String,
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeJson { n: self.n, bitmap_hex: self.to_bitmap_hex() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CodeJson::deserialize(d)?;
        Code::from_bitmap_hex(j.n, &j.bitmap_hex).map_err(serde::de::Error::custom)
    }
}

/// The `±1` coordinates of point `j`.
pub fn point(n: u32, j: u32) -> Vec<i8> {
    (1..=n).map(|i| if (j >> (n - i)) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Index of a `±1` vector.
pub fn index_of(x: &[i8]) -> Result<u32> {
    check_dim(x.len() as u32)?;
    x.iter().try_fold(0u32, |acc, &v| match v {
        1 => Ok(acc << 1),
        -1 => Ok((acc << 1) | 1),
        _ => Err(Error::Domain(format!("coordinate {v} is not ±1"))),
    })
}

/// `{1}^k x {-1,1}^(n-k)`.
pub fn subcube(n: u32, k: u32) -> Result<Code> {
    if k > n {
        return Err(Error::Domain(format!("subcube codimension {k} exceeds n = {n}")));
    }
    check_dim(n)?;
    Code::from_indices(n, 0..(1u32 << (n - k)))
}

/// Points within distance `radius` of the all-ones point.
pub fn hamming_ball(n: u32, radius: u32) -> Result<Code> {
    if radius > n {
        return Err(Error::Domain(format!("radius {radius} exceeds n = {n}")));
    }
    Code::from_predicate(n, |j| j.count_ones() <= radius)
}

/// Points at distance exactly `radius` from the all-ones point.
pub fn hamming_sphere(n: u32, radius: u32) -> Result<Code> {
    if radius > n {
        return Err(Error::Domain(format!("radius {radius} exceeds n = {n}")));
    }
    Code::from_predicate(n, |j| j.count_ones() == radius)
}

/// First `m` points in lexicographic order, i.e. indices `[0, m)`.
pub fn lex_segment(n: u32, m: u64) -> Result<Code> {
    check_dim(n)?;
    if m > 1u64 << n {
        return Err(Error::Domain(format!("lex segment size {m} exceeds 2^{n}")));
    }
    Code::from_indices(n, 0..m as u32)
}

/// Members at even distance from the all-ones point.
pub fn even_part(c: &Code) -> Code {
    Code::from_indices(c.n, c.indices().into_iter().filter(|j| j.count_ones() % 2 == 0))
        .expect("subset of a valid code")
}

/// Members at odd distance from the all-ones point.
pub fn odd_part(c: &Code) -> Code {
    Code::from_indices(c.n, c.indices().into_iter().filter(|j| j.count_ones() % 2 == 1))
        .expect("subset of a valid code")
}

/// `c x {-1,1}^k` on `n + k` coordinates; the new coordinates come last.
pub fn product_extend(c: &Code, k: u32) -> Result<Code> {
    let n2 = c.n + k;
    if n2 > MAX_CODE_DIM {
        return Err(Error::Domain(format!("product dimension {n2} exceeds {MAX_CODE_DIM}")));
    }
    let mut out = Code::empty(n2)?;
    for a in c.indices() {
        for b in 0..(1u32 << k) {
            out.insert((a << k) | b);
        }
    }
    Ok(out)
}

/// `P(0..=n)` with `P(i)` the fraction of ordered pairs at distance `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceDistribution {
    pub n: u32,
    #[serde(with = "serde_ratio::vec")]
    pub entries: Vec<Rational>,
}

/// `Q(k) = W_k / alpha^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualDistribution {
    pub n: u32,
    #[serde(with = "serde_ratio::vec")]
    pub entries: Vec<Rational>,
}

/// Fourier weights by level, optionally with the raw transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FourierSpectrum {
    pub n: u32,
    #[serde(with = "serde_ratio::vec")]
    pub weights: Vec<Rational>,
    /// `2^n f_S` indexed by `S` (same bit convention as points).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<i32>>,
}

/// In-place Walsh–Hadamard transform: `h[S] = sum_j v[j] (-1)^{|S & j|}`.
pub fn walsh_hadamard(v: &mut [i32]) {
    let len = v.len();
    assert!(len.is_power_of_two(), "transform length must be a power of two");
    let mut h = 1;
    while h < len {
        v.par_chunks_mut(2 * h).for_each(|block| {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        });
        h *= 2;
    }
}

/// `2^n f_S` for every `S`.
pub fn fourier_transform(c: &Code) -> Vec<i32> {
    let mut v = c.indicator();
    walsh_hadamard(&mut v);
    v
}

fn level_sums(n: u32, h: &[i32]) -> Vec<i128> {
    h.par_iter()
        .enumerate()
        .fold(
            || vec![0i128; n as usize + 1],
            |mut acc, (s, &x)| {
                acc[s.count_ones() as usize] += i128::from(x) * i128::from(x);
                acc
            },
        )
        .reduce(
            || vec![0i128; n as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// `4^n W_k = sum_{|S| = k} (2^n f_S)^2` for each level `k`.
pub fn weight_numerators(c: &Code) -> Vec<i128> {
    level_sums(c.n, &fourier_transform(c))
}

/// `sum_{|S| = k} (2^n f_S)(2^n g_S)` for two codes of equal dimension.
pub fn cross_weight_numerators(a: &Code, b: &Code) -> Result<Vec<i128>> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    let (fa, fb) = (fourier_transform(a), fourier_transform(b));
    let mut acc = vec![0i128; a.n as usize + 1];
    for (s, (x, y)) in fa.iter().zip(&fb).enumerate() {
        acc[s.count_ones() as usize] += i128::from(*x) * i128::from(*y);
    }
    Ok(acc)
}

fn numerators_to_weights(n: u32, num: &[i128]) -> Vec<Rational> {
    let den = BigInt::from(1u8) << (2 * n as usize);
    num.iter().map(|&s| Rational::new(BigInt::from(s), den.clone())).collect()
}

/// Exact level weights `W_k`.
pub fn fourier_weights(c: &Code) -> FourierSpectrum {
    FourierSpectrum { n: c.n, weights: numerators_to_weights(c.n, &weight_numerators(c)), coefficients: None }
}

/// Level weights together with the full coefficient vector.
pub fn fourier_spectrum(c: &Code) -> FourierSpectrum {
    let h = fourier_transform(c);
    let weights = numerators_to_weights(c.n, &level_sums(c.n, &h));
    FourierSpectrum { n: c.n, weights, coefficients: Some(h) }
}

/// Ordered pair counts `N_i = M^2 P(i)` by direct enumeration.
pub fn pair_counts_direct(c: &Code) -> Vec<u64> {
    let idx = c.indices();
    let n = c.n as usize;
    idx.par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut acc, &x| {
                for &y in &idx {
                    acc[(x ^ y).count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Pair counts between two codes, `N_d = #{(x, y) in A x B : d(x, y) = d}`,
/// from level sums `L_k = sum_{|S| = k} (2^n f_S)(2^n g_S)`.
pub fn pair_counts_from_levels(n: u32, levels: &[i128]) -> Result<Vec<u64>> {
    let t = shared_table(n);
    let den = BigInt::from(1u8) << n as usize;
    (0..=n)
        .map(|d| {
            let s: BigInt = levels.iter().enumerate().map(|(k, &l)| BigInt::from(l) * t.get(d, k as u32)).sum();
            if !(&s % &den).is_zero() || s < BigInt::zero() {
                return Err(Error::Inconsistent(format!("spectral pair count at distance {d} is {s}/2^{n}")));
            }
            (s / &den).to_u64().ok_or_else(|| Error::Inconsistent("pair count overflow".into()))
        })
        .collect()
}

/// Ordered pair counts via the Fourier transform.
pub fn pair_counts_spectral(c: &Code) -> Result<Vec<u64>> {
    pair_counts_from_levels(c.n, &weight_numerators(c))
}

/// Ordered pair counts, choosing the direct or spectral path by dimension.
pub fn pair_counts(c: &Code) -> Result<Vec<u64>> {
    if c.is_empty() {
        return Err(Error::EmptyCode);
    }
    let counts = if c.n <= DIRECT_PAIR_MAX_DIM { pair_counts_direct(c) } else { pair_counts_spectral(c)? };
    let total: u128 = counts.iter().map(|&x| u128::from(x)).sum();
    if total != u128::from(c.size) * u128::from(c.size) || counts[0] != c.size {
        return Err(Error::Inconsistent(format!("pair counts {counts:?} do not match M = {}", c.size)));
    }
    Ok(counts)
}

fn counts_to_distribution(n: u32, m: u64, counts: &[u64]) -> DistanceDistribution {
    let m2 = BigInt::from(m) * BigInt::from(m);
    DistanceDistribution { n, entries: counts.iter().map(|&x| Rational::new(BigInt::from(x), m2.clone())).collect() }
}

/// Exact distance distribution.
pub fn distance_distribution(c: &Code) -> Result<DistanceDistribution> {
    Ok(counts_to_distribution(c.n, c.size, &pair_counts(c)?))
}

/// Distance distribution through the dual distribution and the inverse transform.
pub fn distance_distribution_spectral(c: &Code) -> Result<DistanceDistribution> {
    Ok(macwilliams_inverse(&dual_distribution(c)?))
}

/// `Q(k) = W_k / alpha^2`.
pub fn dual_distribution(c: &Code) -> Result<DualDistribution> {
    if c.is_empty() {
        return Err(Error::EmptyCode);
    }
    let m2 = BigInt::from(c.size) * BigInt::from(c.size);
    let entries = weight_numerators(c).into_iter().map(|s| Rational::new(BigInt::from(s), m2.clone())).collect();
    Ok(DualDistribution { n: c.n, entries })
}

/// `Q(k) = sum_i P(i) K_k(i)`.
pub fn macwilliams_forward(p: &DistanceDistribution) -> DualDistribution {
    let n = p.n;
    let t = shared_table(n);
    let entries = (0..=n)
        .map(|k| p.entries.iter().enumerate().map(|(i, pi)| pi * Rational::from(t.get(k, i as u32).clone())).sum())
        .collect();
    DualDistribution { n, entries }
}

/// `P(k) = 2^{-n} sum_i Q(i) K_k(i)`.
pub fn macwilliams_inverse(q: &DualDistribution) -> DistanceDistribution {
    let n = q.n;
    let t = shared_table(n);
    let den = Rational::from(BigInt::from(1u8) << n as usize);
    let entries = (0..=n)
        .map(|k| {
            let s: Rational =
                q.entries.iter().enumerate().map(|(i, qi)| qi * Rational::from(t.get(k, i as u32).clone())).sum();
            s / &den
        })
        .collect();
    DistanceDistribution { n, entries }
}

/// `(|boundary A|, e(A))` in the graph joining points at distance `1..=r`.
///
/// `e(A)` comes from pair counts; the boundary is counted directly when that
/// is cheap, and the regularity identity `2e + |boundary| = (C(n,<=r) - 1) M`
/// is checked.
pub fn edge_counts(c: &Code, r: u32) -> Result<(BigInt, BigInt)> {
    if r == 0 || r > c.n {
        return Err(Error::Domain(format!("edge radius must satisfy 1 <= r <= n; got r={r} n={}", c.n)));
    }
    let counts = pair_counts(c)?;
    let inner: u64 = counts[1..=r as usize].iter().sum();
    let internal = BigInt::from(inner / 2);
    let degree: BigInt = binom_cum(c.n, i64::from(r)) - 1;
    let expected_boundary = &degree * BigInt::from(c.size) - BigInt::from(inner);
    let cost = degree.to_f64().unwrap_or(f64::INFINITY) * c.size as f64;
    if cost <= (1u64 << 27) as f64 {
        let offsets: Vec<u32> = (1..(1u32 << c.n)).filter(|z| z.count_ones() <= r).collect();
        let direct: u64 =
            c.indices().par_iter().map(|&x| offsets.iter().filter(|&&z| !c.contains(x ^ z)).count() as u64).sum();
        let direct = BigInt::from(direct);
        if direct != expected_boundary {
            return Err(Error::Inconsistent(format!(
                "regularity identity fails: boundary {direct}, internal {internal}, degree {degree}"
            )));
        }
    }
    Ok((expected_boundary, internal))
}

/// `sum_{i <= r} P(i)`.
pub fn cdf_distance(c: &Code, r: u32) -> Result<Rational> {
    if r > c.n {
        return Err(Error::Domain(format!("radius {r} exceeds n = {}", c.n)));
    }
    let p = distance_distribution(c)?;
    Ok(p.entries[..=r as usize].iter().sum())
}
