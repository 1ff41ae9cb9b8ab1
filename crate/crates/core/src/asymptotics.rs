//! Gaussian and hypercontractive bounds, large-deviation exponents, and
//! finite-n convergence diagnostics.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exactmath::{
    binary_entropy, binom, binom_cum, floor_i64, relative_entropy, rpow, serde_ratio, to_f64, ProbVector, Rational,
};
use crate::hypercube::{product_extend, Code};
use crate::stability::{stab_iid, stab_sphere};

const QUAD_TOL: f64 = 1e-13;
const QUAD_MAX_DEPTH: u32 = 48;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

/// Upper-`alpha` point of the standard normal: `P[Z > t] = alpha`.
pub fn normal_upper_quantile(alpha: f64) -> f64 {
    -Normal::standard().inverse_cdf(alpha)
}

/// `P[Z1 > t, Z2 > t]` for standard normals with correlation `rho`, where
/// `P[Z1 > t] = alpha`.
pub fn gaussian_quadrant(alpha: f64, rho: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(rho > -1.0 && rho < 1.0) {
        return Err(Error::Domain(format!("need 0 < alpha < 1 and |rho| < 1; got alpha={alpha}, rho={rho}")));
    }
    let t = normal_upper_quantile(alpha);
    let t2 = t * t;
    // d/d(rho) of the quadrant is the bivariate density at (t, t); with
    // rho = sin(theta) this becomes a smooth integrand
    let f = |theta: f64| {
        let s = 1.0 + theta.sin();
        if s <= 0.0 {
            0.0
        } else {
            (-t2 / s).exp()
        }
    };
    let v = alpha * alpha + integrate(f, 0.0, rho.asin(), QUAD_TOL) / (2.0 * PI);
    Ok(v.clamp(0.0, alpha))
}

fn check_unit_half(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) || !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::Domain(format!("need 0 < alpha, beta <= 1/2; got alpha={alpha}, beta={beta}")));
    }
    Ok(())
}

/// `alpha^(1/(1-beta))`.
pub fn small_set_bound(alpha: f64, beta: f64) -> Result<f64> {
    check_unit_half(alpha, beta)?;
    Ok(alpha.powf(1.0 / (1.0 - beta)))
}

/// Limit-level lower and upper bounds for odd and even radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HcBoundSet {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub odd_lower: f64,
    pub odd_upper: f64,
    pub even_sphere_lower: f64,
    pub even_sphere_upper: f64,
    pub even_ball_lower: f64,
    pub even_ball_upper: f64,
    /// `((1-beta)/2)^k` when `alpha = 2^-k`.
    pub subcube_lower: Option<f64>,
    /// `((1-beta)/2)^(k-1) / 2` when `alpha = 2^-k`.
    pub even_sphere_subcube_lower: Option<f64>,
}

impl HcBoundSet {
    /// `(name, lower, upper)` for each row.
    pub fn rows(&self) -> [(&'static str, f64, f64); 3] {
        [
            ("odd", self.odd_lower, self.odd_upper),
            ("even_sphere", self.even_sphere_lower, self.even_sphere_upper),
            ("even_ball", self.even_ball_lower, self.even_ball_upper),
        ]
    }
}

/// `k` with `alpha = 2^-k`, if any.
fn dyadic_exponent(alpha: f64) -> Option<i32> {
    let k = -alpha.log2();
    let kr = k.round();
    (kr >= 1.0 && (k - kr).abs() < 1e-12 && alpha == (-kr).exp2()).then_some(kr as i32)
}

pub fn hc_bounds(alpha: f64, beta: f64) -> Result<HcBoundSet> {
    check_unit_half(alpha, beta)?;
    let rho = 1.0 - 2.0 * beta;
    let lam = gaussian_quadrant(alpha, rho)?;
    // at alpha = 1/2 the doubled volume is the whole space
    let lam2 = if 2.0 * alpha >= 1.0 { 1.0 } else { gaussian_quadrant(2.0 * alpha, rho)? };
    let sse = small_set_bound(alpha, beta)?;
    let k = dyadic_exponent(alpha);
    let subcube_lower = k.map(|k| ((1.0 - beta) / 2.0).powi(k));
    let even_sphere_subcube_lower = k.map(|k| 0.5 * ((1.0 - beta) / 2.0).powi(k - 1));
    let odd_lower = subcube_lower.map_or(lam, |s| s.max(lam));
    Ok(HcBoundSet {
        alpha,
        beta,
        rho,
        odd_lower,
        odd_upper: sse,
        even_sphere_lower: even_sphere_subcube_lower.map_or(lam2 / 2.0, |s| s.max(lam2 / 2.0)),
        even_sphere_upper: 2.0 * sse,
        even_ball_lower: odd_lower,
        even_ball_upper: 2.0 * (1.0 - beta) * sse,
        subcube_lower,
        even_sphere_subcube_lower,
    })
}

fn check_sigma(sigma: f64, beta: f64, beta_max: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 0.5) || !(beta > 0.0 && beta < beta_max) {
        return Err(Error::Domain(format!(
            "need 0 < sigma < 1/2 and 0 < beta < {beta_max}; got sigma={sigma}, beta={beta}"
        )));
    }
    Ok(())
}

fn h(p: f64) -> f64 {
    binary_entropy(p).expect("argument checked to lie in [0, 1]")
}

/// `D((1-s-t/2, t/2, t/2, s-t/2) || ((1-b)/2, b/2, b/2, (1-b)/2))` in bits.
pub fn coupling_divergence(sigma: f64, theta: f64, beta: f64) -> Result<f64> {
    let q = ProbVector::new(vec![1.0 - sigma - theta / 2.0, theta / 2.0, theta / 2.0, sigma - theta / 2.0])?;
    let p = ProbVector::new(vec![(1.0 - beta) / 2.0, beta / 2.0, beta / 2.0, (1.0 - beta) / 2.0])?;
    relative_entropy(&q, &p)
}

/// Sphere-noise exponent at volume `2^{n H(sigma)}` and radius `beta n`.
pub fn ks_sphere_exponent(sigma: f64, beta: f64) -> Result<f64> {
    check_sigma(sigma, beta, 1.0)?;
    if beta > 2.0 * sigma * (1.0 - sigma) {
        return Ok(0.0);
    }
    Ok(h(sigma) - sigma * h(beta / (2.0 * sigma)) - (1.0 - sigma) * h(beta / (2.0 * (1.0 - sigma))))
}

/// Ball-noise exponent at volume `2^{n H(sigma)}` and radius `beta n`.
pub fn ks_ball_exponent(sigma: f64, beta: f64) -> Result<f64> {
    check_sigma(sigma, beta, 1.0)?;
    if beta <= 2.0 * sigma * (1.0 - sigma) {
        coupling_divergence(sigma, beta, beta)
    } else {
        Ok(1.0 + h(beta.min(0.5)) - 2.0 * h(sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IidExponent {
    pub value: f64,
    pub theta_star: f64,
}

/// Minimum relative entropy over couplings with `(1-sigma, sigma)`
/// marginals against the `beta`-flip source, and its minimizer.
pub fn ks_iid_exponent(sigma: f64, beta: f64) -> Result<IidExponent> {
    check_sigma(sigma, beta, 0.5 + f64::EPSILON)?;
    let s = sigma * (1.0 - sigma);
    let kappa = ((1.0 - beta) / beta).powi(2);
    // (sqrt(1 + 4(kappa-1)s) - 1)/(kappa-1), rationalized so kappa -> 1 is smooth
    let theta_star = 4.0 * s / ((1.0 + 4.0 * (kappa - 1.0) * s).sqrt() + 1.0);
    Ok(IidExponent { value: coupling_divergence(sigma, theta_star, beta)?, theta_star })
}

/// `C(n,<=r)/C(n,r)` against its limit, plus a few entries of the
/// `C(n-k, r-i)/C(n, r) -> beta^i (1-beta)^(k-i)` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereBallRatioReport {
    pub n: u32,
    pub r: u32,
    #[serde(with = "serde_ratio")]
    pub ratio: Rational,
    /// `sum_{j<=r} (r/(n-r))^j`.
    #[serde(with = "serde_ratio")]
    pub geometric_sum: Rational,
    /// `(1-beta)/(1-2beta)`.
    pub limit: f64,
    pub ratio_le_geometric_sum: bool,
    pub shifted: Vec<ShiftedRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedRatio {
    pub k: u32,
    pub i: u32,
    pub value: f64,
    pub limit: f64,
}

pub const SHIFTED_RATIO_MAX_K: u32 = 3;

pub fn sphere_ball_ratio_diagnostics(n: u32, r: u32) -> Result<SphereBallRatioReport> {
    if r < 1 || 2 * r >= n {
        return Err(Error::Domain(format!("need 1 <= r < n/2; got n={n}, r={r}")));
    }
    let (ni, ri) = (i64::from(n), i64::from(r));
    let cnr = binom(ni, ri);
    let ratio = Rational::new(binom_cum(n, ri), cnr.clone());
    // sum_{j<=r} a^j b^(r-j) / b^r with a = r < b = n - r
    let (a, b) = (BigInt::from(r), BigInt::from(n - r));
    let num = (num_traits::pow(b.clone(), r as usize + 1) - num_traits::pow(a.clone(), r as usize + 1)) / (&b - &a);
    let geometric_sum = Rational::new(num, num_traits::pow(b, r as usize));
    let beta = f64::from(r) / f64::from(n);
    let mut shifted = Vec::new();
    for k in 1..=SHIFTED_RATIO_MAX_K.min(n) {
        for i in 0..=k.min(r) {
            let v = Rational::new(binom(ni - i64::from(k), ri - i64::from(i)), cnr.clone());
            shifted.push(ShiftedRatio {
                k,
                i,
                value: to_f64(&v),
                limit: beta.powi(i as i32) * (1.0 - beta).powi((k - i) as i32),
            });
        }
    }
    Ok(SphereBallRatioReport {
        n,
        r,
        ratio_le_geometric_sum: ratio <= geometric_sum,
        ratio,
        geometric_sum,
        limit: (1.0 - beta) / (1.0 - 2.0 * beta),
        shifted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitStep {
    pub k: u32,
    pub dimension: u32,
    pub radius: u32,
    #[serde(with = "serde_ratio")]
    pub sstab: Rational,
    pub sstab_f64: f64,
}

/// Sphere stability of `c x {-1,1}^k` at odd radii near `(n+k) beta`
/// beside `Stab_beta(c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConstructionReport {
    pub n: u32,
    #[serde(with = "serde_ratio")]
    pub beta: Rational,
    #[serde(with = "serde_ratio")]
    pub stab_iid: Rational,
    pub stab_iid_f64: f64,
    pub steps: Vec<LimitStep>,
    /// `"below"`, `"above"` or `"mixed"`: where the steps sit relative to `stab_iid`.
    pub side: &'static str,
}

pub fn limit_construction_report(c: &Code, beta: &Rational, k_steps: &[u32]) -> Result<LimitConstructionReport> {
    if *beta <= Rational::zero() || *beta > Rational::new(1.into(), 2.into()) {
        return Err(Error::Domain(format!("need 0 < beta <= 1/2; got {beta}")));
    }
    let target = stab_iid(c, beta)?.value;
    let mut steps = Vec::with_capacity(k_steps.len());
    for &k in k_steps {
        let b = product_extend(c, k)?;
        let dim = b.n();
        let half = Rational::from_integer(dim.into()) * beta / Rational::from_integer(2.into());
        let radius = (2 * floor_i64(&half) + 1) as u32;
        if radius > dim {
            return Err(Error::Domain(format!("radius {radius} exceeds dimension {dim}")));
        }
        let sstab = stab_sphere(&b, radius)?.value;
        steps.push(LimitStep { k, dimension: dim, radius, sstab_f64: to_f64(&sstab), sstab });
    }
    let below = steps.iter().all(|s| s.sstab <= target);
    let above = steps.iter().all(|s| s.sstab >= target);
    let side = match (below, above) {
        (true, _) => "below",
        (false, true) => "above",
        _ => "mixed",
    };
    Ok(LimitConstructionReport {
        n: c.n(),
        beta: beta.clone(),
        stab_iid_f64: to_f64(&target),
        stab_iid: target,
        steps,
        side,
    })
}

/// `((1-beta)/2)^k`, the iid stability of a codimension-`k` subcube.
pub fn subcube_iid_value(beta: &Rational, k: u32) -> Rational {
    rpow(&((Rational::one() - beta) / Rational::from_integer(2.into())), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::ratio;
    use crate::hypercube::subcube;

    /// Owen's T by composite Gauss-Legendre (5 nodes on 2000 panels).
    fn owens_t(h: f64, a: f64) -> f64 {
        let nodes = [
            (0.0, 0.568_888_888_888_888_9),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let f = |x: f64| (-h * h * (1.0 + x * x) / 2.0).exp() / (1.0 + x * x);
        let panels = 2000;
        let w = a / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * w;
            for &(x, wt) in &nodes {
                s += wt * f(mid + x * w / 2.0) * w / 2.0;
            }
        }
        s / (2.0 * PI)
    }

    fn quadrant_oracle(alpha: f64, rho: f64) -> f64 {
        let t = normal_upper_quantile(alpha);
        alpha - 2.0 * owens_t(t, ((1.0 - rho) / (1.0 + rho)).sqrt())
    }

    #[test]
    fn quadrant_examples() {
        for alpha in [0.01, 0.1, 0.25, 0.5, 0.7] {
            assert!((gaussian_quadrant(alpha, 0.0).unwrap() - alpha * alpha).abs() < 1e-12);
        }
        for i in -9..=9 {
            let rho = f64::from(i) / 10.0;
            let exact = 0.25 + rho.asin() / (2.0 * PI);
            assert!((gaussian_quadrant(0.5, rho).unwrap() - exact).abs() < 1e-10);
        }
        for alpha in [0.001, 0.05, 0.2, 0.4] {
            for rho in [-0.95, -0.5, 0.1, 0.6, 0.95] {
                let v = gaussian_quadrant(alpha, rho).unwrap();
                assert!((v - quadrant_oracle(alpha, rho)).abs() < 1e-10, "alpha={alpha} rho={rho}");
            }
        }
        assert!((gaussian_quadrant(0.3, 1.0 - 1e-12).unwrap() - 0.3).abs() < 1e-5);
        assert!(gaussian_quadrant(0.0, 0.1).is_err());
        assert!(gaussian_quadrant(0.2, 1.0).is_err());
    }

    #[test]
    fn quadrant_is_monotone_and_below_alpha() {
        for alpha in [0.02, 0.2, 0.5] {
            let mut prev = 0.0;
            for i in -19..=19 {
                let v = gaussian_quadrant(alpha, f64::from(i) / 20.0).unwrap();
                assert!(v >= prev - 1e-12 && v <= alpha + 1e-9);
                prev = v;
            }
        }
    }

    #[test]
    fn small_set_examples() {
        assert_eq!(small_set_bound(0.5, 0.5).unwrap(), 0.25);
        assert_eq!(small_set_bound(0.25, 0.5).unwrap(), 0.0625);
        assert!((small_set_bound(0.5, 0.3).unwrap() - 0.5f64.powf(1.0 / 0.7)).abs() < 1e-15);
        assert!(small_set_bound(0.6, 0.3).is_err());
    }

    #[test]
    fn hc_bound_examples() {
        for beta in [0.1, 0.3, 0.5] {
            let b = hc_bounds(0.5, beta).unwrap();
            let known = (1.0 - beta) / 2.0;
            assert!((b.subcube_lower.unwrap() - known).abs() < 1e-15);
            assert!(b.odd_lower <= known + 1e-12 && known <= b.odd_upper + 1e-12);
            let q = hc_bounds(0.25, beta).unwrap();
            assert!((q.subcube_lower.unwrap() - known * known).abs() < 1e-15);
        }
        for ai in 1..=10 {
            for bi in 1..=10 {
                let b = hc_bounds(f64::from(ai) / 20.0, f64::from(bi) / 20.0).unwrap();
                for (name, lo, hi) in b.rows() {
                    assert!(lo <= hi + 1e-9, "{name}: {lo} > {hi} at {b:?}");
                    assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
                }
            }
        }
        assert_eq!(hc_bounds(0.3, 0.2).unwrap().subcube_lower, None);
    }

    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let x = (a + b) / 2.0;
        (x, f(x))
    }

    #[test]
    fn exponent_examples() {
        for si in 1..10 {
            let sigma = f64::from(si) / 20.0;
            let edge = 2.0 * sigma * (1.0 - sigma);
            assert!(ks_sphere_exponent(sigma, edge).unwrap().abs() < 1e-12);
            let d = ks_ball_exponent(sigma, edge).unwrap();
            let other = 1.0 + h(edge.min(0.5)) - 2.0 * h(sigma);
            assert!((d - other).abs() < 1e-10);
            let mut prev = f64::INFINITY;
            for bi in 1..40 {
                let beta = f64::from(bi) / 40.0;
                let v = ks_sphere_exponent(sigma, beta).unwrap();
                assert!(v >= -1e-15 && v <= prev + 1e-12);
                prev = v;
            }
            for bi in 1..10 {
                let beta = f64::from(bi) / 20.0;
                let e = ks_iid_exponent(sigma, beta).unwrap();
                let (arg, min) = golden_min(|t| coupling_divergence(sigma, t, beta).unwrap(), 0.0, 2.0 * sigma);
                assert!((e.theta_star - arg).abs() < 1e-6, "sigma={sigma} beta={beta}");
                assert!((e.value - min).abs() < 1e-8);
                if beta <= edge {
                    assert!(e.theta_star < beta);
                    assert!(e.value < ks_ball_exponent(sigma, beta).unwrap());
                }
            }
            let e = ks_iid_exponent(sigma, 0.5).unwrap();
            assert!((e.theta_star - edge).abs() < 1e-15);
        }
        assert!(ks_iid_exponent(0.2, 0.6).is_err());
        assert!(ks_ball_exponent(0.5, 0.2).is_err());
    }

    #[test]
    fn ratio_examples() {
        let r = sphere_ball_ratio_diagnostics(4, 1).unwrap();
        assert_eq!(r.ratio, ratio(5, 4));
        assert_eq!(r.geometric_sum, ratio(4, 3));
        assert!(r.ratio_le_geometric_sum);
        let big = sphere_ball_ratio_diagnostics(1000, 300).unwrap();
        // exact value 1.7435569359808..., an O(1/n) gap below 7/4
        assert!((to_f64(&big.ratio) - 1.743_556_935_980_862).abs() < 1e-12);
        assert!((big.limit - 1.75).abs() < 1e-15 && big.limit - to_f64(&big.ratio) < 7e-3);
        assert!(big.ratio_le_geometric_sum);
        let s = big.shifted.iter().find(|s| s.k == 1 && s.i == 0).unwrap();
        assert!((s.value - 0.7).abs() < 1e-15);
        for n in (3..400u32).step_by(7) {
            for r in 1..n.div_ceil(2) {
                assert!(sphere_ball_ratio_diagnostics(n, r).unwrap().ratio_le_geometric_sum);
            }
        }
        assert!(sphere_ball_ratio_diagnostics(4, 2).is_err());
    }

    #[test]
    fn limit_construction_examples() {
        let c = subcube(3, 1).unwrap();
        let rep = limit_construction_report(&c, &ratio(1, 3), &[3, 9, 15]).unwrap();
        assert_eq!(rep.stab_iid, ratio(1, 3));
        let got: Vec<Rational> = rep.steps.iter().map(|s| s.sstab.clone()).collect();
        assert_eq!(got, vec![ratio(1, 4), ratio(7, 24), ratio(11, 36)]);
        assert_eq!(rep.side, "below");
        let full = Code::from_predicate(4, |_| true).unwrap();
        let rep = limit_construction_report(&full, &ratio(1, 4), &[2, 6]).unwrap();
        assert!(rep.steps.iter().all(|s| s.sstab == Rational::one()));
        let pt = Code::from_indices(3, [0]).unwrap();
        let rep = limit_construction_report(&pt, &ratio(1, 4), &[1, 5]).unwrap();
        assert_eq!(rep.stab_iid, ratio(27, 512));
        assert!(limit_construction_report(&c, &ratio(1, 3), &[22]).is_err());
        assert_eq!(subcube_iid_value(&ratio(1, 3), 2), ratio(1, 9));
    }
}
