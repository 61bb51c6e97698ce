//! Fourier-space evaluation of the third variation of the solution map at
//! zero, for two-bump data, and the norm-inflation experiment built on it.
//!
//! For `u_t = i∂²ₓu + iα u²u*` and `u(0) = εφ`,
//!
//! ```text
//! ∂³_ε û(t,ξ)|_{ε=0} = 6α e^{-itξ²} (2π)^{-2} ∬ K(t,P) φ̂(ξ₁) φ̂(ξ₂) φ̂(ξ−ξ₁−ξ₂) dξ₁dξ₂,
//! K(t,P) = (e^{2itP} − 1)/(2P),   P = (ξ−ξ₁)(ξ−ξ₂).
//! ```
//!
//! For `iα u u* ∂ₓu` the middle factor carries an extra `iξ₂`. On
//! `ξ ∈ [1/2, 1]` only the frequency triples (A, A, B), (A, B, A), (B, A, A)
//! contribute, with `A = k + [1/8, 1/4]` and `B = −2k + [1/4, 1/2]`.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::TwoBumpData;
use super::report::{ExperimentReport, ReportBuilder};
use crate::error::{Error, Result};

/// Below this `|2tP|` the kernel is replaced by its Taylor series.
pub const KERNEL_SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InflationEquation {
    Nnls,
    Ndnls,
}

impl fmt::Display for InflationEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Nnls => "nnls",
            Self::Ndnls => "ndnls",
        })
    }
}

impl FromStr for InflationEquation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nnls" => Ok(Self::Nnls),
            "ndnls" => Ok(Self::Ndnls),
            _ => Err(Error::InvalidParameter(format!(
                "inflation is defined for nnls and ndnls, got '{s}'"
            ))),
        }
    }
}

/// `(e^{2itP} − 1)/(2P)`, with limit `it` at `P = 0`.
pub fn kernel(t: f64, p: f64) -> Complex64 {
    let z = 2.0 * t * p;
    if z.abs() < KERNEL_SERIES_THRESHOLD {
        let iz = Complex64::new(0.0, z);
        Complex64::new(0.0, t) * (1.0 + iz / 2.0 + iz * iz / 6.0)
    } else {
        // e^{iz} − 1 written without cancellation
        Complex64::new(-2.0 * (0.5 * z).sin().powi(2), z.sin()) / (2.0 * p)
    }
}

/// The combination `K(P) − 2K(P')`, `P' = (ξ−ξ₁)(ξ₁+ξ₂)`, used for the lower
/// bound `−Im ϱ ≥ t/2` on the (A, A, B) support.
pub fn rho(t: f64, xi: f64, xi1: f64, xi2: f64) -> Complex64 {
    kernel(t, (xi - xi1) * (xi - xi2)) - 2.0 * kernel(t, (xi - xi1) * (xi1 + xi2))
}

/// Gauss–Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(nodes: usize) -> Result<Self> {
        let n = NonZeroUsize::new(nodes)
            .filter(|n| n.get() >= 2)
            .ok_or_else(|| Error::InvalidParameter("quadrature needs at least 2 nodes".into()))?;
        let gl = GaussLegendre::new(n);
        Ok(Self {
            pairs: gl.as_node_weight_pairs().to_vec(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.pairs.iter().map(move |&(x, w)| (m + h * x, h * w))
    }

    /// Composite rule over `[a, b]` split at the given interior points.
    pub fn on_pieces(&self, a: f64, b: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
        let mut edges: Vec<f64> = std::iter::once(a)
            .chain(cuts.iter().copied().filter(|&c| c > a && c < b))
            .chain(std::iter::once(b))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges
            .windows(2)
            .flat_map(|w| self.on(w[0], w[1]).collect::<Vec<_>>())
            .collect()
    }
}

type Interval = (f64, f64);

/// `∬ f(ξ₁, ξ₂)` over `ξ₁ ∈ s1, ξ₂ ∈ s2, ξ − ξ₁ − ξ₂ ∈ s3`.
fn integrate_triple(
    rule: &Rule,
    xi: f64,
    s1: Interval,
    s2: Interval,
    s3: Interval,
    mut f: impl FnMut(f64, f64) -> Complex64,
) -> Complex64 {
    // ξ₁ range on which the ξ₂ slice is non-empty
    let a = s1.0.max(xi - s2.1 - s3.1);
    let b = s1.1.min(xi - s2.0 - s3.0);
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let cuts = [
        xi - s2.0 - s3.1,
        xi - s2.0 - s3.0,
        xi - s2.1 - s3.1,
        xi - s2.1 - s3.0,
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for (x1, w1) in rule.on_pieces(a, b, &cuts) {
        let lo = s2.0.max(xi - x1 - s3.1);
        let hi = s2.1.min(xi - x1 - s3.0);
        if hi <= lo {
            continue;
        }
        for (x2, w2) in rule.on(lo, hi) {
            total += f(x1, x2) * (w1 * w2);
        }
    }
    total
}

/// `∂³_ε û(t, ξ)` at one `ξ ∈ [1/2, 1]`.
pub fn third_derivative_at(
    phi: &TwoBumpData,
    t: f64,
    equation: InflationEquation,
    alpha: f64,
    rule: &Rule,
    xi: f64,
) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (a, b) = (phi.upper(), phi.lower());
    let factor = |x2: f64| match equation {
        InflationEquation::Nnls => Complex64::new(1.0, 0.0),
        InflationEquation::Ndnls => Complex64::new(0.0, x2),
    };
    let integrand = |x1: f64, x2: f64| kernel(t, (xi - x1) * (xi - x2)) * factor(x2);
    let sum = integrate_triple(rule, xi, a, a, b, integrand)
        + integrate_triple(rule, xi, a, b, a, integrand)
        + integrate_triple(rule, xi, b, a, a, integrand);
    let h = phi.height();
    sum * (6.0 * alpha * h * h * h / (4.0 * PI * PI)) * Complex64::from_polar(1.0, -t * xi * xi)
}

/// Band on which the third derivative is evaluated.
pub const LOW_BAND: (f64, f64) = (0.5, 1.0);
const LOW_BAND_CUTS: [f64; 3] = [0.625, 0.75, 0.875];

/// `ξ ↦ ∂³_ε û(t, ξ)` sampled at the composite Gauss nodes of the low band.
pub fn third_derivative_field(
    phi: &TwoBumpData,
    t: f64,
    equation: InflationEquation,
    alpha: f64,
    rule: &Rule,
) -> Vec<(f64, f64, Complex64)> {
    rule.on_pieces(LOW_BAND.0, LOW_BAND.1, &LOW_BAND_CUTS)
        .into_iter()
        .map(|(xi, w)| (xi, w, third_derivative_at(phi, t, equation, alpha, rule, xi)))
        .collect()
}

/// `(∫_{1/2}^{1} ⟨ξ⟩^{2σ'} 4^{s'ξ} |∂³_ε û|² dξ)^{1/2}`.
pub fn low_band_norm(field: &[(f64, f64, Complex64)], sprime: f64, sigmaprime: f64) -> f64 {
    field
        .iter()
        .map(|&(xi, w, v)| {
            let weight = (1.0 + xi * xi).powf(sigmaprime) * 4f64.powf(sprime * xi);
            w * weight * v.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// `min (−Im ϱ)/t` over the (A, A, B) quadrature nodes of the low band.
pub fn min_rho_ratio(phi: &TwoBumpData, t: f64, rule: &Rule) -> f64 {
    let a = phi.upper();
    let b = phi.lower();
    let mut worst = f64::INFINITY;
    for (xi, _) in rule.on_pieces(LOW_BAND.0, LOW_BAND.1, &LOW_BAND_CUTS) {
        integrate_triple(rule, xi, a, a, b, |x1, x2| {
            worst = worst.min(-rho(t, xi, x1, x2).im / t);
            Complex64::new(0.0, 0.0)
        });
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflationParams {
    pub s: f64,
    pub k_list: Vec<u32>,
    pub kappa: f64,
    pub sprime: f64,
    pub sigmaprime: f64,
    pub equation: InflationEquation,
    pub alpha: f64,
    /// Gauss–Legendre nodes per panel; the self-convergence check doubles it.
    pub nodes: usize,
    pub slope_tolerance: f64,
    pub convergence_tolerance: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            s: -1.0,
            k_list: vec![8, 16, 32],
            kappa: 0.1,
            sprime: -1.0,
            sigmaprime: 0.0,
            equation: InflationEquation::Nnls,
            alpha: 1.0,
            nodes: 16,
            slope_tolerance: 0.2,
            convergence_tolerance: 1e-6,
        }
    }
}

/// Least-squares line `y = a + b x`; returns `(b, a, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Growth of `‖∂³_ε u(κ/k²)‖` on the low band as the two-bump offset `k`
/// increases. Passes when the fitted slope of `log₂` norm against `k` is at
/// least `(1 − slope_tolerance)·(−s/2)`, the norms increase with `k`, doubling
/// the quadrature changes each norm by at most `convergence_tolerance`
/// relative, and `−Im ϱ ≥ t/2` at every node.
pub fn exp_norm_inflation(params: &InflationParams) -> Result<ExperimentReport> {
    let p = params;
    if !(p.s < 0.0) {
        return Err(Error::InvalidParameter(format!("inflation needs s < 0, got {}", p.s)));
    }
    if !(p.kappa > 0.0 && p.kappa <= 0.1) {
        return Err(Error::InvalidParameter(format!("κ must lie in (0, 0.1], got {}", p.kappa)));
    }
    if p.k_list.len() < 2 || p.k_list.iter().any(|&k| k < 8 || !k.is_power_of_two()) {
        return Err(Error::InvalidParameter(
            "k_list needs at least two powers of two, each >= 8".into(),
        ));
    }
    let coarse = Rule::new(p.nodes)?;
    let fine = Rule::new(2 * p.nodes)?;

    let mut b = ReportBuilder::new("norm_inflation", "third-variation-norm-inflation", p.slope_tolerance);
    b.param("s", p.s)
        .param("k_list", format!("{:?}", p.k_list))
        .param("kappa", p.kappa)
        .param("sprime", p.sprime)
        .param("sigmaprime", p.sigmaprime)
        .param("equation", p.equation)
        .param("alpha", p.alpha)
        .param("nodes", p.nodes);

    let mut ks = Vec::new();
    let mut logs = Vec::new();
    let mut worst_change: f64 = 0.0;
    let mut worst_rho = f64::INFINITY;
    for &k in &p.k_list {
        let phi = TwoBumpData::new(k, p.s)?;
        let t = p.kappa / (k as f64).powi(2);
        let norm = low_band_norm(
            &third_derivative_field(&phi, t, p.equation, p.alpha, &coarse),
            p.sprime,
            p.sigmaprime,
        );
        let refined = low_band_norm(
            &third_derivative_field(&phi, t, p.equation, p.alpha, &fine),
            p.sprime,
            p.sigmaprime,
        );
        let change = (refined - norm).abs() / refined;
        let rho_ratio = min_rho_ratio(&phi, t, &fine);
        b.real(&format!("norm_k{k}"), refined)
            .real(&format!("quadrature_change_k{k}"), change)
            .real(&format!("min_rho_over_t_k{k}"), rho_ratio);
        worst_change = worst_change.max(change);
        worst_rho = worst_rho.min(rho_ratio);
        ks.push(k as f64);
        logs.push(refined.log2());
    }
    let (slope, _, r2) = linear_fit(&ks, &logs);
    let monotone = logs.windows(2).all(|w| w[1] > w[0]);
    let theory = -p.s / 2.0;
    b.real("slope", slope)
        .real("slope_r2", r2)
        .real("theoretical_exponent", theory)
        .at_least("slope", slope, theory * (1.0 - p.slope_tolerance))
        .at_least("norms_increasing", if monotone { 1.0 } else { 0.0 }, 1.0)
        .at_most("quadrature_self_convergence", worst_change, p.convergence_tolerance)
        .at_least("min_rho_over_t", worst_rho, 0.5);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_limits() {
        assert_eq!(kernel(0.0, 3.0), Complex64::new(0.0, 0.0));
        assert_eq!(kernel(0.25, 0.0), Complex64::new(0.0, 0.25));
        // continuity across the series threshold
        let t = 0.01;
        let p_below = 0.99 * KERNEL_SERIES_THRESHOLD / (2.0 * t);
        let p_above = 1.01 * KERNEL_SERIES_THRESHOLD / (2.0 * t);
        for p in [p_below, p_above] {
            let z = 2.0 * t * p;
            let exact = Complex64::new(0.0, t)
                * (1.0 + Complex64::new(0.0, z) / 2.0 - z * z / 6.0 - Complex64::new(0.0, z.powi(3)) / 24.0);
            assert!((kernel(t, p) - exact).norm() < 1e-15 * t);
        }
        let exact = (Complex64::from_polar(1.0, 3.0) - 1.0) / 2.0;
        assert!((kernel(1.5, 1.0) - exact).norm() < 1e-15);
    }

    #[test]
    fn rule_integrates_polynomials() {
        let r = Rule::new(5).unwrap();
        let v: f64 = r.on(1.0, 3.0).map(|(x, w)| w * x.powi(4)).sum();
        assert!((v - (243.0 - 1.0) / 5.0).abs() < 1e-12);
        let v: f64 = r.on_pieces(0.0, 1.0, &[0.25, 2.0, -1.0]).iter().map(|(x, w)| w * x).sum();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(Rule::new(1).is_err());
    }

    #[test]
    fn triple_region_area() {
        // area of {ξ₁ ∈ A, ξ₂ ∈ A, ξ−ξ₁−ξ₂ ∈ B} integrated over ξ is |A|²|B| = 1/256
        let phi = TwoBumpData::new(8, -1.0).unwrap();
        let r = Rule::new(6).unwrap();
        let total: f64 = r
            .on_pieces(0.0, 2.0, &[0.5, 0.625, 0.75, 0.875, 1.0])
            .into_iter()
            .map(|(xi, w)| {
                w * integrate_triple(&r, xi, phi.upper(), phi.upper(), phi.lower(), |_, _| {
                    Complex64::new(1.0, 0.0)
                })
                .re
            })
            .sum();
        assert!((total - 1.0 / 256.0).abs() < 1e-14);
    }

    #[test]
    fn zero_time_gives_zero_field() {
        let phi = TwoBumpData::new(8, -1.0).unwrap();
        let r = Rule::new(4).unwrap();
        let f = third_derivative_field(&phi, 0.0, InflationEquation::Nnls, 1.0, &r);
        assert!(f.iter().all(|(_, _, v)| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn symmetric_combination_is_order_independent() {
        let phi = TwoBumpData::new(16, -1.0).unwrap();
        let r = Rule::new(8).unwrap();
        let t = 0.1 / 256.0;
        let xi = 0.7;
        let f = |x1: f64, x2: f64| kernel(t, (xi - x1) * (xi - x2));
        let a = integrate_triple(&r, xi, phi.upper(), phi.upper(), phi.lower(), f);
        let b = integrate_triple(&r, xi, phi.upper(), phi.upper(), phi.lower(), |x1, x2| f(x2, x1));
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn fit_recovers_line() {
        let (s, a, r2) = linear_fit(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (a + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-15);
    }
}
