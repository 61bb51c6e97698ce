//! Norm calculus on grid fields: `E^s_σ`, `H^σ`, Besov `B^σ_{p,q}`,
//! Littlewood–Paley blocks, dilations and the scaling/embedding probes.
//!
//! All `ξ`-side norms use the measure `dξ`, i.e. the Riemann sum
//! `Σ_m |w(ξ_m) c_m|² dξ` over grid frequencies.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, SpectralField};

/// Largest admissible log-weight before the exponential would overflow.
pub const LOG_WEIGHT_LIMIT: f64 = 700.0;

/// Relative spectral mass tolerated outside the band a dilation can represent.
const BAND_OVERFLOW_MASS: f64 = 1e-20;

/// Relative spectral mass below `ε₀` tolerated by the support preconditions.
pub const SUPPORT_MASS_TOLERANCE: f64 = 1e-20;

/// Weight exponents of `E^s_σ`; `p`, `q` are only used by Besov norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
}

impl SpaceParams {
    pub fn esigma(s: f64, sigma: f64) -> Self {
        Self {
            s,
            sigma,
            p: 2.0,
            q: 2.0,
        }
    }

    pub fn besov(sigma: f64, p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Besov exponents need p, q >= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(Self {
            s: 0.0,
            sigma,
            p,
            q,
        })
    }
}

/// `ln(⟨ξ⟩^σ 2^{s|ξ|})`.
pub fn log_weight(xi: f64, s: f64, sigma: f64) -> f64 {
    0.5 * sigma * (1.0 + xi * xi).ln() + s * xi.abs() * LN_2
}

/// `‖⟨ξ⟩^σ 2^{s|ξ|} û‖_{L²_ξ}`.
pub fn esigma_norm(field: &SpectralField, s: f64, sigma: f64) -> Result<f64> {
    let grid = field.grid();
    let xi_max = grid.xi_max();
    if !(s.abs() * xi_max * LN_2 < LOG_WEIGHT_LIMIT) {
        return Err(Error::WeightOverflow(format!(
            "|s|·ξ_max·ln2 = {:.3} exceeds {LOG_WEIGHT_LIMIT} (s = {s}, ξ_max = {xi_max})",
            s.abs() * xi_max * LN_2
        )));
    }
    if log_weight(xi_max, s, sigma) > LOG_WEIGHT_LIMIT {
        return Err(Error::WeightOverflow(format!(
            "⟨ξ_max⟩^σ overflows for σ = {sigma}"
        )));
    }
    let sum: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| (2.0 * log_weight(grid.xi(i), s, sigma)).exp() * c.norm_sqr())
        .sum();
    Ok((sum * grid.dxi()).sqrt())
}

/// `‖⟨ξ⟩^σ û‖_{L²_ξ}`, which is `E^0_σ`.
pub fn hsigma_norm(field: &SpectralField, sigma: f64) -> Result<f64> {
    esigma_norm(field, 0.0, sigma)
}

/// Smooth dyadic cutoff: `ψ = 1` on `[-1, 1]`, `0` outside `[-2, 2]`, with a
/// `cos²` ramp in between; `φ_j(ξ) = ψ(2^{-j}ξ) − ψ(2^{-j+1}ξ)` for `j ≥ 1`
/// and block `0` is `ψ` itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DyadicCutoff;

impl DyadicCutoff {
    pub fn psi(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 1.0 {
            1.0
        } else if a >= 2.0 {
            0.0
        } else {
            (0.5 * PI * (a - 1.0)).cos().powi(2)
        }
    }

    /// Symbol of block `j`.
    pub fn phi(&self, j: usize, xi: f64) -> f64 {
        if j == 0 {
            self.psi(xi)
        } else {
            let scale = 2f64.powi(-(j as i32));
            self.psi(scale * xi) - self.psi(2.0 * scale * xi)
        }
    }

    /// Index of the last block needed so that blocks `0..=J` sum to one on
    /// `|ξ| ≤ xi_max`.
    pub fn last_block(&self, xi_max: f64) -> usize {
        let mut j = 0;
        while 2f64.powi(j as i32) < xi_max {
            j += 1;
        }
        j
    }
}

/// `{Δ_0 f, Δ_1 f, …}` up to the grid band.
pub fn littlewood_paley_blocks(field: &SpectralField, cutoff: &DyadicCutoff) -> Vec<SpectralField> {
    let last = cutoff.last_block(field.grid().xi_max());
    (0..=last)
        .map(|j| field.map_spectrum(|xi, c| c * cutoff.phi(j, xi)))
        .collect()
}

/// Physical-space `L^p` norm by trapezoid quadrature (`p = ∞` allowed).
pub fn lp_norm(field: &SpectralField, p: f64) -> f64 {
    let samples = field.samples();
    if p.is_infinite() {
        samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    } else {
        let dx = field.grid().dx();
        (samples.iter().map(|s| s.norm().powf(p)).sum::<f64>() * dx).powf(1.0 / p)
    }
}

/// `(Σ_j 2^{jσq} ‖Δ_j f‖_p^q)^{1/q}`, with the supremum for `q = ∞`.
pub fn besov_norm(
    field: &SpectralField,
    sigma: f64,
    p: f64,
    q: f64,
    cutoff: &DyadicCutoff,
) -> Result<f64> {
    SpaceParams::besov(sigma, p, q)?;
    let terms = littlewood_paley_blocks(field, cutoff)
        .iter()
        .enumerate()
        .map(|(j, block)| 2f64.powf(j as f64 * sigma) * lp_norm(block, p))
        .collect::<Vec<_>>();
    Ok(if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

/// `D_λ φ = φ(λ·)`, i.e. `û_λ(ξ) = λ⁻¹ û(ξ/λ)`.
///
/// Target frequencies whose preimage `ξ/λ` is a grid frequency are copied
/// exactly; the others are filled by band-limited interpolation, evaluating
/// `û(η) = dx Σ_j u(x_j) e^{-iηx_j}` directly. Preimages outside the band are
/// zero.
pub fn dilate(field: &SpectralField, lambda: f64) -> Result<SpectralField> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dilation factor must be positive, got {lambda}"
        )));
    }
    let grid = field.grid();
    let n = grid.n_modes();
    let dxi = grid.dxi();
    let half = (n / 2) as i64;

    if lambda > 1.0 {
        let limit = grid.xi_max() / lambda;
        let mut outside = 0.0;
        let mut total = 0.0;
        for (i, c) in field.coeffs().iter().enumerate() {
            let m = c.norm_sqr();
            total += m;
            if grid.xi(i).abs() >= limit {
                outside += m;
            }
        }
        if total > 0.0 && outside > BAND_OVERFLOW_MASS * total {
            return Err(Error::BandOverflow(format!(
                "relative mass {:.3e} above |ξ| = {limit:.4} leaves the band after dilation by {lambda}",
                outside / total
            )));
        }
    }

    let mut samples: Option<Vec<Complex64>> = None;
    let dx = grid.dx();
    let inv = 1.0 / lambda;
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let source = grid.mode(i) as f64 / lambda;
        let nearest = source.round();
        let value = if (source - nearest).abs() < 1e-9 {
            let m = nearest as i64;
            if m < -half || m >= half {
                Complex64::new(0.0, 0.0)
            } else {
                field.coeff_of_mode(m)
            }
        } else if source < -(half as f64) || source >= half as f64 {
            Complex64::new(0.0, 0.0)
        } else {
            let s = samples.get_or_insert_with(|| field.samples());
            let eta = source * dxi;
            s.iter()
                .enumerate()
                .map(|(j, u)| u * Complex64::from_polar(1.0, -eta * grid.x(j)))
                .sum::<Complex64>()
                * dx
        };
        coeffs.push(value * inv);
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// `‖D_λφ‖_{E^s_σ} / (λ^{-1/2+max(σ,0)} 2^{sλε₀/2} ‖φ‖_{E^s_σ})` for data
/// with `supp φ̂ ⊂ [ε₀, ∞)`; the scaling bound holds when this is `O(1)`.
pub fn scaling_bound_check(
    field: &SpectralField,
    s: f64,
    sigma: f64,
    lambda: f64,
    eps0: f64,
) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scaling check needs λ > 1, got {lambda}"
        )));
    }
    if s > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "scaling check needs s <= 0, got {s}"
        )));
    }
    let leak = spectral::spectral_mass_fraction_below(field, eps0);
    if leak > SUPPORT_MASS_TOLERANCE {
        return Err(Error::Support(format!(
            "relative mass {leak:.3e} below ε₀ = {eps0}"
        )));
    }
    let base = esigma_norm(field, s, sigma)?;
    if base == 0.0 {
        return Err(Error::InvalidParameter("scaling check of the zero field".into()));
    }
    let dilated = esigma_norm(&dilate(field, lambda)?, s, sigma)?;
    let bound = lambda.powf(-0.5 + sigma.max(0.0)) * 2f64.powf(s * lambda * eps0 / 2.0) * base;
    Ok(dilated / bound)
}

/// `‖f‖_{E^s_σ} / ‖f‖_{H^r}` for `s < 0`.
pub fn embedding_check(field: &SpectralField, r: f64, s: f64, sigma: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "embedding check needs s < 0, got {s}"
        )));
    }
    let h = hsigma_norm(field, r)?;
    if h == 0.0 {
        return Err(Error::InvalidParameter("embedding check of the zero field".into()));
    }
    Ok(esigma_norm(field, s, sigma)? / h)
}
