//! The nonlocal gauge transform
//!
//! ```text
//! 𝒢(u) = u · exp(−δ ∂ₓ⁻¹(u u*)),   ∂ₓ⁻¹ = ½(∫_{−∞}^x − ∫_x^∞),
//! ```
//!
//! its inverse, and the truncated Taylor series used to cross-check it.
//! Because `(u u*)* = u u*`, the primitive satisfies `conj(F(−x)) = −F(x)` and
//! hence `𝒢(u)𝒢(u)* = u u*`; the inverse only needs the sign of `δ` flipped.
//! With `δ = −α/2` the transform maps NdNLS onto its gauged form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spaces;
use crate::spectral::{
    antiderivative_symmetric, dealiased_product, forward_transform, nonlocal_conjugate,
    SpectralField,
};

/// Exponent coefficient `δ` of the gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeParams {
    pub delta: f64,
}

impl GaugeParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("gauge δ = {delta}")));
        }
        Ok(Self { delta })
    }

    /// `δ = −α/2`, the choice that removes the `u u* ∂ₓu` term.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        Self::new(-0.5 * alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gauged {
    pub field: SpectralField,
    /// Propagated from the primitive: `u u*` was not decayed at the ends.
    pub boundary_warning: bool,
}

/// Samples of `F = ∂ₓ⁻¹(u u*)` and of `u`.
fn primitive_of_density(u: &SpectralField) -> Result<(Vec<Complex64>, Vec<Complex64>, bool)> {
    let us = nonlocal_conjugate(u);
    let density = dealiased_product(&[u, &us])?;
    let primitive = antiderivative_symmetric(&density);
    Ok((
        u.samples(),
        primitive.field.samples(),
        primitive.boundary_warning,
    ))
}

fn multiply_by_exponential(u: &SpectralField, factor: f64) -> Result<Gauged> {
    let (samples, primitive, boundary_warning) = primitive_of_density(u)?;
    let out: Vec<Complex64> = samples
        .iter()
        .zip(&primitive)
        .map(|(s, f)| s * (f * factor).exp())
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gauge exponential overflowed".into()));
    }
    Ok(Gauged {
        field: forward_transform(&out, u.grid())?,
        boundary_warning,
    })
}

/// `v = u · exp(−δ ∂ₓ⁻¹(u u*))`.
pub fn gauge_forward(u: &SpectralField, delta: f64) -> Result<Gauged> {
    GaugeParams::new(delta)?;
    multiply_by_exponential(u, -delta)
}

/// `u = v · exp(+δ ∂ₓ⁻¹(v v*))`.
pub fn gauge_inverse(v: &SpectralField, delta: f64) -> Result<Gauged> {
    GaugeParams::new(delta)?;
    multiply_by_exponential(v, delta)
}

/// `Σ_{k≤K} ((−δ)^k/k!) · u · (∂ₓ⁻¹(u u*))^k`, with the powers taken node by
/// node.
pub fn gauge_taylor(u: &SpectralField, delta: f64, order: usize) -> Result<SpectralField> {
    GaugeParams::new(delta)?;
    let (samples, primitive, _) = primitive_of_density(u)?;
    let out: Vec<Complex64> = samples
        .iter()
        .zip(&primitive)
        .map(|(s, f)| {
            let z = f * (-delta);
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            for k in 1..=order {
                term = term * z / k as f64;
                sum += term;
            }
            s * sum
        })
        .collect();
    forward_transform(&out, u.grid())
}

/// `‖𝒢(u)𝒢(u)* − u u*‖₂ / ‖u u*‖₂`, evaluated node by node.
pub fn gauge_modulus_identity(u: &SpectralField, delta: f64) -> Result<f64> {
    let v = gauge_forward(u, delta)?.field;
    let pointwise = |f: &SpectralField| -> Vec<Complex64> {
        let a = f.samples();
        let b = nonlocal_conjugate(f).samples();
        a.iter().zip(&b).map(|(x, y)| x * y).collect()
    };
    let uu = pointwise(u);
    let vv = pointwise(&v);
    let base: f64 = uu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if base == 0.0 {
        return Ok(0.0);
    }
    let diff: f64 = uu
        .iter()
        .zip(&vv)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(diff / base)
}

/// Smallest `C ≥ 0` such that `‖𝒢(u)‖_{E^s_σ} ≤ exp(C‖u‖²_{E^s_σ}) ‖u‖_{E^s_σ}`
/// holds for every member of `family`.
pub fn gauge_bound_constant(
    family: &[SpectralField],
    delta: f64,
    s: f64,
    sigma: f64,
) -> Result<f64> {
    let mut constant: f64 = 0.0;
    for u in family {
        let norm = spaces::esigma_norm(u, s, sigma)?;
        if norm == 0.0 {
            continue;
        }
        let gauged = spaces::esigma_norm(&gauge_forward(u, delta)?.field, s, sigma)?;
        constant = constant.max((gauged / norm).ln() / (norm * norm));
    }
    Ok(constant)
}
