//! Right-hand sides of the evolution equations and their conserved
//! functionals.
//!
//! Every equation is stored in evolution form `u_t = i∂²ₓu + i·N(u)`:
//!
//! | kind             | `N(u)`                                             |
//! |------------------|----------------------------------------------------|
//! | `Nnls`           | `α u²u*`                                           |
//! | `Ndnls`          | `α u u* ∂ₓu`                                       |
//! | `GNdnls`         | `α u u* ∂ₓu + β u² ∂ₓu*`                           |
//! | `GaugedNdnls`    | `−α v² ∂ₓv* − (α²/2) v³(v*)²`                      |
//! | `GaugedGNdnls`   | `−(α−β) v² ∂ₓv* − C(α,β) v³(v*)²`                  |
//!
//! `∂ₓv*` always means `∂ₓ(v*)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    self, complex_conjugate, dealiased_product, derivative, nonlocal_conjugate, SpectralField,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Nnls,
    Ndnls,
    GNdnls,
    GaugedNdnls,
    GaugedGNdnls,
}

impl EquationKind {
    pub const ALL: [EquationKind; 5] = [
        EquationKind::Nnls,
        EquationKind::Ndnls,
        EquationKind::GNdnls,
        EquationKind::GaugedNdnls,
        EquationKind::GaugedGNdnls,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EquationKind::Nnls => "nnls",
            EquationKind::Ndnls => "ndnls",
            EquationKind::GNdnls => "gndnls",
            EquationKind::GaugedNdnls => "gauged_ndnls",
            EquationKind::GaugedGNdnls => "gauged_gndnls",
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown equation kind `{s}`")))
    }
}

/// Which quintic coefficient the gauged gNdNLS equation carries.
///
/// `Printed` is `(α²/2)(α − 3β/2)`. `Rederived` is `(α/2)(α − 3β/2)`, the
/// value obtained by carrying the `β u² ∂ₓu*` term through the gauge
/// computation; it reduces to the gauged NdNLS coefficient `α²/2` at `β = 0`.
/// The two agree whenever `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    Printed,
    #[default]
    Rederived,
}

impl CoefficientMode {
    pub fn name(&self) -> &'static str {
        match self {
            CoefficientMode::Printed => "printed",
            CoefficientMode::Rederived => "rederived",
        }
    }
}

impl fmt::Display for CoefficientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoefficientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Self::Printed),
            "rederived" => Ok(Self::Rederived),
            _ => Err(Error::InvalidParameter(format!(
                "unknown coefficient mode `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub kind: EquationKind,
    pub alpha: f64,
    pub beta: f64,
    pub coefficient_mode: CoefficientMode,
}

impl EquationSpec {
    pub fn new(kind: EquationKind, alpha: f64, beta: f64, mode: CoefficientMode) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "equation coefficients must be finite (α = {alpha}, β = {beta})"
            )));
        }
        Ok(Self {
            kind,
            alpha,
            beta,
            coefficient_mode: mode,
        })
    }

    pub fn nnls(alpha: f64) -> Self {
        Self::simple(EquationKind::Nnls, alpha)
    }

    pub fn ndnls(alpha: f64) -> Self {
        Self::simple(EquationKind::Ndnls, alpha)
    }

    pub fn gndnls(alpha: f64, beta: f64) -> Self {
        Self {
            beta,
            ..Self::simple(EquationKind::GNdnls, alpha)
        }
    }

    pub fn gauged_ndnls(alpha: f64) -> Self {
        Self::simple(EquationKind::GaugedNdnls, alpha)
    }

    pub fn gauged_gndnls(alpha: f64, beta: f64, mode: CoefficientMode) -> Self {
        Self {
            beta,
            coefficient_mode: mode,
            ..Self::simple(EquationKind::GaugedGNdnls, alpha)
        }
    }

    fn simple(kind: EquationKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            beta: 0.0,
            coefficient_mode: CoefficientMode::Rederived,
        }
    }

    /// Coefficient of `v³(v*)²` in `N` (with its sign).
    pub fn quintic_coefficient(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.kind {
            EquationKind::GaugedNdnls => -0.5 * a * a,
            EquationKind::GaugedGNdnls => match self.coefficient_mode {
                CoefficientMode::Printed => -0.5 * a * a * (a - 1.5 * b),
                CoefficientMode::Rederived => -0.5 * a * (a - 1.5 * b),
            },
            _ => 0.0,
        }
    }

    /// True when `N ≡ 0`.
    pub fn is_linear(&self) -> bool {
        match self.kind {
            EquationKind::GNdnls => self.alpha == 0.0 && self.beta == 0.0,
            EquationKind::GaugedGNdnls => {
                self.alpha == self.beta && self.quintic_coefficient() == 0.0
            }
            _ => self.alpha == 0.0,
        }
    }

    /// The gauged counterpart reached by `v = 𝒢(u)` with `δ = −α/2`.
    pub fn gauged(&self, mode: CoefficientMode) -> Option<Self> {
        match self.kind {
            EquationKind::Ndnls => Some(Self::gauged_ndnls(self.alpha)),
            EquationKind::GNdnls => Some(Self::gauged_gndnls(self.alpha, self.beta, mode)),
            _ => None,
        }
    }
}

/// `i∂²ₓu`.
pub fn linear_rhs(field: &SpectralField) -> SpectralField {
    field.map_spectrum(|xi, c| Complex64::new(0.0, -xi * xi) * c)
}

/// `i·N(u)` for the given equation.
pub fn nonlinear_rhs(field: &SpectralField, spec: &EquationSpec) -> Result<SpectralField> {
    let u = field;
    let (a, b) = (spec.alpha, spec.beta);
    let us = nonlocal_conjugate(u);
    let n = match spec.kind {
        EquationKind::Nnls => dealiased_product(&[u, u, &us])?.scale(a.into()),
        EquationKind::Ndnls => {
            let ux = derivative(u);
            dealiased_product(&[u, &us, &ux])?.scale(a.into())
        }
        EquationKind::GNdnls => {
            let ux = derivative(u);
            let usx = derivative(&us);
            let first = dealiased_product(&[u, &us, &ux])?;
            let second = dealiased_product(&[u, u, &usx])?;
            first.scale(a.into()).axpy(b.into(), &second)?
        }
        EquationKind::GaugedNdnls | EquationKind::GaugedGNdnls => {
            let cubic = if spec.kind == EquationKind::GaugedNdnls {
                -a
            } else {
                -(a - b)
            };
            let usx = derivative(&us);
            let first = dealiased_product(&[u, u, &usx])?;
            let quintic = dealiased_product(&[u, u, u, &us, &us])?;
            first
                .scale(cubic.into())
                .axpy(spec.quintic_coefficient().into(), &quintic)?
        }
    };
    Ok(n.scale(I))
}

/// `u_t` for the given equation.
pub fn rhs(field: &SpectralField, spec: &EquationSpec) -> Result<SpectralField> {
    linear_rhs(field).add(&nonlinear_rhs(field, spec)?)
}

/// Nonlinear part `iα|u|²u` of the local cubic NLS, to which NNLS reduces on
/// even data.
pub fn cubic_nls_nonlinear_rhs(field: &SpectralField, alpha: f64) -> Result<SpectralField> {
    let ubar = complex_conjugate(field);
    Ok(dealiased_product(&[field, field, &ubar])?.scale(Complex64::new(0.0, alpha)))
}

/// `M(u) = ∫ u u* dx`.
pub fn mass(field: &SpectralField) -> Complex64 {
    let grid = field.grid();
    let u = field.samples();
    let us = nonlocal_conjugate(field).samples();
    spectral::integrate_product(&u, &us, grid.dx())
}

/// `E(u) = ∫ (∂ₓu)(∂ₓu)* + (α/2) u²(u*)² dx`.
pub fn energy(field: &SpectralField, alpha: f64) -> Complex64 {
    let grid = field.grid();
    let ux = derivative(field);
    let ux_s = nonlocal_conjugate(&ux).samples();
    let ux = ux.samples();
    let u = field.samples();
    let us = nonlocal_conjugate(field).samples();
    let kinetic = spectral::integrate_product(&ux, &ux_s, grid.dx());
    let potential: Complex64 = u
        .iter()
        .zip(&us)
        .map(|(a, b)| (a * b) * (a * b))
        .sum::<Complex64>()
        * grid.dx();
    kinetic + potential * (0.5 * alpha)
}

/// Spectral mass at `ξ < ε₀` over total spectral mass (`0/0 = 0`).
pub fn support_leakage(field: &SpectralField, eps0: f64) -> f64 {
    spectral::spectral_mass_fraction_below(field, eps0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyGrid;
    use std::f64::consts::PI;

    fn grid_2pi() -> FrequencyGrid {
        FrequencyGrid::new(64, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_field_has_zero_rhs() {
        let g = grid_2pi();
        let z = SpectralField::zeros(g);
        for kind in EquationKind::ALL {
            let spec = EquationSpec::new(kind, 1.3, 0.4, CoefficientMode::Printed).unwrap();
            assert_eq!(rhs(&z, &spec).unwrap().spectral_l2(), 0.0);
        }
    }

    #[test]
    fn nnls_plane_wave() {
        let g = grid_2pi();
        let alpha = 0.7;
        let e = SpectralField::from_function(g, |x| Complex64::from_polar(1.0, x)).unwrap();
        let r = rhs(&e, &EquationSpec::nnls(alpha)).unwrap();
        let two_pi = 2.0 * PI;
        for i in 0..64 {
            let expected = match g.mode(i) {
                1 => Complex64::new(0.0, -two_pi),
                3 => Complex64::new(0.0, alpha * two_pi),
                _ => Complex64::new(0.0, 0.0),
            };
            assert!((r.coeffs()[i] - expected).norm() < 1e-12, "mode {}", g.mode(i));
        }
    }

    #[test]
    fn coefficient_modes() {
        let printed = EquationSpec::gauged_gndnls(2.0, 0.0, CoefficientMode::Printed);
        let rederived = EquationSpec::gauged_gndnls(2.0, 0.0, CoefficientMode::Rederived);
        assert_eq!(printed.quintic_coefficient(), -4.0);
        assert_eq!(rederived.quintic_coefficient(), -2.0);
        assert_eq!(
            rederived.quintic_coefficient(),
            EquationSpec::gauged_ndnls(2.0).quintic_coefficient()
        );
        // at α = 1 the modes coincide
        let p1 = EquationSpec::gauged_gndnls(1.0, 0.5, CoefficientMode::Printed);
        let r1 = EquationSpec::gauged_gndnls(1.0, 0.5, CoefficientMode::Rederived);
        assert_eq!(p1.quintic_coefficient(), r1.quintic_coefficient());
    }

    #[test]
    fn mass_and_energy_of_plane_wave_vanish() {
        let g = grid_2pi();
        let e = SpectralField::from_function(g, |x| Complex64::from_polar(1.0, x)).unwrap();
        assert!(mass(&e).norm() < 1e-13);
        assert!(energy(&e, 1.7).norm() < 1e-12);
        let z = SpectralField::zeros(g);
        assert_eq!(mass(&z), Complex64::new(0.0, 0.0));
        assert_eq!(energy(&z, 1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn leakage_examples() {
        let g = FrequencyGrid::new(256, 80.0).unwrap();
        let bump = SpectralField::from_spectrum(g, |xi| {
            if (1.0..=2.0).contains(&xi) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        assert_eq!(support_leakage(&bump, 1.0), 0.0);
        let indicator = SpectralField::from_spectrum(g, |xi| {
            if xi.abs() <= 1.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        assert!((support_leakage(&indicator, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(support_leakage(&SpectralField::zeros(g), 0.0), 0.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in EquationKind::ALL {
            assert_eq!(kind.name().parse::<EquationKind>().unwrap(), kind);
        }
        assert!("nls".parse::<EquationKind>().is_err());
    }
}
