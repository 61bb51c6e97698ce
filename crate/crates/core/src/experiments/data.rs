use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::LOG_WEIGHT_LIMIT;
use crate::spectral::{FrequencyGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    /// `A e^{-(x−x0)²/(2w²)}`; params `amplitude`, `width`, `center`.
    Gaussian,
    /// `A e^{ik₀x} e^{-x²/(2w²)}`; params `amplitude`, `width`, `wavenumber`.
    ModulatedGaussian,
    /// Spectrum vanishing below `lo`. With finite `hi`:
    /// `A sin^{2p}(π(ξ−lo)/(hi−lo))` on `(lo, hi)`. With `hi = inf`:
    /// `A ((ξ−lo)/w)^p e^{-((ξ−lo)/w)²/2}`. Params `lo`, `hi`, `amplitude`,
    /// `power`, `width`.
    HalflineBump,
    /// `û = −2πiA (i(ξ−1))^k χ_{[1,∞)}(ξ)`, the transform of
    /// `A e^{ix} F^{(k)}` with `F = 1/(x + i0)`; params `amplitude`, `k`.
    PlemeljDerivative,
    /// `2^{-sk/2}(χ_{k+[1/8,1/4]} + χ_{−2k+[1/4,1/2]})`; params `k`, `s`.
    TwoBump,
}

impl InitialDataKind {
    pub const ALL: [Self; 5] = [
        Self::Gaussian,
        Self::ModulatedGaussian,
        Self::HalflineBump,
        Self::PlemeljDerivative,
        Self::TwoBump,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::ModulatedGaussian => "modulated_gaussian",
            Self::HalflineBump => "halfline_bump",
            Self::PlemeljDerivative => "plemelj_derivative",
            Self::TwoBump => "two_bump",
        }
    }
}

impl fmt::Display for InitialDataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialDataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown initial data kind '{s}'")))
    }
}

/// Named real parameters with per-kind defaults.
pub type DataParams = BTreeMap<String, f64>;

fn get(params: &DataParams, key: &str, default: f64) -> Result<f64> {
    let v = params.get(key).copied().unwrap_or(default);
    if v.is_nan() {
        return Err(Error::InvalidParameter(format!("initial data parameter {key} is NaN")));
    }
    Ok(v)
}

fn positive(params: &DataParams, key: &str, default: f64) -> Result<f64> {
    let v = get(params, key, default)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial data parameter {key} must be positive, got {v}"
        )));
    }
    Ok(v)
}

fn integer(params: &DataParams, key: &str, default: f64) -> Result<u32> {
    let v = get(params, key, default)?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= 64.0) {
        return Err(Error::InvalidParameter(format!(
            "initial data parameter {key} must be an integer in 0..=64, got {v}"
        )));
    }
    Ok(v as u32)
}

/// Spectral bumps `2^{-sk/2}(χ_{k+I} + χ_{−2k+2I})`, `I = [1/8, 1/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBumpData {
    pub k: u32,
    pub s: f64,
}

impl TwoBumpData {
    pub fn new(k: u32, s: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("two-bump offset k must be positive".into()));
        }
        if !(s < 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("two-bump exponent s must be negative, got {s}")));
        }
        Ok(Self { k, s })
    }

    pub fn height(&self) -> f64 {
        2f64.powf(-self.s * self.k as f64 / 2.0)
    }

    /// `k + [1/8, 1/4]`.
    pub fn upper(&self) -> (f64, f64) {
        let k = self.k as f64;
        (k + 0.125, k + 0.25)
    }

    /// `−2k + [1/4, 1/2]`.
    pub fn lower(&self) -> (f64, f64) {
        let k = self.k as f64;
        (-2.0 * k + 0.25, -2.0 * k + 0.5)
    }

    pub fn spectrum(&self, xi: f64) -> f64 {
        let inside = |(a, b): (f64, f64)| xi >= a && xi <= b;
        if inside(self.upper()) || inside(self.lower()) {
            self.height()
        } else {
            0.0
        }
    }
}

/// Builds one of the standard initial profiles on `grid`.
pub fn make_initial_data(
    kind: InitialDataKind,
    params: &DataParams,
    grid: FrequencyGrid,
) -> Result<SpectralField> {
    match kind {
        InitialDataKind::Gaussian => {
            let a = get(params, "amplitude", 1.0)?;
            let w = positive(params, "width", 1.0)?;
            let x0 = get(params, "center", 0.0)?;
            SpectralField::from_function(grid, |x| {
                Complex64::new(a * (-(x - x0).powi(2) / (2.0 * w * w)).exp(), 0.0)
            })
        }
        InitialDataKind::ModulatedGaussian => {
            let a = get(params, "amplitude", 1.0)?;
            let w = positive(params, "width", 1.0)?;
            let k0 = get(params, "wavenumber", 1.0)?;
            SpectralField::from_function(grid, |x| {
                Complex64::from_polar(a * (-x * x / (2.0 * w * w)).exp(), k0 * x)
            })
        }
        InitialDataKind::HalflineBump => {
            let lo = get(params, "lo", 1.0)?;
            let hi = get(params, "hi", 2.0)?;
            let a = get(params, "amplitude", 1.0)?;
            let p = integer(params, "power", 2.0)?;
            if !(lo.is_finite() && hi > lo) {
                return Err(Error::InvalidParameter(format!(
                    "half-line bump needs finite lo < hi, got [{lo}, {hi})"
                )));
            }
            if hi.is_finite() {
                SpectralField::from_spectrum(grid, |xi| {
                    if xi > lo && xi < hi {
                        let s = (PI * (xi - lo) / (hi - lo)).sin();
                        Complex64::new(a * s.powi(2 * p as i32), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            } else {
                let w = positive(params, "width", 1.0)?;
                SpectralField::from_spectrum(grid, |xi| {
                    if xi > lo {
                        let y = (xi - lo) / w;
                        Complex64::new(a * y.powi(p as i32) * (-0.5 * y * y).exp(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
        }
        InitialDataKind::PlemeljDerivative => {
            let a = get(params, "amplitude", 1.0)?;
            let k = integer(params, "k", 1.0)?;
            // |û| ≤ 2π|A| ξ_max^k must stay far below the overflow threshold
            let log_peak = (2.0 * PI * a.abs().max(1.0)).ln() + k as f64 * grid.xi_max().ln();
            if log_peak > LOG_WEIGHT_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "plemelj derivative order {k} overflows on this grid"
                )));
            }
            let c = Complex64::new(0.0, -2.0 * PI * a);
            let i = Complex64::new(0.0, 1.0);
            SpectralField::from_spectrum(grid, |xi| {
                if xi >= 1.0 {
                    c * (i * (xi - 1.0)).powu(k)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        InitialDataKind::TwoBump => {
            let k = integer(params, "k", 8.0)?;
            let s = get(params, "s", -1.0)?;
            let data = TwoBumpData::new(k, s)?;
            if grid.dxi() > 0.125 || grid.xi_max() < 2.0 * k as f64 {
                return Err(Error::InvalidParameter(format!(
                    "grid does not resolve two-bump data with k = {k}"
                )));
            }
            SpectralField::from_spectrum(grid, |xi| Complex64::new(data.spectrum(xi), 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::support_leakage;

    fn params(pairs: &[(&str, f64)]) -> DataParams {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn gaussian_leakage_is_half() {
        let g = FrequencyGrid::new(256, 40.0).unwrap();
        let u = make_initial_data(InitialDataKind::Gaussian, &DataParams::new(), g).unwrap();
        assert!((support_leakage(&u, 0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn halfline_bump_has_no_mass_below_lo() {
        let g = FrequencyGrid::new(256, 40.0).unwrap();
        for hi in [2.0, f64::INFINITY] {
            let p = params(&[("lo", 1.0), ("hi", hi), ("power", 4.0)]);
            let u = make_initial_data(InitialDataKind::HalflineBump, &p, g).unwrap();
            assert_eq!(support_leakage(&u, 1.0), 0.0);
            assert!(u.spectral_l2() > 0.0);
        }
    }

    #[test]
    fn plemelj_spectrum() {
        let g = FrequencyGrid::new(256, 2.0 * PI * 4.0).unwrap();
        let p = params(&[("amplitude", 0.5), ("k", 2.0)]);
        let u = make_initial_data(InitialDataKind::PlemeljDerivative, &p, g).unwrap();
        // ξ = 3 is mode 12; û = −πi (2i)² = 4πi
        assert!((u.coeff_of_mode(12) - Complex64::new(0.0, 4.0 * PI)).norm() < 1e-12);
        assert_eq!(u.coeff_of_mode(3).norm(), 0.0);
        let p = params(&[("k", 400.0)]);
        assert!(make_initial_data(InitialDataKind::PlemeljDerivative, &p, g).is_err());
    }

    #[test]
    fn two_bump_locations() {
        let d = TwoBumpData::new(8, -1.0).unwrap();
        assert_eq!(d.height(), 16.0);
        assert_eq!(d.spectrum(8.2), 16.0);
        assert_eq!(d.spectrum(-15.6), 16.0);
        assert_eq!(d.spectrum(8.3), 0.0);
        assert_eq!(d.spectrum(0.0), 0.0);
        let g = FrequencyGrid::new(2048, 160.0).unwrap();
        let u = make_initial_data(InitialDataKind::TwoBump, &params(&[("k", 8.0)]), g).unwrap();
        let nonzero: Vec<f64> = (0..2048)
            .filter(|&i| u.coeffs()[i].norm() > 0.0)
            .map(|i| g.xi(i))
            .collect();
        assert!(nonzero.iter().all(|&x| (8.125..=8.25).contains(&x) || (-15.75..=-15.5).contains(&x)));
        assert!(make_initial_data(InitialDataKind::TwoBump, &DataParams::new(), FrequencyGrid::new(64, 20.0).unwrap()).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in InitialDataKind::ALL {
            assert_eq!(k.name().parse::<InitialDataKind>().unwrap(), k);
        }
        assert!("square".parse::<InitialDataKind>().is_err());
    }
}
