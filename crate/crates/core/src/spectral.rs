//! Discretization layer: periodic grids, Fourier transforms, multipliers,
//! sharp band projections, dealiased products and the nonlocal conjugation.
//!
//! The whole line is replaced by the torus `[-L/2, L/2)`. Coefficients follow
//! the continuum convention
//!
//! ```text
//! û(ξ) = ∫ u(x) e^{-iξx} dx,        u(x) = (1/2π) ∫ û(ξ) e^{iξx} dξ,
//! ```
//!
//! discretized as `c_m = dx Σ_j u(x_j) e^{-iξ_m x_j}` and
//! `u(x_j) = (1/L) Σ_m c_m e^{iξ_m x_j}` with `x_j = -L/2 + j dx` and
//! `ξ_m = m dξ`, `m ∈ {-n/2, …, n/2-1}`. Coefficients are stored in FFT order
//! (index `i` holds mode `i` for `i < n/2` and mode `i - n` otherwise).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform periodic discretization shared by every field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyGrid {
    n_modes: usize,
    length: f64,
}

impl FrequencyGrid {
    pub fn new(n_modes: usize, length: f64) -> Result<Self> {
        if n_modes < 8 || n_modes % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_modes must be even and >= 8, got {n_modes}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n_modes, length })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_modes as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest representable |ξ| (the Nyquist frequency).
    pub fn xi_max(&self) -> f64 {
        self.n_modes as f64 / 2.0 * self.dxi()
    }

    /// Mode number held at storage index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        mode_of(i, self.n_modes)
    }

    /// Storage index of mode `m`, if representable.
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n_modes / 2) as i64;
        if m < -half || m >= half {
            None
        } else {
            Some(m.rem_euclid(self.n_modes as i64) as usize)
        }
    }

    /// Frequency at storage index `i`.
    pub fn xi(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_modes).map(|i| self.xi(i)).collect()
    }

    /// Physical node `x_j = -L/2 + j dx`.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_modes).map(|j| self.x(j)).collect()
    }

    /// Index of the node at `-x_j` (the grid is symmetric modulo the period).
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_modes - j) % self.n_modes
    }
}

fn mode_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn fft_pair(n: usize) -> FftPair {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<usize, FftPair>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    if let Some(pair) = plans.get(&n) {
        return pair.clone();
    }
    let pair = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
    plans.insert(n, pair.clone());
    pair
}

/// Samples on the `n`-point grid of period `length` → coefficients (FFT order).
/// `n` must be even so that the `(-1)^m` shift is index-parity.
pub(crate) fn samples_to_coeffs(samples: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft_pair(n).0.process(&mut buf);
    let dx = length / n as f64;
    for (i, c) in buf.iter_mut().enumerate() {
        let sign = if i % 2 == 0 { dx } else { -dx };
        *c *= sign;
    }
    buf
}

/// Coefficients (FFT order) → samples on the `n`-point grid of period `length`.
pub(crate) fn coeffs_to_samples(coeffs: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = coeffs.len();
    let inv_l = 1.0 / length;
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { c * inv_l } else { -c * inv_l })
        .collect();
    fft_pair(n).1.process(&mut buf);
    buf
}

/// Copies the modes of an `n`-mode array into a zero-padded `big`-mode array.
fn pad_coeffs(coeffs: &[Complex64], big: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![ZERO; big];
    for (i, c) in coeffs.iter().enumerate() {
        let m = mode_of(i, n);
        out[m.rem_euclid(big as i64) as usize] = *c;
    }
    out
}

/// Restricts a `big`-mode array to the `n` base modes.
fn truncate_coeffs(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let big = coeffs.len() as i64;
    (0..n)
        .map(|i| coeffs[mode_of(i, n).rem_euclid(big) as usize])
        .collect()
}

/// Half-open frequency band `[lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "band requires lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn all() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// `P_{<n}`: the band `[0, n)`.
    pub fn below(n: f64) -> Result<Self> {
        Self::new(0.0, n)
    }

    /// `[n, ∞)`.
    pub fn at_least(n: f64) -> Result<Self> {
        Self::new(n, f64::INFINITY)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi >= self.lo && xi < self.hi
    }
}

/// A complex function on the periodic grid, held by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: FrequencyGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.n_modes()],
        }
    }

    /// Wraps coefficients given in FFT order.
    pub fn from_coeffs(grid: FrequencyGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(Error::LengthMismatch {
                expected: grid.n_modes(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("spectral coefficient".into()));
        }
        Ok(Self { grid, coeffs })
    }

    /// Builds a field whose coefficient at `ξ_m` is `f(ξ_m)`.
    pub fn from_spectrum(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let coeffs = (0..grid.n_modes()).map(|i| f(grid.xi(i))).collect();
        Self::from_coeffs(grid, coeffs)
    }

    /// Samples `f` at the physical nodes and transforms.
    pub fn from_function(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples: Vec<Complex64> = (0..grid.n_modes()).map(|j| f(grid.x(j))).collect();
        forward_transform(&samples, grid)
    }

    /// A single Fourier mode `e^{iξ_m x}` scaled so that its coefficient is `value`.
    pub fn single_mode(grid: FrequencyGrid, m: i64, value: Complex64) -> Result<Self> {
        let idx = grid.index_of_mode(m).ok_or_else(|| {
            Error::InvalidParameter(format!("mode {m} not representable on the grid"))
        })?;
        let mut field = Self::zeros(grid);
        field.coeffs[idx] = value;
        Ok(field)
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `m` (zero if not representable).
    pub fn coeff_of_mode(&self, m: i64) -> Complex64 {
        self.grid
            .index_of_mode(m)
            .map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn samples(&self) -> Vec<Complex64> {
        inverse_transform(self)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `‖û‖_{L²_ξ}` by the Riemann sum over grid frequencies.
    pub fn spectral_l2(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dxi()).sqrt()
    }

    /// Physical `‖u‖_{L²_x}`; equals `spectral_l2 / √(2π)` by Parseval.
    pub fn l2(&self) -> f64 {
        self.spectral_l2() / (2.0 * PI).sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: Complex64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + factor * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Maps every coefficient through `f(ξ, c)`.
    pub(crate) fn map_spectrum(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| f(self.grid.xi(i), *c))
                .collect(),
        }
    }

    /// Applies `f` pointwise in physical space on the base grid.
    pub fn map_pointwise(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let samples: Vec<Complex64> = self.samples().into_iter().map(f).collect();
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("pointwise map produced a non-finite sample".into()));
        }
        forward_transform(&samples, self.grid)
    }
}

/// `c_m = dx Σ_j s_j e^{-iξ_m x_j}`.
pub fn forward_transform(samples: &[Complex64], grid: FrequencyGrid) -> Result<SpectralField> {
    if samples.len() != grid.n_modes() {
        return Err(Error::LengthMismatch {
            expected: grid.n_modes(),
            got: samples.len(),
        });
    }
    SpectralField::from_coeffs(grid, samples_to_coeffs(samples, grid.length()))
}

/// `u(x_j) = (1/L) Σ_m c_m e^{iξ_m x_j}`; exact inverse of [`forward_transform`].
pub fn inverse_transform(field: &SpectralField) -> Vec<Complex64> {
    coeffs_to_samples(&field.coeffs, field.grid.length())
}

/// Multiplies each coefficient by `m(ξ)`.
pub fn apply_multiplier(
    field: &SpectralField,
    multiplier: impl Fn(f64) -> Complex64,
) -> Result<SpectralField> {
    let grid = field.grid;
    let mut coeffs = Vec::with_capacity(grid.n_modes());
    for (i, c) in field.coeffs.iter().enumerate() {
        let xi = grid.xi(i);
        let m = multiplier(xi);
        if !m.is_finite() {
            return Err(Error::NonFinite(format!("multiplier at ξ = {xi}")));
        }
        coeffs.push(m * c);
    }
    Ok(SpectralField { grid, coeffs })
}

/// Sharp projection onto `band`: coefficients outside `[lo, hi)` are zeroed.
pub fn project_band(field: &SpectralField, band: Band) -> SpectralField {
    field.map_spectrum(|xi, c| if band.contains(xi) { c } else { ZERO })
}

/// `u*(x) = conj(u(-x))`, which acts on coefficients as conjugation at the
/// same frequency.
pub fn nonlocal_conjugate(field: &SpectralField) -> SpectralField {
    SpectralField {
        grid: field.grid,
        coeffs: field.coeffs.iter().map(|c| c.conj()).collect(),
    }
}

/// Ordinary pointwise conjugate `conj(u(x))`: `c_m ↦ conj(c_{-m})`.
/// The Nyquist mode maps onto itself.
pub fn complex_conjugate(field: &SpectralField) -> SpectralField {
    let grid = field.grid;
    let coeffs = (0..grid.n_modes())
        .map(|i| {
            let m = grid.mode(i);
            let j = grid.index_of_mode(-m).unwrap_or(i);
            field.coeffs[j].conj()
        })
        .collect();
    SpectralField { grid, coeffs }
}

/// Zero-padded size for an alias-free `p`-fold product of `n`-mode fields.
pub fn padded_size(n: usize, p: usize) -> usize {
    let m = (p + 1) * n / 2;
    m + m % 2
}

/// Fourier coefficients of the pointwise product of 2–5 fields, exact on the
/// retained modes.
pub fn dealiased_product(fields: &[&SpectralField]) -> Result<SpectralField> {
    let p = fields.len();
    if !(2..=5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "dealiased product takes 2 to 5 factors, got {p}"
        )));
    }
    let grid = fields[0].grid;
    if fields.iter().any(|f| f.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let n = grid.n_modes();
    let big = padded_size(n, p);
    let length = grid.length();
    let mut acc = coeffs_to_samples(&pad_coeffs(&fields[0].coeffs, big), length);
    for f in &fields[1..] {
        let s = coeffs_to_samples(&pad_coeffs(&f.coeffs, big), length);
        for (a, b) in acc.iter_mut().zip(s) {
            *a *= b;
        }
    }
    let fine = samples_to_coeffs(&acc, length);
    SpectralField::from_coeffs(grid, truncate_coeffs(&fine, n))
}

/// `∂ₓ`: multiplies by `iξ` and zeroes the Nyquist mode.
pub fn derivative(field: &SpectralField) -> SpectralField {
    let nyquist = field.grid.n_modes() / 2;
    let mut out = field.map_spectrum(|xi, c| Complex64::new(0.0, xi) * c);
    out.coeffs[nyquist] = ZERO;
    out
}

/// Result of the two-sided primitive, with the decay diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub field: SpectralField,
    /// The density was not decayed at the domain ends, so the endpoints are
    /// poor proxies for ±∞.
    pub boundary_warning: bool,
}

/// Relative size of the density at the domain ends above which the primitive
/// is flagged.
pub const BOUNDARY_DECAY_THRESHOLD: f64 = 1e-8;

/// `∂ₓ⁻¹ g = ½(∫_{-∞}^x g − ∫_x^∞ g)` with the domain ends standing in for ±∞.
///
/// The cumulative integrals are those of the trigonometric interpolant of `g`
/// over `[-L/2, x]`: the mean mode integrates to a linear ramp and every other
/// mode to `c_m (e^{iξ_m x} − e^{iξ_m x_0}) / (iξ_m)`. A nonzero total mass
/// therefore shows up as a jump of the returned samples across the period.
pub fn antiderivative_symmetric(field: &SpectralField) -> Primitive {
    let grid = field.grid;
    let n = grid.n_modes();
    let length = grid.length();
    let nyquist = n / 2;

    let samples = field.samples();
    let peak = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let edge = samples[0].norm().max(samples[n - 1].norm());
    let boundary_warning = peak > 0.0 && edge > BOUNDARY_DECAY_THRESHOLD * peak;

    let total = field.coeffs[0];
    let mut oscillatory = field.map_spectrum(|xi, c| {
        if xi == 0.0 {
            ZERO
        } else {
            c / Complex64::new(0.0, xi)
        }
    });
    oscillatory.coeffs[nyquist] = ZERO;
    let h = oscillatory.samples();
    let h0 = h[0];
    let x0 = grid.x(0);
    let values: Vec<Complex64> = h
        .iter()
        .enumerate()
        .map(|(j, hj)| total * ((grid.x(j) - x0) / length - 0.5) + hj - h0)
        .collect();
    let field = SpectralField {
        grid,
        coeffs: samples_to_coeffs(&values, length),
    };
    Primitive {
        field,
        boundary_warning,
    }
}

/// Fraction of the spectral mass `Σ|c_m|²` sitting at `ξ < threshold`.
/// A mode lying exactly on the threshold counts half, so the measure of a
/// symmetric spectrum split at zero is exactly one half. `0/0` is `0`.
pub fn spectral_mass_fraction_below(field: &SpectralField, threshold: f64) -> f64 {
    let grid = field.grid;
    let tie = 1e-12 * grid.dxi();
    let mut below = 0.0;
    let mut total = 0.0;
    for (i, c) in field.coeffs.iter().enumerate() {
        let xi = grid.xi(i);
        let m = c.norm_sqr();
        total += m;
        if (xi - threshold).abs() <= tie {
            below += 0.5 * m;
        } else if xi < threshold {
            below += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        below / total
    }
}

/// Trapezoid quadrature `dx Σ_j f(x_j)` of the physical samples.
pub fn integrate(field: &SpectralField) -> Complex64 {
    // Equals the mean coefficient exactly.
    field.coeffs[0]
}

/// `dx Σ_j a_j b_j` over physical samples.
pub fn integrate_product(a: &[Complex64], b: &[Complex64], dx: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<Complex64>() * dx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(FrequencyGrid::new(63, 1.0).is_err());
        assert!(FrequencyGrid::new(6, 1.0).is_err());
        assert!(FrequencyGrid::new(64, 0.0).is_err());
        let g = FrequencyGrid::new(64, 10.0).unwrap();
        assert!((g.dx() * g.dxi() * 64.0 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let g = FrequencyGrid::new(32, 5.0).unwrap();
        let f = forward_transform(&vec![ZERO; 32], g).unwrap();
        assert!(f.coeffs().iter().all(|c| *c == ZERO));
    }

    #[test]
    fn forward_rejects_length_mismatch() {
        let g = FrequencyGrid::new(32, 5.0).unwrap();
        assert!(matches!(
            forward_transform(&vec![ZERO; 31], g),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn plane_wave_has_single_coefficient() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let f = SpectralField::from_function(g, |x| Complex64::from_polar(1.0, x)).unwrap();
        for i in 0..64 {
            let expected = if g.mode(i) == 1 { c(2.0 * PI, 0.0) } else { ZERO };
            assert!((f.coeffs()[i] - expected).norm() < 1e-12, "mode {}", g.mode(i));
        }
    }

    #[test]
    fn single_mode_inverse() {
        let g = FrequencyGrid::new(16, 3.0).unwrap();
        let f = SpectralField::single_mode(g, 2, c(0.5, -1.0)).unwrap();
        let s = f.samples();
        for (j, sj) in s.iter().enumerate() {
            let expected = c(0.5, -1.0) / 3.0 * Complex64::from_polar(1.0, g.xi(2) * g.x(j));
            assert!((sj - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn multiplier_examples() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let f = SpectralField::single_mode(g, 1, c(1.0, 0.0)).unwrap();
        let id = apply_multiplier(&f, |_| c(1.0, 0.0)).unwrap();
        assert_eq!(id, f);
        let d = apply_multiplier(&f, |xi| c(0.0, xi)).unwrap();
        assert!((d.coeff_of_mode(1) - c(0.0, 1.0)).norm() < 1e-15);
        let f2 = SpectralField::single_mode(g, 2, c(1.0, 0.0)).unwrap();
        let w = apply_multiplier(&f2, |xi| c(2f64.powf(-xi.abs()), 0.0)).unwrap();
        assert!((w.coeff_of_mode(2) - c(0.25, 0.0)).norm() < 1e-15);
        assert!(apply_multiplier(&f, |xi| c(1.0 / xi, 0.0)).is_err());
    }

    #[test]
    fn band_projection() {
        assert!(Band::new(1.0, 1.0).is_err());
        let g = FrequencyGrid::new(64, 20.0).unwrap();
        let f = SpectralField::from_spectrum(g, |xi| c((-xi * xi).exp(), xi)).unwrap();
        assert_eq!(project_band(&f, Band::all()), f);
        let low = project_band(&f, Band::below(1.0).unwrap());
        let high = project_band(&low, Band::at_least(1.0).unwrap());
        assert!(high.coeffs().iter().all(|c| *c == ZERO));
        assert_eq!(project_band(&low, Band::below(1.0).unwrap()), low);
    }

    #[test]
    fn conjugate_fixes_real_even_and_modulated_even() {
        let g = FrequencyGrid::new(256, 40.0).unwrap();
        let gauss = SpectralField::from_function(g, |x| c((-x * x / 2.0).exp(), 0.0)).unwrap();
        let d = nonlocal_conjugate(&gauss).sub(&gauss).unwrap();
        assert!(d.spectral_l2() < 1e-13 * gauss.spectral_l2());
        let modulated = SpectralField::from_function(g, |x| {
            Complex64::from_polar((-x * x / 2.0).exp(), x)
        })
        .unwrap();
        let d = nonlocal_conjugate(&modulated).sub(&modulated).unwrap();
        assert!(d.spectral_l2() < 1e-13 * modulated.spectral_l2());
    }

    #[test]
    fn conjugate_matches_reflection_in_physical_space() {
        let g = FrequencyGrid::new(32, 7.0).unwrap();
        let f = SpectralField::from_function(g, |x| c(x.sin() + 0.3, (2.0 * x).cos() * x)).unwrap();
        let direct = f.samples();
        let conj = nonlocal_conjugate(&f).samples();
        for j in 0..32 {
            let expected = direct[g.mirror_index(j)].conj();
            assert!((conj[j] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn product_with_constant_one_is_identity() {
        let g = FrequencyGrid::new(64, 10.0).unwrap();
        let one = SpectralField::from_function(g, |_| c(1.0, 0.0)).unwrap();
        let f = SpectralField::from_spectrum(g, |xi| c((-xi * xi).exp(), 0.2 * xi)).unwrap();
        let p = dealiased_product(&[&f, &one]).unwrap();
        assert!(p.sub(&f).unwrap().spectral_l2() < 1e-13 * f.spectral_l2());
    }

    #[test]
    fn plane_wave_cubed() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let e = SpectralField::from_function(g, |x| Complex64::from_polar(1.0, x)).unwrap();
        let p = dealiased_product(&[&e, &e, &e]).unwrap();
        for i in 0..64 {
            let expected = if g.mode(i) == 3 { c(2.0 * PI, 0.0) } else { ZERO };
            assert!((p.coeffs()[i] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn product_rejects_bad_arity_and_grids() {
        let g = FrequencyGrid::new(16, 1.0).unwrap();
        let h = FrequencyGrid::new(32, 1.0).unwrap();
        let a = SpectralField::zeros(g);
        let b = SpectralField::zeros(h);
        assert!(dealiased_product(&[&a]).is_err());
        assert!(dealiased_product(&[&a, &a, &a, &a, &a, &a]).is_err());
        assert_eq!(dealiased_product(&[&a, &b]), Err(Error::GridMismatch));
    }

    #[test]
    fn derivative_examples() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let k = SpectralField::from_function(g, |_| c(3.0, -1.0)).unwrap();
        assert!(derivative(&k).spectral_l2() < 1e-14);
        let e = SpectralField::single_mode(g, 1, c(1.0, 0.0)).unwrap();
        assert!((derivative(&e).coeff_of_mode(1) - c(0.0, 1.0)).norm() < 1e-15);
        let nyq = SpectralField::single_mode(g, -32, c(1.0, 0.0)).unwrap();
        assert_eq!(derivative(&nyq).spectral_l2(), 0.0);
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = FrequencyGrid::new(512, 40.0).unwrap();
        let f = SpectralField::from_function(g, |x| c((-x * x / 2.0).exp(), 0.0)).unwrap();
        let d = derivative(&f).samples();
        for (j, dj) in d.iter().enumerate() {
            let x = g.x(j);
            assert!((dj - c(-x * (-x * x / 2.0).exp(), 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn primitive_of_zero_and_gaussian() {
        let g = FrequencyGrid::new(512, 40.0).unwrap();
        let z = antiderivative_symmetric(&SpectralField::zeros(g));
        assert_eq!(z.field.spectral_l2(), 0.0);
        assert!(!z.boundary_warning);

        let f = SpectralField::from_function(g, |x| c((-x * x).exp(), 0.0)).unwrap();
        let p = antiderivative_symmetric(&f);
        assert!(!p.boundary_warning);
        let s = p.field.samples();
        // x_{n/2} = 0
        assert!(s[256].norm() < 1e-14);
        let half_mass = PI.sqrt() / 2.0;
        assert!((s[511] - c(half_mass, 0.0)).norm() < 1e-12);
        assert!((s[0] + c(half_mass, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn primitive_flags_undecayed_density() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let f = SpectralField::from_function(g, |x| c(1.0 + x.cos(), 0.0)).unwrap();
        assert!(antiderivative_symmetric(&f).boundary_warning);
    }
}
