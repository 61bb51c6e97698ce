#![allow(dead_code)]

use std::f64::consts::PI;

use nnls_core::{Complex64, FrequencyGrid, SpectralField};

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
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
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Adaptive quadrature over `[a, b]` split into unit panels, so narrow
/// features are not missed by the first coarse estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panels = ((b - a).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            adaptive_simpson(&f, lo, lo + h, tol / panels as f64)
        })
        .sum()
}

pub fn integrate_complex(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    Complex64::new(
        integrate(|x| f(x).re, a, b, tol),
        integrate(|x| f(x).im, a, b, tol),
    )
}

pub fn standard_grid() -> FrequencyGrid {
    FrequencyGrid::new(1024, 80.0).unwrap()
}

pub fn gaussian(grid: FrequencyGrid, amplitude: f64) -> SpectralField {
    SpectralField::from_function(grid, |x| Complex64::new(amplitude * (-x * x / 2.0).exp(), 0.0)).unwrap()
}

/// `√(2π) e^{-ξ²/2}`, the transform of `e^{-x²/2}`.
pub fn gaussian_transform(xi: f64) -> f64 {
    (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp()
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
