//! Property tests for the structural invariants of the discretization.

use nnls_core::equations::{self, EquationSpec};
use nnls_core::evolve::linear_propagator;
use nnls_core::gauge;
use nnls_core::spaces::{self, DyadicCutoff};
use nnls_core::spectral::{
    antiderivative_symmetric, dealiased_product, derivative, forward_transform, inverse_transform,
    nonlocal_conjugate, project_band, Band,
};
use nnls_core::{Complex64, FrequencyGrid, SpectralField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> FrequencyGrid {
    FrequencyGrid::new(256, 40.0).unwrap()
}

fn smooth_field(seed: u64, amplitude: f64) -> SpectralField {
    smooth_field_on(grid(), seed, amplitude)
}

/// A few modulated Gaussians with seeded random parameters.
fn smooth_field_on(grid: FrequencyGrid, seed: u64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.8..2.0),
                rng.random_range(-2.0..2.0),
            )
        })
        .collect();
    SpectralField::from_function(grid, |x| {
        bumps
            .iter()
            .map(|&(re, im, x0, w, k)| {
                Complex64::new(re, im)
                    * Complex64::from_polar(amplitude * (-(x - x0).powi(2) / (2.0 * w * w)).exp(), k * x)
            })
            .sum()
    })
    .unwrap()
}

/// Random spectrum on `[lo, hi]` with a smooth window.
fn halfline_field(seed: u64, lo: f64, hi: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid();
    let coeffs = (0..g.n_modes())
        .map(|i| {
            let xi = g.xi(i);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if xi >= lo && xi <= hi {
                c * (std::f64::consts::PI * (xi - lo) / (hi - lo)).sin().powi(2)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralField::from_coeffs(g, coeffs).unwrap()
}

fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
    a.sub(b).unwrap().spectral_l2() <= tol * a.spectral_l2().max(b.spectral_l2()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transform_round_trip(seed in any::<u64>()) {
        let u = smooth_field(seed, 1.0);
        let back = forward_transform(&inverse_transform(&u), u.grid()).unwrap();
        prop_assert!(close(&u, &back, 1e-12));
    }

    #[test]
    fn nonlocal_conjugate_is_a_multiplicative_involution(a in any::<u64>(), b in any::<u64>()) {
        let u = smooth_field(a, 1.0);
        let v = smooth_field(b, 1.0);
        prop_assert_eq!(nonlocal_conjugate(&nonlocal_conjugate(&u)), u.clone());
        let lhs = nonlocal_conjugate(&dealiased_product(&[&u, &v]).unwrap());
        let rhs = dealiased_product(&[&nonlocal_conjugate(&u), &nonlocal_conjugate(&v)]).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn halfline_supports_add(seed in any::<u64>(), a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let u = halfline_field(seed, a, a + 2.0);
        let v = halfline_field(seed.wrapping_add(1), b, b + 2.0);
        let uv = dealiased_product(&[&u, &v]).unwrap();
        prop_assert!(equations::support_leakage(&uv, a + b) <= 1e-12);
    }

    #[test]
    fn band_projection_is_an_orthogonal_projector(a in any::<u64>(), b in any::<u64>(), lo in -5.0f64..5.0, width in 0.1f64..5.0) {
        let band = Band::new(lo, lo + width).unwrap();
        let u = smooth_field(a, 1.0);
        let v = smooth_field(b, 1.0);
        let pu = project_band(&u, band);
        prop_assert_eq!(project_band(&pu, band), pu.clone());
        let pv = project_band(&v, band);
        let dot = |x: &SpectralField, y: &SpectralField| -> Complex64 {
            x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| p * q.conj()).sum()
        };
        let gap = (dot(&pu, &v) - dot(&u, &pv)).norm();
        prop_assert!(gap <= 1e-12 * u.spectral_l2() * v.spectral_l2());
        let below = project_band(&u, Band::new(f64::NEG_INFINITY, lo).unwrap());
        let above = project_band(&below, Band::at_least(lo).unwrap());
        prop_assert_eq!(above.spectral_l2(), 0.0);
    }

    #[test]
    fn derivative_undoes_the_primitive(seed in any::<u64>()) {
        // a derivative, so the primitive decays at both ends
        let g = derivative(&smooth_field(seed, 1.0));
        let f = antiderivative_symmetric(&g);
        let back = derivative(&f.field).samples();
        let g = g.samples();
        let n = g.len();
        let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for j in n / 10..9 * n / 10 {
            prop_assert!((back[j] - g[j]).norm() <= 1e-6 * scale);
        }
    }

    #[test]
    fn partition_of_unity(seed in any::<u64>()) {
        let cutoff = DyadicCutoff;
        let g = grid();
        let last = cutoff.last_block(g.xi_max());
        for xi in g.frequencies() {
            let total: f64 = (0..=last).map(|j| cutoff.phi(j, xi)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-14);
        }
        let u = smooth_field(seed, 1.0);
        let blocks = spaces::littlewood_paley_blocks(&u, &cutoff);
        let mut sum = SpectralField::zeros(g);
        for b in &blocks {
            sum = sum.add(b).unwrap();
        }
        prop_assert!(close(&sum, &u, 1e-12));
    }

    #[test]
    fn esigma_weights_are_monotone(seed in any::<u64>(), s1 in -2.0f64..0.5, ds in 0.0f64..1.5, sigma in -1.0f64..2.0) {
        let u = smooth_field(seed, 1.0);
        let a = spaces::esigma_norm(&u, s1, sigma).unwrap();
        let b = spaces::esigma_norm(&u, s1 + ds, sigma).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
        prop_assert_eq!(spaces::esigma_norm(&u, 0.0, sigma).unwrap(), spaces::hsigma_norm(&u, sigma).unwrap());
        let l2: f64 = (u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * u.grid().dxi()).sqrt();
        prop_assert!((spaces::esigma_norm(&u, 0.0, 0.0).unwrap() - l2).abs() <= 1e-14 * l2);
    }

    #[test]
    fn dilation_round_trip(seed in any::<u64>()) {
        let u = smooth_field(seed, 1.0);
        let back = spaces::dilate(&spaces::dilate(&u, 2.0).unwrap(), 0.5).unwrap();
        prop_assert!(close(&u, &back, 1e-10));
    }

    #[test]
    fn propagator_is_a_unitary_group(seed in any::<u64>(), t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
        let u = smooth_field(seed, 1.0);
        let a = linear_propagator(&linear_propagator(&u, t1), t2);
        let b = linear_propagator(&u, t1 + t2);
        prop_assert!(close(&a, &b, 1e-14 * (1.0 + (t1.abs() + t2.abs()) * 1e3)));
        prop_assert!((linear_propagator(&u, t1).l2() - u.l2()).abs() <= 1e-15 * u.l2() * 4.0);
    }

    #[test]
    fn gauge_preserves_the_density(seed in any::<u64>(), delta in -2.0f64..2.0) {
        // the gauge factor spreads modulated data over many harmonics
        let u = smooth_field_on(FrequencyGrid::new(1024, 40.0).unwrap(), seed, 0.5);
        prop_assert!(gauge::gauge_modulus_identity(&u, delta).unwrap() <= 1e-10);
        let v = gauge::gauge_forward(&u, delta).unwrap().field;
        let back = gauge::gauge_inverse(&v, delta).unwrap().field;
        prop_assert!(close(&u, &back, 1e-10));
    }

    #[test]
    fn linear_step_is_the_free_flow(seed in any::<u64>(), dt in 1e-4f64..1e-2) {
        let u = smooth_field(seed, 1.0);
        let stepped = nnls_core::evolve::step(&u, dt, &EquationSpec::nnls(0.0)).unwrap();
        prop_assert!(close(&stepped, &linear_propagator(&u, dt), 1e-14));
    }
}
