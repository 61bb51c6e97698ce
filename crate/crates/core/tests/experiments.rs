mod common;

use nnls_core::equations::{CoefficientMode, EquationSpec};
use nnls_core::evolve::DiagnosticsSpec;
use nnls_core::experiments::{
    self, make_initial_data, DataParams, InflationEquation, InflationParams, PicardWindowParams,
    EXPERIMENTS,
};
use nnls_core::FrequencyGrid;

use common::*;

fn params(pairs: &[(&str, f64)]) -> DataParams {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn linear_flow_conserves_to_roundoff() {
    let u0 = gaussian(standard_grid(), 1.0);
    let r = experiments::exp_conservation(
        &EquationSpec::nnls(0.0),
        &u0,
        1.0,
        1e-2,
        1e-14,
        &DiagnosticsSpec::default(),
    )
    .unwrap();
    assert!(r.passed, "{}", r.to_record());
    assert!(r.series.is_some());
}

#[test]
fn conservation_rejects_gndnls() {
    let u0 = gaussian(standard_grid(), 1.0);
    let spec = EquationSpec::gndnls(1.0, 0.5);
    assert!(experiments::exp_conservation(&spec, &u0, 0.1, 1e-3, 1e-6, &DiagnosticsSpec::default()).is_err());
}

#[test]
fn gauge_is_trivial_without_nonlinearity() {
    let u0 = gaussian(standard_grid(), 0.5);
    let r = experiments::exp_gauge_equivalence(0.0, 0.0, &u0, 0.5, 1e-2, CoefficientMode::Printed, 1e-12)
        .unwrap();
    assert!(r.passed, "{}", r.to_record());
}

#[test]
fn linear_flow_keeps_halfline_support() {
    let grid = standard_grid();
    let u0 = make_initial_data(
        experiments::InitialDataKind::HalflineBump,
        &params(&[("lo", 1.0), ("hi", 2.0), ("power", 2.0)]),
        grid,
    )
    .unwrap();
    let r = experiments::exp_support_invariance(&EquationSpec::nnls(0.0), 1.0, &u0, 0.5, 1e-2, 1e-14)
        .unwrap();
    assert!(r.passed, "{}", r.to_record());
}

#[test]
fn derivative_nonlinearity_inflates_faster() {
    let nnls = experiments::exp_norm_inflation(&InflationParams::default()).unwrap();
    let ndnls = experiments::exp_norm_inflation(&InflationParams {
        equation: InflationEquation::Ndnls,
        ..InflationParams::default()
    })
    .unwrap();
    let a = nnls.real("slope").unwrap();
    let b = ndnls.real("slope").unwrap();
    assert!(b >= a, "NdNLS slope {b} below NNLS slope {a}");
}

#[test]
fn experiments_are_deterministic() {
    let u0 = gaussian(standard_grid(), 1.0);
    let spec = EquationSpec::nnls(1.0);
    let run = || {
        experiments::exp_conservation(&spec, &u0, 0.2, 1e-3, 1e-6, &DiagnosticsSpec::default()).unwrap()
    };
    assert!(run().same_outcome(&run()));
    let small = InflationParams {
        k_list: vec![8, 16],
        ..InflationParams::default()
    };
    let a = experiments::exp_norm_inflation(&small).unwrap();
    let b = experiments::exp_norm_inflation(&small).unwrap();
    assert!(a.same_outcome(&b));
}

#[test]
fn smaller_data_contracts_longer() {
    let grid = FrequencyGrid::new(256, 40.0).unwrap();
    let profile = make_initial_data(
        experiments::InitialDataKind::Gaussian,
        &params(&[("width", 4.0)]),
        grid,
    )
    .unwrap();
    let p = PicardWindowParams {
        amplitudes: vec![1.0, 0.5],
        ..PicardWindowParams::default()
    };
    let r = experiments::exp_picard_window(&profile, &EquationSpec::nnls(1.0), &p).unwrap();
    let w1 = r.real("window_a1").unwrap();
    let w2 = r.real("window_a0.5").unwrap();
    assert!(w2 > w1, "{}", r.to_record());
}

#[test]
fn registry_lists_every_experiment() {
    assert!(EXPERIMENTS.len() >= 6);
    for name in ["conservation", "gauge_equivalence", "norm_inflation", "picard_window"] {
        assert!(experiments::experiment_info(name).is_some(), "{name}");
    }
    assert!(experiments::experiment_info("nope").is_none());
}
