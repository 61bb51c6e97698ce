use std::time::Instant;

use nnls_core::evolve;
use nnls_core::experiments::{self, Bound, Check, ExperimentReport, Measurement, TimeSeries, Value};

use crate::config::RunConfig;

pub const DEFAULT_TOLERANCES: [(&str, f64); 4] = [
    ("conservation", 1e-6),
    ("gauge_equivalence", 1e-4),
    ("coefficient_adjudication", 1e-4),
    ("support_invariance", 1e-10),
];

fn tolerance(cfg: &RunConfig) -> f64 {
    cfg.experiment.tolerance.unwrap_or_else(|| {
        DEFAULT_TOLERANCES
            .iter()
            .find(|(name, _)| *name == cfg.experiment.name)
            .map_or(1e-6, |&(_, t)| t)
    })
}

/// Runs the experiment named in `cfg.experiment.name`.
pub fn run_experiment(cfg: &RunConfig) -> nnls_core::Result<ExperimentReport> {
    let e = &cfg.experiment;
    let ev = &cfg.evolution;
    let tol = tolerance(cfg);
    if e.name == "norm_inflation" {
        return experiments::exp_norm_inflation(&e.inflation);
    }
    let spec = cfg.equation()?;
    let u0 = cfg.initial_data()?;
    match e.name.as_str() {
        "conservation" => {
            experiments::exp_conservation(&spec, &u0, ev.t_final, ev.dt, tol, &cfg.diagnostics.spec())
        }
        "gauge_equivalence" => experiments::exp_gauge_equivalence(
            spec.alpha,
            spec.beta,
            &u0,
            ev.t_final,
            ev.dt,
            cfg.equation.gauged_coefficient_mode,
            tol,
        ),
        "coefficient_adjudication" => experiments::exp_coefficient_adjudication(
            &u0,
            ev.t_final,
            ev.dt,
            tol,
            e.discriminating_alpha,
        ),
        "support_invariance" => experiments::exp_support_invariance(
            &spec,
            cfg.diagnostics.eps0,
            &u0,
            ev.t_final,
            ev.dt,
            tol,
        ),
        "scaling_global" => experiments::exp_scaling_global(&u0, &spec, &e.scaling),
        "picard_window" => experiments::exp_picard_window(&u0, &spec, &e.picard),
        other => Err(nnls_core::Error::InvalidParameter(format!("unknown experiment `{other}`"))),
    }
}

fn real(name: &str, v: f64) -> Measurement {
    Measurement {
        name: name.into(),
        value: Value::Real(v),
    }
}

/// Plain evolution: trajectory diagnostics plus a finite-time check.
pub fn run_solve(cfg: &RunConfig) -> nnls_core::Result<ExperimentReport> {
    let start = Instant::now();
    let spec = cfg.equation()?;
    let u0 = cfg.initial_data()?;
    let ev = &cfg.evolution;
    let diagnostics = cfg.diagnostics.spec();
    let traj = evolve::solve(&u0, ev.t_final, ev.dt, &spec, ev.sample_every, &diagnostics)?;

    let first = &traj.diagnostics[0];
    let last = traj.diagnostics.last().expect("initial sample");
    let relative = |a: nnls_core::Complex64, b: nnls_core::Complex64| {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    };
    let mut measurements = vec![
        real("final_time", traj.final_time()),
        real("samples", traj.times.len() as f64),
        real("mass_drift", relative(last.mass, first.mass)),
        real("energy_drift", relative(last.energy, first.energy)),
        real("final_l2", traj.final_state().l2()),
    ];
    let mut notes = Vec::new();
    if let Some(t) = traj.blow_up {
        measurements.push(real("blow_up_time", t));
        notes.push(format!("trajectory stopped being finite at t = {t}"));
    }
    let checks = vec![Check {
        name: "finite_trajectory".into(),
        value: if traj.blow_up.is_some() { 1.0 } else { 0.0 },
        bound: Bound::AtMost,
        limit: 0.0,
    }];
    let passed = checks.iter().all(Check::passed);
    Ok(ExperimentReport {
        experiment: "solve".into(),
        claim_id: "evolution".into(),
        parameters: vec![
            ("equation".into(), spec.kind.to_string()),
            ("alpha".into(), spec.alpha.to_string()),
            ("beta".into(), spec.beta.to_string()),
            ("initial_data".into(), cfg.initial_data.kind.to_string()),
            ("n_modes".into(), cfg.grid.n_modes.to_string()),
            ("length".into(), cfg.grid.length.to_string()),
            ("T".into(), ev.t_final.to_string()),
            ("dt".into(), ev.dt.to_string()),
        ],
        measurements,
        checks,
        tolerance: 0.0,
        passed,
        notes,
        series: Some(TimeSeries::from_trajectory(&traj, &diagnostics)),
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Report standing in for a run that stopped with an error.
pub fn error_report(name: &str, error: &nnls_core::Error) -> ExperimentReport {
    ExperimentReport {
        experiment: name.into(),
        claim_id: experiments::experiment_info(name).map_or("evolution", |i| i.claim_id).into(),
        parameters: Vec::new(),
        measurements: Vec::new(),
        checks: Vec::new(),
        tolerance: 0.0,
        passed: false,
        notes: vec![format!("error: {error}")],
        series: None,
        runtime_seconds: 0.0,
    }
}
