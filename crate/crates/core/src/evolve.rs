//! Time evolution: an integrating-factor (Lawson) RK4 stepper and an
//! independent Duhamel/Picard fixed-point engine.
//!
//! Both work with `u_t = i∂²ₓu + 𝒩(u)` where `𝒩` is
//! [`nonlinear_rhs`](crate::equations::nonlinear_rhs). The free flow
//! `e^{it∂²ₓ}` has symbol `e^{-itξ²}`.

use num_complex::Complex64;

use crate::equations::{self, EquationSpec};
use crate::error::{Error, Result};
use crate::spaces;
use crate::spectral::SpectralField;

/// Upper bound on `dt · ξ_max²` accepted by [`step`].
pub const CFL_LIMIT: f64 = 50.0;

/// `e^{it∂²ₓ}`: multiplies coefficients by `e^{-itξ²}`.
pub fn linear_propagator(field: &SpectralField, t: f64) -> SpectralField {
    if t == 0.0 {
        return field.clone();
    }
    field.map_spectrum(|xi, c| c * Complex64::from_polar(1.0, -t * xi * xi))
}

fn as_blow_up(err: Error, time: f64) -> Error {
    match err {
        Error::NonFinite(_) => Error::BlowUp { time },
        other => other,
    }
}

/// One Lawson RK4 step for `u_t = i∂²ₓu + nonlinear(u)`.
///
/// Non-finite stages or output yield [`Error::BlowUp`] with `time = dt`
/// (relative to the start of the step).
pub fn step_with<F>(field: &SpectralField, dt: f64, nonlinear: F) -> Result<SpectralField>
where
    F: Fn(&SpectralField) -> Result<SpectralField>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let h = dt;
    let half = |f: &SpectralField| linear_propagator(f, 0.5 * h);
    let full = |f: &SpectralField| linear_propagator(f, h);
    let n = |f: &SpectralField| nonlinear(f).map_err(|e| as_blow_up(e, dt));
    let hc = Complex64::from(h);

    let k1 = n(field)?;
    let u_half = half(field);
    let k2 = n(&half(&field.axpy(0.5 * hc, &k1)?))?;
    let k3 = n(&u_half.axpy(0.5 * hc, &k2)?)?;
    let k4 = n(&full(field).axpy(hc, &half(&k3))?)?;

    let mids = half(&k2.add(&k3)?);
    let incr = full(&k1).axpy(2.0.into(), &mids)?.add(&k4)?;
    let out = full(field).axpy(hc / 6.0, &incr)?;
    if !out.is_finite() {
        return Err(Error::BlowUp { time: dt });
    }
    Ok(out)
}

/// One Lawson RK4 step of the equation `spec`.
pub fn step(field: &SpectralField, dt: f64, spec: &EquationSpec) -> Result<SpectralField> {
    let xi_max = field.grid().xi_max();
    if dt * xi_max * xi_max > CFL_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "dt·ξ_max² = {:.3} exceeds {CFL_LIMIT}",
            dt * xi_max * xi_max
        )));
    }
    step_with(field, dt, |u| equations::nonlinear_rhs(u, spec))
}

/// What to record at every trajectory sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSpec {
    /// Threshold for [`equations::support_leakage`].
    pub eps0: f64,
    /// `(s, σ)` pairs for which `‖u(t)‖_{E^s_σ}` is recorded.
    pub norms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub mass: Complex64,
    pub energy: Complex64,
    pub support_leakage: f64,
    pub norms: Vec<f64>,
}

impl Diagnostics {
    pub fn measure(field: &SpectralField, alpha: f64, spec: &DiagnosticsSpec) -> Result<Self> {
        let norms = spec
            .norms
            .iter()
            .map(|&(s, sigma)| spaces::esigma_norm(field, s, sigma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mass: equations::mass(field),
            energy: equations::energy(field, alpha),
            support_leakage: equations::support_leakage(field, spec.eps0),
            norms,
        })
    }
}

/// Sampled solution with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostics>,
    /// Time at which the solution stopped being finite, if it did.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial time")
    }
}

/// Number of steps and the adjusted step so that `n · dt = t_final` exactly.
pub fn step_count(t_final: f64, dt: f64) -> (usize, f64) {
    if t_final == 0.0 {
        return (0, dt);
    }
    let ratio = t_final / dt;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    }
    .max(1.0) as usize;
    (n, t_final / n as f64)
}

/// Integrates `u0` to `t_final`, recording every `sample_every` steps and at
/// the final time. A blow-up truncates the trajectory at the last finite
/// state and is reported through [`Trajectory::blow_up`].
pub fn solve(
    u0: &SpectralField,
    t_final: f64,
    dt: f64,
    spec: &EquationSpec,
    sample_every: usize,
    diagnostics: &DiagnosticsSpec,
) -> Result<Trajectory> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("final time must be >= 0, got {t_final}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let sample_every = sample_every.max(1);
    let (n_steps, dt) = step_count(t_final, dt);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        diagnostics: vec![Diagnostics::measure(u0, spec.alpha, diagnostics)?],
        blow_up: None,
    };
    let mut u = u0.clone();
    for k in 1..=n_steps {
        let t = if k == n_steps { t_final } else { k as f64 * dt };
        match step(&u, dt, spec) {
            Ok(next) => u = next,
            Err(Error::BlowUp { .. }) => {
                traj.blow_up = Some(t);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        if k % sample_every == 0 || k == n_steps {
            traj.times.push(t);
            traj.diagnostics
                .push(Diagnostics::measure(&u, spec.alpha, diagnostics)?);
            traj.states.push(u.clone());
        }
    }
    Ok(traj)
}

/// Order estimate `log₂(‖u_h − u_{h/2}‖ / ‖u_{h/2} − u_{h/4}‖)` at `t_final`.
pub fn self_convergence_order(
    u0: &SpectralField,
    t_final: f64,
    dt: f64,
    spec: &EquationSpec,
) -> Result<f64> {
    let run = |h: f64| -> Result<SpectralField> {
        let (n, h) = step_count(t_final, h);
        let mut u = u0.clone();
        for _ in 0..n {
            u = step(&u, h, spec)?;
        }
        Ok(u)
    };
    let coarse = run(dt)?;
    let mid = run(dt / 2.0)?;
    let fine = run(dt / 4.0)?;
    let e1 = coarse.sub(&mid)?.l2();
    let e2 = mid.sub(&fine)?.l2();
    Ok((e1 / e2).log2())
}

/// Minimum number of time nodes for the Duhamel quadrature.
pub const MIN_TIME_NODES: usize = 9;

/// Outcome of a Picard iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// `sup_n ‖u^{k+1}(t_n) − u^k(t_n)‖₂` for each application of the map.
    pub iterates_distances: Vec<f64>,
    /// Successive ratios of the nonzero distances.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub t_used: f64,
}

fn check_time_nodes(n_nodes: usize) -> Result<()> {
    if n_nodes < MIN_TIME_NODES || n_nodes % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Duhamel quadrature needs an odd number of time nodes >= {MIN_TIME_NODES}, got {n_nodes}"
        )));
    }
    Ok(())
}

/// Uniform nodes `t_n = n T / (N − 1)`.
pub fn time_nodes(t_final: f64, n_nodes: usize) -> Vec<f64> {
    let h = t_final / (n_nodes - 1) as f64;
    (0..n_nodes).map(|n| n as f64 * h).collect()
}

/// `e^{it_nΔ} u0` at every node.
pub fn free_evolution(u0: &SpectralField, t_final: f64, n_nodes: usize) -> Vec<SpectralField> {
    time_nodes(t_final, n_nodes)
        .into_iter()
        .map(|t| linear_propagator(u0, t))
        .collect()
}

/// Quadrature weights (in units of the node spacing) for `∫_0^{t_n}` on the
/// uniform nodes `0..=n`: composite Simpson for even `n`, Simpson followed by
/// the 3/8 rule for odd `n ≥ 3`, and the quadratic through nodes 0, 1, 2 for
/// `n = 1`.
fn cumulative_weights(n: usize) -> Vec<(usize, f64)> {
    match n {
        0 => Vec::new(),
        1 => vec![(0, 5.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        _ => {
            let mut w = vec![0.0; n + 1];
            let simpson_end = if n % 2 == 0 { n } else { n - 3 };
            for k in (0..simpson_end).step_by(2) {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
            }
            if n % 2 == 1 {
                let b = n - 3;
                w[b] += 3.0 / 8.0;
                w[b + 1] += 9.0 / 8.0;
                w[b + 2] += 9.0 / 8.0;
                w[b + 3] += 3.0 / 8.0;
            }
            w.into_iter().enumerate().collect()
        }
    }
}

/// One application of the Duhamel map
///
/// ```text
/// (𝒯u)(t_n) = e^{it_nΔ} u0 + ∫_0^{t_n} e^{i(t_n−τ)Δ} 𝒩(u(τ)) dτ
/// ```
///
/// on a uniform node set covering `[0, T]`.
pub fn picard_map(
    current: &[SpectralField],
    u0: &SpectralField,
    t_final: f64,
    spec: &EquationSpec,
) -> Result<Vec<SpectralField>> {
    let n_nodes = current.len();
    check_time_nodes(n_nodes)?;
    if current.iter().any(|u| u.grid() != u0.grid()) {
        return Err(Error::GridMismatch);
    }
    let times = time_nodes(t_final, n_nodes);
    let h = times[1] - times[0];
    // e^{-iτ_jΔ} 𝒩(u_j)
    let pulled_back = current
        .iter()
        .zip(&times)
        .map(|(u, &t)| Ok(linear_propagator(&equations::nonlinear_rhs(u, spec)?, -t)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(n_nodes);
    for (n, &t) in times.iter().enumerate() {
        let mut acc = u0.clone();
        for (j, w) in cumulative_weights(n) {
            acc = acc.axpy(Complex64::from(w * h), &pulled_back[j])?;
        }
        let next = linear_propagator(&acc, t);
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("Duhamel iterate at t = {t}")));
        }
        out.push(next);
    }
    Ok(out)
}

fn sup_distance(a: &[SpectralField], b: &[SpectralField]) -> Result<f64> {
    let mut d: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        d = d.max(x.sub(y)?.l2());
    }
    Ok(d)
}

/// Iterates [`picard_map`] from the free solution. Stops on convergence
/// (`distance ≤ tol`), after `n_iter` applications, after three consecutive
/// growing distances, or when an iterate stops being finite.
pub fn picard_solve(
    u0: &SpectralField,
    t_final: f64,
    spec: &EquationSpec,
    n_nodes: usize,
    n_iter: usize,
    tol: f64,
) -> Result<(Vec<SpectralField>, PicardReport)> {
    check_time_nodes(n_nodes)?;
    if n_iter == 0 {
        return Err(Error::InvalidParameter("Picard needs at least one iteration".into()));
    }
    let mut current = free_evolution(u0, t_final, n_nodes);
    let mut report = PicardReport {
        iterates_distances: Vec::new(),
        contraction_ratios: Vec::new(),
        converged: false,
        t_used: t_final,
    };
    let mut growing = 0;
    for _ in 0..n_iter {
        let next = match picard_map(&current, u0, t_final, spec) {
            Ok(next) => next,
            Err(Error::NonFinite(_)) => break,
            Err(e) => return Err(e),
        };
        let d = sup_distance(&next, &current)?;
        if !d.is_finite() {
            break;
        }
        if let Some(&prev) = report.iterates_distances.last() {
            if prev > 0.0 && d > 0.0 {
                report.contraction_ratios.push(d / prev);
            }
            growing = if d > prev { growing + 1 } else { 0 };
        }
        report.iterates_distances.push(d);
        current = next;
        if d <= tol {
            report.converged = true;
            break;
        }
        if growing >= 3 {
            break;
        }
    }
    Ok((current, report))
}

/// Worst contraction ratio over the first few Picard applications, ignoring
/// distances already at roundoff. Divergent maps report `∞`.
pub fn contraction_ratio(
    u0: &SpectralField,
    t_final: f64,
    spec: &EquationSpec,
    n_nodes: usize,
) -> Result<f64> {
    let (_, report) = picard_solve(u0, t_final, spec, n_nodes, 4, 0.0)?;
    let d = &report.iterates_distances;
    if d.len() < 4 && !report.converged {
        // stopped early: the iterates became non-finite
        if d.len() < 2 || d.windows(2).any(|w| w[1] > w[0]) {
            return Ok(f64::INFINITY);
        }
    }
    let floor = 1e-13 * u0.l2();
    let mut worst: f64 = 0.0;
    for w in d.windows(2) {
        if w[0] <= floor {
            break;
        }
        worst = worst.max(w[1] / w[0]);
    }
    Ok(worst)
}

/// Largest `T` (to bisection accuracy) with contraction ratio at most
/// `target`, or `None` when no such `T` is found within 40 halvings or the
/// window does not close within 40 doublings of `t_start`.
pub fn contraction_window(
    u0: &SpectralField,
    spec: &EquationSpec,
    n_nodes: usize,
    target: f64,
    t_start: f64,
    bisections: usize,
) -> Result<Option<f64>> {
    let contracts = |t: f64| -> Result<bool> { Ok(contraction_ratio(u0, t, spec, n_nodes)? <= target) };
    let (mut lo, mut hi);
    if contracts(t_start)? {
        lo = t_start;
        hi = 2.0 * t_start;
        let mut tries = 0;
        while contracts(hi)? {
            lo = hi;
            hi *= 2.0;
            tries += 1;
            if tries >= 40 {
                return Ok(None);
            }
        }
    } else {
        hi = t_start;
        lo = 0.5 * t_start;
        let mut tries = 0;
        while !contracts(lo)? {
            hi = lo;
            lo *= 0.5;
            tries += 1;
            if tries >= 40 {
                return Ok(None);
            }
        }
    }
    for _ in 0..bisections {
        let mid = (lo * hi).sqrt();
        if contracts(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyGrid;
    use std::f64::consts::PI;

    #[test]
    fn propagator_examples() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        let f = SpectralField::single_mode(g, 2, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(linear_propagator(&f, 0.0), f);
        let p = linear_propagator(&f, PI / 4.0);
        assert!((p.coeff_of_mode(2) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn cumulative_weights_integrate_cubics_exactly() {
        for n in 1..12 {
            let w = cumulative_weights(n);
            // the n = 1 rule is the integral of a quadratic interpolant
            let degree = if n == 1 { 3 } else { 4 };
            for p in 0..degree {
                let approx: f64 = w.iter().map(|&(j, wj)| wj * (j as f64).powi(p)).sum();
                let exact = (n as f64).powi(p + 1) / (p + 1) as f64;
                assert!((approx - exact).abs() < 1e-12 * exact.max(1.0), "n = {n}, p = {p}");
            }
        }
    }

    #[test]
    fn step_count_is_exact() {
        assert_eq!(step_count(1.0, 1e-3).0, 1000);
        let (n, dt) = step_count(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((dt * 4.0 - 1.0).abs() < 1e-15);
        assert_eq!(step_count(0.0, 0.1).0, 0);
    }

    #[test]
    fn time_node_validation() {
        let g = FrequencyGrid::new(16, 10.0).unwrap();
        let u0 = SpectralField::zeros(g);
        let spec = EquationSpec::nnls(1.0);
        let seq = free_evolution(&u0, 1.0, 8);
        assert!(picard_map(&seq, &u0, 1.0, &spec).is_err());
        let seq = free_evolution(&u0, 1.0, 10);
        assert!(picard_map(&seq, &u0, 1.0, &spec).is_err());
        assert!(picard_solve(&u0, 1.0, &spec, 9, 0, 1e-12).is_err());
    }
}
