//! Curvature potential, evolution identities and bounds as executable
//! checks, and decay-rate estimation over trajectories.

use crate::error::{Error, Result};
use crate::fields::{ConformalState, ScalarField};
use crate::flow::{self, Trajectory};
use crate::numeric::pairwise_sum;
use crate::operators::{grad_norm_sq, laplacian_g, poisson_solve0_with_tol};
use crate::torsion::div_torsion_conformal;

/// Solvability threshold of the potential equation; a larger mean signals
/// broken Gauss-Bonnet upstream.
pub const POTENTIAL_SOLVABILITY_TOL: f64 = 1e-6;

/// Per-time-sample scalar observables.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub r: f64,
    pub volume: f64,
    /// Quadrature estimate of ∫R dμ (Gauss-Bonnet says 4πχ).
    pub gauss_bonnet: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sup_abs_r_dev: f64,
    pub sup_abs_f: f64,
    pub sup_grad_f_sq: f64,
    pub sup_grad_r_sq: f64,
    pub sup_abs_div_v: f64,
    /// max − min of the gauge defect D over the interval starting here
    /// (0 for the final sample).
    pub gauge_spread: f64,
    /// Relative error of the integrated div V identity at this sample.
    pub divv_identity_err: f64,
    /// Case-appropriate maximum-principle lower bound.
    pub bound_pass: bool,
}

/// Exponential fit of a positive series over a time window.
#[derive(Clone, Debug)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    /// RMS of the residual in log space.
    pub residual: f64,
    pub window: (f64, f64),
}

/// Solve Δ_g f = R − r, i.e. Δ₀ f = e^{u}(R − r), and normalize f to zero
/// mean with respect to dμ_g.
pub fn curvature_potential(state: &ConformalState) -> Result<ScalarField> {
    let total = flow::total_curvature(state)?;
    let r = flow::r_value(state);
    let rhs = total.zip_map(state.u(), |c, u| u.exp() * (c - r))?;
    let solution = poisson_solve0_with_tol(&rhs, POTENTIAL_SOLVABILITY_TOL)?;
    let mean = state.mean(&solution.field)?;
    Ok(solution.field.shift(-mean))
}

/// The gauge defect D = (f(t+dt) − f(t))/dt − Δ_g f − r·f evaluated with
/// midpoint fields; spatially constant up to O(dt) + discretization.
fn gauge_defect_fields(
    a: &ConformalState,
    b: &ConformalState,
    f_a: &ScalarField,
    f_b: &ScalarField,
) -> Result<(ScalarField, ConformalState)> {
    let dt = b.t() - a.t();
    let mid_u: Vec<f64> = a
        .u()
        .values()
        .iter()
        .zip(b.u().values())
        .map(|(&x, &y)| 0.5 * (x + y))
        .collect();
    let mid = a.with_u(mid_u, 0.5 * (a.t() + b.t()))?;
    let f_mid = f_a.zip_map(f_b, |x, y| 0.5 * (x + y))?;
    let lap = laplacian_g(&f_mid, &mid)?;
    let r_mid = flow::r_value(&mid);
    let mut d = Vec::with_capacity(f_mid.len());
    for i in 0..f_mid.len() {
        d.push(
            (f_b.values()[i] - f_a.values()[i]) / dt - lap.values()[i] - r_mid * f_mid.values()[i],
        );
    }
    Ok((f_mid.same_domain(d)?, mid))
}

fn gauge_defect(traj: &Trajectory, index: usize) -> Result<(ScalarField, ConformalState)> {
    if index + 1 >= traj.states.len() {
        return Err(Error::Config(format!(
            "gauge defect needs samples {index} and {}, trajectory has {}",
            index + 1,
            traj.states.len()
        )));
    }
    let a = &traj.states[index];
    let b = &traj.states[index + 1];
    let f_a = curvature_potential(a)?;
    let f_b = curvature_potential(b)?;
    gauge_defect_fields(a, b, &f_a, &f_b)
}

/// Spatial spread max(D) − min(D) of the gauge defect over the interval
/// [t_index, t_index+1].
pub fn potential_gauge_spread(traj: &Trajectory, index: usize) -> Result<f64> {
    let (d, _) = gauge_defect(traj, index)?;
    Ok(d.max() - d.min())
}

/// Max-norm relative error of the integrated identity
/// div V(t) = div V(0)·exp(+[f(t) − f(0)] − r ∫₀ᵗ f dτ − ∫₀ᵗ γ dτ),
/// where γ is the spatial mean of the gauge defect (the additive constant
/// separating the zero-mean gauge from the evolution gauge). The sign of the
/// exponent follows d/dt(div V) = (R − r)·div V = Δ_g f·div V, which is what
/// the conformal representation div V = e^{-u}·div₀V satisfies exactly.
pub fn divv_identity_error(traj: &Trajectory, index: usize) -> Result<f64> {
    if index >= traj.states.len() {
        return Err(Error::Config(format!(
            "sample index {index} out of range ({})",
            traj.states.len()
        )));
    }
    let s0 = &traj.states[0];
    let divv0 = div_torsion_conformal(s0.torsion(), s0)?;
    if divv0.max_abs() == 0.0 {
        return Ok(0.0);
    }
    if index == 0 {
        return Ok(0.0);
    }
    let n = divv0.len();
    let mut f_prev = curvature_potential(s0)?;
    let f0 = f_prev.clone();
    let mut rf_trap = vec![0.0; n];
    let mut gamma_int = 0.0;
    for j in 0..index {
        let a = &traj.states[j];
        let b = &traj.states[j + 1];
        let dt = b.t() - a.t();
        let f_next = curvature_potential(b)?;
        let r_a = flow::r_value(a);
        let r_b = flow::r_value(b);
        let r_mid = 0.5 * (r_a + r_b);
        for i in 0..n {
            rf_trap[i] += r_mid * 0.5 * (f_prev.values()[i] + f_next.values()[i]) * dt;
        }
        let (d, mid) = gauge_defect(traj, j)?;
        gamma_int += mid.mean(&d)? * dt;
        f_prev = f_next;
    }
    let sk = &traj.states[index];
    let actual = div_torsion_conformal(sk.torsion(), sk)?;
    let mut max_err = 0.0_f64;
    for i in 0..n {
        let exponent = (f_prev.values()[i] - f0.values()[i]) - rf_trap[i] - gamma_int;
        let predicted = divv0.values()[i] * exponent.exp();
        max_err = max_err.max((predicted - actual.values()[i]).abs());
    }
    Ok(max_err / actual.max_abs().max(1e-300))
}

/// Discretization slack of the maximum-principle bounds.
pub fn max_principle_slack(initial_r_min: f64) -> f64 {
    1e-6 * (1.0 + initial_r_min.abs())
}

/// Case-appropriate lower bound on R along the flow:
/// r<0: R − r ≥ (R_min(0) − r)e^{rt}; r=0: R > −1/t; r>0: R ≥ R_min(0)e^{−rt},
/// each with slack ε = 1e-6·(1 + |R_min(0)|).
pub fn max_principle_check(record: &DiagnosticsRecord, initial: &DiagnosticsRecord) -> bool {
    let eps = max_principle_slack(initial.r_min);
    let t = record.t - initial.t;
    let r = record.r;
    if r < -1e-12 {
        record.r_min - r >= (initial.r_min - r) * (r * t).exp() - eps
    } else if r <= 1e-12 {
        if t <= 0.0 {
            true
        } else {
            record.r_min > -1.0 / t - eps
        }
    } else {
        record.r_min >= initial.r_min * (-r * t).exp() - eps
    }
}

/// Least-squares exponential fit of log(value) against t inside the window.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    if !(window.0 < window.1) {
        return Err(Error::Config(format!(
            "decay window must be increasing, got [{}, {}]",
            window.0, window.1
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .cloned()
        .collect();
    if pts.len() < 8 {
        return Err(Error::Config(format!(
            "decay fit needs at least 8 samples in the window, found {}",
            pts.len()
        )));
    }
    if let Some(&(t_bad, v_bad)) = pts.iter().find(|(_, v)| *v <= 1e-14) {
        return Err(Error::Config(format!(
            "decay fit needs positive values, found {v_bad:e} at t = {t_bad}"
        )));
    }
    let n = pts.len() as f64;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    let sum_t: f64 = pairwise_sum(&logs.iter().map(|p| p.0).collect::<Vec<_>>());
    let sum_y: f64 = pairwise_sum(&logs.iter().map(|p| p.1).collect::<Vec<_>>());
    let mean_t = sum_t / n;
    let mean_y = sum_y / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(t, y) in &logs {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    let rate = sxy / sxx;
    let intercept = mean_y - rate * mean_t;
    let mut ss = 0.0;
    for &(t, y) in &logs {
        let e = y - (intercept + rate * t);
        ss += e * e;
    }
    Ok(DecayFit {
        rate,
        amplitude: intercept.exp(),
        residual: (ss / n).sqrt(),
        window,
    })
}

/// Default post-transient window: starts where sup|R−r| has dropped by 10×
/// from its initial value, ends at the last sample.
pub fn default_decay_window(records: &[DiagnosticsRecord]) -> Option<(f64, f64)> {
    let first = records.first()?;
    let last = records.last()?;
    let threshold = first.sup_abs_r_dev / 10.0;
    let start = records.iter().find(|r| r.sup_abs_r_dev <= threshold)?;
    if start.t < last.t {
        Some((start.t, last.t))
    } else {
        None
    }
}

/// Compute the full record sequence for a sampled trajectory. Pure function
/// of the samples: recomputation is bit-identical.
pub fn build_records(states: &[ConformalState]) -> Result<Vec<DiagnosticsRecord>> {
    let m = states.len();
    let mut records = Vec::with_capacity(m);
    if m == 0 {
        return Ok(records);
    }
    let n = states[0].u().len();
    let torsion_is_zero = states[0].torsion().is_zero();

    // per-sample basics and curvature potentials
    let mut potentials: Vec<ScalarField> = Vec::with_capacity(m);
    let mut divvs: Vec<ScalarField> = Vec::with_capacity(m);
    for state in states {
        let total = flow::total_curvature(state)?;
        let r = flow::r_value(state);
        let sup_abs_r_dev = total
            .values()
            .iter()
            .fold(0.0_f64, |acc, &c| acc.max((c - r).abs()));
        let f = curvature_potential(state)?;
        let grad_f = grad_norm_sq(&f, state)?;
        let grad_r = grad_norm_sq(&total, state)?;
        let divv = div_torsion_conformal(state.torsion(), state)?;
        records.push(DiagnosticsRecord {
            t: state.t(),
            r,
            volume: state.volume(),
            gauss_bonnet: state.integrate(&total)?,
            r_min: total.min(),
            r_max: total.max(),
            sup_abs_r_dev,
            sup_abs_f: f.max_abs(),
            sup_grad_f_sq: grad_f.max_abs(),
            sup_grad_r_sq: grad_r.max_abs(),
            sup_abs_div_v: divv.max_abs(),
            gauge_spread: 0.0,
            divv_identity_err: 0.0,
            bound_pass: true,
        });
        potentials.push(f);
        divvs.push(divv);
    }

    // per-interval gauge defects
    let mut gammas = vec![0.0; m.saturating_sub(1)];
    for k in 0..m.saturating_sub(1) {
        let (d, mid) = gauge_defect_fields(
            &states[k],
            &states[k + 1],
            &potentials[k],
            &potentials[k + 1],
        )?;
        records[k].gauge_spread = d.max() - d.min();
        let dt = states[k + 1].t() - states[k].t();
        gammas[k] = mid.mean(&d)? * dt;
    }

    // cumulative divergence identity
    if !torsion_is_zero {
        let mut rf_trap = vec![0.0; n];
        let mut gamma_int = 0.0;
        for k in 1..m {
            let dt = states[k].t() - states[k - 1].t();
            let r_mid = 0.5 * (records[k - 1].r + records[k].r);
            for i in 0..n {
                rf_trap[i] +=
                    r_mid * 0.5 * (potentials[k - 1].values()[i] + potentials[k].values()[i]) * dt;
            }
            gamma_int += gammas[k - 1];
            let mut max_err = 0.0_f64;
            for i in 0..n {
                let exponent = (potentials[k].values()[i] - potentials[0].values()[i])
                    - rf_trap[i]
                    - gamma_int;
                let predicted = divvs[0].values()[i] * exponent.exp();
                max_err = max_err.max((predicted - divvs[k].values()[i]).abs());
            }
            records[k].divv_identity_err = max_err / divvs[k].max_abs().max(1e-300);
        }
    }

    // maximum-principle flags against the initial record
    let initial = records[0].clone();
    for record in records.iter_mut() {
        record.bound_pass = max_principle_check(record, &initial);
    }

    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Domain, ScalarField, TorsionData};
    use crate::flow::{FlowConfig, Integrator, Termination};
    use crate::presets;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus(n: usize) -> Arc<Domain> {
        Arc::new(Domain::grid(n, n, 2.0 * PI, 2.0 * PI).unwrap())
    }

    fn cosine_torsion_state(n: usize) -> ConformalState {
        // d0 = cos(x): total curvature R = 2cos(x) on the flat background
        let domain = torus(n);
        let d0 = ScalarField::from_grid_fn(domain.clone(), |x, _| x.cos()).unwrap();
        let torsion = Arc::new(TorsionData::from_divergence(d0).unwrap());
        ConformalState::new(ScalarField::zeros(domain.clone()), torsion, 0.0).unwrap()
    }

    #[test]
    fn potential_of_constant_curvature_is_zero() {
        let state = ConformalState::background(torus(32)).unwrap();
        let f = curvature_potential(&state).unwrap();
        assert!(f.max_abs() <= 1e-10);
    }

    #[test]
    fn potential_inverts_a_cosine_mode() {
        // Δf = 2cos(x) on the 2π torus gives f = -2cos(x)
        let state = cosine_torsion_state(32);
        let f = curvature_potential(&state).unwrap();
        let expected =
            ScalarField::from_grid_fn(state.domain().clone(), |x, _| -2.0 * x.cos()).unwrap();
        assert!(f.sub(&expected).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn potential_residual_is_relative_to_curvature_deviation() {
        let domain = torus(32);
        let torsion = Arc::new(
            TorsionData::from_one_form(presets::random_one_form(&domain, 7, 0.4).unwrap())
                .unwrap(),
        );
        let u = presets::random_field(&domain, 8, 0.3).unwrap();
        let state = ConformalState::new(u, torsion, 0.0).unwrap();
        let f = curvature_potential(&state).unwrap();
        let total = crate::flow::total_curvature(&state).unwrap();
        let r = crate::flow::r_value(&state);
        let lap = crate::operators::laplacian_g(&f, &state).unwrap();
        let mut residual = 0.0_f64;
        let mut sup = 0.0_f64;
        for i in 0..f.len() {
            residual = residual.max((lap.values()[i] - (total.values()[i] - r)).abs());
            sup = sup.max((total.values()[i] - r).abs());
        }
        assert!(residual <= 1e-8 * sup, "residual {residual:e} vs sup {sup:e}");
        // zero mean w.r.t. the conformal measure
        assert!(state.integrate(&f).unwrap().abs() <= 1e-10 * f.max_abs() * state.volume());
    }

    fn short_torsion_run(n: usize, interval: f64, t_max: f64) -> crate::flow::Trajectory {
        let domain = torus(n);
        let torsion = Arc::new(
            TorsionData::from_one_form(presets::random_one_form(&domain, 5, 0.4).unwrap())
                .unwrap(),
        );
        let u0 = presets::random_field(&domain, 4, 0.3).unwrap();
        let initial = ConformalState::new(u0, torsion, 0.0).unwrap();
        let config = FlowConfig {
            dt_initial: 1.0,
            dt_safety: 0.9,
            t_max,
            stop_tol: 1e-13,
            sample_interval: interval,
            integrator: Integrator::ExplicitRk4,
        };
        crate::flow::run(&initial, &config).unwrap()
    }

    #[test]
    fn gauge_spread_vanishes_on_stationary_trajectories() {
        // a constant-curvature state with torsion: f ≈ 0 along the whole run
        let seed = cosine_torsion_state(32);
        let oracle =
            crate::stationary::flat_oracle(seed.domain(), seed.torsion(), seed.volume()).unwrap();
        let state = ConformalState::new(oracle.u_star, seed.torsion().clone(), 0.0).unwrap();
        let config = FlowConfig {
            t_max: 0.5,
            stop_tol: 1e-30,
            sample_interval: 0.1,
            ..FlowConfig::default()
        };
        let traj = crate::flow::run(&state, &config).unwrap();
        assert!(traj.states.len() >= 3);
        assert!(potential_gauge_spread(&traj, 0).unwrap() <= 1e-10);
    }

    #[test]
    fn gauge_spread_shrinks_with_the_sampling_interval() {
        let coarse = short_torsion_run(32, 4e-3, 0.4);
        let fine = short_torsion_run(32, 2e-3, 0.4);
        // compare at the same physical time, past the fast transient
        let t_probe = 0.2;
        let idx_c = coarse
            .records
            .iter()
            .position(|r| r.t >= t_probe)
            .unwrap();
        let idx_f = fine.records.iter().position(|r| r.t >= t_probe).unwrap();
        let s_c = potential_gauge_spread(&coarse, idx_c).unwrap();
        let s_f = potential_gauge_spread(&fine, idx_f).unwrap();
        assert!(
            s_f <= 0.6 * s_c,
            "spread did not shrink: coarse {s_c:e}, fine {s_f:e}"
        );
    }

    #[test]
    fn divv_identity_trivial_cases() {
        // V = 0: both sides vanish, error defined as 0
        let state = ConformalState::background(torus(32)).unwrap();
        let config = FlowConfig {
            t_max: 0.2,
            stop_tol: 1e-30,
            sample_interval: 0.1,
            ..FlowConfig::default()
        };
        let traj = crate::flow::run(&state, &config).unwrap();
        assert_eq!(divv_identity_error(&traj, traj.states.len() - 1).unwrap(), 0.0);

        // constant-curvature start with torsion: f stays ~0, div V constant
        let flat = cosine_torsion_state(32);
        let oracle = crate::stationary::flat_oracle(
            flat.domain(),
            flat.torsion(),
            flat.volume(),
        )
        .unwrap();
        let stationary =
            ConformalState::new(oracle.u_star, flat.torsion().clone(), 0.0).unwrap();
        let traj = crate::flow::run(
            &stationary,
            &FlowConfig {
                t_max: 0.2,
                stop_tol: 1e-30,
                sample_interval: 0.05,
                ..FlowConfig::default()
            },
        )
        .unwrap();
        let err = divv_identity_error(&traj, traj.states.len() - 1).unwrap();
        assert!(err <= 1e-7, "stationary divV error {err:e}");
    }

    #[test]
    fn divv_identity_holds_at_dense_sampling() {
        let traj = short_torsion_run(32, 2e-3, 0.6);
        let max_err = traj
            .records
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.divv_identity_err));
        assert!(max_err <= 0.01, "max divv identity error {max_err:e}");
    }

    #[test]
    fn max_principle_arithmetic_cases() {
        let base = DiagnosticsRecord {
            t: 0.0,
            r: -1.0,
            volume: 1.0,
            gauss_bonnet: 0.0,
            r_min: -1.0,
            r_max: -1.0,
            sup_abs_r_dev: 0.0,
            sup_abs_f: 0.0,
            sup_grad_f_sq: 0.0,
            sup_grad_r_sq: 0.0,
            sup_abs_div_v: 0.0,
            gauge_spread: 0.0,
            divv_identity_err: 0.0,
            bound_pass: true,
        };
        // r < 0, constant curvature: R - r = 0 >= negative right side
        let later = DiagnosticsRecord {
            t: 3.0,
            r_min: -1.0,
            ..base.clone()
        };
        assert!(max_principle_check(&later, &base));

        // r = 0 at t = 10 with R_min = -0.05 > -0.1
        let flat0 = DiagnosticsRecord {
            r: 0.0,
            r_min: -0.3,
            ..base.clone()
        };
        let flat10 = DiagnosticsRecord {
            t: 10.0,
            r: 0.0,
            r_min: -0.05,
            ..base.clone()
        };
        assert!(max_principle_check(&flat10, &flat0));
        let flat_bad = DiagnosticsRecord {
            t: 10.0,
            r: 0.0,
            r_min: -0.2,
            ..base.clone()
        };
        assert!(!max_principle_check(&flat_bad, &flat0));

        // r > 0 decay envelope
        let pos0 = DiagnosticsRecord {
            r: 2.0,
            r_min: 1.0,
            ..base.clone()
        };
        let pos1 = DiagnosticsRecord {
            t: 1.0,
            r: 2.0,
            r_min: 1.0 * (-2.0_f64).exp() + 1e-9,
            ..base.clone()
        };
        assert!(max_principle_check(&pos1, &pos0));
    }

    #[test]
    fn decay_fit_recovers_an_exact_exponential() {
        let series: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.3;
                (t, 3.0 * (-2.0 * t).exp())
            })
            .collect();
        let fit = decay_fit(&series, (0.0, 3.0)).unwrap();
        assert!((fit.rate + 2.0).abs() <= 1e-12);
        assert!((fit.amplitude - 3.0).abs() <= 1e-12);
        assert!(fit.residual <= 1e-12);
    }

    #[test]
    fn decay_fit_rejects_bad_input() {
        let short: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 1.0)).collect();
        assert!(decay_fit(&short, (0.0, 10.0)).is_err());
        let nonpositive: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, -1.0)).collect();
        assert!(decay_fit(&nonpositive, (0.0, 10.0)).is_err());
        let fine: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 1.0)).collect();
        assert!(decay_fit(&fine, (5.0, 2.0)).is_err());
    }

    #[test]
    fn records_are_pure_functions_of_samples() {
        let traj = short_torsion_run(32, 0.05, 0.3);
        let again = build_records(&traj.states).unwrap();
        assert_eq!(again, traj.records);
    }

    #[test]
    fn energy_dissipation_identity_on_the_torus() {
        // d/dt ∫|∇f|² dμ = −2∫R² dμ for r = 0
        let traj = short_torsion_run(32, 5e-3, 0.2);
        assert!(matches!(traj.termination, Termination::TMaxReached));
        let k = traj.states.len() / 2;
        let energy = |s: &ConformalState| -> f64 {
            let f = curvature_potential(s).unwrap();
            s.integrate(&grad_norm_sq(&f, s).unwrap()).unwrap()
        };
        let (sa, sb, sc) = (&traj.states[k - 1], &traj.states[k], &traj.states[k + 1]);
        let fd = (energy(sc) - energy(sa)) / (sc.t() - sa.t());
        let total = crate::flow::total_curvature(sb).unwrap();
        let rhs = -2.0 * sb.integrate(&total.map(|c| c * c)).unwrap();
        assert!(
            (fd - rhs).abs() <= 0.02 * rhs.abs(),
            "d/dt energy {fd:e} vs -2∫R² {rhs:e}"
        );
    }

    #[test]
    fn spectral_inequality_with_lambda1() {
        let traj = short_torsion_run(32, 0.05, 0.3);
        for k in [0, traj.states.len() / 2, traj.states.len() - 1] {
            let s = &traj.states[k];
            let f = curvature_potential(s).unwrap();
            let total = crate::flow::total_curvature(s).unwrap();
            let r = crate::flow::r_value(s);
            let lhs = s.integrate(&total.map(|c| (c - r) * (c - r))).unwrap();
            let grad = s.integrate(&grad_norm_sq(&f, s).unwrap()).unwrap();
            if grad < 1e-20 {
                continue;
            }
            let lam = crate::operators::lambda1(s).unwrap().value;
            assert!(
                lhs >= lam * (1.0 - 1e-6) * grad,
                "∫(Δf)² = {lhs:e} < λ₁∫|∇f|² = {:e} at sample {k}",
                lam * grad
            );
        }
    }
}
