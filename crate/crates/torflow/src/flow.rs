//! Time integration of the conformal-factor evolution
//! ∂u/∂t = r − R(u), with R = e^{-u}(R₀ + 2 div₀V − Δ₀u).
//!
//! r is taken from topology (4πχ / volume) rather than quadrature each step,
//! so quadrature error cannot inject volume drift; the discrepancy between
//! the two is itself a logged diagnostic.

use std::f64::consts::PI;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::fields::{ConformalState, Domain, ScalarField};
use crate::numeric::{pairwise_dot, pairwise_sum};
use crate::operators::{laplacian0_values, spectral};
use crate::torsion::div_torsion_background;

/// Stability interval of classical RK4 on the negative real axis.
const RK4_STABILITY: f64 = 2.785;
/// Per-step cap on max|du| used by the IMEX accuracy control.
const IMEX_DU_CAP: f64 = 0.1;
/// Hard cap on steps per trajectory; guards against a collapsed dt.
const MAX_STEPS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Classical explicit RK4 with a CFL-style step bound. Default; keeps
    /// decay-rate measurements clean.
    ExplicitRk4,
    /// First-order splitting with the diffusion e^{-ū}Δ₀ treated implicitly
    /// at frozen coefficient ū. Unconditionally stable in the linear part;
    /// dt is capped by an accuracy control on max|du|.
    Imex,
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub dt_initial: f64,
    pub dt_safety: f64,
    pub t_max: f64,
    /// Stop when max|R − r| falls below this.
    pub stop_tol: f64,
    /// Diagnostics cadence in flow time.
    pub sample_interval: f64,
    pub integrator: Integrator,
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_initial > 0.0
            && self.dt_safety > 0.0
            && self.dt_safety <= 1.0
            && self.t_max > 0.0
            && self.stop_tol > 0.0
            && self.sample_interval > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid flow configuration: {self:?}")))
        }
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-3,
            dt_safety: 0.9,
            t_max: 50.0,
            stop_tol: 1e-9,
            sample_interval: 0.1,
            integrator: Integrator::ExplicitRk4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Converged,
    TMaxReached,
    StepFailure { t: f64 },
}

/// Time-ordered solution samples with their diagnostics.
#[derive(Debug)]
pub struct Trajectory {
    pub states: Vec<ConformalState>,
    pub records: Vec<DiagnosticsRecord>,
    pub termination: Termination,
}

/// Fixed background data q₀ = R₀ + 2 div₀V.
pub fn background_q(state: &ConformalState) -> Result<ScalarField> {
    let d0 = div_torsion_background(state.torsion(), state.domain())?;
    let values: Vec<f64> = d0
        .values()
        .iter()
        .enumerate()
        .map(|(i, &d)| state.domain().background_curvature(i) + 2.0 * d)
        .collect();
    d0.same_domain(values)
}

fn total_curvature_values(domain: &Domain, q0: &[f64], u: &[f64]) -> Vec<f64> {
    let lap_u = laplacian0_values(domain, u);
    (0..u.len())
        .map(|i| (-u[i]).exp() * (q0[i] - lap_u[i]))
        .collect()
}

/// Total scalar curvature of the torsion connection for g = e^{u}g₀:
/// R = e^{-u}(R₀ + 2 div₀V − Δ₀u).
pub fn total_curvature(state: &ConformalState) -> Result<ScalarField> {
    let q0 = background_q(state)?;
    let values = total_curvature_values(state.domain(), q0.values(), state.u().values());
    state.u().same_domain(values)
}

/// Scalar curvature of the Levi-Civita connection of g = e^{u}g₀,
/// R_g = e^{-u}(R₀ − Δ₀u).
pub fn levi_civita_curvature(state: &ConformalState) -> Result<ScalarField> {
    let domain = state.domain();
    let u = state.u().values();
    let lap_u = laplacian0_values(domain, u);
    let values: Vec<f64> = (0..u.len())
        .map(|i| (-u[i]).exp() * (domain.background_curvature(i) - lap_u[i]))
        .collect();
    state.u().same_domain(values)
}

/// Average total curvature from topology: r = 4πχ / Vol(M, g).
pub fn r_value(state: &ConformalState) -> f64 {
    4.0 * PI * state.chi() as f64 / state.volume()
}

/// Quadrature estimate ∫R dμ / Vol for the Gauss-Bonnet cross-check.
pub fn r_quadrature(state: &ConformalState) -> Result<f64> {
    Ok(state.integrate(&total_curvature(state)?)? / state.volume())
}

/// Right-hand side of the flow: ∂u/∂t = r − R.
pub fn rhs(state: &ConformalState) -> Result<ScalarField> {
    let r = r_value(state);
    let total = total_curvature(state)?;
    Ok(total.map(|v| r - v))
}

/// CFL-style bound for the explicit integrator:
/// dt ≤ safety · 2.785 / (max e^{-u} · λ_max(−Δ₀)).
pub fn stable_dt_rk4(state: &ConformalState, safety: f64) -> f64 {
    let bound = match state.domain().as_ref() {
        Domain::Grid(g) => g.symbol_bound(),
        Domain::Mesh(m) => m.spectral_bound,
    };
    let exp_max = state.u().values().iter().fold(0.0_f64, |m, &u| m.max((-u).exp()));
    safety * RK4_STABILITY / (exp_max * bound).max(1e-300)
}

/// Fill `out` with F(u) = r(u) − R(u); returns r. The exp/laplacian scratch
/// is reused across calls to keep large allocations out of the step loop.
fn rhs_fill(
    domain: &Domain,
    weights: &[f64],
    q0: &[f64],
    four_pi_chi: f64,
    u: &[f64],
    exp_buf: &mut Vec<f64>,
    lap_buf: &mut Vec<f64>,
    out: &mut Vec<f64>,
) -> f64 {
    let n = u.len();
    exp_buf.clear();
    exp_buf.extend(u.iter().map(|&v| v.exp()));
    lap_buf.resize(n, 0.0);
    match domain {
        Domain::Grid(g) => {
            spectral::apply_real_symbol_into(g, u, |kx, ky| -(kx * kx + ky * ky), lap_buf)
        }
        Domain::Mesh(m) => crate::operators::cotan::laplacian_into(m, u, lap_buf),
    }
    let r = four_pi_chi / pairwise_dot(exp_buf, weights);
    out.resize(n, 0.0);
    for i in 0..n {
        out[i] = r - (q0[i] - lap_buf[i]) / exp_buf[i];
    }
    r
}

/// Internal stepping context: fixed background data plus scratch buffers for
/// one trajectory.
struct Engine<'a> {
    domain: &'a Domain,
    weights: Vec<f64>,
    q0: Vec<f64>,
    four_pi_chi: f64,
    exp_buf: Vec<f64>,
    lap_buf: Vec<f64>,
    stage: Vec<f64>,
    k_buf: Vec<f64>,
    acc: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(state: &'a ConformalState, q0: Vec<f64>) -> Self {
        let domain = state.domain().as_ref();
        let n = domain.node_count();
        Self {
            domain,
            weights: (0..n).map(|i| domain.weight(i)).collect(),
            q0,
            four_pi_chi: 4.0 * PI * state.chi() as f64,
            exp_buf: Vec::new(),
            lap_buf: Vec::new(),
            stage: Vec::new(),
            k_buf: Vec::new(),
            acc: Vec::new(),
        }
    }

    /// F(u) into a fresh vector; returns (rhs, r).
    fn rhs_of(&mut self, u: &[f64]) -> (Vec<f64>, f64) {
        let mut out = Vec::new();
        let r = rhs_fill(
            self.domain,
            &self.weights,
            &self.q0,
            self.four_pi_chi,
            u,
            &mut self.exp_buf,
            &mut self.lap_buf,
            &mut out,
        );
        (out, r)
    }

    fn rk4(&mut self, u: &[f64], dt: f64, k1: &[f64]) -> Vec<f64> {
        let n = u.len();
        self.acc.clear();
        self.acc.extend_from_slice(k1);
        self.stage.resize(n, 0.0);

        // stage 2
        for i in 0..n {
            self.stage[i] = u[i] + 0.5 * dt * k1[i];
        }
        let mut k = std::mem::take(&mut self.k_buf);
        rhs_fill(
            self.domain,
            &self.weights,
            &self.q0,
            self.four_pi_chi,
            &self.stage,
            &mut self.exp_buf,
            &mut self.lap_buf,
            &mut k,
        );
        for i in 0..n {
            self.acc[i] += 2.0 * k[i];
            self.stage[i] = u[i] + 0.5 * dt * k[i];
        }
        // stage 3
        rhs_fill(
            self.domain,
            &self.weights,
            &self.q0,
            self.four_pi_chi,
            &self.stage,
            &mut self.exp_buf,
            &mut self.lap_buf,
            &mut k,
        );
        for i in 0..n {
            self.acc[i] += 2.0 * k[i];
            self.stage[i] = u[i] + dt * k[i];
        }
        // stage 4
        rhs_fill(
            self.domain,
            &self.weights,
            &self.q0,
            self.four_pi_chi,
            &self.stage,
            &mut self.exp_buf,
            &mut self.lap_buf,
            &mut k,
        );
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(u[i] + dt / 6.0 * (self.acc[i] + k[i]));
        }
        self.k_buf = k;
        out
    }

    /// First-order IMEX: (M_g + dt·S) u⁺ = M_g (u + dt(r − e^{-u}q₀)) with
    /// M_g = diag(e^{u}·w). Fixed points coincide with rhs = 0 exactly.
    fn imex(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>> {
        let n = u.len();
        let exp_u: Vec<f64> = u.iter().map(|&v| v.exp()).collect();
        let mass_g: Vec<f64> = (0..n).map(|i| exp_u[i] * self.weights[i]).collect();
        let r = self.four_pi_chi / pairwise_sum(&mass_g);
        let b: Vec<f64> = (0..n)
            .map(|i| mass_g[i] * (u[i] + dt * (r - self.q0[i] / exp_u[i])))
            .collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            let sx = crate::operators::stiffness_apply(self.domain, x);
            for i in 0..n {
                y[i] = mass_g[i] * x[i] + dt * sx[i];
            }
        };
        let solution = match self.domain {
            Domain::Grid(g) => {
                // spectral preconditioner with the mean conformal mass
                let mass_mean = pairwise_sum(&mass_g) / n as f64;
                let w = g.weight;
                let precond = |res: &[f64], z: &mut [f64]| {
                    let mut spec = spectral::fft2_forward(g, res);
                    for i in 0..g.nx {
                        for j in 0..g.ny {
                            let k2 = g.kx[i] * g.kx[i] + g.ky[j] * g.ky[j];
                            spec[i * g.ny + j] /= mass_mean + dt * w * k2;
                        }
                    }
                    z.copy_from_slice(&spectral::fft2_inverse(g, &spec));
                };
                crate::sparse::pcg(&apply, &precond, &b, 1e-12, 10 * n.max(100), "imex step")?
            }
            Domain::Mesh(m) => {
                let s_diag = m.stiffness.diagonal();
                let precond = |res: &[f64], z: &mut [f64]| {
                    for i in 0..n {
                        z[i] = res[i] / (mass_g[i] + dt * s_diag[i]).max(1e-300);
                    }
                };
                crate::sparse::pcg(&apply, &precond, &b, 1e-12, 10 * n.max(100), "imex step")?
            }
        };
        Ok(solution.x)
    }

    fn step_values(
        &mut self,
        u: &[f64],
        dt: f64,
        method: Integrator,
        k1: &[f64],
    ) -> Result<Vec<f64>> {
        let out = match method {
            Integrator::ExplicitRk4 => self.rk4(u, dt, k1),
            Integrator::Imex => self.imex(u, dt)?,
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::StepFailure { t: f64::NAN })
        }
    }
}

/// Advance the state by one step of the chosen method.
pub fn step(state: &ConformalState, dt: f64, method: Integrator) -> Result<ConformalState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("step size must be positive, got {dt}")));
    }
    let q0 = background_q(state)?;
    let mut engine = Engine::new(state, q0.into_values());
    let u = state.u().values();
    let (k1, _) = engine.rhs_of(u);
    let u_new = engine
        .step_values(u, dt, method, &k1)
        .map_err(|_| Error::StepFailure { t: state.t() })?;
    state.with_u(u_new, state.t() + dt)
}

/// Integrate until max|R − r| < stop_tol or t reaches t_max, sampling every
/// `sample_interval`. On a failed step the size is halved and retried up to
/// 20 times; an unrecoverable failure terminates the trajectory with
/// `Termination::StepFailure`.
pub fn run(initial: &ConformalState, config: &FlowConfig) -> Result<Trajectory> {
    config.validate()?;
    let q0 = background_q(initial)?;
    let mut engine = Engine::new(initial, q0.into_values());

    let t0 = initial.t();
    let mut t = t0;
    let mut u = initial.u().values().to_vec();
    let mut states = vec![initial.clone()];
    let mut next_sample = t0 + config.sample_interval;
    let t_end = t0 + config.t_max;

    let push_sample = |states: &mut Vec<ConformalState>, u: &[f64], t: f64| -> Result<()> {
        let last_t = states.last().map(|s| s.t()).unwrap_or(f64::NEG_INFINITY);
        if t > last_t {
            states.push(initial.with_u(u.to_vec(), t)?);
        }
        Ok(())
    };

    let mut total_steps = 0usize;
    let termination = 'outer: loop {
        let (k1, _r) = engine.rhs_of(&u);
        let dev = k1.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if dev < config.stop_tol {
            push_sample(&mut states, &u, t)?;
            break Termination::Converged;
        }
        if t >= t_end - 1e-12 * config.t_max {
            push_sample(&mut states, &u, t)?;
            break Termination::TMaxReached;
        }
        total_steps += 1;
        if total_steps >= MAX_STEPS {
            break Termination::StepFailure { t };
        }

        let dt_policy = match config.integrator {
            Integrator::ExplicitRk4 => {
                let bound = match engine.domain {
                    Domain::Grid(g) => g.symbol_bound(),
                    Domain::Mesh(m) => m.spectral_bound,
                };
                let exp_max = u.iter().fold(0.0_f64, |m, &v| m.max((-v).exp()));
                config
                    .dt_initial
                    .min(config.dt_safety * RK4_STABILITY / (exp_max * bound).max(1e-300))
            }
            Integrator::Imex => config
                .dt_initial
                .min(IMEX_DU_CAP * config.dt_safety / dev.max(1e-300)),
        };

        let mut dt = dt_policy.min(next_sample - t).min(t_end - t);

        let mut advanced = false;
        for _retry in 0..=20 {
            match engine.step_values(&u, dt, config.integrator, &k1) {
                Ok(u_new) => {
                    u = u_new;
                    t += dt;
                    advanced = true;
                    break;
                }
                Err(_) => {
                    dt *= 0.5;
                }
            }
        }
        if !advanced {
            break 'outer Termination::StepFailure { t };
        }
        if (t - next_sample).abs() <= 1e-9 * config.sample_interval {
            t = next_sample;
            push_sample(&mut states, &u, t)?;
            next_sample += config.sample_interval;
        }
    };

    let records = diagnostics::build_records(&states)?;
    Ok(Trajectory {
        states,
        records,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics;
    use crate::fields::{meshgen, ScalarField, TorsionData};
    use crate::operators;
    use crate::presets;
    use std::sync::Arc;

    fn torus(n: usize) -> Arc<Domain> {
        Arc::new(Domain::grid(n, n, 2.0 * PI, 2.0 * PI).unwrap())
    }

    fn torus_state_with_torsion(n: usize, u_amp: f64, v_amp: f64) -> ConformalState {
        let domain = torus(n);
        let torsion = Arc::new(
            TorsionData::from_one_form(presets::random_one_form(&domain, 5, v_amp).unwrap())
                .unwrap(),
        );
        let u = presets::random_field(&domain, 4, u_amp).unwrap();
        ConformalState::new(u, torsion, 0.0).unwrap()
    }

    #[test]
    fn flat_background_has_zero_curvature() {
        let state = ConformalState::background(torus(32)).unwrap();
        assert!(total_curvature(&state).unwrap().max_abs() < 1e-13);
        assert_eq!(r_value(&state), 0.0);
        assert!(rhs(&state).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn sphere_background_curvature_is_two_away_from_irregular_vertices() {
        let domain = Arc::new(meshgen::icosphere(4).unwrap());
        let mesh = domain.as_mesh().unwrap();
        let mut valence = vec![0u32; domain.node_count()];
        for f in &mesh.faces {
            for &v in f {
                valence[v as usize] += 1;
            }
        }
        let state = ConformalState::background(domain.clone()).unwrap();
        let total = total_curvature(&state).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..domain.node_count() {
            if valence[i] == 6 {
                worst = worst.max((total.values()[i] - 2.0).abs());
            }
        }
        assert!(worst / 2.0 < 0.05, "regular-vertex error {worst:e}");
        // integral error converges even with the irregular vertices included
        let l1 = state.integrate(&total.map(|v| (v - 2.0).abs())).unwrap() / state.volume();
        assert!(l1 < 0.01, "L1 error {l1:e}");
        // r from topology
        let r = r_value(&state);
        assert!((r - 2.0).abs() < 0.01, "r = {r}");
    }

    #[test]
    fn torsion_contributes_twice_its_background_divergence() {
        let domain = torus(32);
        let phi = ScalarField::from_grid_fn(domain.clone(), |x, y| (x + 0.3 * y.sin()).sin())
            .unwrap();
        let omega = operators::exact_one_form(&phi).unwrap();
        let torsion = Arc::new(TorsionData::from_one_form(omega).unwrap());
        let state =
            ConformalState::new(ScalarField::zeros(domain.clone()), torsion, 0.0).unwrap();
        let total = total_curvature(&state).unwrap();
        let expected = operators::laplacian0(&phi).scale(2.0);
        assert!(total.sub(&expected).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn r_value_on_genus2_with_unit_volume_is_minus_8pi() {
        let domain = Arc::new(meshgen::genus2_mesh(40).unwrap());
        let state0 = ConformalState::background(domain.clone()).unwrap();
        let shift = (1.0 / state0.volume()).ln();
        let state = state0.with_u(
            state0.u().shift(shift).into_values(),
            0.0,
        )
        .unwrap();
        assert!((state.volume() - 1.0).abs() < 1e-12);
        assert!((r_value(&state) + 8.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn rhs_integrates_to_zero() {
        let state = torus_state_with_torsion(32, 0.3, 0.4);
        let r = rhs(&state).unwrap();
        let integral = state.integrate(&r).unwrap();
        assert!(
            integral.abs() <= 1e-8 * r.max_abs() * state.volume(),
            "volume production {integral:e}"
        );
    }

    #[test]
    fn fixed_point_step_is_stationary() {
        let state = ConformalState::background(torus(32)).unwrap();
        let next = step(&state, 1e-2, Integrator::ExplicitRk4).unwrap();
        assert!(next.u().max_abs() <= 1e-14);
        let next = step(&state, 1e-2, Integrator::Imex).unwrap();
        assert!(next.u().max_abs() <= 1e-12);
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        let state = torus_state_with_torsion(32, 0.2, 0.3);
        let diff = |dt: f64| -> f64 {
            let one = step(&state, dt, Integrator::ExplicitRk4).unwrap();
            let half = step(&state, dt / 2.0, Integrator::ExplicitRk4).unwrap();
            let two = step(&half, dt / 2.0, Integrator::ExplicitRk4).unwrap();
            one.u().sub(two.u()).unwrap().max_abs()
        };
        let d1 = diff(4e-4);
        let d2 = diff(2e-4);
        let ratio = d1 / d2;
        assert!(
            (20.0..45.0).contains(&ratio),
            "one-vs-two-half-steps ratio {ratio} (expect ~2^5)"
        );
    }

    #[test]
    fn vanishing_step_is_the_identity() {
        let state = torus_state_with_torsion(32, 0.2, 0.3);
        let next = step(&state, 1e-12, Integrator::ExplicitRk4).unwrap();
        assert!(next.u().sub(state.u()).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn trivial_run_converges_immediately() {
        let state = ConformalState::background(torus(32)).unwrap();
        let config = FlowConfig {
            t_max: 1.0,
            ..FlowConfig::default()
        };
        let traj = run(&state, &config).unwrap();
        assert_eq!(traj.termination, Termination::Converged);
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.states[0].t(), 0.0);
    }

    #[test]
    fn torsion_free_torus_decays_at_lambda1_rate() {
        let domain = torus(32);
        let u0 = ScalarField::from_grid_fn(domain.clone(), |x, _| 0.1 * x.sin()).unwrap();
        let torsion = Arc::new(TorsionData::none(domain.clone()));
        let initial = ConformalState::new(u0, torsion, 0.0).unwrap();
        let config = FlowConfig {
            dt_initial: 1.0,
            dt_safety: 0.9,
            t_max: 40.0,
            stop_tol: 1e-9,
            sample_interval: 0.25,
            integrator: Integrator::ExplicitRk4,
        };
        let traj = run(&initial, &config).unwrap();
        assert_eq!(traj.termination, Termination::Converged);
        // final u differs from a constant by <= 1e-6
        let last = traj.states.last().unwrap();
        let mean = last.mean(last.u()).unwrap();
        assert!(last.u().shift(-mean).max_abs() <= 1e-6);
        // fitted decay rate of sup|R| close to -lambda1 = -1
        let series: Vec<(f64, f64)> = traj
            .records
            .iter()
            .map(|r| (r.t, r.sup_abs_r_dev))
            .collect();
        let window = diagnostics::default_decay_window(&traj.records).unwrap();
        let fit = diagnostics::decay_fit(&series, window).unwrap();
        assert!(
            (fit.rate + 1.0).abs() <= 0.1,
            "fitted rate {} (expected -1)",
            fit.rate
        );
    }

    #[test]
    fn torsion_run_reaches_the_flat_oracle() {
        let initial = torus_state_with_torsion(32, 0.2, 0.3);
        let config = FlowConfig {
            dt_initial: 1.0,
            dt_safety: 0.9,
            t_max: 40.0,
            stop_tol: 1e-9,
            sample_interval: 0.5,
            integrator: Integrator::ExplicitRk4,
        };
        let traj = run(&initial, &config).unwrap();
        assert_eq!(traj.termination, Termination::Converged);
        let oracle = crate::stationary::flat_oracle(
            initial.domain(),
            initial.torsion(),
            initial.volume(),
        )
        .unwrap();
        let diff = crate::stationary::aligned_max_diff(
            traj.states.last().unwrap().u(),
            &oracle.u_star,
            initial.torsion(),
        )
        .unwrap();
        assert!(diff <= 1e-6, "flow vs oracle {diff:e}");
    }

    #[test]
    fn volume_and_gauss_bonnet_hold_along_short_runs() {
        let initial = torus_state_with_torsion(32, 0.3, 0.4);
        let config = FlowConfig {
            dt_initial: 1.0,
            dt_safety: 0.9,
            t_max: 1.0,
            stop_tol: 1e-12,
            sample_interval: 0.1,
            integrator: Integrator::ExplicitRk4,
        };
        let traj = run(&initial, &config).unwrap();
        let first = &traj.records[0];
        for rec in &traj.records {
            assert!(
                (rec.volume - first.volume).abs() <= 1e-6 * first.volume,
                "volume drift at t={}",
                rec.t
            );
            assert!(rec.gauss_bonnet.abs() <= 1e-8, "GB {} at t={}", rec.gauss_bonnet, rec.t);
            assert!(rec.bound_pass, "max principle failed at t={}", rec.t);
        }
        // strictly increasing sample times
        for pair in traj.states.windows(2) {
            assert!(pair[1].t() > pair[0].t());
        }
    }

    #[test]
    fn imex_matches_rk4_at_matching_tolerance() {
        let initial = torus_state_with_torsion(32, 0.2, 0.3);
        let a = step(&initial, 1e-4, Integrator::ExplicitRk4).unwrap();
        let b = step(&initial, 1e-4, Integrator::Imex).unwrap();
        // first-order splitting: O(dt^2) local gap
        let gap = a.u().sub(b.u()).unwrap().max_abs();
        assert!(gap <= 1e-5, "imex vs rk4 gap {gap:e}");
    }

    #[test]
    fn step_rejects_nonpositive_dt() {
        let state = ConformalState::background(torus(32)).unwrap();
        assert!(step(&state, 0.0, Integrator::ExplicitRk4).is_err());
    }
}
