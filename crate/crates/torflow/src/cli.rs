//! Batch driver: configuration parsing, experiment orchestration, and
//! serialization of trajectories, diagnostics and oracle comparisons.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::diagnostics::{self, decay_fit, default_decay_window};
use crate::error::{Error, Result};
use crate::fields::{ConformalState, Domain, ScalarField};
use crate::flow::{self, Integrator, Termination, Trajectory};
use crate::io::{self, snapshot, RunConfig};
use crate::numeric::Lcg64;
use crate::operators;
use crate::presets;
use crate::stationary;
use crate::torsion::{div_torsion_conformal, self as torsion_ops};

/// Relative eigenvalue tolerance used when classifying mesh states; absorbs
/// the icosphere discretization error at refinement level ≥ 4.
pub const CLASSIFY_MESH_TOL: f64 = 0.02;

fn load_config(path: &Path, out_override: Option<&Path>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(out) = out_override {
        config.outputs = out.to_path_buf();
    }
    Ok(config)
}

fn fail(code: i32, err: &Error, quiet: bool) -> i32 {
    if !quiet {
        eprintln!("error: {err}");
    } else {
        eprintln!("error: {err}");
    }
    code
}

/// Integrate the configured flow; write diagnostics.csv, per-sample
/// snapshots, the final state and a summary.
pub fn cmd_run(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let config = match load_config(config_path, out_override) {
        Ok(c) => c,
        Err(e) => return fail(2, &e, quiet),
    };
    let initial = match config.build_initial_state() {
        Ok(s) => s,
        Err(e) => return fail(2, &e, quiet),
    };
    match run_and_write(&config, &initial, quiet) {
        Ok(termination) => match termination {
            Termination::StepFailure { t } => {
                eprintln!("error: step failure at t = {t}");
                1
            }
            _ => 0,
        },
        Err(e) => fail(1, &e, quiet),
    }
}

fn run_and_write(config: &RunConfig, initial: &ConformalState, quiet: bool) -> Result<Termination> {
    std::fs::create_dir_all(&config.outputs)?;
    let trajectory = flow::run(initial, &config.flow)?;

    io::write_text(
        &config.outputs.join("diagnostics.csv"),
        &io::records_to_csv(&trajectory.records),
    )?;
    for (k, state) in trajectory.states.iter().enumerate() {
        snapshot::write_field(
            &config.outputs.join(format!("snap_{k:06}.fld")),
            state.u(),
            state.t(),
        )?;
    }
    let last = trajectory.states.last().expect("trajectory is never empty");
    snapshot::write_field(&config.outputs.join("state_final.fld"), last.u(), last.t())?;

    let summary = summarize(&trajectory);
    io::write_text(&config.outputs.join("summary.txt"), &summary)?;
    if !quiet {
        print!("{summary}");
    }
    Ok(trajectory.termination)
}

fn summarize(trajectory: &Trajectory) -> String {
    let records = &trajectory.records;
    let first = records.first().expect("at least one record");
    let last = records.last().expect("at least one record");
    let chi_term = 4.0 * PI * trajectory.states[0].chi() as f64;
    let volume_drift = records
        .iter()
        .fold(0.0_f64, |m, r| m.max((r.volume - first.volume).abs()))
        / first.volume;
    let gb_dev = records
        .iter()
        .fold(0.0_f64, |m, r| m.max((r.gauss_bonnet - chi_term).abs()));
    let bound_fail = records.iter().filter(|r| !r.bound_pass).count();
    let max_gauge = records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.gauge_spread.abs()));
    let max_divv_err = records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.divv_identity_err));

    let mut out = String::new();
    let term = match &trajectory.termination {
        Termination::Converged => "converged".to_string(),
        Termination::TMaxReached => "t_max_reached".to_string(),
        Termination::StepFailure { t } => format!("step_failure_at_{t}"),
    };
    out.push_str(&format!("termination={term}\n"));
    out.push_str(&format!("samples={}\n", records.len()));
    out.push_str(&format!("final_t={}\n", io::fmt17(last.t)));
    out.push_str(&format!(
        "final_sup_abs_R_minus_r={}\n",
        io::fmt17(last.sup_abs_r_dev)
    ));
    out.push_str(&format!("r_topological={}\n", io::fmt17(last.r)));
    out.push_str(&format!("volume_initial={}\n", io::fmt17(first.volume)));
    out.push_str(&format!("volume_final={}\n", io::fmt17(last.volume)));
    out.push_str(&format!("volume_drift_rel={}\n", io::fmt17(volume_drift)));
    out.push_str(&format!("gauss_bonnet_target={}\n", io::fmt17(chi_term)));
    out.push_str(&format!("gauss_bonnet_max_abs_dev={}\n", io::fmt17(gb_dev)));
    out.push_str(&format!("bound_pass_count={}\n", records.len() - bound_fail));
    out.push_str(&format!("bound_fail_count={bound_fail}\n"));
    out.push_str(&format!("max_gauge_spread={}\n", io::fmt17(max_gauge)));
    out.push_str(&format!(
        "max_divv_identity_err={}\n",
        io::fmt17(max_divv_err)
    ));

    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.sup_abs_r_dev)).collect();
    match default_decay_window(records).and_then(|w| decay_fit(&series, w).ok()) {
        Some(fit) => {
            out.push_str(&format!("decay_rate={}\n", io::fmt17(fit.rate)));
            out.push_str(&format!("decay_amplitude={}\n", io::fmt17(fit.amplitude)));
            out.push_str(&format!("decay_residual={}\n", io::fmt17(fit.residual)));
            out.push_str(&format!("decay_window_start={}\n", io::fmt17(fit.window.0)));
            out.push_str(&format!("decay_window_end={}\n", io::fmt17(fit.window.1)));
        }
        None => out.push_str("decay_fit=unavailable\n"),
    }
    out
}

/// Solve the stationary oracle for a χ ≤ 0 configuration; compare against a
/// finished flow run when one exists in the output directory.
pub fn cmd_oracle(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let config = match load_config(config_path, out_override) {
        Ok(c) => c,
        Err(e) => return fail(2, &e, quiet),
    };
    let initial = match config.build_initial_state() {
        Ok(s) => s,
        Err(e) => return fail(2, &e, quiet),
    };
    let chi = initial.chi();
    if chi > 0 {
        eprintln!("error: no oracle for positive Euler characteristic (chi = {chi})");
        return 2;
    }
    match oracle_and_write(&config, &initial, quiet) {
        Ok(()) => 0,
        Err(e) => fail(1, &e, quiet),
    }
}

fn oracle_and_write(config: &RunConfig, initial: &ConformalState, quiet: bool) -> Result<()> {
    std::fs::create_dir_all(&config.outputs)?;
    let domain = initial.domain().clone();
    let torsion = initial.torsion().clone();
    let target_volume = initial.volume();
    let solution = if initial.chi() == 0 {
        stationary::flat_oracle(&domain, &torsion, target_volume)?
    } else {
        stationary::hyperbolic_oracle(&domain, &torsion, target_volume, config.oracle_tol)?
    };
    snapshot::write_field(&config.outputs.join("u_star.fld"), &solution.u_star, 0.0)?;

    let mut out = String::new();
    out.push_str(&format!("chi={}\n", initial.chi()));
    out.push_str(&format!("target_volume={}\n", io::fmt17(target_volume)));
    out.push_str(&format!(
        "achieved_R_deviation={}\n",
        io::fmt17(solution.achieved_r_deviation)
    ));
    out.push_str(&format!("iterations={}\n", solution.iterations));

    let final_path = config.outputs.join("state_final.fld");
    if final_path.exists() {
        let u_flow = snapshot::read_field(&final_path, &domain)?;
        let diff = stationary::aligned_max_diff(&u_flow, &solution.u_star, &torsion)?;
        out.push_str(&format!("flow_vs_oracle_max_diff={}\n", io::fmt17(diff)));
    }
    io::write_text(&config.outputs.join("oracle_summary.txt"), &out)?;
    if !quiet {
        print!("{out}");
    }
    Ok(())
}

/// Classify the linear stability of a sphere configuration. Non-stationary
/// inputs are first driven toward stationarity by the configured flow.
pub fn cmd_stability(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let config = match load_config(config_path, out_override) {
        Ok(c) => c,
        Err(e) => return fail(2, &e, quiet),
    };
    let initial = match config.build_initial_state() {
        Ok(s) => s,
        Err(e) => return fail(2, &e, quiet),
    };
    if initial.chi() != 2 {
        eprintln!(
            "error: stability classification needs a sphere configuration (chi = {})",
            initial.chi()
        );
        return 2;
    }
    match stability_and_write(&config, &initial, quiet) {
        Ok(()) => 0,
        Err(e) => fail(1, &e, quiet),
    }
}

fn stability_and_write(config: &RunConfig, initial: &ConformalState, quiet: bool) -> Result<()> {
    std::fs::create_dir_all(&config.outputs)?;
    let state = stationary::relax_to_stationary(
        initial,
        &config.flow,
        0.8 * stationary::CLASSIFY_STATIONARITY_TOL,
    )?;
    let report = stationary::stability_classify(&state, CLASSIFY_MESH_TOL)?;
    let class = match report.class {
        stationary::StabilityClass::Stable => "stable",
        stationary::StabilityClass::Unstable => "unstable",
        stationary::StabilityClass::Marginal => "marginal",
    };
    let mut out = String::new();
    out.push_str(&format!("class={class}\n"));
    out.push_str(&format!("lambda1={}\n", io::fmt17(report.lambda1)));
    out.push_str(&format!("r={}\n", io::fmt17(report.r)));
    out.push_str(&format!("hersch_bound={}\n", io::fmt17(report.hersch_bound)));
    out.push_str(&format!("hersch_ok={}\n", if report.hersch_ok { 1 } else { 0 }));
    io::write_text(&config.outputs.join("stability.txt"), &out)?;
    if !quiet {
        print!("{out}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// check suites
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Pass,
            detail,
        }
    }
    fn fail(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            detail,
        }
    }
    fn skip(name: &str, detail: &str) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Skip,
            detail: detail.into(),
        }
    }
    fn from_bool(name: &str, ok: bool, detail: String) -> Self {
        if ok {
            Self::pass(name, detail)
        } else {
            Self::fail(name, detail)
        }
    }
}

/// Run the invariant suites for the configured domain and write a
/// machine-readable report. Exit 0 iff every applicable check passes.
pub fn cmd_check(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> i32 {
    let config = match load_config(config_path, out_override) {
        Ok(c) => c,
        Err(e) => return fail(2, &e, quiet),
    };
    let initial = match config.build_initial_state() {
        Ok(s) => s,
        Err(e) => return fail(2, &e, quiet),
    };
    let mut results = run_check_suites(&config, &initial);
    results.sort_by(|a, b| a.name.cmp(&b.name));

    let mut report = String::new();
    let mut failures = 0usize;
    for r in &results {
        let tag = match r.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => {
                failures += 1;
                "FAIL"
            }
            CheckStatus::Skip => "SKIP",
        };
        report.push_str(&format!("{tag} {} {}\n", r.name, r.detail));
    }
    report.push_str(&format!(
        "summary pass={} fail={} skip={}\n",
        results
            .iter()
            .filter(|r| r.status == CheckStatus::Pass)
            .count(),
        failures,
        results
            .iter()
            .filter(|r| r.status == CheckStatus::Skip)
            .count()
    ));
    if std::fs::create_dir_all(&config.outputs).is_ok() {
        let _ = io::write_text(&config.outputs.join("check_report.txt"), &report);
    }
    if !quiet {
        print!("{report}");
    }
    if failures == 0 {
        0
    } else {
        1
    }
}

type CheckTask = Box<dyn FnOnce() -> Vec<CheckResult> + Send>;

fn run_check_suites(config: &RunConfig, initial: &ConformalState) -> Vec<CheckResult> {
    let initial = Arc::new(initial.clone());
    let config = Arc::new(config.clone());

    let mut tasks: Vec<CheckTask> = Vec::new();
    {
        let s = initial.clone();
        tasks.push(Box::new(move || checks_fields(&s)));
    }
    {
        let s = initial.clone();
        tasks.push(Box::new(move || checks_operators(&s)));
    }
    {
        let s = initial.clone();
        tasks.push(Box::new(move || checks_operator_convergence(&s)));
    }
    tasks.push(Box::new(checks_torsion_algebra));
    {
        let s = initial.clone();
        tasks.push(Box::new(move || checks_torsion_field(&s)));
    }
    {
        let s = initial.clone();
        let c = config.clone();
        tasks.push(Box::new(move || checks_flow_and_diagnostics(&c, &s)));
    }
    {
        let s = initial.clone();
        tasks.push(Box::new(move || checks_flow_consistency(&s)));
    }
    {
        let s = initial.clone();
        let c = config.clone();
        tasks.push(Box::new(move || checks_stationary(&c, &s)));
    }
    {
        let s = initial.clone();
        let c = config.clone();
        tasks.push(Box::new(move || checks_offline(&c, &s)));
    }

    let threads: usize = std::env::var("TORFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    run_tasks(tasks, threads.max(1))
}

fn run_tasks(tasks: Vec<CheckTask>, threads: usize) -> Vec<CheckResult> {
    if threads <= 1 {
        return tasks.into_iter().flat_map(|t| t()).collect();
    }
    let queue = std::sync::Mutex::new(tasks.into_iter().enumerate().collect::<Vec<_>>());
    let results = std::sync::Mutex::new(Vec::<(usize, Vec<CheckResult>)>::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop();
                match next {
                    Some((idx, task)) => {
                        let out = task();
                        results.lock().unwrap().push((idx, out));
                    }
                    None => break,
                }
            });
        }
    });
    let mut collected = results.into_inner().unwrap();
    collected.sort_by_key(|(idx, _)| *idx);
    collected.into_iter().flat_map(|(_, r)| r).collect()
}

fn catch(name: &str, body: impl FnOnce() -> Result<Vec<CheckResult>>) -> Vec<CheckResult> {
    match body() {
        Ok(results) => results,
        Err(e) => vec![CheckResult::fail(name, format!("errored: {e}"))],
    }
}

fn smooth_random(state: &ConformalState, seed: u64, amplitude: f64) -> Result<ScalarField> {
    presets::random_field(state.domain(), seed, amplitude)
}

fn checks_fields(state: &ConformalState) -> Vec<CheckResult> {
    catch("fields.suite", || {
        let mut out = Vec::new();

        let f = smooth_random(state, 101, 1.0)?;
        let g = smooth_random(state, 102, 1.0)?;
        let (a, b) = (0.7, -1.3);
        let combo = f.zip_map(&g, |x, y| a * x + b * y)?;
        let lhs = state.integrate(&combo)?;
        let rhs = a * state.integrate(&f)? + b * state.integrate(&g)?;
        let scale = state.integrate(&f.map(f64::abs))?.abs() + state.integrate(&g.map(f64::abs))?.abs();
        let err = (lhs - rhs).abs() / scale.max(1e-300);
        out.push(CheckResult::from_bool(
            "fields.integrate-linearity",
            err <= 1e-13,
            format!("relative error {err:.3e}"),
        ));

        let c = 0.37;
        let shifted = ConformalState::new(state.u().shift(c), state.torsion().clone(), 0.0)?;
        let err = (shifted.volume() - c.exp() * state.volume()).abs() / shifted.volume();
        out.push(CheckResult::from_bool(
            "fields.volume-conformal-scaling",
            err <= 1e-12,
            format!("relative error {err:.3e}"),
        ));

        let sphere = crate::fields::meshgen::icosphere(2)?;
        let torus = crate::fields::meshgen::torus_mesh(16, 8, 2.0, 0.7)?;
        let genus2 = crate::fields::meshgen::genus2_mesh(40)?;
        let ok = sphere.euler_characteristic() == 2
            && torus.euler_characteristic() == 0
            && genus2.euler_characteristic() == -2;
        out.push(CheckResult::from_bool(
            "fields.mesh-euler-characteristic",
            ok,
            format!(
                "sphere {} torus {} genus2 {}",
                sphere.euler_characteristic(),
                torus.euler_characteristic(),
                genus2.euler_characteristic()
            ),
        ));
        Ok(out)
    })
}

fn checks_operators(state: &ConformalState) -> Vec<CheckResult> {
    catch("operators.suite", || {
        let mut out = Vec::new();
        let domain = state.domain();
        let n = domain.node_count();
        let weights: Vec<f64> = (0..n).map(|i| domain.weight(i)).collect();
        let background = ConformalState::background(domain.clone())?;

        let constant = ScalarField::constant(domain.clone(), 2.5);
        let lap_const = operators::laplacian0(&constant).max_abs();
        let f = smooth_random(state, 103, 1.0)?;
        let lap_f = operators::laplacian0(&f);
        let mean = crate::numeric::pairwise_dot(lap_f.values(), &weights).abs();
        let rel_mean = mean / (lap_f.max_abs() * domain.background_volume()).max(1e-300);
        out.push(CheckResult::from_bool(
            "operators.laplacian-constants",
            lap_const <= 1e-12 && rel_mean <= 1e-12,
            format!("max|Δ const| {lap_const:.3e}, relative mean {rel_mean:.3e}"),
        ));

        let g = smooth_random(state, 104, 1.0)?;
        let lhs = background.integrate(&f.zip_map(&operators::laplacian0(&g), |x, y| x * y)?)?;
        let rhs = background.integrate(&g.zip_map(&lap_f, |x, y| x * y)?)?;
        let err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
        out.push(CheckResult::from_bool(
            "operators.self-adjointness",
            err <= 1e-10,
            format!("relative asymmetry {err:.3e}"),
        ));

        // poisson ∘ laplacian = identity − mean
        let lap = operators::laplacian0(&f);
        let solution = operators::poisson_solve0(&lap)?;
        let f_mean = crate::numeric::pairwise_dot(f.values(), &weights)
            / crate::numeric::pairwise_sum(&weights);
        let recon_err = solution.field.sub(&f.shift(-f_mean))?.max_abs();
        // residual on a random zero-mean rhs
        let mut rhs_values = smooth_random(state, 105, 1.0)?.into_values();
        let rhs_mean = crate::numeric::pairwise_dot(&rhs_values, &weights)
            / crate::numeric::pairwise_sum(&weights);
        for v in rhs_values.iter_mut() {
            *v -= rhs_mean;
        }
        let rhs_field = ScalarField::new(domain.clone(), rhs_values)?;
        let sol2 = operators::poisson_solve0(&rhs_field)?;
        let rel_res = sol2.residual_norm / rhs_field.max_abs().max(1e-300);
        out.push(CheckResult::from_bool(
            "operators.poisson-inverse",
            recon_err <= 1e-9 * f.max_abs() && rel_res <= 1e-9,
            format!("reconstruction {recon_err:.3e}, residual {rel_res:.3e}"),
        ));

        let eig = operators::lambda1(state)?;
        let v = &eig.eigenvector;
        let dirichlet = state.integrate(&operators::grad_norm_sq(v, state)?)?;
        let mass = state.integrate(&v.map(|x| x * x))?;
        let rayleigh = dirichlet / mass;
        let err = (rayleigh - eig.value).abs() / eig.value;
        out.push(CheckResult::from_bool(
            "operators.lambda1-rayleigh",
            eig.value > 0.0 && err <= 1e-8,
            format!("lambda1 {:.6e}, Rayleigh mismatch {err:.3e}", eig.value),
        ));
        Ok(out)
    })
}

fn checks_operator_convergence(state: &ConformalState) -> Vec<CheckResult> {
    catch("operators.convergence", || {
        let mut out = Vec::new();
        if state.domain().is_grid() {
            // analytic test function on fixed 2π grids at two resolutions
            let err_at = |n: usize| -> Result<f64> {
                let domain = Arc::new(Domain::grid(n, n, 2.0 * PI, 2.0 * PI)?);
                let f = ScalarField::from_grid_fn(domain.clone(), |x, y| x.sin().exp() * y.cos())?;
                let lap = operators::laplacian0(&f);
                let exact = ScalarField::from_grid_fn(domain, |x, y| {
                    let e = x.sin().exp();
                    (x.cos() * x.cos() - x.sin()) * e * y.cos() - e * y.cos()
                })?;
                Ok(lap.sub(&exact)?.max_abs())
            };
            let coarse = err_at(32)?;
            let fine = err_at(64)?;
            out.push(CheckResult::from_bool(
                "operators.grid-spectral-convergence",
                fine <= 1e-10,
                format!("max error {coarse:.3e} at 32, {fine:.3e} at 64"),
            ));
            out.push(CheckResult::skip(
                "operators.mesh-sphere-eigenvalue",
                "grid backend",
            ));
        } else {
            let mut errs = Vec::new();
            for level in [2u32, 3u32] {
                let sphere = Arc::new(crate::fields::meshgen::icosphere(level)?);
                let st = ConformalState::background(sphere)?;
                let eig = operators::lambda1(&st)?;
                errs.push((eig.value - 2.0).abs());
            }
            let ok = errs[1] <= 0.6 * errs[0] && errs[1] <= 0.05 * 2.0;
            out.push(CheckResult::from_bool(
                "operators.mesh-sphere-eigenvalue",
                ok,
                format!("|λ1 − 2| = {:.3e} (level 2), {:.3e} (level 3)", errs[0], errs[1]),
            ));
            out.push(CheckResult::skip(
                "operators.grid-spectral-convergence",
                "mesh backend",
            ));
        }
        Ok(out)
    })
}

fn checks_torsion_algebra() -> Vec<CheckResult> {
    catch("torsion.algebra", || {
        let mut out = Vec::new();
        let mut rng = Lcg64::new(0x70F);
        let sample = |rng: &mut Lcg64| {
            torsion_ops::TangentVector::new(2.0 * rng.next_symmetric(), 2.0 * rng.next_symmetric())
        };
        let mut worst_skew = 0.0_f64;
        let mut worst_anti = 0.0_f64;
        let mut worst_closed = 0.0_f64;
        for _ in 0..10_000 {
            let (x, y, z, v) = (
                sample(&mut rng),
                sample(&mut rng),
                sample(&mut rng),
                sample(&mut rng),
            );
            let u = rng.next_symmetric();
            let skew = torsion_ops::metric_inner(torsion_ops::torsion_endomorphism(x, y, v, u), z, u)
                + torsion_ops::metric_inner(y, torsion_ops::torsion_endomorphism(x, z, v, u), u);
            worst_skew = worst_skew.max(skew.abs());
            let txy = torsion_ops::torsion_tensor(x, y, v, u);
            let tyx = torsion_ops::torsion_tensor(y, x, v, u);
            worst_anti = worst_anti
                .max((txy.x + tyx.x).abs())
                .max((txy.y + tyx.y).abs());
            let closed = torsion_ops::torsion_tensor_closed(x, y, v, u);
            worst_closed = worst_closed
                .max((txy.x - closed.x).abs())
                .max((txy.y - closed.y).abs());
        }
        out.push(CheckResult::from_bool(
            "torsion.skew-adjointness",
            worst_skew <= 1e-12,
            format!("worst defect {worst_skew:.3e} over 10^4 samples"),
        ));
        out.push(CheckResult::from_bool(
            "torsion.tensor-antisymmetry",
            worst_anti <= 1e-15,
            format!("worst defect {worst_anti:.3e}"),
        ));
        out.push(CheckResult::from_bool(
            "torsion.tensor-closed-forms",
            worst_closed <= 1e-12,
            format!("worst disagreement {worst_closed:.3e}"),
        ));
        Ok(out)
    })
}

fn checks_torsion_field(state: &ConformalState) -> Vec<CheckResult> {
    catch("torsion.field", || {
        let mut out = Vec::new();
        let divv = div_torsion_conformal(state.torsion(), state)?;
        let integral = 2.0 * state.integrate(&divv)?;
        let scale = 2.0 * state.integrate(&divv.map(f64::abs))? + 1.0;
        let rel = integral.abs() / scale;
        out.push(CheckResult::from_bool(
            "torsion.gauss-bonnet-contribution",
            rel <= 1e-9,
            format!("∫2divV dμ = {integral:.3e} (relative {rel:.3e})"),
        ));

        let c = 0.4;
        let shifted = ConformalState::new(state.u().shift(c), state.torsion().clone(), 0.0)?;
        let scaled = div_torsion_conformal(state.torsion(), &shifted)?;
        let expected = divv.scale((-c).exp());
        let err = scaled.sub(&expected)?.max_abs() / divv.max_abs().max(1e-300);
        out.push(CheckResult::from_bool(
            "torsion.conformal-scaling",
            err <= 1e-14,
            format!("relative error {err:.3e}"),
        ));
        Ok(out)
    })
}

/// Short trajectory shared by the conservation and diagnostics checks.
fn short_run(config: &RunConfig, initial: &ConformalState) -> Result<Trajectory> {
    let mut short = config.flow.clone();
    short.t_max = if initial.domain().is_grid() { 0.5 } else { 0.4 };
    short.stop_tol = 1e-13;
    short.sample_interval = short.t_max / 10.0;
    flow::run(initial, &short)
}

fn checks_flow_and_diagnostics(config: &RunConfig, initial: &ConformalState) -> Vec<CheckResult> {
    catch("flow.suite", || {
        let mut out = Vec::new();
        let trajectory = short_run(config, initial)?;
        let records = &trajectory.records;
        let first = &records[0];

        let drift = records
            .iter()
            .fold(0.0_f64, |m, r| m.max((r.volume - first.volume).abs()))
            / first.volume;
        let drift_tol = match config.flow.integrator {
            Integrator::ExplicitRk4 => 1e-6,
            Integrator::Imex => 1e-3,
        };
        out.push(CheckResult::from_bool(
            "flow.volume-preservation",
            drift <= drift_tol,
            format!("relative drift {drift:.3e} over t ≤ {:.2}", records.last().unwrap().t),
        ));

        let chi_term = 4.0 * PI * initial.chi() as f64;
        let gb_dev = records
            .iter()
            .fold(0.0_f64, |m, r| m.max((r.gauss_bonnet - chi_term).abs()));
        let gb_tol = 1e-8 * (1.0 + chi_term.abs());
        out.push(CheckResult::from_bool(
            "flow.gauss-bonnet-constancy",
            gb_dev <= gb_tol,
            format!("max |∫R dμ − 4πχ| = {gb_dev:.3e}"),
        ));

        let bound_fail = records.iter().filter(|r| !r.bound_pass).count();
        out.push(CheckResult::from_bool(
            "flow.max-principle-bounds",
            bound_fail == 0,
            format!("{bound_fail} of {} samples violate the bound", records.len()),
        ));

        // potential residual at the last sample
        let last_state = trajectory.states.last().unwrap();
        let f = diagnostics::curvature_potential(last_state)?;
        let total = flow::total_curvature(last_state)?;
        let r = flow::r_value(last_state);
        let lap = operators::laplacian_g(&f, last_state)?;
        let mut residual = 0.0_f64;
        let mut sup_dev = 0.0_f64;
        for i in 0..f.len() {
            residual = residual.max((lap.values()[i] - (total.values()[i] - r)).abs());
            sup_dev = sup_dev.max((total.values()[i] - r).abs());
        }
        let ok = if sup_dev < 1e-13 {
            residual < 1e-12
        } else {
            residual <= 1e-8 * sup_dev
        };
        out.push(CheckResult::from_bool(
            "diag.potential-residual",
            ok,
            format!("max|Δf − (R−r)| = {residual:.3e}, sup|R−r| = {sup_dev:.3e}"),
        ));

        // purity: recomputation is bit-identical
        let again = diagnostics::build_records(&trajectory.states)?;
        let identical = again == *records;
        out.push(CheckResult::from_bool(
            "diag.purity",
            identical,
            "records recomputed from samples".into(),
        ));

        // spectral inequality with c1 = λ1
        let mid_state = &trajectory.states[trajectory.states.len() / 2];
        let f_mid = diagnostics::curvature_potential(mid_state)?;
        let total_mid = flow::total_curvature(mid_state)?;
        let r_mid = flow::r_value(mid_state);
        let lhs = mid_state.integrate(&total_mid.map(|c| (c - r_mid) * (c - r_mid)))?;
        let grad = mid_state.integrate(&operators::grad_norm_sq(&f_mid, mid_state)?)?;
        if grad < 1e-20 {
            out.push(CheckResult::pass(
                "diag.spectral-inequality",
                "trivial potential (constant curvature)".into(),
            ));
        } else {
            let lam = operators::lambda1(mid_state)?.value;
            let ok = lhs >= lam * (1.0 - 1e-6) * grad;
            out.push(CheckResult::from_bool(
                "diag.spectral-inequality",
                ok,
                format!("∫(Δf)² = {lhs:.6e} vs λ₁∫|∇f|² = {:.6e}", lam * grad),
            ));
        }

        // energy dissipation (r = 0) / |f| envelope (r < 0)
        let r0 = flow::r_value(initial);
        if r0.abs() <= 1e-12 {
            // densely sampled mini-run: the finite difference needs the fast
            // transient resolved
            let mut dense = config.flow.clone();
            dense.t_max = 0.05;
            dense.stop_tol = 1e-13;
            dense.sample_interval = 5e-3;
            let mini = flow::run(initial, &dense)?;
            if mini.states.len() >= 5 {
                let k = mini.states.len() / 2;
                let (sa, sb, sc) = (&mini.states[k - 1], &mini.states[k], &mini.states[k + 1]);
                let energy = |s: &ConformalState| -> Result<f64> {
                    let f = diagnostics::curvature_potential(s)?;
                    s.integrate(&operators::grad_norm_sq(&f, s)?)
                };
                let fd = (energy(sc)? - energy(sa)?) / (sc.t() - sa.t());
                let total_b = flow::total_curvature(sb)?;
                let rhs = -2.0 * sb.integrate(&total_b.map(|c| c * c))?;
                let err = (fd - rhs).abs() / rhs.abs().max(1e-12);
                out.push(CheckResult::from_bool(
                    "diag.energy-dissipation",
                    err <= 0.05,
                    format!("d/dt ∫|∇f|² = {fd:.6e} vs −2∫R² = {rhs:.6e} (rel {err:.2e})"),
                ));
            } else {
                out.push(CheckResult::pass(
                    "diag.energy-dissipation",
                    "stationary trajectory (both sides vanish)".into(),
                ));
            }
            out.push(CheckResult::skip("diag.f-bound", "needs r < 0"));
        } else if r0 < 0.0 {
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for rec in records.iter() {
                let envelope = (first.sup_abs_f + 1e-6) * (r0 * (rec.t - first.t)).exp();
                if rec.sup_abs_f > envelope {
                    ok = false;
                    worst = worst.max(rec.sup_abs_f - envelope);
                }
            }
            out.push(CheckResult::from_bool(
                "diag.f-bound",
                ok,
                format!("max envelope excess {worst:.3e}"),
            ));
            out.push(CheckResult::skip("diag.energy-dissipation", "needs r = 0"));
        } else {
            out.push(CheckResult::skip("diag.energy-dissipation", "needs r = 0"));
            out.push(CheckResult::skip("diag.f-bound", "needs r < 0"));
        }
        Ok(out)
    })
}

fn checks_flow_consistency(initial: &ConformalState) -> Vec<CheckResult> {
    catch("flow.consistency", || {
        let mut out = Vec::new();
        if !initial.domain().is_grid() {
            // the variational Laplacian check works on both backends
            out.push(variational_laplacian_check(initial)?);
            out.push(CheckResult::skip(
                "flow.curvature-evolution",
                "grid-only diagnostic",
            ));
            out.push(CheckResult::skip(
                "flow.variational-divergence",
                "grid-only diagnostic",
            ));
            out.push(CheckResult::skip(
                "diag.hessian-identity",
                "grid-only diagnostic",
            ));
            return Ok(out);
        }

        out.push(curvature_evolution_check(initial, 1e-4)?);
        out.push(variational_laplacian_check(initial)?);
        out.push(variational_divergence_check(initial)?);
        out.push(hessian_identity_check(initial)?);
        Ok(out)
    })
}

/// Finite-difference dR/dt against Δ_gR + R(R−r); the error must be first
/// order in dt (ratio ≥ 1.9 under halving).
pub fn curvature_evolution_error(state: &ConformalState, dt: f64) -> Result<f64> {
    let total0 = flow::total_curvature(state)?;
    let r = flow::r_value(state);
    let next = flow::step(state, dt, Integrator::ExplicitRk4)?;
    let total1 = flow::total_curvature(&next)?;
    let lap_r = operators::laplacian_g(&total0, state)?;
    let mut err = 0.0_f64;
    for i in 0..total0.len() {
        let fd = (total1.values()[i] - total0.values()[i]) / dt;
        let predicted = lap_r.values()[i]
            + total0.values()[i] * (total0.values()[i] - r);
        err = err.max((fd - predicted).abs());
    }
    Ok(err)
}

fn curvature_evolution_check(initial: &ConformalState, dt: f64) -> Result<CheckResult> {
    let state = perturbed_state(initial, 0.15, 201)?;
    let coarse = curvature_evolution_error(&state, dt)?;
    let fine = curvature_evolution_error(&state, dt / 2.0)?;
    let ratio = coarse / fine.max(1e-300);
    Ok(CheckResult::from_bool(
        "flow.curvature-evolution",
        ratio >= 1.9,
        format!("errors {coarse:.3e} → {fine:.3e}, ratio {ratio:.2}"),
    ))
}

/// A mildly non-stationary state derived from the configured one, for
/// consistency checks that need nonzero curvature.
fn perturbed_state(initial: &ConformalState, amplitude: f64, seed: u64) -> Result<ConformalState> {
    let bump = presets::random_field(initial.domain(), seed, amplitude)?;
    let u = initial.u().add(&bump)?;
    ConformalState::new(u, initial.torsion().clone(), 0.0)
}

fn variational_laplacian_check(initial: &ConformalState) -> Result<CheckResult> {
    let state = perturbed_state(initial, 0.15, 202)?;
    let w = presets::random_field(state.domain(), 203, 1.0)?;
    let err_at = |dt: f64| -> Result<f64> {
        let next = flow::step(&state, dt, Integrator::ExplicitRk4)?;
        let lap_next = operators::laplacian_g(&w, &next)?;
        let lap_now = operators::laplacian_g(&w, &state)?;
        let total = flow::total_curvature(&state)?;
        let r = flow::r_value(&state);
        let mut err = 0.0_f64;
        for i in 0..w.len() {
            let fd = (lap_next.values()[i] - lap_now.values()[i]) / dt;
            let predicted = (total.values()[i] - r) * lap_now.values()[i];
            err = err.max((fd - predicted).abs());
        }
        Ok(err)
    };
    let dt = 1e-4;
    let coarse = err_at(dt)?;
    let fine = err_at(dt / 2.0)?;
    let ratio = coarse / fine.max(1e-300);
    Ok(CheckResult::from_bool(
        "flow.variational-laplacian",
        ratio >= 1.9,
        format!("errors {coarse:.3e} → {fine:.3e}, ratio {ratio:.2}"),
    ))
}

fn variational_divergence_check(initial: &ConformalState) -> Result<CheckResult> {
    let state = perturbed_state(initial, 0.15, 204)?;
    let omega = presets::trig_one_form(state.domain(), 1, 1, 0.8, 0.3)?;
    let div0 = operators::divergence0(&omega);
    let err_at = |dt: f64| -> Result<f64> {
        let next = flow::step(&state, dt, Integrator::ExplicitRk4)?;
        let total = flow::total_curvature(&state)?;
        let r = flow::r_value(&state);
        let mut err = 0.0_f64;
        for i in 0..div0.len() {
            let now = (-state.u().values()[i]).exp() * div0.values()[i];
            let nxt = (-next.u().values()[i]).exp() * div0.values()[i];
            let fd = (nxt - now) / dt;
            let predicted = (total.values()[i] - r) * now;
            err = err.max((fd - predicted).abs());
        }
        Ok(err)
    };
    let dt = 1e-4;
    let coarse = err_at(dt)?;
    let fine = err_at(dt / 2.0)?;
    let ratio = coarse / fine.max(1e-300);
    Ok(CheckResult::from_bool(
        "flow.variational-divergence",
        ratio >= 1.9,
        format!("errors {coarse:.3e} → {fine:.3e}, ratio {ratio:.2}"),
    ))
}

/// Grid identity ∫|∇²R|² dμ = ∫(ΔR)² dμ − ½∫R_g|∇R|² dμ for the covariant
/// Hessian of the conformal metric.
pub fn hessian_identity_gap(state: &ConformalState) -> Result<(f64, f64)> {
    let grid = state.domain().as_grid()?;
    let total = flow::total_curvature(state)?;
    let u = state.u();
    let (u_x, u_y) = operators::gradient0(u)?;
    let (r_x, r_y) = operators::gradient0(&total)?;
    let (r_xx, r_xy, r_yy) = {
        let (a, b, c) = crate::operators::spectral::hessian(grid, total.values());
        (a, b, c)
    };
    let n = total.len();
    let mut hess_sq = Vec::with_capacity(n);
    for i in 0..n {
        let (ux, uy) = (u_x.values()[i], u_y.values()[i]);
        let (rx, ry) = (r_x.values()[i], r_y.values()[i]);
        let h_xx = r_xx[i] - 0.5 * ux * rx + 0.5 * uy * ry;
        let h_xy = r_xy[i] - 0.5 * (uy * rx + ux * ry);
        let h_yy = r_yy[i] + 0.5 * ux * rx - 0.5 * uy * ry;
        let e2u = (-2.0 * u.values()[i]).exp();
        hess_sq.push(e2u * (h_xx * h_xx + 2.0 * h_xy * h_xy + h_yy * h_yy));
    }
    let hess_field = total.same_domain(hess_sq)?;
    let lhs = state.integrate(&hess_field)?;

    let lap_r = operators::laplacian_g(&total, state)?;
    let term1 = state.integrate(&lap_r.map(|v| v * v))?;
    let r_g = flow::levi_civita_curvature(state)?;
    let grad_r = operators::grad_norm_sq(&total, state)?;
    let term2 = 0.5 * state.integrate(&r_g.zip_map(&grad_r, |a, b| a * b)?)?;
    Ok((lhs, term1 - term2))
}

fn hessian_identity_check(initial: &ConformalState) -> Result<CheckResult> {
    // run on a dedicated well-resolved grid: the identity needs second
    // derivatives of products, which alias on coarse grids
    let grid = initial.domain().as_grid()?;
    let n = grid.nx.max(grid.ny).max(96);
    let domain = Arc::new(Domain::grid(n, n, grid.lx, grid.ly)?);
    let torsion = Arc::new(crate::fields::TorsionData::from_one_form(
        presets::random_one_form(&domain, 206, 0.3)?,
    )?);
    let state = ConformalState::new(presets::random_field(&domain, 205, 0.25)?, torsion, 0.0)?;
    let (lhs, rhs) = hessian_identity_gap(&state)?;
    let err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
    Ok(CheckResult::from_bool(
        "diag.hessian-identity",
        err <= 1e-6,
        format!("∫|∇²R|² = {lhs:.6e} vs {rhs:.6e} at {n}x{n} (rel {err:.2e})"),
    ))
}

fn checks_stationary(config: &RunConfig, initial: &ConformalState) -> Vec<CheckResult> {
    catch("stationary.suite", || {
        let mut out = Vec::new();
        let chi = initial.chi();
        let domain = initial.domain().clone();
        let torsion = initial.torsion().clone();

        if chi == 0 {
            let oracle = stationary::flat_oracle(&domain, &torsion, initial.volume())?;
            let state = ConformalState::new(oracle.u_star.clone(), torsion.clone(), 0.0)?;
            let sup_rhs = flow::rhs(&state)?.max_abs();
            let tol = oracle.achieved_r_deviation.max(1e-9);
            out.push(CheckResult::from_bool(
                "stationary.oracle-fixed-point",
                sup_rhs <= 2.0 * tol,
                format!("max|rhs(u*)| = {sup_rhs:.3e}, oracle deviation {:.3e}", oracle.achieved_r_deviation),
            ));
            out.push(CheckResult::skip(
                "stationary.oracle-uniqueness",
                "needs chi < 0",
            ));
        } else if chi < 0 {
            let tol = config.oracle_tol;
            let oracle =
                stationary::hyperbolic_oracle(&domain, &torsion, initial.volume(), tol)?;
            let state = ConformalState::new(oracle.u_star.clone(), torsion.clone(), 0.0)?;
            let sup_rhs = flow::rhs(&state)?.max_abs();
            out.push(CheckResult::from_bool(
                "stationary.oracle-fixed-point",
                sup_rhs <= 2.0 * tol,
                format!("max|rhs(u*)| = {sup_rhs:.3e} vs tolerance {tol:.1e}"),
            ));

            let guess = presets::random_field(&domain, 301, 1.0)?;
            let again = stationary::hyperbolic_oracle_from(
                &domain,
                &torsion,
                initial.volume(),
                tol,
                Some(&guess),
            )?;
            let diff =
                stationary::aligned_max_diff(&again.u_star, &oracle.u_star, &torsion)?;
            out.push(CheckResult::from_bool(
                "stationary.oracle-uniqueness",
                diff <= 1e-8,
                format!("aligned max difference {diff:.3e}"),
            ));
        } else {
            out.push(CheckResult::skip(
                "stationary.oracle-fixed-point",
                "no oracle for positive Euler characteristic",
            ));
            out.push(CheckResult::skip(
                "stationary.oracle-uniqueness",
                "needs chi < 0",
            ));
        }

        if chi == 2 {
            // the raw icosphere is not discretely stationary in max-norm;
            // relax to the discrete round state first
            let mut relax_cfg = config.flow.clone();
            relax_cfg.integrator = Integrator::Imex;
            relax_cfg.dt_initial = relax_cfg.dt_initial.min(0.05);
            let round = stationary::relax_to_stationary(
                &ConformalState::background(domain.clone())?,
                &relax_cfg,
                0.02,
            )?;
            let report = stationary::stability_classify(&round, CLASSIFY_MESH_TOL)?;
            let shifted = ConformalState::new(round.u().shift(0.4), round.torsion().clone(), 0.0)?;
            let report2 = stationary::stability_classify(&shifted, CLASSIFY_MESH_TOL)?;
            let scale = 0.4_f64.exp();
            let lam_err = (report2.lambda1 * scale - report.lambda1).abs() / report.lambda1;
            out.push(CheckResult::from_bool(
                "stationary.classify-rescaling",
                report.class == report2.class && lam_err <= 1e-6,
                format!(
                    "labels {:?}/{:?}, λ₁ scaling error {lam_err:.3e}",
                    report.class, report2.class
                ),
            ));
            let hersch_ok = report.hersch_ok && report2.hersch_ok;
            out.push(CheckResult::from_bool(
                "stationary.hersch",
                hersch_ok,
                format!(
                    "λ₁ = {:.6} vs bound {:.6}",
                    report.lambda1, report.hersch_bound
                ),
            ));
        } else {
            out.push(CheckResult::skip(
                "stationary.classify-rescaling",
                "needs a sphere configuration",
            ));
            out.push(CheckResult::skip(
                "stationary.hersch",
                "needs a sphere configuration",
            ));
        }
        Ok(out)
    })
}

fn checks_offline(config: &RunConfig, initial: &ConformalState) -> Vec<CheckResult> {
    catch("offline.diagnostics-recompute", || {
        let csv_path = config.outputs.join("diagnostics.csv");
        if !csv_path.exists() {
            return Ok(vec![CheckResult::skip(
                "offline.diagnostics-recompute",
                "no diagnostics.csv in the output directory",
            )]);
        }
        let text = std::fs::read_to_string(&csv_path)?;
        let recorded = io::records_from_csv(&text)?;
        let domain = initial.domain().clone();
        let torsion = initial.torsion().clone();
        let mut states = Vec::new();
        for k in 0.. {
            let path = config.outputs.join(format!("snap_{k:06}.fld"));
            if !path.exists() {
                break;
            }
            let (u, t) = snapshot::read_field_with_time(&path, &domain)?;
            states.push(ConformalState::new(u, torsion.clone(), t)?);
        }
        if states.len() != recorded.len() {
            return Ok(vec![CheckResult::fail(
                "offline.diagnostics-recompute",
                format!(
                    "{} snapshots vs {} csv rows",
                    states.len(),
                    recorded.len()
                ),
            )]);
        }
        let recomputed = diagnostics::build_records(&states)?;
        let identical = recomputed == recorded;
        Ok(vec![CheckResult::from_bool(
            "offline.diagnostics-recompute",
            identical,
            format!("{} records recomputed from snapshots", recorded.len()),
        )])
    })
}
