// temporary exploration harness; not part of the deliverable
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use torflow::fields::{meshgen, ConformalState, Domain, ScalarField, TorsionData};
use torflow::flow::{self, FlowConfig, Integrator};
use torflow::operators;
use torflow::presets;
use torflow::stationary;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "sphere" => sphere_lambda(),
        "torus" => torus_flow(),
        "genus2" => genus2_flow(),
        "sphere-flow" => sphere_flow(),
        "big" => big_run(),
        _ => println!("usage: scratch [sphere|torus|genus2|sphere-flow|big]"),
    }
}

fn sphere_lambda() {
    for level in [2u32, 3, 4] {
        let t0 = Instant::now();
        let domain = Arc::new(meshgen::icosphere(level).unwrap());
        let state = ConformalState::background(domain.clone()).unwrap();
        let eig = operators::lambda1(&state).unwrap();
        let r = flow::r_value(&state);
        let total = flow::total_curvature(&state).unwrap();
        println!(
            "level {level}: V={} lambda1={:.6} r={:.6} vol={:.6} (4pi={:.6}) R range [{:.3}, {:.3}] dt={:?}",
            domain.node_count(),
            eig.value,
            r,
            state.volume(),
            4.0 * PI,
            total.min(),
            total.max(),
            t0.elapsed()
        );
    }
}

fn torus_flow() {
    let t0 = Instant::now();
    let domain = Arc::new(Domain::grid(64, 64, 2.0 * PI, 2.0 * PI).unwrap());
    let torsion = Arc::new(
        TorsionData::from_one_form(presets::random_one_form(&domain, 5, 0.4).unwrap()).unwrap(),
    );
    let u0 = presets::random_field(&domain, 4, 0.3).unwrap();
    let initial = ConformalState::new(u0, torsion.clone(), 0.0).unwrap();
    let config = FlowConfig {
        dt_initial: 1.0,
        dt_safety: 0.9,
        t_max: 50.0,
        stop_tol: 1e-9,
        sample_interval: 0.25,
        integrator: Integrator::ExplicitRk4,
    };
    let traj = flow::run(&initial, &config).unwrap();
    let last = traj.records.last().unwrap();
    println!(
        "torus: termination {:?} at t={:.3}, samples {}, sup|R-r| {:.3e}, vol drift {:.3e} ({:?})",
        traj.termination,
        last.t,
        traj.records.len(),
        last.sup_abs_r_dev,
        (last.volume - traj.records[0].volume).abs() / traj.records[0].volume,
        t0.elapsed()
    );
    let oracle = stationary::flat_oracle(&domain, &torsion, initial.volume()).unwrap();
    let diff = stationary::aligned_max_diff(
        traj.states.last().unwrap().u(),
        &oracle.u_star,
        &torsion,
    )
    .unwrap();
    println!(
        "oracle deviation {:.3e}, flow-vs-oracle {:.3e}",
        oracle.achieved_r_deviation, diff
    );
    let max_gauge = traj.records.iter().fold(0.0_f64, |m, r| m.max(r.gauge_spread));
    let max_divv = traj
        .records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.divv_identity_err));
    println!("max gauge spread {max_gauge:.3e}, max divv err {max_divv:.3e}");
}

fn genus2_flow() {
    let t0 = Instant::now();
    let domain = Arc::new(meshgen::genus2_mesh(110).unwrap());
    println!(
        "genus2 mesh: V={} F={} chi={} built in {:?}",
        domain.node_count(),
        domain.as_mesh().unwrap().faces.len(),
        domain.euler_characteristic(),
        t0.elapsed()
    );
    let state0 = ConformalState::background(domain.clone()).unwrap();
    let total0 = flow::total_curvature(&state0).unwrap();
    println!(
        "background R range [{:.3}, {:.3}], bg volume {:.4}",
        total0.min(),
        total0.max(),
        domain.background_volume()
    );
    // normalize volume so r = -1
    let target = 8.0 * PI;
    let torsion = Arc::new(TorsionData::none(domain.clone()));
    let shift = (target / state0.volume()).ln();
    let initial =
        ConformalState::new(state0.u().shift(shift), torsion.clone(), 0.0).unwrap();
    println!("r = {:.6}", flow::r_value(&initial));

    let config = FlowConfig {
        dt_initial: 1.0,
        dt_safety: 0.9,
        t_max: 60.0,
        stop_tol: 9e-6,
        sample_interval: 0.5,
        integrator: Integrator::Imex,
    };
    let t1 = Instant::now();
    let traj = flow::run(&initial, &config).unwrap();
    let last = traj.records.last().unwrap();
    println!(
        "genus2 flow: {:?} at t={:.3}, samples {}, sup|R-r| {:.3e}, elapsed {:?}",
        traj.termination,
        last.t,
        traj.records.len(),
        last.sup_abs_r_dev,
        t1.elapsed()
    );
    let bound_fails = traj.records.iter().filter(|r| !r.bound_pass).count();
    println!("bound fails: {bound_fails}");

    let t2 = Instant::now();
    let oracle = stationary::hyperbolic_oracle(&domain, &torsion, target, 1e-8).unwrap();
    println!(
        "oracle: deviation {:.3e} in {} iterations ({:?})",
        oracle.achieved_r_deviation,
        oracle.iterations,
        t2.elapsed()
    );
    let diff = stationary::aligned_max_diff(
        traj.states.last().unwrap().u(),
        &oracle.u_star,
        &torsion,
    )
    .unwrap();
    println!("flow vs oracle: {diff:.3e}");
}

fn sphere_flow() {
    let domain = Arc::new(meshgen::icosphere(4).unwrap());
    let torsion = Arc::new(presets::height_divergence(&domain, 0.8, 2).unwrap());
    let initial = ConformalState::new(
        ScalarField::zeros(domain.clone()),
        torsion.clone(),
        0.0,
    )
    .unwrap();
    let r = flow::r_value(&initial);
    let total = flow::total_curvature(&initial).unwrap();
    let dev0 = total
        .values()
        .iter()
        .fold(0.0_f64, |m, &c| m.max((c - r).abs()));
    println!("sphere: r={r:.4}, initial sup|R-r|={dev0:.4}");
    let config = FlowConfig {
        dt_initial: 1.0,
        dt_safety: 0.9,
        t_max: 30.0,
        stop_tol: 0.04 * r,
        sample_interval: 0.25,
        integrator: Integrator::Imex,
    };
    let t0 = Instant::now();
    let traj = flow::run(&initial, &config).unwrap();
    let last = traj.records.last().unwrap();
    println!(
        "sphere flow: {:?} at t={:.3}, sup|R-r| {:.3e} ({:?})",
        traj.termination, last.t, last.sup_abs_r_dev, t0.elapsed()
    );
    let state = traj.states.last().unwrap();
    match stationary::stability_classify(state, 0.02) {
        Ok(report) => println!(
            "classify: {:?} lambda1={:.5} r={:.5} hersch={:.5} ok={}",
            report.class, report.lambda1, report.r, report.hersch_bound, report.hersch_ok
        ),
        Err(e) => println!("classify error: {e}"),
    }
}

fn big_run() {
    let t0 = Instant::now();
    let domain = Arc::new(Domain::grid(128, 128, 2.0 * PI, 2.0 * PI).unwrap());
    let torsion = Arc::new(
        TorsionData::from_one_form(presets::random_one_form(&domain, 43, 0.4).unwrap()).unwrap(),
    );
    let u0 = presets::random_field(&domain, 42, 0.3).unwrap();
    let initial = ConformalState::new(u0, torsion, 0.0).unwrap();
    let config = FlowConfig {
        dt_initial: 1.0,
        dt_safety: 0.9,
        t_max: 50.0,
        stop_tol: 1e-9,
        sample_interval: 0.25,
        integrator: Integrator::ExplicitRk4,
    };
    let traj = flow::run(&initial, &config).unwrap();
    let last = traj.records.last().unwrap();
    let first = &traj.records[0];
    println!(
        "big run: {:?} at t={:.3}, steps-to-there, samples {}, sup {:.2e}, elapsed {:?}",
        traj.termination,
        last.t,
        traj.records.len(),
        last.sup_abs_r_dev,
        t0.elapsed()
    );
    println!(
        "vol drift {:.3e}, max|gb| {:.3e}, initial sup|R-r| {:.3}",
        (last.volume - first.volume).abs() / first.volume,
        traj.records
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.gauss_bonnet.abs())),
        first.sup_abs_r_dev
    );
    let max_divv = traj
        .records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.divv_identity_err));
    println!("max divv identity err {max_divv:.3e}");
}

#[allow(dead_code)]
fn probe() {}
