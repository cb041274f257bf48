use std::f64::consts::PI;
use std::sync::Arc;
use torflow::fields::{ConformalState, Domain, TorsionData};
use torflow::flow::{self, Integrator};
use torflow::presets;

fn main() {
    let domain = Arc::new(Domain::grid(64, 64, 2.0 * PI, 2.0 * PI).unwrap());
    let torsion = Arc::new(
        TorsionData::from_one_form(presets::random_one_form(&domain, 5, 0.3).unwrap()).unwrap(),
    );
    let u0 = presets::random_field(&domain, 4, 0.2).unwrap();
    let state = ConformalState::new(u0, torsion, 0.0).unwrap();

    // Richardson: one step dt vs two half steps
    let d = |dt: f64| -> f64 {
        let one = flow::step(&state, dt, Integrator::ExplicitRk4).unwrap();
        let half = flow::step(&state, dt / 2.0, Integrator::ExplicitRk4).unwrap();
        let two = flow::step(&half, dt / 2.0, Integrator::ExplicitRk4).unwrap();
        one.u().sub(two.u()).unwrap().max_abs()
    };
    let dt = 2e-4;
    let (d1, d2) = (d(dt), d(dt / 2.0));
    println!("richardson: {d1:.3e} / {d2:.3e} ratio {:.2}", d1 / d2);

    // curvature evolution dt-halving
    let e1 = torflow::cli::curvature_evolution_error(&state, 1e-4).unwrap();
    let e2 = torflow::cli::curvature_evolution_error(&state, 5e-5).unwrap();
    println!("eq8 consistency: {e1:.3e} / {e2:.3e} ratio {:.2}", e1 / e2);

    // hessian identity
    let (lhs, rhs) = torflow::cli::hessian_identity_gap(&state).unwrap();
    println!(
        "hessian identity: {lhs:.6e} vs {rhs:.6e} rel {:.2e}",
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
    );

    // dt -> 0 limit
    let tiny = flow::step(&state, 1e-12, Integrator::ExplicitRk4).unwrap();
    println!("dt->0: {:.3e}", tiny.u().sub(state.u()).unwrap().max_abs());
}
