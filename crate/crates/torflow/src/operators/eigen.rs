//! Smallest nonzero eigenvalue of −Δ_g via inverse iteration with deflation
//! of constants: generalized problem S x = λ M_g x with the background
//! stiffness S and the conformal lumped mass M_g = e^{u}·w.

use crate::error::{Error, Result};
use crate::fields::{ConformalState, ScalarField};
use crate::numeric::{pairwise_dot, pairwise_sum, Lcg64};
use crate::operators::{stiffness_apply, stiffness_solve};

/// Relative eigenvalue tolerance.
pub const LAMBDA1_TOL: f64 = 1e-8;
const MAX_ITER: usize = 2000;

/// First nonzero eigenvalue of −Δ_g together with its eigenvector.
#[derive(Clone, Debug)]
pub struct Lambda1 {
    pub value: f64,
    pub eigenvector: ScalarField,
}

pub fn lambda1(state: &ConformalState) -> Result<Lambda1> {
    let domain = state.domain().clone();
    let n = domain.node_count();
    let mass = state.conformal_weights();
    let mass_total = pairwise_sum(mass);

    let deflate = |x: &mut [f64]| {
        let mean = pairwise_dot(x, mass) / mass_total;
        for v in x.iter_mut() {
            *v -= mean;
        }
    };
    let m_norm = |x: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += mass[i] * x[i] * x[i];
        }
        acc.sqrt()
    };

    // Deterministic start vector.
    let mut rng = Lcg64::new(0x1a3bda);
    let mut x: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
    deflate(&mut x);
    let nrm = m_norm(&x);
    for v in x.iter_mut() {
        *v /= nrm;
    }

    let mut rho_old = f64::INFINITY;
    for iter in 0..MAX_ITER {
        let b: Vec<f64> = (0..n).map(|i| mass[i] * x[i]).collect();
        let mut y = stiffness_solve(&domain, &b)?;
        deflate(&mut y);
        // S·y equals b up to solver error, so yᵀSy ≈ yᵀb.
        let num = pairwise_dot(&y, &b);
        let mut my = 0.0;
        for i in 0..n {
            my += mass[i] * y[i] * y[i];
        }
        let rho = num / my;
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::SolverFailure {
                what: "lambda1 inverse iteration (degenerate quotient)".into(),
                iterations: iter,
            });
        }
        let nrm = my.sqrt();
        for i in 0..n {
            x[i] = y[i] / nrm;
        }
        if (rho - rho_old).abs() <= 0.25 * LAMBDA1_TOL * rho {
            // Final Rayleigh quotient of the returned vector, evaluated
            // through the stiffness so that callers can reproduce it.
            let sx = stiffness_apply(&domain, &x);
            let value = pairwise_dot(&x, &sx) / {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += mass[i] * x[i] * x[i];
                }
                acc
            };
            return Ok(Lambda1 {
                value,
                eigenvector: ScalarField::new(domain, x)?,
            });
        }
        rho_old = rho;
    }
    Err(Error::SolverFailure {
        what: "lambda1 inverse iteration".into(),
        iterations: MAX_ITER,
    })
}
