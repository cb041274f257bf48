//! Background and conformal differential operators: Laplacian, divergence,
//! gradients, Poisson solver and the smallest nonzero Laplace eigenvalue.
//!
//! Sign convention: Δ is negative semi-definite (Δ sin = −k² sin), matching
//! the curvature-potential equation Δf = R − r.

pub mod cotan;
pub mod eigen;
pub mod spectral;

use crate::error::{Error, Result};
use crate::fields::{ConformalState, Domain, OneForm, ScalarField};
use crate::numeric::{pairwise_dot, pairwise_sum};

pub use eigen::{lambda1, Lambda1};

/// Solution of the background Poisson problem Δ₀φ = rhs.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Zero mean with respect to the background measure.
    pub field: ScalarField,
    /// Max-norm of Δ₀φ − rhs (after projecting the rhs mean).
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Relative solvability tolerance of `poisson_solve0`.
pub const POISSON_SOLVABILITY_TOL: f64 = 1e-8;
/// Relative residual target of the mesh CG Poisson solve.
pub const POISSON_CG_TOL: f64 = 1e-10;

pub(crate) fn laplacian0_values(domain: &Domain, values: &[f64]) -> Vec<f64> {
    match domain {
        Domain::Grid(g) => spectral::laplacian(g, values),
        Domain::Mesh(m) => cotan::laplacian(m, values),
    }
}

/// Background Laplace-Beltrami Δ₀. Grid: Fourier symbol −(kx² + ky²);
/// mesh: lumped-mass cotangent Laplacian.
pub fn laplacian0(field: &ScalarField) -> ScalarField {
    let values = laplacian0_values(field.domain(), field.values());
    field
        .same_domain(values)
        .expect("laplacian preserves length")
}

/// Conformal Laplacian Δ_g = e^{-u} Δ₀ (exact in two dimensions).
pub fn laplacian_g(field: &ScalarField, state: &ConformalState) -> Result<ScalarField> {
    if !field.domain().compatible(state.domain()) {
        return Err(Error::DomainMismatch);
    }
    let lap = laplacian0_values(field.domain(), field.values());
    let values: Vec<f64> = lap
        .iter()
        .zip(state.u().values())
        .map(|(&l, &u)| (-u).exp() * l)
        .collect();
    field.same_domain(values)
}

/// Spectral background divergence ∂x ωx + ∂y ωy of a grid one-form.
/// The output has exactly zero mean mode.
pub fn divergence0(omega: &OneForm) -> ScalarField {
    let grid = omega
        .domain()
        .as_grid()
        .expect("one-forms exist on grids only");
    let (dx, _) = spectral::gradient(grid, omega.wx().values());
    let (_, dy) = spectral::gradient(grid, omega.wy().values());
    let values: Vec<f64> = dx.iter().zip(&dy).map(|(&a, &b)| a + b).collect();
    omega
        .wx()
        .same_domain(values)
        .expect("divergence preserves length")
}

/// Background gradient components (∂x f, ∂y f); grid only.
pub fn gradient0(field: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let grid = field.domain().as_grid()?;
    let (dx, dy) = spectral::gradient(grid, field.values());
    Ok((field.same_domain(dx)?, field.same_domain(dy)?))
}

/// The exact one-form dφ.
pub fn exact_one_form(phi: &ScalarField) -> Result<OneForm> {
    let (dx, dy) = gradient0(phi)?;
    OneForm::new(dx, dy)
}

/// Pointwise |∇f|²_g = e^{-u} |∇₀f|². Grid: spectral derivatives; mesh:
/// area-weighted vertex average of per-face piecewise-linear gradients.
pub fn grad_norm_sq(field: &ScalarField, state: &ConformalState) -> Result<ScalarField> {
    if !field.domain().compatible(state.domain()) {
        return Err(Error::DomainMismatch);
    }
    let background: Vec<f64> = match field.domain().as_ref() {
        Domain::Grid(g) => {
            let (dx, dy) = spectral::gradient(g, field.values());
            dx.iter().zip(&dy).map(|(&a, &b)| a * a + b * b).collect()
        }
        Domain::Mesh(m) => cotan::grad_norm_sq_vertices(m, field.values()),
    };
    let values: Vec<f64> = background
        .iter()
        .zip(state.u().values())
        .map(|(&g2, &u)| (-u).exp() * g2)
        .collect();
    field.same_domain(values)
}

/// Solve the background Poisson problem Δ₀φ = rhs.
///
/// The rhs must have zero background-weighted mean within `tol` relative to
/// its L¹ norm (solvability on a closed surface); the residual mean is
/// projected out before inversion. φ is normalized to zero mean with respect
/// to the background measure.
pub fn poisson_solve0_with_tol(rhs: &ScalarField, tol: f64) -> Result<PoissonSolution> {
    let domain = rhs.domain();
    let n = rhs.len();
    let weights: Vec<f64> = (0..n).map(|i| domain.weight(i)).collect();
    let total_weight = pairwise_sum(&weights);
    let integral = pairwise_dot(rhs.values(), &weights);
    let l1: f64 = pairwise_dot(
        &rhs.values().iter().map(|v| v.abs()).collect::<Vec<_>>(),
        &weights,
    );
    if l1 == 0.0 {
        return Ok(PoissonSolution {
            field: ScalarField::zeros(domain.clone()),
            residual_norm: 0.0,
            iterations: 0,
        });
    }
    // relative to the L1 mass, with an absolute floor so that near-zero
    // fields are not rejected on quadrature round-off
    if integral.abs() > tol * l1 && integral.abs() > 1e-13 * total_weight {
        return Err(Error::Solvability {
            mean: integral / total_weight,
            tol,
        });
    }
    let mean = integral / total_weight;
    let projected: Vec<f64> = rhs.values().iter().map(|&v| v - mean).collect();

    let (mut phi, iterations) = match domain.as_ref() {
        Domain::Grid(g) => (spectral::poisson(g, &projected), 0),
        Domain::Mesh(m) => {
            let sol = cotan::poisson(m, &projected, POISSON_CG_TOL, "mesh Poisson solve")?;
            (sol.x, sol.iterations)
        }
    };
    // zero mean w.r.t. the background measure
    let phi_mean = pairwise_dot(&phi, &weights) / total_weight;
    for v in phi.iter_mut() {
        *v -= phi_mean;
    }

    let lap = laplacian0_values(domain, &phi);
    let residual_norm = lap
        .iter()
        .zip(&projected)
        .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).abs()));
    Ok(PoissonSolution {
        field: ScalarField::new(domain.clone(), phi)?,
        residual_norm,
        iterations,
    })
}

/// `poisson_solve0_with_tol` at the default solvability tolerance.
pub fn poisson_solve0(rhs: &ScalarField) -> Result<PoissonSolution> {
    poisson_solve0_with_tol(rhs, POISSON_SOLVABILITY_TOL)
}

/// Apply the background stiffness S (grid: −w₀Δ₀, mesh: cotangent matrix);
/// xᵀSx is the Dirichlet energy ∫|∇x|² dμ₀.
pub(crate) fn stiffness_apply(domain: &Domain, x: &[f64]) -> Vec<f64> {
    match domain {
        Domain::Grid(g) => spectral::laplacian(g, x)
            .iter()
            .map(|&v| -g.weight * v)
            .collect(),
        Domain::Mesh(m) => {
            let mut y = vec![0.0; x.len()];
            m.stiffness.matvec(x, &mut y);
            y
        }
    }
}

/// Solve S y = b for b with zero plain sum; the kernel component of y is not
/// fixed here (callers deflate).
pub(crate) fn stiffness_solve(domain: &Domain, b: &[f64]) -> Result<Vec<f64>> {
    match domain {
        Domain::Grid(g) => {
            let scaled: Vec<f64> = b.iter().map(|&v| -v / g.weight).collect();
            Ok(spectral::poisson(g, &scaled))
        }
        Domain::Mesh(m) => {
            let diag = m.stiffness.diagonal();
            let apply = |x: &[f64], y: &mut [f64]| m.stiffness.matvec(x, y);
            let precond = |r: &[f64], z: &mut [f64]| {
                for i in 0..r.len() {
                    z[i] = r[i] / diag[i].max(1e-300);
                }
            };
            let sol = crate::sparse::pcg(
                &apply,
                &precond,
                b,
                POISSON_CG_TOL,
                10 * b.len().max(100),
                "stiffness solve",
            )?;
            Ok(sol.x)
        }
    }
}
