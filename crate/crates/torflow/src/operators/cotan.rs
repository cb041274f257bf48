//! Discrete operators on triangle meshes: lumped-mass cotangent Laplacian,
//! Poisson solves via conjugate gradients, and piecewise-linear gradients.

use crate::error::Result;
use crate::fields::MeshDomain;
use crate::sparse::{pcg, CgSolution};

/// Δ₀f = −M⁻¹ S f with the cotangent stiffness S and lumped mass M.
/// A peak maps to a negative value at the peak.
pub fn laplacian(mesh: &MeshDomain, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    laplacian_into(mesh, values, &mut out);
    out
}

/// `laplacian` writing into a caller-provided buffer.
pub fn laplacian_into(mesh: &MeshDomain, values: &[f64], out: &mut [f64]) {
    mesh.stiffness.matvec(values, out);
    for (o, &m) in out.iter_mut().zip(&mesh.vertex_weights) {
        *o = -*o / m;
    }
}

/// Solve Δ₀φ = rhs, i.e. S φ = −M·rhs, by Jacobi-preconditioned CG.
/// The rhs must be compatible (zero weighted mean); the caller projects.
/// Returns φ with zero plain-sum drift removed by the caller's normalization.
pub fn poisson(mesh: &MeshDomain, rhs: &[f64], tol: f64, what: &str) -> Result<CgSolution> {
    let n = rhs.len();
    let b: Vec<f64> = (0..n).map(|i| -mesh.vertex_weights[i] * rhs[i]).collect();
    let diag = mesh.stiffness.diagonal();
    // The system is singular with kernel = constants, but consistent
    // (1ᵀb = 0); CG residuals stay in the range, and any kernel drift in the
    // iterate is removed by the caller's mean normalization.
    let apply = |x: &[f64], y: &mut [f64]| {
        mesh.stiffness.matvec(x, y);
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..r.len() {
            z[i] = r[i] / diag[i].max(1e-300);
        }
    };
    pcg(&apply, &precond, &b, tol, 10 * n.max(100), what)
}

/// Per-face gradient magnitude squared of the piecewise-linear interpolant,
/// averaged onto vertices with incident-area weights. The area weighting
/// makes ∫|∇f|² dμ₀ with lumped quadrature agree exactly with the Dirichlet
/// energy fᵀSf.
pub fn grad_norm_sq_vertices(mesh: &MeshDomain, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut acc = vec![0.0; n];
    let mut area_acc = vec![0.0; n];
    for f in &mesh.faces {
        let (i, j, k) = (f[0] as usize, f[1] as usize, f[2] as usize);
        let (pi, pj, pk) = (mesh.positions[i], mesh.positions[j], mesh.positions[k]);
        let e0 = [pj[0] - pi[0], pj[1] - pi[1], pj[2] - pi[2]];
        let e1 = [pk[0] - pi[0], pk[1] - pi[1], pk[2] - pi[2]];
        let g00 = dot3(e0, e0);
        let g01 = dot3(e0, e1);
        let g11 = dot3(e1, e1);
        let det = g00 * g11 - g01 * g01;
        let area = 0.5 * det.max(0.0).sqrt();
        if det <= 0.0 {
            continue;
        }
        // df in the edge basis; |∇f|² through the inverse metric
        let d0 = values[j] - values[i];
        let d1 = values[k] - values[i];
        let grad_sq = (g11 * d0 * d0 - 2.0 * g01 * d0 * d1 + g00 * d1 * d1) / det;
        for &v in &[i, j, k] {
            acc[v] += area * grad_sq;
            area_acc[v] += area;
        }
    }
    (0..n)
        .map(|i| if area_acc[i] > 0.0 { acc[i] / area_acc[i] } else { 0.0 })
        .collect()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
