//! Reproducible initial data: band-limited random fields and torsion
//! presets, all generated from the documented LCG stream so identical seeds
//! give bit-identical fields on every platform.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::fields::{Domain, OneForm, ScalarField, TorsionData};
use crate::numeric::{pairwise_dot, Lcg64};
use crate::operators::exact_one_form;

/// Band-limited random grid field: modes |kx|,|ky| ≤ min(nx,ny)/4 with
/// 1/(1+|k|²) falloff and LCG amplitudes/phases, rescaled so
/// max|field| = amplitude. Mode order is (mx from 0, my from −K to K),
/// skipping the mean; each mode draws one amplitude and one phase.
pub fn random_grid_field(domain: &Arc<Domain>, seed: u64, amplitude: f64) -> Result<ScalarField> {
    let grid = domain.as_grid()?;
    let k_max = (grid.nx.min(grid.ny) / 4).max(1) as i64;
    let mut rng = Lcg64::new(seed);
    let mut values = vec![0.0f64; grid.len()];
    for mx in 0..=k_max {
        for my in -k_max..=k_max {
            if mx == 0 && my <= 0 {
                continue; // conjugate half-plane plus the mean mode
            }
            let a = rng.next_symmetric() / (1.0 + (mx * mx + my * my) as f64);
            let phase = 2.0 * PI * rng.next_f64();
            let wx = 2.0 * PI * mx as f64 / grid.lx;
            let wy = 2.0 * PI * my as f64 / grid.ly;
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    let (x, y) = grid.point(i, j);
                    values[i * grid.ny + j] += a * (wx * x + wy * y + phase).cos();
                }
            }
        }
    }
    let sup = values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if sup > 0.0 {
        let scale = amplitude / sup;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
    ScalarField::new(domain.clone(), values)
}

/// Smooth random mesh field: LCG-weighted low-order polynomials of the
/// embedding coordinates, rescaled to max|field| = amplitude.
pub fn random_mesh_field(domain: &Arc<Domain>, seed: u64, amplitude: f64) -> Result<ScalarField> {
    let mesh = domain.as_mesh()?;
    let mut rng = Lcg64::new(seed);
    let coeffs: Vec<f64> = (0..9).map(|_| rng.next_symmetric()).collect();
    let mut values: Vec<f64> = mesh
        .positions
        .iter()
        .map(|&[x, y, z]| {
            coeffs[0] * x
                + coeffs[1] * y
                + coeffs[2] * z
                + coeffs[3] * x * y
                + coeffs[4] * y * z
                + coeffs[5] * z * x
                + coeffs[6] * (x * x - y * y)
                + coeffs[7] * (y * y - z * z)
                + coeffs[8] * x * y * z
        })
        .collect();
    let sup = values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if sup > 0.0 {
        let scale = amplitude / sup;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
    ScalarField::new(domain.clone(), values)
}

/// Random initial u on either backend.
pub fn random_field(domain: &Arc<Domain>, seed: u64, amplitude: f64) -> Result<ScalarField> {
    if domain.is_grid() {
        random_grid_field(domain, seed, amplitude)
    } else {
        random_mesh_field(domain, seed, amplitude)
    }
}

/// Exact one-form V♭ = dφ for a single trigonometric mode
/// φ = a·sin(kx·2πx/Lx + ky·2πy/Ly + phase).
pub fn trig_one_form(
    domain: &Arc<Domain>,
    kx: i64,
    ky: i64,
    a: f64,
    phase: f64,
) -> Result<OneForm> {
    let grid = domain.as_grid()?;
    let (lx, ly) = (grid.lx, grid.ly);
    let phi = ScalarField::from_grid_fn(domain.clone(), |x, y| {
        a * (2.0 * PI * kx as f64 * x / lx + 2.0 * PI * ky as f64 * y / ly + phase).sin()
    })?;
    exact_one_form(&phi)
}

/// Exact one-form dφ with φ a band-limited random potential.
pub fn random_one_form(domain: &Arc<Domain>, seed: u64, amplitude: f64) -> Result<OneForm> {
    let phi = random_grid_field(domain, seed, amplitude)?;
    exact_one_form(&phi)
}

/// Divergence-free preset: a constant one-form, invisible to the flow on the
/// flat torus.
pub fn constant_one_form(domain: &Arc<Domain>, cx: f64, cy: f64) -> Result<OneForm> {
    OneForm::constant(domain.clone(), cx, cy)
}

/// Mesh torsion preset: prescribed divergence proportional to a coordinate
/// height function, projected to exact zero background-weighted mean.
pub fn height_divergence(domain: &Arc<Domain>, amplitude: f64, axis: usize) -> Result<TorsionData> {
    let mesh = domain.as_mesh()?;
    let raw: Vec<f64> = mesh.positions.iter().map(|p| p[axis.min(2)]).collect();
    let weights = &mesh.vertex_weights;
    let total: f64 = crate::numeric::pairwise_sum(weights);
    let mean = pairwise_dot(&raw, weights) / total;
    let sup = raw
        .iter()
        .fold(0.0_f64, |m, &v| m.max((v - mean).abs()))
        .max(1e-300);
    let values: Vec<f64> = raw
        .iter()
        .map(|&v| amplitude * (v - mean) / sup)
        .collect();
    TorsionData::from_divergence(ScalarField::new(domain.clone(), values)?)
}

/// Mesh torsion preset: random smooth divergence with exact zero
/// background-weighted mean.
pub fn random_mesh_divergence(
    domain: &Arc<Domain>,
    seed: u64,
    amplitude: f64,
) -> Result<TorsionData> {
    let raw = random_mesh_field(domain, seed, amplitude)?;
    let mesh = domain.as_mesh()?;
    let weights = &mesh.vertex_weights;
    let total: f64 = crate::numeric::pairwise_sum(weights);
    let mean = pairwise_dot(raw.values(), weights) / total;
    TorsionData::from_divergence(raw.shift(-mean))
}

/// Mesh torsion preset: zonal divergence proportional to the squared
/// coordinate along an axis, zero weighted mean. On the sphere this forcing
/// is reflection-symmetric, so the flow settles onto a non-round stationary
/// state without drifting along the conformal directions.
pub fn zonal_divergence(domain: &Arc<Domain>, amplitude: f64, axis: usize) -> Result<TorsionData> {
    let mesh = domain.as_mesh()?;
    let raw: Vec<f64> = mesh
        .positions
        .iter()
        .map(|p| p[axis.min(2)] * p[axis.min(2)])
        .collect();
    let weights = &mesh.vertex_weights;
    let total: f64 = crate::numeric::pairwise_sum(weights);
    let mean = pairwise_dot(&raw, weights) / total;
    let sup = raw
        .iter()
        .fold(0.0_f64, |m, &v| m.max((v - mean).abs()))
        .max(1e-300);
    let values: Vec<f64> = raw
        .iter()
        .map(|&v| amplitude * (v - mean) / sup)
        .collect();
    TorsionData::from_divergence(ScalarField::new(domain.clone(), values)?)
}
