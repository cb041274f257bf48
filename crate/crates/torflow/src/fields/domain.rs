//! Discretized closed surfaces: periodic grids (flat torus) and closed
//! oriented triangle meshes with the embedding-induced background metric.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::sparse::Csr;

/// Uniform periodic grid on the flat torus [0, Lx) × [0, Ly).
///
/// Node (i, j) sits at (i·Lx/nx, j·Ly/ny); values are stored x-major
/// (index = i·ny + j). Quadrature is the trapezoidal rule, i.e. the uniform
/// weight Lx·Ly/(nx·ny), which is spectrally accurate for smooth periodic
/// integrands.
#[derive(Debug)]
pub struct GridDomain {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Quadrature weight per node.
    pub weight: f64,
    /// Angular wavenumbers along x in FFT storage order.
    pub kx: Vec<f64>,
    /// Angular wavenumbers along y in FFT storage order.
    pub ky: Vec<f64>,
}

impl GridDomain {
    fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 16 || ny < 16 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::InvalidDomain(format!(
                "grid dimensions must be even and at least 16, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "grid periods must be positive, got Lx={lx}, Ly={ly}"
            )));
        }
        let wavenumbers = |n: usize, l: f64| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                    2.0 * PI * m / l
                })
                .collect()
        };
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            weight: lx * ly / (nx * ny) as f64,
            kx: wavenumbers(nx, lx),
            ky: wavenumbers(ny, ly),
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    /// Coordinates of node (i, j).
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (
            i as f64 * self.lx / self.nx as f64,
            j as f64 * self.ly / self.ny as f64,
        )
    }

    /// Largest magnitude of the Laplacian symbol, (π·nx/Lx)² + (π·ny/Ly)².
    pub fn symbol_bound(&self) -> f64 {
        let kx_max = PI * self.nx as f64 / self.lx;
        let ky_max = PI * self.ny as f64 / self.ly;
        kx_max * kx_max + ky_max * ky_max
    }
}

/// Closed oriented triangle mesh with precomputed discrete operators.
#[derive(Debug)]
pub struct MeshDomain {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
    /// Lumped vertex areas: one third of the incident triangle areas.
    pub vertex_weights: Vec<f64>,
    /// Cotangent stiffness matrix, positive semi-definite; fᵀSf equals the
    /// Dirichlet energy of the piecewise-linear interpolant.
    pub stiffness: Csr,
    /// Background total curvature R₀ = 2·(angle defect)/(vertex weight).
    pub background_curvature: Vec<f64>,
    pub euler_characteristic: i64,
    /// Upper bound on the spectrum of M⁻¹S for explicit step-size control.
    pub spectral_bound: f64,
}

impl MeshDomain {
    fn new(positions: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let nv = positions.len();
        if nv < 4 || faces.is_empty() {
            return Err(Error::InvalidDomain(
                "mesh needs at least 4 vertices and 1 face".into(),
            ));
        }
        for p in &positions {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidDomain("non-finite vertex position".into()));
            }
        }
        for f in &faces {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidDomain("degenerate face indices".into()));
            }
            if f.iter().any(|&v| v as usize >= nv) {
                return Err(Error::InvalidDomain("face index out of range".into()));
            }
        }

        // Closed oriented 2-manifold: each undirected edge is used by exactly
        // two faces, once per direction.
        let mut edge_use: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
        for f in &faces {
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                let entry = edge_use.entry(key).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        for (&(a, b), &(fwd, rev)) in &edge_use {
            if fwd != 1 || rev != 1 {
                return Err(Error::InvalidDomain(format!(
                    "edge ({a}, {b}) used {fwd} times forward and {rev} times backward; \
                     mesh must be closed and consistently oriented"
                )));
            }
        }
        let ne = edge_use.len();
        let chi = nv as i64 - ne as i64 + faces.len() as i64;

        // Per-face geometry: areas, cotangents, interior angles.
        let mut areas = Vec::with_capacity(faces.len());
        let mut vertex_weights = vec![0.0; nv];
        let mut angle_sums = vec![0.0; nv];
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(faces.len() * 12);
        for f in &faces {
            let p = [
                positions[f[0] as usize],
                positions[f[1] as usize],
                positions[f[2] as usize],
            ];
            let area = triangle_area(&p);
            areas.push(area);
            for corner in 0..3 {
                let i = f[corner];
                let j = f[(corner + 1) % 3];
                let k = f[(corner + 2) % 3];
                let u = sub(positions[j as usize], positions[i as usize]);
                let v = sub(positions[k as usize], positions[i as usize]);
                let d = dot(u, v);
                let cross_norm = norm(cross(u, v));
                angle_sums[i as usize] += cross_norm.atan2(d);
                // cot of the angle at i weights the opposite edge (j, k)
                let cot = d / cross_norm.max(1e-300);
                let w = 0.5 * cot;
                triplets.push((j, j, w));
                triplets.push((k, k, w));
                triplets.push((j, k, -w));
                triplets.push((k, j, -w));
                vertex_weights[i as usize] += area / 3.0;
            }
        }
        let mean_area = pairwise_sum(&areas) / areas.len() as f64;
        for (idx, &a) in areas.iter().enumerate() {
            if a <= 1e-12 * mean_area {
                return Err(Error::InvalidDomain(format!(
                    "face {idx} is degenerate (area {a:e} vs mean {mean_area:e})"
                )));
            }
        }

        let stiffness = Csr::from_triplets(nv, triplets);
        let background_curvature: Vec<f64> = (0..nv)
            .map(|i| 2.0 * (2.0 * PI - angle_sums[i]) / vertex_weights[i])
            .collect();
        let spectral_bound = stiffness.gershgorin_over(&vertex_weights);

        Ok(Self {
            positions,
            faces,
            vertex_weights,
            stiffness,
            background_curvature,
            euler_characteristic: chi,
            spectral_bound,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn triangle_area(p: &[[f64; 3]; 3]) -> f64 {
    0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])))
}

/// A discretized closed surface.
#[derive(Debug)]
pub enum Domain {
    Grid(GridDomain),
    Mesh(MeshDomain),
}

impl Domain {
    pub fn grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Ok(Domain::Grid(GridDomain::new(nx, ny, lx, ly)?))
    }

    pub fn mesh(positions: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<Self> {
        Ok(Domain::Mesh(MeshDomain::new(positions, faces)?))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Domain::Grid(g) => g.len(),
            Domain::Mesh(m) => m.len(),
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, Domain::Grid(_))
    }

    pub fn as_grid(&self) -> Result<&GridDomain> {
        match self {
            Domain::Grid(g) => Ok(g),
            Domain::Mesh(_) => Err(Error::UnsupportedBackend("mesh")),
        }
    }

    pub fn as_mesh(&self) -> Result<&MeshDomain> {
        match self {
            Domain::Mesh(m) => Ok(m),
            Domain::Grid(_) => Err(Error::UnsupportedBackend("grid")),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match self {
            Domain::Grid(_) => 0,
            Domain::Mesh(m) => m.euler_characteristic,
        }
    }

    /// Background quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Domain::Grid(g) => g.weight,
            Domain::Mesh(m) => m.vertex_weights[i],
        }
    }

    /// Background volume Σᵢ wᵢ.
    pub fn background_volume(&self) -> f64 {
        match self {
            Domain::Grid(g) => g.weight * g.len() as f64,
            Domain::Mesh(m) => pairwise_sum(&m.vertex_weights),
        }
    }

    /// Background total curvature R₀ (zero on the flat grid, twice the angle
    /// defect over the lumped area on meshes).
    pub fn background_curvature(&self, i: usize) -> f64 {
        match self {
            Domain::Grid(_) => 0.0,
            Domain::Mesh(m) => m.background_curvature[i],
        }
    }

    /// Two domains are compatible when fields can be mixed across them.
    pub fn compatible(&self, other: &Domain) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        match (self, other) {
            (Domain::Grid(a), Domain::Grid(b)) => {
                a.nx == b.nx && a.ny == b.ny && a.lx == b.lx && a.ly == b.ly
            }
            (Domain::Mesh(a), Domain::Mesh(b)) => {
                a.len() == b.len() && a.faces.len() == b.faces.len()
            }
            _ => false,
        }
    }
}
