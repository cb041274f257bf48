//! Built-in closed test surfaces: unit sphere (refined icosahedron),
//! flat-embeddable torus, and a genus-2 surface extracted from an implicit
//! function by marching tetrahedra.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::Result;
use crate::fields::domain::Domain;

/// Unit sphere as an icosahedron with `subdivisions` rounds of 1-to-4 loop
/// refinement, every vertex projected back to the sphere.
/// Vertex count is 10·4ⁿ + 2.
pub fn icosphere(subdivisions: u32) -> Result<Domain> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut positions: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for p in &mut positions {
        normalize(p);
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    let pa = positions[a as usize];
                    let pb = positions[b as usize];
                    let mut m = [
                        0.5 * (pa[0] + pb[0]),
                        0.5 * (pa[1] + pb[1]),
                        0.5 * (pa[2] + pb[2]),
                    ];
                    normalize(&mut m);
                    positions.push(m);
                    (positions.len() - 1) as u32
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = new_faces;
    }
    Domain::mesh(positions, faces)
}

/// Torus of revolution with major radius `major`, minor radius `minor`,
/// sampled on an nu × nv parameter grid.
pub fn torus_mesh(nu: usize, nv: usize, major: f64, minor: f64) -> Result<Domain> {
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let a = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let b = 2.0 * PI * j as f64 / nv as f64;
            let ring = major + minor * b.cos();
            positions.push([ring * a.cos(), ring * a.sin(), minor * b.sin()]);
        }
    }
    let idx = |i: usize, j: usize| -> u32 { ((i % nu) * nv + (j % nv)) as u32 };
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Domain::mesh(positions, faces)
}

/// Genus-2 surface: the level set (x⁴ − x² + y²)² + z² = 0.1², extracted by
/// marching tetrahedra on a uniform lattice with `resolution` cells along x,
/// then relaxed by a few rounds of neighbour averaging to improve element
/// quality. The handlebody is a fattened figure-eight, so the boundary has
/// genus 2 (the constructor verifies V − E + F = −2).
pub fn genus2_mesh(resolution: usize) -> Result<Domain> {
    let f = |x: f64, y: f64, z: f64| -> f64 {
        let q = x * x * x * x - x * x + y * y;
        q * q + z * z - 0.01
    };
    let lo = [-1.18, -0.72, -0.22];
    let hi = [1.18, 0.72, 0.22];
    let nx = resolution.max(24);
    let cell = (hi[0] - lo[0]) / nx as f64;
    let ny = ((hi[1] - lo[1]) / cell).ceil() as usize;
    let nz = ((hi[2] - lo[2]) / cell).ceil() as usize;

    let (positions, faces) = marching_tetrahedra(&f, lo, [cell; 3], [nx, ny, nz]);
    let positions = relax(positions, &faces, 4);
    Domain::mesh(positions, faces)
}

fn normalize(p: &mut [f64; 3]) {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p[0] /= n;
    p[1] /= n;
    p[2] /= n;
}

/// The six tetrahedra of a cube, each listed with positive orientation.
const CUBE_TETS: [[usize; 4]; 6] = [
    [0, 5, 1, 6],
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 7, 4, 6],
    [0, 4, 5, 6],
];

/// Extract the zero level set of `f` as a closed oriented triangle mesh.
/// Triangles are wound so that their normals point toward f > 0; the winding
/// is derived per-tetrahedron from the linear interpolant, which makes the
/// orientation globally consistent.
fn marching_tetrahedra(
    f: &dyn Fn(f64, f64, f64) -> f64,
    origin: [f64; 3],
    h: [f64; 3],
    n: [usize; 3],
) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let lattice = |i: usize, j: usize, k: usize| -> [f64; 3] {
        [
            origin[0] + i as f64 * h[0],
            origin[1] + j as f64 * h[1],
            origin[2] + k as f64 * h[2],
        ]
    };
    let point_id = |i: usize, j: usize, k: usize| -> u64 {
        ((i as u64) * (n[1] as u64 + 1) + j as u64) * (n[2] as u64 + 1) + k as u64
    };

    // Sample the scalar field once per lattice point.
    let mut values = vec![0.0f64; (n[0] + 1) * (n[1] + 1) * (n[2] + 1)];
    for i in 0..=n[0] {
        for j in 0..=n[1] {
            for k in 0..=n[2] {
                let p = lattice(i, j, k);
                values[point_id(i, j, k) as usize] = f(p[0], p[1], p[2]);
            }
        }
    }

    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut edge_vertex: HashMap<(u64, u64), u32> = HashMap::new();

    // Interpolation parameter is clamped away from the lattice points so
    // that extracted triangles cannot collapse.
    const T_CLAMP: f64 = 0.05;

    let mut corner_ids = [0u64; 8];
    let mut corner_pos = [[0.0; 3]; 8];
    let mut corner_val = [0.0; 8];
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let offsets = [
                    (0, 0, 0),
                    (1, 0, 0),
                    (1, 1, 0),
                    (0, 1, 0),
                    (0, 0, 1),
                    (1, 0, 1),
                    (1, 1, 1),
                    (0, 1, 1),
                ];
                for (c, &(di, dj, dk)) in offsets.iter().enumerate() {
                    corner_ids[c] = point_id(i + di, j + dj, k + dk);
                    corner_pos[c] = lattice(i + di, j + dj, k + dk);
                    corner_val[c] = values[corner_ids[c] as usize];
                }
                for tet in &CUBE_TETS {
                    emit_tet(
                        tet,
                        &corner_ids,
                        &corner_pos,
                        &corner_val,
                        T_CLAMP,
                        &mut edge_vertex,
                        &mut positions,
                        &mut faces,
                    );
                }
            }
        }
    }
    (positions, faces)
}

#[allow(clippy::too_many_arguments)]
fn emit_tet(
    tet: &[usize; 4],
    ids: &[u64; 8],
    pos: &[[f64; 3]; 8],
    val: &[f64; 8],
    t_clamp: f64,
    edge_vertex: &mut HashMap<(u64, u64), u32>,
    positions: &mut Vec<[f64; 3]>,
    faces: &mut Vec<[u32; 3]>,
) {
    let v = [val[tet[0]], val[tet[1]], val[tet[2]], val[tet[3]]];
    let inside: Vec<usize> = (0..4).filter(|&c| v[c] < 0.0).collect();
    if inside.is_empty() || inside.len() == 4 {
        return;
    }

    // Gradient of the linear interpolant: the reference direction that keeps
    // triangle normals pointing toward f > 0 globally.
    let grad = linear_gradient(
        [pos[tet[0]], pos[tet[1]], pos[tet[2]], pos[tet[3]]],
        v,
    );

    let mut cut = |a: usize, b: usize, positions: &mut Vec<[f64; 3]>| -> u32 {
        let (ia, ib) = (ids[tet[a]], ids[tet[b]]);
        let key = (ia.min(ib), ia.max(ib));
        if let Some(&idx) = edge_vertex.get(&key) {
            return idx;
        }
        // parameter measured from the lexicographically smaller endpoint, so
        // shared edges interpolate identically in every tetrahedron
        let (from, to, vf, vt) = if ia < ib {
            (pos[tet[a]], pos[tet[b]], v[a], v[b])
        } else {
            (pos[tet[b]], pos[tet[a]], v[b], v[a])
        };
        let t = (vf / (vf - vt)).clamp(t_clamp, 1.0 - t_clamp);
        positions.push([
            from[0] + t * (to[0] - from[0]),
            from[1] + t * (to[1] - from[1]),
            from[2] + t * (to[2] - from[2]),
        ]);
        let idx = (positions.len() - 1) as u32;
        edge_vertex.insert(key, idx);
        idx
    };

    match inside.len() {
        1 | 3 => {
            let apex = if inside.len() == 1 {
                inside[0]
            } else {
                (0..4).find(|&c| v[c] >= 0.0).unwrap()
            };
            let others: Vec<usize> = (0..4).filter(|&c| c != apex).collect();
            let p0 = cut(apex, others[0], positions);
            let p1 = cut(apex, others[1], positions);
            let p2 = cut(apex, others[2], positions);
            orient_and_push([p0, p1, p2], grad, positions, faces);
        }
        2 => {
            let (a, b) = (inside[0], inside[1]);
            let out: Vec<usize> = (0..4).filter(|&c| c != a && c != b).collect();
            let (c, d) = (out[0], out[1]);
            let pac = cut(a, c, positions);
            let pad = cut(a, d, positions);
            let pbc = cut(b, c, positions);
            let pbd = cut(b, d, positions);
            // Both halves of the quad must flip together so the shared
            // diagonal keeps opposite orientations.
            let flip = normal_dot([pac, pbc, pbd], grad, positions)
                + normal_dot([pac, pbd, pad], grad, positions)
                < 0.0;
            push_face([pac, pbc, pbd], flip, faces);
            push_face([pac, pbd, pad], flip, faces);
        }
        _ => unreachable!(),
    }
}

fn normal_dot(tri: [u32; 3], grad: [f64; 3], positions: &[[f64; 3]]) -> f64 {
    let a = positions[tri[0] as usize];
    let b = positions[tri[1] as usize];
    let c = positions[tri[2] as usize];
    let nrm = [
        (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]),
        (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2]),
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]),
    ];
    nrm[0] * grad[0] + nrm[1] * grad[1] + nrm[2] * grad[2]
}

fn push_face(tri: [u32; 3], flip: bool, faces: &mut Vec<[u32; 3]>) {
    if flip {
        faces.push([tri[0], tri[2], tri[1]]);
    } else {
        faces.push(tri);
    }
}

fn orient_and_push(
    tri: [u32; 3],
    grad: [f64; 3],
    positions: &[[f64; 3]],
    faces: &mut Vec<[u32; 3]>,
) {
    push_face(tri, normal_dot(tri, grad, positions) < 0.0, faces);
}

fn linear_gradient(p: [[f64; 3]; 4], v: [f64; 4]) -> [f64; 3] {
    // Solve the 3x3 system (p_i - p_0)·g = v_i - v_0 for the gradient.
    let m = [
        [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]],
        [p[3][0] - p[0][0], p[3][1] - p[0][1], p[3][2] - p[0][2]],
    ];
    let rhs = [v[1] - v[0], v[2] - v[0], v[3] - v[0]];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return [0.0, 0.0, 0.0];
    }
    let inv_det = 1.0 / det;
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    [
        inv_det * (rhs[0] * cof(1, 2, 1, 2) - rhs[1] * cof(0, 2, 1, 2) + rhs[2] * cof(0, 1, 1, 2)),
        inv_det * (-rhs[0] * cof(1, 2, 0, 2) + rhs[1] * cof(0, 2, 0, 2) - rhs[2] * cof(0, 1, 0, 2)),
        inv_det * (rhs[0] * cof(1, 2, 0, 1) - rhs[1] * cof(0, 2, 0, 1) + rhs[2] * cof(0, 1, 0, 1)),
    ]
}

/// A few rounds of uniform neighbour averaging. Improves the skinny elements
/// marching tetrahedra leaves behind; the topology is untouched.
fn relax(mut positions: Vec<[f64; 3]>, faces: &[[u32; 3]], rounds: usize) -> Vec<[f64; 3]> {
    let n = positions.len();
    for _ in 0..rounds {
        let mut acc = vec![[0.0f64; 3]; n];
        let mut deg = vec![0.0f64; n];
        for f in faces {
            for e in 0..3 {
                let a = f[e] as usize;
                let b = f[(e + 1) % 3] as usize;
                for c in 0..3 {
                    acc[a][c] += positions[b][c];
                    acc[b][c] += positions[a][c];
                }
                deg[a] += 1.0;
                deg[b] += 1.0;
            }
        }
        for i in 0..n {
            if deg[i] > 0.0 {
                for c in 0..3 {
                    positions[i][c] = 0.5 * positions[i][c] + 0.5 * acc[i][c] / deg[i];
                }
            }
        }
    }
    positions
}
