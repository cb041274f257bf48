//! Fourier-spectral differentiation on periodic grids. Exact for
//! band-limited fields, which keeps flow-decay measurements free of
//! discretization error.
//!
//! Even real multipliers (Laplacian, Poisson inverse) run through a
//! two-for-one real transform: row pairs are packed into complex sequences
//! and only the Hermitian half-spectrum is carried through the column
//! transforms.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fields::GridDomain;

type Plan = Arc<dyn Fft<f64>>;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Plan>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, inverse: bool) -> Plan {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

// Reused buffers per thread and grid size. Large transient allocations go
// through mmap and dominate the transform cost otherwise.
#[derive(Default)]
struct Workspace {
    packed: Vec<Complex64>,
    half: Vec<Complex64>,
    t: Vec<Complex64>,
    half_back: Vec<Complex64>,
    line: Vec<Complex64>,
}

thread_local! {
    static WORKSPACES: RefCell<HashMap<(usize, usize), Workspace>> =
        RefCell::new(HashMap::new());
}

fn with_workspace<R>(nx: usize, ny: usize, body: impl FnOnce(&mut Workspace) -> R) -> R {
    WORKSPACES.with(|cell| {
        let mut map = cell.borrow_mut();
        let ws = map.entry((nx, ny)).or_default();
        let hy = ny / 2;
        ws.packed.resize(nx / 2 * ny, Complex64::new(0.0, 0.0));
        ws.half.resize(nx * (hy + 1), Complex64::new(0.0, 0.0));
        ws.t.resize(nx * (hy + 1), Complex64::new(0.0, 0.0));
        ws.half_back.resize(nx * (hy + 1), Complex64::new(0.0, 0.0));
        ws.line.resize(ny, Complex64::new(0.0, 0.0));
        body(ws)
    })
}

fn transpose_into(src: &[Complex64], rows: usize, cols: usize, dst: &mut [Complex64]) {
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

fn transpose(buf: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    transpose_into(buf, rows, cols, &mut out);
    out
}

/// Unnormalized forward 2D FFT of an x-major real field.
pub fn fft2_forward(grid: &GridDomain, values: &[f64]) -> Vec<Complex64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(ny, false).process(&mut buf);
    let mut t = transpose(&buf, nx, ny);
    plan(nx, false).process(&mut t);
    transpose(&t, ny, nx)
}

/// Normalized inverse 2D FFT; returns the real part.
pub fn fft2_inverse(grid: &GridDomain, spectrum: &[Complex64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut t = transpose(spectrum, nx, ny);
    plan(nx, true).process(&mut t);
    let mut buf = transpose(&t, ny, nx);
    plan(ny, true).process(&mut buf);
    let scale = 1.0 / (nx * ny) as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Apply an even real multiplier m(kx, ky) = m(−kx, −ky) in Fourier space.
pub fn apply_real_symbol(
    grid: &GridDomain,
    values: &[f64],
    symbol: impl Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0f64; values.len()];
    apply_real_symbol_into(grid, values, symbol, &mut out);
    out
}

/// `apply_real_symbol` writing into a caller-provided buffer.
pub fn apply_real_symbol_into(
    grid: &GridDomain,
    values: &[f64],
    symbol: impl Fn(f64, f64) -> f64,
    out: &mut [f64],
) {
    let (nx, ny) = (grid.nx, grid.ny);
    let hy = ny / 2;
    let half_cols = hy + 1;
    let fwd_y = plan(ny, false);
    let fwd_x = plan(nx, false);
    let inv_x = plan(nx, true);
    let inv_y = plan(ny, true);

    with_workspace(nx, ny, |ws| {
        // pack row pairs and transform along y
        for m in 0..nx / 2 {
            let row_a = &values[(2 * m) * ny..(2 * m + 1) * ny];
            let row_b = &values[(2 * m + 1) * ny..(2 * m + 2) * ny];
            let dst = &mut ws.packed[m * ny..(m + 1) * ny];
            for j in 0..ny {
                dst[j] = Complex64::new(row_a[j], row_b[j]);
            }
        }
        fwd_y.process(&mut ws.packed);

        // unpack into the Hermitian half-spectrum (nx rows, hy+1 columns)
        for m in 0..nx / 2 {
            let base = m * ny;
            for k in 0..=hy {
                let zk = ws.packed[base + k];
                let zmk = ws.packed[base + (ny - k) % ny].conj();
                let a = 0.5 * (zk + zmk);
                let b = Complex64::new(0.0, -0.5) * (zk - zmk);
                ws.half[(2 * m) * half_cols + k] = a;
                ws.half[(2 * m + 1) * half_cols + k] = b;
            }
        }

        // transform along x, apply the multiplier, transform back
        transpose_into(&ws.half, nx, half_cols, &mut ws.t);
        fwd_x.process(&mut ws.t);
        for k in 0..=hy {
            let ky = grid.ky[k];
            let row = &mut ws.t[k * nx..(k + 1) * nx];
            for (i, v) in row.iter_mut().enumerate() {
                *v *= symbol(grid.kx[i], ky);
            }
        }
        inv_x.process(&mut ws.t);
        transpose_into(&ws.t, half_cols, nx, &mut ws.half_back);

        // rebuild packed rows by Hermitian extension and invert along y
        let scale = 1.0 / (nx * ny) as f64;
        for m in 0..nx / 2 {
            let ra = (2 * m) * half_cols;
            let rb = (2 * m + 1) * half_cols;
            for (k, slot) in ws.line.iter_mut().enumerate() {
                let (a, b) = if k <= hy {
                    (ws.half_back[ra + k], ws.half_back[rb + k])
                } else {
                    (
                        ws.half_back[ra + (ny - k)].conj(),
                        ws.half_back[rb + (ny - k)].conj(),
                    )
                };
                *slot = Complex64::new(a.re - b.im, a.im + b.re);
            }
            inv_y.process(&mut ws.line);
            for j in 0..ny {
                out[(2 * m) * ny + j] = ws.line[j].re * scale;
                out[(2 * m + 1) * ny + j] = ws.line[j].im * scale;
            }
        }
    });
}

/// Background Laplacian: symbol −(kx² + ky²).
pub fn laplacian(grid: &GridDomain, values: &[f64]) -> Vec<f64> {
    apply_real_symbol(grid, values, |kx, ky| -(kx * kx + ky * ky))
}

/// Solve Δφ = rhs spectrally; the mean mode (and any rhs mean) is dropped,
/// so the result has exactly zero mean mode.
pub fn poisson(grid: &GridDomain, rhs: &[f64]) -> Vec<f64> {
    apply_real_symbol(grid, rhs, |kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

/// Both first derivatives. The Nyquist mode is zeroed in odd derivatives so
/// the result of differentiating a real field stays real and symmetric.
pub fn gradient(grid: &GridDomain, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let spec = fft2_forward(grid, values);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut dx = spec.clone();
    let mut dy = spec;
    for i in 0..nx {
        let kx = if i == nx / 2 { 0.0 } else { grid.kx[i] };
        for j in 0..ny {
            let ky = if j == ny / 2 { 0.0 } else { grid.ky[j] };
            let idx = i * ny + j;
            dx[idx] *= Complex64::new(0.0, kx);
            dy[idx] *= Complex64::new(0.0, ky);
        }
    }
    (fft2_inverse(grid, &dx), fft2_inverse(grid, &dy))
}

/// Second derivatives (∂xx, ∂xy, ∂yy). As in `gradient`, the Nyquist mode is
/// dropped from the mixed derivative.
pub fn hessian(grid: &GridDomain, values: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let spec = fft2_forward(grid, values);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut dxx = spec.clone();
    let mut dxy = spec.clone();
    let mut dyy = spec;
    for i in 0..nx {
        let kx = grid.kx[i];
        let kx_odd = if i == nx / 2 { 0.0 } else { kx };
        for j in 0..ny {
            let ky = grid.ky[j];
            let ky_odd = if j == ny / 2 { 0.0 } else { ky };
            let idx = i * ny + j;
            dxx[idx] *= -kx * kx;
            dxy[idx] *= -kx_odd * ky_odd;
            dyy[idx] *= -ky * ky;
        }
    }
    (
        fft2_inverse(grid, &dxx),
        fft2_inverse(grid, &dxy),
        fft2_inverse(grid, &dyy),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Domain;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> GridDomain {
        match Domain::grid(n, n, l, l).unwrap() {
            Domain::Grid(g) => g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn laplacian_of_fourier_mode_is_exact() {
        let g = grid(32, 2.0 * PI);
        let mut values = vec![0.0; g.len()];
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, _) = g.point(i, j);
                values[i * g.ny + j] = (3.0 * x).sin();
            }
        }
        let lap = laplacian(&g, &values);
        for (idx, &v) in values.iter().enumerate() {
            assert!((lap[idx] + 9.0 * v).abs() < 1e-11);
        }
    }

    #[test]
    fn fast_symbol_path_matches_the_plain_transform() {
        let g = grid(32, 3.0);
        let mut rng = crate::numeric::Lcg64::new(5);
        let values: Vec<f64> = (0..g.len()).map(|_| rng.next_symmetric()).collect();
        let fast = apply_real_symbol(&g, &values, |kx, ky| -(kx * kx + ky * ky));
        let mut spec = fft2_forward(&g, &values);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let s = -(g.kx[i] * g.kx[i] + g.ky[j] * g.ky[j]);
                spec[i * g.ny + j] *= s;
            }
        }
        let slow = fft2_inverse(&g, &spec);
        for i in 0..fast.len() {
            assert!(
                (fast[i] - slow[i]).abs() < 1e-9,
                "mismatch at {i}: {} vs {}",
                fast[i],
                slow[i]
            );
        }
    }

    #[test]
    fn gradient_of_sin_is_cos() {
        let g = grid(32, 2.0 * PI);
        let mut values = vec![0.0; g.len()];
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, _) = g.point(i, j);
                values[i * g.ny + j] = x.sin();
            }
        }
        let (dx, dy) = gradient(&g, &values);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, _) = g.point(i, j);
                assert!((dx[i * g.ny + j] - x.cos()).abs() < 1e-12);
                assert!(dy[i * g.ny + j].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poisson_inverts_laplacian_up_to_mean() {
        let g = grid(32, 2.0 * PI);
        let mut rng = crate::numeric::Lcg64::new(3);
        let raw: Vec<f64> = (0..g.len()).map(|_| rng.next_symmetric()).collect();
        // low-pass to a smooth zero-mean field
        let smooth = apply_real_symbol(&g, &raw, |kx, ky| {
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 || k2 > 16.0 {
                0.0
            } else {
                1.0
            }
        });
        let lap = laplacian(&g, &smooth);
        let back = poisson(&g, &lap);
        for i in 0..g.len() {
            assert!((back[i] - smooth[i]).abs() < 1e-12);
        }
    }
}
