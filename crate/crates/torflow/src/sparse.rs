//! Minimal symmetric sparse kernel: CSR storage and preconditioned CG.

use crate::error::{Error, Result};
use crate::numeric::pairwise_dot;

/// Compressed sparse row matrix. Only what the cotangent systems need.
#[derive(Clone, Debug)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<u32> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for &(r, c, v) in &triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                last = Some((r, c));
            }
            row_ptr[r as usize + 1] = vals.len();
        }
        // rows without entries inherit the previous offset
        for i in 1..=n {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// y = A·x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// Diagonal entries (zero where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] as usize == i {
                    d[i] += self.vals[k];
                }
            }
        }
        d
    }

    /// Row-sum bound max_i Σ_j |A_ij| / m_i for generalized eigenvalue bounds.
    pub fn gershgorin_over(&self, m: &[f64]) -> f64 {
        let mut bound: f64 = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k].abs();
            }
            bound = bound.max(row / m[i]);
        }
        bound
    }
}

/// Outcome of a CG solve.
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients for an SPD operator given as a closure.
///
/// `apply` computes y = A·x; `precond` applies an SPD preconditioner (pass the
/// identity via `|r, z| z.copy_from_slice(r)`). Convergence is declared at
/// relative residual `tol` in the Euclidean norm; `what` names the system in
/// the failure error.
pub fn pcg(
    apply: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
    what: &str,
) -> Result<CgSolution> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = pairwise_dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = pairwise_dot(&r, &z);
    let mut ap = vec![0.0; n];
    for iter in 0..max_iter {
        apply(&p, &mut ap);
        let pap = pairwise_dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SolverFailure {
                what: format!("{what} (indefinite direction)"),
                iterations: iter,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = pairwise_dot(&r, &r).sqrt();
        if r_norm <= tol * b_norm {
            return Ok(CgSolution {
                x,
                iterations: iter + 1,
                residual: r_norm / b_norm,
            });
        }
        precond(&r, &mut z);
        let rz_new = pairwise_dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        what: what.to_string(),
        iterations: max_iter,
    })
}
