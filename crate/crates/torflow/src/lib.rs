//! Numerical engine for the normalized Ricci flow with fixed vectorial
//! torsion on closed surfaces. Integrates the conformal-factor evolution on
//! periodic grids (Fourier-spectral) and closed triangle meshes (cotangent
//! Laplacian), checks the conservation laws, maximum-principle bounds and
//! decay estimates along trajectories, and cross-checks χ ≤ 0 limits against
//! independent elliptic oracles.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod flow;
pub mod io;
pub mod numeric;
pub mod operators;
pub mod presets;
pub mod sparse;
pub mod stationary;
pub mod torsion;

pub use error::{Error, Result};
