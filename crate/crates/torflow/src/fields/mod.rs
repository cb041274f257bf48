//! Domain discretizations, field containers, quadrature and the
//! conformal-metric state.

pub mod domain;
pub mod meshgen;
pub mod off;
pub mod scalar;
pub mod state;

pub use domain::{Domain, GridDomain, MeshDomain};
pub use scalar::{OneForm, ScalarField};
pub use state::{ConformalState, TorsionData};
