//! Fixed torsion data and the conformal-metric state g(t) = e^{u(t)} g₀.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::domain::Domain;
use crate::fields::scalar::{OneForm, ScalarField};
use crate::numeric::{pairwise_dot, pairwise_sum};

/// Relative tolerance on the background-weighted mean of a prescribed
/// divergence field (the divergence of a vector field integrates to zero).
pub const D0_MEAN_TOL: f64 = 1e-10;

/// The fixed torsion vector field V, given either through its dual one-form
/// (grid backend) or directly through div_{g₀}V.
#[derive(Clone, Debug)]
pub enum TorsionData {
    FromOneForm { vflat: OneForm },
    FromDivergence { d0: ScalarField },
}

impl TorsionData {
    pub fn from_one_form(vflat: OneForm) -> Result<Self> {
        // OneForm construction already enforces the grid backend.
        Ok(TorsionData::FromOneForm { vflat })
    }

    pub fn from_divergence(d0: ScalarField) -> Result<Self> {
        let domain = d0.domain();
        let weights: Vec<f64> = (0..d0.len()).map(|i| domain.weight(i)).collect();
        let mean = pairwise_dot(d0.values(), &weights);
        let scale = d0.max_abs() * domain.background_volume();
        if scale > 0.0 && mean.abs() > D0_MEAN_TOL * scale {
            return Err(Error::InvalidField(format!(
                "prescribed divergence has nonzero background mean: {:e} (relative {:e})",
                mean,
                mean.abs() / scale
            )));
        }
        Ok(TorsionData::FromDivergence { d0 })
    }

    /// Torsion that vanishes identically.
    pub fn none(domain: Arc<Domain>) -> Self {
        TorsionData::FromDivergence {
            d0: ScalarField::zeros(domain),
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        match self {
            TorsionData::FromOneForm { vflat } => vflat.domain(),
            TorsionData::FromDivergence { d0 } => d0.domain(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TorsionData::FromOneForm { vflat } => {
                vflat.wx().max_abs() == 0.0 && vflat.wy().max_abs() == 0.0
            }
            TorsionData::FromDivergence { d0 } => d0.max_abs() == 0.0,
        }
    }
}

/// Background domain, log conformal factor u, fixed torsion data and flow
/// time. The torsion one-form is held fixed; every g(t)-dependent quantity is
/// recomputed from u(t), so the dual-one-form constancy is exact by
/// construction.
#[derive(Clone, Debug)]
pub struct ConformalState {
    domain: Arc<Domain>,
    u: ScalarField,
    torsion: Arc<TorsionData>,
    t: f64,
    chi: i64,
    /// Conformal quadrature weights e^{uᵢ}·wᵢ (2D volume element e^{u} dμ₀).
    conformal_weights: Vec<f64>,
    volume: f64,
}

impl ConformalState {
    pub fn new(u: ScalarField, torsion: Arc<TorsionData>, t: f64) -> Result<Self> {
        let domain = u.domain().clone();
        if !domain.compatible(torsion.domain()) {
            return Err(Error::DomainMismatch);
        }
        let conformal_weights: Vec<f64> = u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &ui)| ui.exp() * domain.weight(i))
            .collect();
        if !conformal_weights.iter().all(|w| w.is_finite()) {
            return Err(Error::InvalidField(
                "conformal factor overflows the volume element".into(),
            ));
        }
        let volume = pairwise_sum(&conformal_weights);
        if !(volume > 0.0) {
            return Err(Error::InvalidField(format!(
                "state volume must be positive, got {volume}"
            )));
        }
        let chi = domain.euler_characteristic();
        Ok(Self {
            domain,
            u,
            torsion,
            t,
            chi,
            conformal_weights,
            volume,
        })
    }

    /// Flat state u ≡ 0 with no torsion at t = 0.
    pub fn background(domain: Arc<Domain>) -> Result<Self> {
        let torsion = Arc::new(TorsionData::none(domain.clone()));
        Self::new(ScalarField::zeros(domain), torsion, 0.0)
    }

    /// Same domain and torsion, new conformal factor and time.
    pub fn with_u(&self, u_values: Vec<f64>, t: f64) -> Result<Self> {
        let u = ScalarField::new(self.domain.clone(), u_values)?;
        Self::new(u, self.torsion.clone(), t)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn torsion(&self) -> &Arc<TorsionData> {
        &self.torsion
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn chi(&self) -> i64 {
        self.chi
    }

    /// Conformal quadrature weights e^{uᵢ}·wᵢ.
    pub fn conformal_weights(&self) -> &[f64] {
        &self.conformal_weights
    }

    /// ∫_M dμ_g = ∫ e^{u} dμ₀.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// ∫ field · e^{u} dμ₀. Exactly linear in the field; integrate(1) equals
    /// volume() bit for bit.
    pub fn integrate(&self, field: &ScalarField) -> Result<f64> {
        if !self.domain.compatible(field.domain()) {
            return Err(Error::DomainMismatch);
        }
        Ok(pairwise_dot(field.values(), &self.conformal_weights))
    }

    /// Mean of a field with respect to the conformal measure.
    pub fn mean(&self, field: &ScalarField) -> Result<f64> {
        Ok(self.integrate(field)? / self.volume)
    }
}
