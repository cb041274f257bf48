//! Field containers: one real value per node (ScalarField) and grid
//! covector fields (OneForm).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::domain::Domain;

/// One real value per grid node / mesh vertex.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::InvalidField(format!(
                "value count {} does not match node count {}",
                values.len(),
                domain.node_count()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidField("non-finite value".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: Arc<Domain>, c: f64) -> Self {
        let n = domain.node_count();
        Self {
            domain,
            values: vec![c; n],
        }
    }

    pub fn zeros(domain: Arc<Domain>) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Sample a function of grid coordinates; grid domains only.
    pub fn from_grid_fn(domain: Arc<Domain>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let grid = domain.as_grid()?;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = grid.point(i, j);
                values.push(f(x, y));
            }
        }
        Self::new(domain, values)
    }

    /// Sample a function of embedded vertex positions; mesh domains only.
    pub fn from_mesh_fn(domain: Arc<Domain>, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values: Vec<f64> = domain.as_mesh()?.positions.iter().map(|&p| f(p)).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// New field with the same domain; length is checked.
    pub fn same_domain(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.domain.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.domain.compatible(&other.domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Covector field on the grid backend: two component scalar fields.
#[derive(Clone, Debug)]
pub struct OneForm {
    wx: ScalarField,
    wy: ScalarField,
}

impl OneForm {
    pub fn new(wx: ScalarField, wy: ScalarField) -> Result<Self> {
        if !wx.domain().is_grid() {
            return Err(Error::UnsupportedBackend("mesh"));
        }
        if !wx.domain().compatible(wy.domain()) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { wx, wy })
    }

    pub fn zeros(domain: Arc<Domain>) -> Result<Self> {
        let z = ScalarField::zeros(domain);
        Self::new(z.clone(), z)
    }

    pub fn constant(domain: Arc<Domain>, cx: f64, cy: f64) -> Result<Self> {
        Self::new(
            ScalarField::constant(domain.clone(), cx),
            ScalarField::constant(domain, cy),
        )
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.wx.domain()
    }

    pub fn wx(&self) -> &ScalarField {
        &self.wx
    }

    pub fn wy(&self) -> &ScalarField {
        &self.wy
    }
}
