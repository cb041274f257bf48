//! Torsion algebra: the pointwise vectorial-torsion endomorphism and tensor,
//! and the divergence of the torsion field under background and evolving
//! metrics. The flow consumes only the background divergence; the pointwise
//! operations are the tested embodiment of the algebra on grid nodes.

use std::sync::Arc;

use crate::error::Result;
use crate::fields::{ConformalState, Domain, ScalarField, TorsionData};
use crate::operators::divergence0;

/// Pointwise tangent vector in background coordinates at a grid node,
/// where the metric is g = e^{u}·δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub x: f64,
    pub y: f64,
}

impl TangentVector {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub fn scale(self, a: f64) -> Self {
        Self {
            x: a * self.x,
            y: a * self.y,
        }
    }

    pub fn sub(self, other: Self) -> Self {
        Self {
            x: self.x - other.x,
            y: self.y - other.y,
        }
    }
}

/// g(a, b) = e^{u} (a·b) for the conformal metric at log factor u.
pub fn metric_inner(a: TangentVector, b: TangentVector, u: f64) -> f64 {
    u.exp() * (a.x * b.x + a.y * b.y)
}

/// Torsion endomorphism A(X, Y) = g(X, Y)·V − g(V, Y)·X.
pub fn torsion_endomorphism(
    x: TangentVector,
    y: TangentVector,
    v: TangentVector,
    u: f64,
) -> TangentVector {
    let gxy = metric_inner(x, y, u);
    let gvy = metric_inner(v, y, u);
    v.scale(gxy).sub(x.scale(gvy))
}

/// Torsion tensor T(X, Y) = A(X, Y) − A(Y, X).
pub fn torsion_tensor(
    x: TangentVector,
    y: TangentVector,
    v: TangentVector,
    u: f64,
) -> TangentVector {
    torsion_endomorphism(x, y, v, u).sub(torsion_endomorphism(y, x, v, u))
}

/// Closed form of the torsion tensor, g(V, X)·Y − g(V, Y)·X; must agree with
/// `torsion_tensor`.
pub fn torsion_tensor_closed(
    x: TangentVector,
    y: TangentVector,
    v: TangentVector,
    u: f64,
) -> TangentVector {
    let gvx = metric_inner(v, x, u);
    let gvy = metric_inner(v, y, u);
    y.scale(gvx).sub(x.scale(gvy))
}

/// div_{g₀}V: the one-form route goes through the spectral divergence, the
/// prescribed-divergence route is a pass-through.
pub fn div_torsion_background(torsion: &TorsionData, domain: &Arc<Domain>) -> Result<ScalarField> {
    match torsion {
        TorsionData::FromOneForm { vflat } => {
            if !domain.is_grid() {
                return Err(crate::error::Error::UnsupportedBackend("mesh"));
            }
            Ok(divergence0(vflat))
        }
        TorsionData::FromDivergence { d0 } => Ok(d0.clone()),
    }
}

/// div_{g(t)}V = e^{-u} div_{g₀}V, the 2D conformal transformation of the
/// divergence of a fixed one-form.
pub fn div_torsion_conformal(torsion: &TorsionData, state: &ConformalState) -> Result<ScalarField> {
    let background = div_torsion_background(torsion, state.domain())?;
    background.zip_map(state.u(), |d, u| (-u).exp() * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Lcg64;

    fn e1() -> TangentVector {
        TangentVector::new(1.0, 0.0)
    }
    fn e2() -> TangentVector {
        TangentVector::new(0.0, 1.0)
    }

    #[test]
    fn endomorphism_vanishes_without_torsion() {
        let a = torsion_endomorphism(e1(), e2(), TangentVector::zero(), 0.3);
        assert_eq!(a, TangentVector::zero());
    }

    #[test]
    fn endomorphism_orthonormal_case() {
        // X = Y = e1, V = e2, u = 0: A = g(e1,e1)V − g(V,e1)e1 = V
        let a = torsion_endomorphism(e1(), e1(), e2(), 0.0);
        assert_eq!(a, e2());
    }

    #[test]
    fn endomorphism_is_skew_adjoint() {
        // g(A(X,Y),Z) + g(Y,A(X,Z)) = 0 over 10⁴ seeded samples
        let mut rng = Lcg64::new(0xA11);
        for _ in 0..10_000 {
            let rv = |rng: &mut Lcg64| {
                TangentVector::new(2.0 * rng.next_symmetric(), 2.0 * rng.next_symmetric())
            };
            let (x, y, z, v) = (rv(&mut rng), rv(&mut rng), rv(&mut rng), rv(&mut rng));
            let u = rng.next_symmetric();
            let lhs = metric_inner(torsion_endomorphism(x, y, v, u), z, u)
                + metric_inner(y, torsion_endomorphism(x, z, v, u), u);
            assert!(lhs.abs() < 1e-12, "skew-adjointness violated: {lhs:e}");
        }
    }

    #[test]
    fn tensor_is_antisymmetric_bitwise() {
        let mut rng = Lcg64::new(0xA12);
        for _ in 0..1000 {
            let rv = |rng: &mut Lcg64| {
                TangentVector::new(rng.next_symmetric(), rng.next_symmetric())
            };
            let (x, y, v) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
            let u = rng.next_symmetric();
            let txy = torsion_tensor(x, y, v, u);
            let tyx = torsion_tensor(y, x, v, u);
            assert_eq!(txy.x.to_bits(), (-tyx.x).to_bits());
            assert_eq!(txy.y.to_bits(), (-tyx.y).to_bits());
        }
    }

    #[test]
    fn tensor_vanishes_on_the_diagonal() {
        let v = TangentVector::new(0.7, -0.4);
        let t = torsion_tensor(e1(), e1(), v, 0.2);
        assert_eq!(t, TangentVector::zero());
    }

    #[test]
    fn tensor_matches_closed_form() {
        // direct evaluation: X=e1, Y=e2, V=e1, u=0 → T = e2
        let t = torsion_tensor(e1(), e2(), e1(), 0.0);
        assert!((t.x - 0.0).abs() < 1e-15 && (t.y - 1.0).abs() < 1e-15);

        let mut rng = Lcg64::new(0xA13);
        for _ in 0..10_000 {
            let rv = |rng: &mut Lcg64| {
                TangentVector::new(2.0 * rng.next_symmetric(), 2.0 * rng.next_symmetric())
            };
            let (x, y, v) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
            let u = rng.next_symmetric();
            let a = torsion_tensor(x, y, v, u);
            let b = torsion_tensor_closed(x, y, v, u);
            assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        }
    }
}
