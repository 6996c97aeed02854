use crate::error::{Error, Result};

use super::{ComplexPoint, HalfPlane};

/// Hyperbolic distance in `{Re z > h.threshold}` for the metric `|dz| / (Re z - threshold)`.
pub fn hyperbolic_distance_halfplane(
    a: ComplexPoint,
    b: ComplexPoint,
    h: HalfPlane,
) -> Result<f64> {
    for p in [a, b] {
        if !h.contains(p) {
            return Err(Error::OutsideHalfPlane {
                point: p,
                threshold: h.threshold,
            });
        }
    }
    let xa = a.re - h.threshold;
    let xb = b.re - h.threshold;
    let chord = (a - b).norm();
    Ok(2.0 * (chord / (2.0 * (xa * xb).sqrt())).asinh())
}

/// A conformal isomorphism from the right half-plane `{Re w > 0}` onto some
/// simply connected domain.
pub trait ConformalMap {
    fn apply(&self, w: ComplexPoint) -> ComplexPoint;

    fn derivative(&self, w: ComplexPoint) -> ComplexPoint;

    /// Starting point for the Newton solve in [`ConformalMap::preimage`].
    fn initial_guess(&self, z: ComplexPoint) -> ComplexPoint;

    /// Preimage of `z` in the half-plane. The default runs Newton's method
    /// from [`ConformalMap::initial_guess`].
    fn preimage(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        let mut w = self.initial_guess(z);
        let scale = 1.0 + z.norm();
        let mut residual = f64::INFINITY;
        for _ in 0..100 {
            let r = self.apply(w) - z;
            residual = r.norm();
            if residual <= 1e-13 * scale {
                return Ok(w);
            }
            let d = self.derivative(w);
            if d.norm() == 0.0 || !d.re.is_finite() {
                break;
            }
            w -= r / d;
        }
        Err(Error::NotConverged { residual })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl ConformalMap for IdentityMap {
    fn apply(&self, w: ComplexPoint) -> ComplexPoint {
        w
    }
    fn derivative(&self, _w: ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(1.0, 0.0)
    }
    fn initial_guess(&self, z: ComplexPoint) -> ComplexPoint {
        z
    }
}

/// `w ↦ w + shift`.
#[derive(Debug, Clone, Copy)]
pub struct TranslationMap(pub ComplexPoint);

impl ConformalMap for TranslationMap {
    fn apply(&self, w: ComplexPoint) -> ComplexPoint {
        w + self.0
    }
    fn derivative(&self, _w: ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(1.0, 0.0)
    }
    // Deliberately crude so the Newton path is exercised.
    fn initial_guess(&self, z: ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(1.0, z.im)
    }
}

/// Hyperbolic distance in the image domain of `map`, via conformal invariance.
pub fn hyperbolic_distance_via_map<M: ConformalMap + ?Sized>(
    a: ComplexPoint,
    b: ComplexPoint,
    map: &M,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let pa = map.preimage(a)?;
    let pb = map.preimage(b)?;
    hyperbolic_distance_halfplane(pa, pb, HalfPlane::RIGHT)
}
