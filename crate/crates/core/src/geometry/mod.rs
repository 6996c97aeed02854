//! Plane and hyperbolic geometry shared by the rest of the crate.
//!
//! Points are plain [`Complex64`] values. Unbounded sets (tails of tracts,
//! hairs) are carried as [`Polyline`]s that remember the real part at which
//! they were truncated.

mod hyperbolic;
mod polyline;

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hyperbolic::{
    hyperbolic_distance_halfplane, hyperbolic_distance_via_map, ConformalMap, IdentityMap,
    TranslationMap,
};
pub use polyline::{
    directed_hausdorff, hausdorff_distance, point_segment_distance, point_to_polyline_distance,
    Polyline, PolylineIndex,
};
pub(crate) use polyline::dedup;

/// A point of the plane. Serialized as `[re, im]`.
pub type ComplexPoint = Complex64;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Process-wide tolerance used by geometric comparisons that are not given
/// an explicit one.
pub fn default_tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

pub fn set_default_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Configuration(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
    Ok(())
}

pub(crate) fn is_finite(z: ComplexPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: ComplexPoint,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: ComplexPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !is_finite(center) {
            return Err(Error::Precondition(format!(
                "disk needs a finite center and positive radius, got {center} / {radius}"
            )));
        }
        Ok(Disk { center, radius })
    }

    /// True when `p` is inside the open disk by more than `tol`.
    pub fn contains_strictly(&self, p: ComplexPoint, tol: f64) -> bool {
        (p - self.center).norm() < self.radius - tol
    }

    pub fn contains(&self, p: ComplexPoint) -> bool {
        (p - self.center).norm() < self.radius
    }

    /// Unsigned distance from `p` to the boundary circle.
    pub fn boundary_distance(&self, p: ComplexPoint) -> f64 {
        ((p - self.center).norm() - self.radius).abs()
    }
}

/// The half-plane `{Re z > threshold}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub threshold: f64,
}

impl HalfPlane {
    pub const RIGHT: HalfPlane = HalfPlane { threshold: 0.0 };

    pub fn new(threshold: f64) -> Self {
        HalfPlane { threshold }
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        z.re > self.threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_bits_are_one_nano() {
        assert_eq!(f64::from_bits(0x3E11_2E0B_E826_D695), 1e-9);
    }

    #[test]
    fn disk_rejects_nonpositive_radius() {
        assert!(Disk::new(Complex64::new(0.0, 0.0), 0.0).is_err());
        assert!(Disk::new(Complex64::new(0.0, 0.0), -1.0).is_err());
        let d = Disk::new(Complex64::new(1.0, 1.0), 2.0).unwrap();
        assert!(d.contains_strictly(Complex64::new(1.0, 2.0), 1e-9));
        assert!(!d.contains_strictly(Complex64::new(3.0, 1.0), 1e-9));
        assert!((d.boundary_distance(Complex64::new(1.0, 1.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(set_default_tolerance(-1.0).is_err());
        assert!(set_default_tolerance(f64::NAN).is_err());
    }
}
