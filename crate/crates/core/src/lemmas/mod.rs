//! Numerical checks of two topological facts about tracts, i.e. Jordan
//! domains disjoint from their `2πi`-translates:
//!
//! * separation: if `z` lies in the unbounded component `U` of
//!   `{Re > R} ∩ T`, then the unbounded component of `T` minus the vertical
//!   slit `z + i(-2π, 2π)` is contained in `U`;
//! * proximity: for two unbounded connected sets `C₀, C₁ ⊂ T`, every point of
//!   one of them lies within `2π` of the other.
//!
//! Tracts are polygons truncated at a mouth `Re = X`; "unbounded component"
//! means the component touching the mouth. Components are found by flood
//! fill on a raster of cell centers.

mod campaign;
mod raster;
mod tract;

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{directed_hausdorff, ComplexPoint, Polyline};

pub use campaign::{run_campaign, CampaignConfig, CampaignReport, Counterexample, TrialReport};
pub use raster::Raster;
pub use tract::{tall_rectangle, wide_u_shape, SyntheticTract, SERPENTINE_MOUTH};

/// Default raster step as a fraction of the neck width.
pub const NECK_FRACTION: f64 = 1.0 / 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationVerdict {
    pub z: ComplexPoint,
    #[serde(rename = "R")]
    pub r: f64,
    /// `z` lies in the component of `{Re > R} ∩ T` touching the mouth.
    pub in_u: bool,
    /// The mouth component of `T` minus the slit lies inside that component.
    pub contained: bool,
    pub grid_step: f64,
    /// Abscissa of the mouth standing in for the unbounded end.
    pub truncation_re: f64,
}

impl SeparationVerdict {
    /// The implication `in_u ⇒ contained`.
    pub fn holds(&self) -> bool {
        !self.in_u || self.contained
    }
}

/// Rasterized tract with the component `U` for a fixed `R`, reused across
/// sample points.
pub struct SeparationOracle<'a> {
    tract: &'a SyntheticTract,
    raster: Raster,
    r: f64,
    u: Vec<bool>,
}

impl<'a> SeparationOracle<'a> {
    /// `step = None` uses `neck/32`; an explicit step coarser than half the
    /// neck is rejected.
    pub fn new(tract: &'a SyntheticTract, r: f64, step: Option<f64>) -> Result<Self> {
        let neck = tract.neck_width();
        let step = step.unwrap_or(neck * NECK_FRACTION);
        if !(step > 0.0) || step > neck / 2.0 {
            return Err(Error::Resolution { step, neck });
        }
        let raster = Raster::new(tract, step)?;
        let (u, _) = raster.flood(|i, j| raster.center(i, j).re > r, |_| true);
        Ok(SeparationOracle { tract, raster, r, u })
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn check(&self, z: ComplexPoint) -> Result<SeparationVerdict> {
        if !(z.re > self.r) || !self.tract.contains(z) {
            return Err(Error::Precondition(format!(
                "{z} must lie in the tract with Re > {}",
                self.r
            )));
        }
        let raster = &self.raster;
        let (iz, jz) = raster
            .cell_of(z)
            .ok_or_else(|| Error::Precondition(format!("{z} is outside the raster")))?;
        let in_u = self.u[raster.index(iz, jz)];
        let open = |i: usize, j: usize| i != iz || (raster.center(i, j).im - z.im).abs() >= TAU;
        let (_, contained) = raster.flood(open, |k| self.u[k]);
        Ok(SeparationVerdict {
            z,
            r: self.r,
            in_u,
            contained,
            grid_step: raster.step,
            truncation_re: self.tract.truncation_re(),
        })
    }
}

/// Separation check at the default resolution.
pub fn separation_check(t: &SyntheticTract, z: ComplexPoint, r: f64) -> Result<SeparationVerdict> {
    SeparationOracle::new(t, r, None)?.check(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProximityVerdict {
    /// Sup over the vertices of `c0` of the distance to `c1`.
    pub d0: f64,
    pub d1: f64,
    pub tolerance: f64,
}

impl ProximityVerdict {
    pub fn holds(&self) -> bool {
        self.d0.min(self.d1) <= TAU + self.tolerance
    }
}

fn check_curve(t: &SyntheticTract, c: &Polyline, name: &str) -> Result<()> {
    let mouth = t.truncation_re();
    if c.last().re < mouth - 1e-9 {
        return Err(Error::Precondition(format!("{name} does not reach the mouth")));
    }
    if let Some(p) = c.points.iter().find(|p| p.re < mouth - 1e-9 && !t.contains(**p)) {
        return Err(Error::Precondition(format!("{name} leaves the tract at {p}")));
    }
    Ok(())
}

/// Mutual sup distances of two curves reaching the mouth of a tract.
pub fn proximity_check(t: &SyntheticTract, c0: &Polyline, c1: &Polyline) -> Result<ProximityVerdict> {
    check_curve(t, c0, "c0")?;
    check_curve(t, c1, "c1")?;
    Ok(ProximityVerdict {
        d0: directed_hausdorff(c0, c1),
        d1: directed_hausdorff(c1, c0),
        tolerance: c0.max_gap().max(c1.max_gap()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn strip_is_trivial() {
        let t = SyntheticTract::strip(0.0, 16.0, 1.0).unwrap();
        for z in [c(5.0, 0.0), c(12.0, 0.7), c(3.1, -0.9)] {
            let v = separation_check(&t, z, 3.0).unwrap();
            assert!(v.in_u && v.contained);
        }
        assert!(separation_check(&t, c(2.0, 0.0), 3.0).is_err());
        assert!(separation_check(&t, c(5.0, 2.0), 3.0).is_err());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let t = SyntheticTract::strip(0.0, 16.0, 1.0).unwrap();
        assert!(matches!(
            SeparationOracle::new(&t, 3.0, Some(1.5)),
            Err(Error::Resolution { .. })
        ));
        assert!(SeparationOracle::new(&t, 3.0, Some(0.5)).is_ok());
    }

    /// Two lanes: the mouth lane reaches left to `x = 1`, turns down and
    /// comes back right to a dead end at `x = 10`.
    fn hook() -> SyntheticTract {
        SyntheticTract::thick_path(vec![c(16.0, 0.6), c(1.0, 0.6), c(1.0, -0.6), c(10.0, -0.6)], 0.6)
            .unwrap()
    }

    #[test]
    fn hook_components() {
        let t = hook();
        assert!(t.period_disjoint);
        let oracle = SeparationOracle::new(&t, 4.0, None).unwrap();
        let far = oracle.check(c(12.0, 0.6)).unwrap();
        assert!(far.in_u && far.contained);
        let finger = oracle.check(c(8.0, -0.6)).unwrap();
        assert!(!finger.in_u);
        assert!(finger.holds());
        // The slit through the finger also cuts the mouth lane above it, so
        // only the part of that lane right of the slit stays reachable.
        assert!(finger.contained);
    }

    #[test]
    fn tall_rectangle_violates() {
        let t = tall_rectangle();
        let v = separation_check(&t, c(8.0, 0.5), 4.0).unwrap();
        assert!(v.in_u && !v.contained && !v.holds());
    }

    #[test]
    fn shifted_curve_in_strip() {
        let t = SyntheticTract::strip(0.0, 16.0, 1.5).unwrap();
        let c0 = Polyline::new((0..=140).map(|i| c(2.0 + 0.1 * i as f64, 0.0)).collect(), 16.0).unwrap();
        let c1 = c0.translated(c(0.0, 0.5));
        let v = proximity_check(&t, &c0, &c1).unwrap();
        assert!((v.d0 - 0.5).abs() < 1e-12 && (v.d1 - 0.5).abs() < 1e-12);
        assert!(v.holds());
        let same = proximity_check(&t, &c0, &c0).unwrap();
        assert_eq!((same.d0, same.d1), (0.0, 0.0));
        let outside = c0.translated(c(0.0, 2.0));
        assert!(proximity_check(&t, &c0, &outside).is_err());
    }

    #[test]
    fn serpentine_curves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = SyntheticTract::serpentine(&mut rng);
        let len = t.centerline_length().unwrap();
        let w = t.lane_width().unwrap();
        let spine = t.centerline_curve(len, 0.0, 1.0, 0.0, 0.05).unwrap();
        let side = t.centerline_curve(0.3 * len, 0.3 * w, 1.7, 0.2, 0.05).unwrap();
        let v = proximity_check(&t, &spine, &side).unwrap();
        assert!(v.holds());
        assert!(v.d1 <= w);
    }

    #[test]
    fn u_shape_violates() {
        let t = wide_u_shape();
        let top = Polyline::new((0..=140).map(|i| c(2.0 + 0.1 * i as f64, 5.0)).collect(), 16.0).unwrap();
        let bottom = top.translated(c(0.0, -10.0));
        let v = proximity_check(&t, &top, &bottom).unwrap();
        assert!(!v.holds());
    }
}
