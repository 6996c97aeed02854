//! Hyperbolic distances in a half-plane, directly and through a conformal map.

use logtract::geometry::{hyperbolic_distance_halfplane, hyperbolic_distance_via_map, ConformalMap};
use logtract::{ComplexPoint, HalfPlane};

/// `w ↦ w²` maps the right half-plane onto the plane minus `(-∞, 0]`.
struct Square;

impl ConformalMap for Square {
    fn apply(&self, w: ComplexPoint) -> ComplexPoint {
        w * w
    }
    fn derivative(&self, w: ComplexPoint) -> ComplexPoint {
        2.0 * w
    }
    fn initial_guess(&self, z: ComplexPoint) -> ComplexPoint {
        z.sqrt()
    }
}

fn main() -> logtract::Result<()> {
    let h = HalfPlane::RIGHT;
    let a = ComplexPoint::new(1.0, 0.0);
    for x in [2.0, 4.0, 8.0] {
        let d = hyperbolic_distance_halfplane(a, ComplexPoint::new(x, 0.0), h)?;
        println!("d(1, {x}) = {d:.6}  (ln {x} = {:.6})", f64::ln(x));
    }
    let b = ComplexPoint::new(1.0, 3.0);
    println!("d(1, 1+3i) = {:.6}", hyperbolic_distance_halfplane(a, b, h)?);
    let shifted = HalfPlane::new(-2.0);
    println!("in Re > -2: {:.6}", hyperbolic_distance_halfplane(a, b, shifted)?);

    // Distance in the slit plane between -1 ± i, whose preimages are
    // symmetric about the real axis.
    let (p, q) = (ComplexPoint::new(-1.0, 1.0), ComplexPoint::new(-1.0, -1.0));
    println!("slit plane d(-1+i, -1-i) = {:.6}", hyperbolic_distance_via_map(p, q, &Square)?);
    Ok(())
}
