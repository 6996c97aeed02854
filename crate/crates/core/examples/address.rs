//! External addresses, forward and backward.
//!
//! The first part tracks escaping and non-escaping points of the normalized
//! `e^z/4`. The second takes a plane orbit of `cosh z / 2` that starts
//! outside the tracts and recovers the early labels by pulling back the
//! horizontal ray from the first point that lies in a tract.

use logtract::normalize::{choose_rescaling, postsingular_orbit};
use logtract::symbolic::{
    backward_extend_address, forward_address, track_orbit, ExternalAddress, DEFAULT_ESCAPE_RE,
};
use logtract::{ComplexPoint, EntireModel, LogTransform};

fn main() -> logtract::Result<()> {
    let model = EntireModel::exponential(0.25)?;
    let lt = choose_rescaling(&model, &postsingular_orbit(&model, 200, 1e-9)?)?.transform;

    for seed in [
        ComplexPoint::new(2.5, 0.05),
        ComplexPoint::new(3.0, 6.3),
        ComplexPoint::new(1.0, 1.4),
        ComplexPoint::new(-2.0, 0.0),
    ] {
        let record = track_orbit(&lt, seed, 40, DEFAULT_ESCAPE_RE)?;
        match forward_address(&record) {
            Ok(a) => println!("{seed:>10}: {a}  [{}]", record.verdict),
            Err(_) => println!("{seed:>10}: {}", record.verdict),
        }
    }

    let parsed: ExternalAddress = "0:0, 0:1 0:-2".parse()?;
    println!("parsed {parsed}, shifted {}", parsed.shift()?);

    let lt = LogTransform::new(EntireModel::cosh(0.5)?, 4.0)?;
    let mut orbit = vec![ComplexPoint::new(0.8, 0.0)];
    for _ in 0..3 {
        let z = lt.model.nearest_preimage_rescaled(orbit[0], lt.scale_k, ComplexPoint::new(0.6, 0.0));
        orbit.insert(0, z);
    }
    for _ in 0..3 {
        let z = *orbit.last().unwrap();
        orbit.push(lt.f_k(z).value().expect("finite"));
    }
    let k = orbit
        .iter()
        .position(|z| lt.membership(z.ln()).is_some())
        .expect("orbit reaches a tract");
    println!("cosh orbit enters the tracts at step {k}");
    for k in k..orbit.len() {
        println!("  from step {k}: {}", backward_extend_address(&lt, &orbit, k)?);
    }
    Ok(())
}
