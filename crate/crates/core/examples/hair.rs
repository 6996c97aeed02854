//! Builds the hair with constant real address for `λ = 1/4` and prints its
//! convergence and geometry checks.
//!
//! cargo run --release --example hair -- [depth] [out.json]

use std::time::Instant;

use logtract::hairs::{build_hair, escape_audit, HairConfig};
use logtract::normalize::{choose_rescaling, postsingular_orbit};
use logtract::symbolic::{pullback_orbit, ExternalAddress, DEFAULT_ESCAPE_RE};
use logtract::{ComplexPoint, EntireModel, TractLabel};

fn main() -> logtract::Result<()> {
    let mut args = std::env::args().skip(1);
    let depth: usize = args.next().map_or(25, |s| s.parse().expect("depth"));
    let out = args.next();

    let model = EntireModel::exponential(0.25)?;
    let report = postsingular_orbit(&model, 200, 1e-9)?;
    let lt = choose_rescaling(&model, &report)?.transform;

    let address = ExternalAddress::constant(TractLabel::new(0, 0), depth + 6)?;
    let anchor = pullback_orbit(&lt, &address, ComplexPoint::new(55.0, 0.0), DEFAULT_ESCAPE_RE)?;

    let cfg = HairConfig::default();
    let t = Instant::now();
    let hair = build_hair(&lt, &address, &anchor, depth, &cfg)?;
    println!("built depth {depth} in {:.2?}", t.elapsed());
    for (k, d) in hair.deltas.iter().enumerate() {
        println!("depth {k:2} -> {:2}: delta {d:.3e}", k + 1);
    }
    println!("curve 0: {} points", hair.curves[0].len());
    println!("disk violation    {:.3e}", hair.disk_violation());
    println!("boundary gap      {:.3e}", hair.boundary_gap());
    println!("anchor distance   {:.4}", hair.anchor_distance());
    println!("forward residual  {:.3e}", hair.forward_inclusion_residual(&lt));
    let audit = escape_audit(&lt, &hair, 200, 40)?;
    println!("escaping samples  {}/{}", audit.escaping, audit.samples);

    if let Some(path) = out {
        std::fs::write(&path, serde_json::to_string(&hair)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
