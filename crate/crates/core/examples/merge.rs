//! Two hairs with the same address, started from spines offset by ±0.5,
//! merge at rate `2^{-k}`. Also checks the disjoint-type case `λ = 0.1`.

use logtract::hairs::{anchor_for, build_hair, certify_disjoint_type, merge_test, HairConfig, MergeReport};
use logtract::normalize::{choose_rescaling, postsingular_orbit};
use logtract::symbolic::ExternalAddress;
use logtract::{EntireModel, TractLabel};

fn run(lambda: f64, depth: usize) -> logtract::Result<()> {
    let model = EntireModel::exponential(lambda)?;
    let lt = choose_rescaling(&model, &postsingular_orbit(&model, 200, 1e-9)?)?.transform;
    match certify_disjoint_type(&lt) {
        Ok(inf) => println!("λ = {lambda}: K = {}, disjoint type (inf Re = {inf:.4})", lt.scale_k),
        Err(e) => println!("λ = {lambda}: K = {}, {e}", lt.scale_k),
    }
    let address = ExternalAddress::constant(TractLabel::new(0, 1), depth + 6)?;
    let anchor = anchor_for(&lt, &address)?;
    let hair = |offset: f64| {
        let cfg = HairConfig {
            spine_offset: offset,
            ..HairConfig::default()
        };
        build_hair(&lt, &address, &anchor, depth, &cfg)
    };
    let report = merge_test(&lt, &hair(0.5)?, &hair(-0.5)?)?;
    for (k, d) in report.sup_distance.iter().enumerate().step_by(5) {
        println!("  depth {k:2}: sup {d:.3e}  bound {:.3e}", MergeReport::bound(k));
    }
    println!("  merged at depth {}: {}", report.depth, report.merged);
    Ok(())
}

fn main() -> logtract::Result<()> {
    run(0.25, 20)?;
    run(0.1, 25)
}
