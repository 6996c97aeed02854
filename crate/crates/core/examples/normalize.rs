//! Normalizes `λ·e^z` and `a·cosh z`: computes the postsingular orbits,
//! searches the scale `K` and prints both certificates.
//!
//! cargo run --release --example normalize -- [lambda]

use logtract::normalize::{choose_rescaling, postsingular_orbit, verify_w_preimage};
use logtract::EntireModel;

fn show(model: &EntireModel) -> logtract::Result<()> {
    let report = postsingular_orbit(model, 200, 1e-9)?;
    println!("{} {}", model.family, model.parameter);
    println!("  orbit bound      {:.6}", report.bound_radius);
    println!("  converged        {:?}", report.converged);
    let n = choose_rescaling(model, &report)?;
    let lt = &n.transform;
    println!("  K                {}", lt.scale_k);
    println!("  rescaled radius  {:.6}", n.rescaled_radius);
    println!("  |F'| bound       {:.6}", lt.analytic_expansion_bound());
    println!("  min sampled |F'| {:.6}", n.expansion.min_observed);
    let w = verify_w_preimage(lt, 10_000);
    println!("  tracts map into W: {} ({} samples)", w.holds, w.samples);
    Ok(())
}

fn main() -> logtract::Result<()> {
    let lambda = std::env::args().nth(1).map_or(0.25, |s| s.parse().expect("lambda"));
    show(&EntireModel::exponential(lambda)?)?;
    show(&EntireModel::cosh(0.5)?)?;

    // λ = 1 has an unbounded singular orbit 0, 1, e, e^e, ...
    match postsingular_orbit(&EntireModel::exponential(1.0)?, 200, 1e-9) {
        Err(e) => println!("exp(z): {e}"),
        Ok(r) => println!("exp(z): unexpectedly bounded by {}", r.bound_radius),
    }
    Ok(())
}
