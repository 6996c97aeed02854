//! Randomized serpentine campaign for the separation and proximity facts,
//! with the tall rectangle and the wide U as controls that must fail.
//!
//! cargo run --release --example lemmas -- [trials] [seed]

use logtract::lemmas::{run_campaign, CampaignConfig};

fn main() -> logtract::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = CampaignConfig {
        trials: args.next().map_or(200, |s| s.parse().expect("trials")),
        seed: args.next().map_or(0, |s| s.parse().expect("seed")),
        ..CampaignConfig::default()
    };
    let r = run_campaign(&cfg)?;
    println!("{} trials in {:.2}s", cfg.trials, r.elapsed_seconds);
    println!(
        "separation: {} checks, {} with z in U, {} counterexamples",
        r.separation_checks, r.separation_in_u, r.separation_counterexamples
    );
    println!(
        "proximity:  {} pairs, max min-sup {:.3}, {} counterexamples",
        r.proximity_checks, r.proximity_max_min_sup, r.proximity_counterexamples
    );
    println!("grid halving changed {} of {} checked trials", r.stability_changes, r.stability_checked);
    println!(
        "controls: rectangle holds={} U-shape sup={:.2} holds={}",
        r.control.separation.holds(),
        r.control.proximity.d0.min(r.control.proximity.d1),
        r.control.proximity.holds()
    );
    println!("passed: {}", r.passed());
    Ok(())
}
