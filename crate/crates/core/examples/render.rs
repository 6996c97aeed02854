//! Renders the dynamical plane of `λ·e^z` for `λ = 1/4`, then the log plane
//! with the constant-address hair and its disks on top.
//!
//! cargo run --release --example render -- [out_dir]

use std::path::PathBuf;

use logtract::hairs::{build_hair, HairConfig};
use logtract::model::ModelFile;
use logtract::normalize::transform_for;
use logtract::render::{render_escape_time, render_hair_overlay, RenderJob, RenderMode, Window};
use logtract::symbolic::{pullback_orbit, ExternalAddress, DEFAULT_ESCAPE_RE};
use logtract::{ComplexPoint, EntireModel, TractLabel};

fn main() -> logtract::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let model_path = dir.join("exp_quarter.json");
    let file = ModelFile::from_model(&EntireModel::exponential(0.25)?, None);
    std::fs::write(&model_path, serde_json::to_string_pretty(&file)?)?;

    let plane = RenderJob {
        model_path: model_path.clone(),
        window: Window {
            center: ComplexPoint::new(0.0, 0.0),
            width: 8.0,
            height: 8.0,
        },
        resolution: (400, 400),
        horizon: 60,
        mode: RenderMode::PlaneEscapeTime,
        output_path: dir.join("plane.ppm"),
    };
    let (image, stats) = render_escape_time(&plane)?;
    image.write_ppm(&plane.output_path)?;
    println!(
        "plane: {:.1}% escaping in {:.2}s -> {}",
        100.0 * stats.escaping_fraction,
        stats.elapsed_seconds,
        plane.output_path.display()
    );

    let lt = transform_for(&file)?;
    let address = ExternalAddress::constant(TractLabel::new(0, 0), 16)?;
    let anchor = pullback_orbit(&lt, &address, ComplexPoint::new(55.0, 0.0), DEFAULT_ESCAPE_RE)?;
    let hair = build_hair(&lt, &address, &anchor, 10, &HairConfig::default())?;

    let overlay = RenderJob {
        window: Window {
            center: ComplexPoint::new(6.0, 0.0),
            width: 16.0,
            height: 16.0,
        },
        mode: RenderMode::HairOverlay,
        output_path: dir.join("hair_overlay.ppm"),
        ..plane
    };
    let (image, stats, audit) = render_hair_overlay(&overlay, &hair)?;
    image.write_ppm(&overlay.output_path)?;
    println!(
        "log plane: {:.1}% escaping; {} curve pixels, {:.2}% on escaping pixels -> {}",
        100.0 * stats.escaping_fraction,
        audit.curve_pixels,
        100.0 * audit.fraction,
        overlay.output_path.display()
    );
    Ok(())
}
