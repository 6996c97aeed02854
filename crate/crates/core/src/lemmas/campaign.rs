use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{ComplexPoint, Polyline};

use super::{
    proximity_check, tall_rectangle, wide_u_shape, ProximityVerdict, SeparationOracle,
    SeparationVerdict, SyntheticTract,
};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CampaignConfig {
    pub trials: usize,
    pub seed: u64,
    pub points_per_trial: usize,
    pub curve_pairs_per_trial: usize,
    /// Every this many trials the separation verdicts are recomputed at half
    /// the grid step. Zero disables the check.
    pub stability_every: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            trials: 200,
            seed: 0,
            points_per_trial: 10,
            curve_pairs_per_trial: 5,
            stability_every: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub lanes: usize,
    pub neck: f64,
    pub grid_step: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub separation: Vec<SeparationVerdict>,
    pub proximity: Vec<ProximityVerdict>,
    /// Verdicts that changed when the grid step was halved, if checked.
    pub stability_changes: Option<usize>,
}

/// Geometry of a failed check, kept for inspection.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub kind: &'static str,
    pub boundary: Polyline,
    pub z: Option<ComplexPoint>,
    pub curves: Option<(Polyline, Polyline)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlReport {
    pub separation: SeparationVerdict,
    pub proximity: ProximityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub separation_checks: usize,
    pub separation_in_u: usize,
    pub separation_counterexamples: usize,
    pub proximity_checks: usize,
    pub proximity_counterexamples: usize,
    /// Largest `min(d0, d1)` over all curve pairs.
    pub proximity_max_min_sup: f64,
    pub stability_checked: usize,
    pub stability_changes: usize,
    pub control: ControlReport,
    pub control_violations: usize,
    pub counterexamples: Vec<Counterexample>,
    pub elapsed_seconds: f64,
    pub trials: Vec<TrialReport>,
}

impl CampaignReport {
    /// No counterexamples, stable verdicts, and both controls violated.
    pub fn passed(&self) -> bool {
        self.separation_counterexamples == 0
            && self.proximity_counterexamples == 0
            && self.stability_changes == 0
            && !self.control.separation.holds()
            && !self.control.proximity.holds()
    }
}

fn sample_points(oracle: &SeparationOracle, rng: &mut ChaCha8Rng, r: f64, count: usize) -> Vec<ComplexPoint> {
    let raster = oracle.raster();
    let first = (0..raster.nx)
        .find(|&i| raster.center(i, 0).re > r)
        .unwrap_or(raster.nx - 1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count * 100_000 {
        if out.len() == count {
            break;
        }
        let i = rng.random_range(first..raster.nx);
        let j = rng.random_range(0..raster.ny);
        if raster.is_interior(i, j) {
            out.push(raster.center(i, j));
        }
    }
    out
}

fn random_curve(t: &SyntheticTract, rng: &mut ChaCha8Rng) -> Result<Polyline> {
    let len = t.centerline_length().expect("serpentine has a centerline");
    let w = t.lane_width().expect("serpentine has a lane width");
    t.centerline_curve(
        rng.random_range(1.0..len),
        rng.random_range(-0.35 * w..0.35 * w),
        rng.random_range(0.5..3.0),
        rng.random_range(0.0..TAU),
        0.05,
    )
}

fn run_trial(cfg: &CampaignConfig, trial: usize) -> Result<(TrialReport, Vec<Counterexample>)> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tract = SyntheticTract::serpentine(&mut rng);
    // Left U-turns end before Re 3.5 and right ones start after 6.5.
    let r = rng.random_range(3.6..6.4);
    let oracle = SeparationOracle::new(&tract, r, None)?;
    let points = sample_points(&oracle, &mut rng, r, cfg.points_per_trial);
    let separation = points
        .iter()
        .map(|&z| oracle.check(z))
        .collect::<Result<Vec<_>>>()?;

    let stability_changes = if cfg.stability_every > 0 && trial.is_multiple_of(cfg.stability_every) {
        let fine = SeparationOracle::new(&tract, r, Some(oracle.raster().step / 2.0))?;
        let mut changed = 0;
        for v in &separation {
            let w = fine.check(v.z)?;
            if (w.in_u, w.contained) != (v.in_u, v.contained) {
                changed += 1;
            }
        }
        Some(changed)
    } else {
        None
    };

    let mut counterexamples = Vec::new();
    let mut proximity = Vec::with_capacity(cfg.curve_pairs_per_trial);
    for _ in 0..cfg.curve_pairs_per_trial {
        let c0 = random_curve(&tract, &mut rng)?;
        let c1 = random_curve(&tract, &mut rng)?;
        let v = proximity_check(&tract, &c0, &c1)?;
        if !v.holds() {
            counterexamples.push(Counterexample {
                trial,
                kind: "proximity",
                boundary: tract.boundary.clone(),
                z: None,
                curves: Some((c0, c1)),
            });
        }
        proximity.push(v);
    }
    for v in separation.iter().filter(|v| !v.holds()) {
        counterexamples.push(Counterexample {
            trial,
            kind: "separation",
            boundary: tract.boundary.clone(),
            z: Some(v.z),
            curves: None,
        });
    }
    let report = TrialReport {
        trial,
        seed,
        lanes: tract.centerline_length().map_or(0, |_| lanes_of(&tract)),
        neck: tract.neck_width(),
        grid_step: oracle.raster().step,
        r,
        separation,
        proximity,
        stability_changes,
    };
    Ok((report, counterexamples))
}

fn lanes_of(t: &SyntheticTract) -> usize {
    // Outline of a thick orthogonal path with n lanes has 4n vertices.
    t.boundary.points.len() / 4
}

fn controls() -> Result<ControlReport> {
    let rect = tall_rectangle();
    let separation = SeparationOracle::new(&rect, 4.0, None)?.check(ComplexPoint::new(8.0, 0.5))?;
    let u = wide_u_shape();
    let lane = |y: f64| {
        Polyline::new(
            (0..=140).map(|i| ComplexPoint::new(2.0 + 0.1 * i as f64, y)).collect(),
            u.truncation_re(),
        )
    };
    let proximity = proximity_check(&u, &lane(5.0)?, &lane(-5.0)?)?;
    Ok(ControlReport {
        separation,
        proximity,
    })
}

/// Runs the randomized serpentine campaign and the two non-tract controls.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .collect::<Result<Vec<_>>>()?;
    let control = controls()?;
    let (trials, nested): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let counterexamples: Vec<Counterexample> = nested.into_iter().flatten().collect();
    let separation = trials.iter().flat_map(|t| &t.separation);
    let proximity = trials.iter().flat_map(|t| &t.proximity);
    let control_violations =
        usize::from(!control.separation.holds()) + usize::from(!control.proximity.holds());
    Ok(CampaignReport {
        config: *cfg,
        separation_checks: separation.clone().count(),
        separation_in_u: separation.clone().filter(|v| v.in_u).count(),
        separation_counterexamples: separation.filter(|v| !v.holds()).count(),
        proximity_checks: proximity.clone().count(),
        proximity_counterexamples: proximity.clone().filter(|v| !v.holds()).count(),
        proximity_max_min_sup: proximity.map(|v| v.d0.min(v.d1)).fold(0.0, f64::max),
        stability_checked: trials.iter().filter(|t| t.stability_changes.is_some()).count(),
        stability_changes: trials.iter().filter_map(|t| t.stability_changes).sum(),
        control,
        control_violations,
        counterexamples,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        trials,
    })
}
