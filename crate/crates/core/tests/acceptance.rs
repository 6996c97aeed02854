//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! cargo test --release --test acceptance

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logtract::hairs::{
    anchor_for, build_hair, certify_disjoint_type, escape_audit, merge_test, HairApproximation,
    HairConfig,
};
use logtract::lemmas::{run_campaign, CampaignConfig};
use logtract::model::ModelFile;
use logtract::normalize::{choose_rescaling, postsingular_orbit};
use logtract::render::{
    render_escape_time, render_hair_overlay, RenderJob, RenderMode, Window, BAND_STRIDE, NON_ESCAPING,
    PALETTE,
};
use logtract::symbolic::ExternalAddress;
use logtract::{EntireModel, LogTransform, TractLabel};

type C = Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Independent oracles. Nothing below calls into the crate.

/// Attracting fixed point of `λe^z` for real `0 < λ < 1/e`, by iteration.
fn exp_fixed_point(lambda: f64) -> f64 {
    let mut x = 0.0f64;
    for _ in 0..10_000 {
        x = lambda * x.exp();
    }
    x
}

/// `F(w) = K e^w + log(λ/K)` written out from scratch.
fn oracle_f(lambda: f64, k: f64, w: C) -> C {
    w.exp() * k + C::new((lambda / k).ln(), 0.0)
}

fn oracle_segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

fn oracle_polyline_distance(p: C, pts: &[C]) -> f64 {
    if pts.len() == 1 {
        return (p - pts[0]).norm();
    }
    pts.windows(2)
        .map(|s| oracle_segment_distance(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Directed distance from every `stride`-th vertex of `a` to `b`; a lower
/// bound for the exact directed Hausdorff distance.
fn sampled_directed(a: &[C], b: &[C], stride: usize) -> f64 {
    a.iter()
        .step_by(stride)
        .chain(a.last())
        .map(|p| oracle_polyline_distance(*p, b))
        .fold(0.0, f64::max)
}

fn sampled_hausdorff(a: &[C], b: &[C], stride: usize) -> f64 {
    sampled_directed(a, b, stride).max(sampled_directed(b, a, stride))
}

/// Orbit of `w` under [`oracle_f`] reaches `Re > 50` within `horizon`
/// steps with increasing real parts from then on (or overflows).
fn oracle_escapes(lambda: f64, k: f64, w: C, horizon: usize) -> bool {
    let mut w = w;
    let mut crossed = false;
    for _ in 0..horizon {
        if w.re > 700.0 {
            return true;
        }
        let next = oracle_f(lambda, k, w);
        if w.re > 50.0 {
            crossed = true;
            if next.re <= w.re {
                return false;
            }
        }
        w = next;
    }
    crossed || w.re > 50.0
}

// ---------------------------------------------------------------------------

fn normalized(lambda: f64) -> LogTransform {
    let model = EntireModel::exponential(lambda).unwrap();
    let report = postsingular_orbit(&model, 200, 1e-9).unwrap();
    choose_rescaling(&model, &report).unwrap().transform
}

fn constant_hair(lt: &LogTransform, depth: usize, offset: f64) -> HairApproximation {
    let address = ExternalAddress::constant(TractLabel::new(0, 0), depth + 5).unwrap();
    let anchor = anchor_for(lt, &address).unwrap();
    let cfg = HairConfig {
        spine_offset: offset,
        ..HairConfig::default()
    };
    build_hair(lt, &address, &anchor, depth, &cfg).unwrap()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let model = EntireModel::exponential(0.25).unwrap();
    let report = postsingular_orbit(&model, 200, 1e-9).unwrap();
    let n = choose_rescaling(&model, &report).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let k = n.transform.scale_k;
    let p = exp_fixed_point(0.25);
    // On the restricted tracts |F'| = K|e^w| ≥ -Re log(λ/K) = log(K/λ).
    let analytic = (k / 0.25).ln();
    let pass = report.all_converged()
        && (report.bound_radius - p).abs() < 1e-6
        && p / k <= 0.5
        && n.rescaled_radius <= 0.5
        && analytic >= 2.0
        && n.transform.analytic_expansion_bound() >= 2.0
        && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "K = {k}, rescaled radius {:.4} (oracle {:.4}), |F'| >= {analytic:.4}, {elapsed:.3}s",
            n.rescaled_radius,
            p / k
        ),
    )
}

fn criterion_2() -> Outcome {
    let lt = normalized(0.25);
    let k = lt.scale_k;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let w = C::new(rng.random_range(0.0..5.0), rng.random_range(-30.0..30.0));
        let Some(label) = lt.membership(w) else { continue };
        count += 1;
        let f = lt.eval(w, label).unwrap().value().unwrap();
        let lhs = f.exp();
        // f_K(e^w) = λ e^{K e^w} / K, directly.
        let rhs = (w.exp() * k).exp() * 0.25 / k;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    outcome(worst < 1e-12, format!("max relative error {worst:.2e} over {count} tract points"))
}

fn criterion_3(lt: &LogTransform) -> Outcome {
    let t = Instant::now();
    let hair = constant_hair(lt, 26, 0.0);
    let elapsed = t.elapsed().as_secs_f64();
    let mut pass = elapsed < 30.0;
    let mut worst_ratio = 0.0f64;
    for k in 5..=25 {
        let delta = hair.deltas[k];
        let bound = TAU * 0.5f64.powi(k as i32);
        worst_ratio = worst_ratio.max(delta / bound);
        let lower = sampled_hausdorff(&hair.history[k].points, &hair.history[k + 1].points, 97);
        pass &= delta <= bound && lower <= delta + 1e-9;
    }
    outcome(
        pass,
        format!(
            "max delta/bound over K=5..25 is {worst_ratio:.2e}; depth-26 build {elapsed:.2}s (depth 25 budget 30s)"
        ),
    )
}

fn criterion_4(hair: &HairApproximation, mesh: f64) -> Outcome {
    let mut worst = 0.0f64;
    for j in hair.j0..hair.curves.len() {
        let d = oracle_polyline_distance(hair.anchor_orbit[j], &hair.curves[j].points);
        worst = worst.max(d);
    }
    outcome(
        worst <= TAU + mesh,
        format!(
            "max dist(z_j, C_j) = {worst:.6} over j = {}..{} (bound {:.6})",
            hair.j0,
            hair.curves.len() - 1,
            TAU + mesh
        ),
    )
}

fn criterion_5(lt: &LogTransform, hair: &HairApproximation, mesh: f64) -> Outcome {
    let mut inside = 0.0f64;
    let mut gap = 0.0f64;
    for j in hair.j0..hair.curves.len() {
        let z = hair.anchor_orbit[j];
        let near = hair.curves[j]
            .points
            .iter()
            .map(|p| (p - z).norm())
            .fold(f64::INFINITY, f64::min);
        inside = inside.max(TAU - near);
        gap = gap.max((near - TAU).abs());
    }
    let residual = hair.forward_inclusion_residual(lt);
    let audit = escape_audit(lt, hair, 200, 40).unwrap();
    let curve = &hair.curves[0].points;
    let oracle_escaping = (0..200)
        .filter(|s| {
            let w = curve[s * (curve.len() - 1) / 199];
            oracle_escapes(0.25, lt.scale_k, w, 40)
        })
        .count();
    let pass = inside <= 1e-9
        && gap <= mesh
        && residual <= mesh
        && audit.escaping == 200
        && oracle_escaping == 200;
    outcome(
        pass,
        format!(
            "disk intrusion {inside:.1e}, contact gap {gap:.1e}, forward residual {residual:.1e}, \
             escaping {}/200 (oracle {oracle_escaping}/200)",
            audit.escaping
        ),
    )
}

fn criterion_6(lt: &LogTransform, a: &HairApproximation, b: &HairApproximation, mesh: f64) -> Outcome {
    let report = merge_test(lt, a, b).unwrap();
    let mut pass = a.history[0].points != b.history[0].points;
    let mut worst = 0.0f64;
    for j in 5..=25 {
        let bound = 2.0 * PI * 0.5f64.powi(j as i32) + 2.0 * mesh;
        let d = report.sup_distance[j];
        let lower = sampled_hausdorff(&a.history[j].points, &b.history[j].points, 97);
        worst = worst.max(d / bound);
        pass &= d <= bound && lower <= d + 1e-9;
    }
    outcome(
        pass,
        format!(
            "spine offsets +-0.5: sup distance at depth 0 is {:.3}, max sup/bound over j=5..25 is {worst:.2e}",
            report.sup_distance[0]
        ),
    )
}

fn criterion_7() -> Outcome {
    let lt = normalized(0.1);
    // Tract of e^w + log(0.1/K) in H is Re e^w > log(10 K)/K; infimum of Re
    // is the log of that.
    let k = lt.scale_k;
    let oracle_inf = ((10.0 * k).ln() / k).ln();
    let certified = certify_disjoint_type(&lt);
    let a = constant_hair(&lt, 25, 0.5);
    let b = constant_hair(&lt, 25, -0.5);
    let report = merge_test(&lt, &a, &b).unwrap();
    let pass = oracle_inf > 0.1
        && certified.as_ref().is_ok_and(|inf| (inf - oracle_inf).abs() < 1e-3)
        && report.merged
        && report.depth == 25;
    outcome(
        pass,
        format!(
            "lambda = 0.1, K = {k}: inf Re = {:.4} (oracle {oracle_inf:.4}), merged at depth {}: {}",
            certified.unwrap_or(f64::NAN),
            report.depth,
            report.merged
        ),
    )
}

fn criterion_8() -> Outcome {
    let r = run_campaign(&CampaignConfig::default()).unwrap();
    // Rectangle [0,16]×[0,12], z = 8+0.5i, R = 4: the slit leaves the band
    // y > 0.5 + 2π open, which joins x < 4 to the mouth.
    let rect_expected = 0.5 + TAU < 12.0;
    // Lanes at y = ±5 are 10 apart.
    let u_expected = 10.0 > TAU;
    let pass = r.separation_counterexamples == 0
        && r.proximity_counterexamples == 0
        && r.stability_changes == 0
        && r.control_violations >= 1
        && rect_expected == !r.control.separation.holds()
        && u_expected == !r.control.proximity.holds()
        && r.elapsed_seconds < 60.0;
    outcome(
        pass,
        format!(
            "{} trials: {}/{} separation and {}/{} proximity counterexamples, {} control violations, {:.2}s",
            r.config.trials,
            r.separation_counterexamples,
            r.separation_checks,
            r.proximity_counterexamples,
            r.proximity_checks,
            r.control_violations,
            r.elapsed_seconds
        ),
    )
}

fn criterion_9(lt: &LogTransform) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    let file = ModelFile::from_model(&EntireModel::exponential(0.25).unwrap(), None);
    std::fs::write(&model_path, serde_json::to_string(&file).unwrap()).unwrap();
    let job = RenderJob {
        model_path,
        window: Window {
            center: C::new(0.0, 0.0),
            width: 8.0,
            height: 8.0,
        },
        resolution: (400, 400),
        horizon: 60,
        mode: RenderMode::PlaneEscapeTime,
        output_path: dir.path().join("plane.ppm"),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let (first, stats) = pool.install(|| render_escape_time(&job)).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let (second, _) = pool.install(|| render_escape_time(&job)).unwrap();
    let identical = first.to_ppm() == second.to_ppm();

    // Spot-check pixels against direct iteration of λe^z.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..500 {
        let (px, py) = (rng.random_range(0..400usize), rng.random_range(0..400usize));
        let z0 = job.window.pixel_to_point(px as f64, py as f64, job.resolution);
        let mut z = z0;
        let mut time = None;
        for n in 0..60u32 {
            if z.re > 50.0 {
                time = Some(n);
                break;
            }
            z = z.exp() * 0.25;
        }
        let expect = time.map_or(NON_ESCAPING, |n| PALETTE[(BAND_STRIDE * n as usize) % 256]);
        if first.pixels[py * 400 + px] != expect {
            mismatches += 1;
        }
    }

    let hair = constant_hair(lt, 10, 0.0);
    let overlay = RenderJob {
        window: Window {
            center: C::new(6.0, 0.0),
            width: 16.0,
            height: 16.0,
        },
        mode: RenderMode::HairOverlay,
        ..job.clone()
    };
    let (_, _, audit) = render_hair_overlay(&overlay, &hair).unwrap();
    let pass = elapsed < 5.0
        && identical
        && stats.escaping_fraction > 0.0
        && stats.escaping_fraction < 1.0
        && mismatches == 0
        && audit.curve_pixels > 0
        && audit.fraction >= 0.99;
    outcome(
        pass,
        format!(
            "400x400 in {elapsed:.3}s on 1 thread, identical bytes: {identical}, escaping {:.2}%, \
             {mismatches} oracle mismatches, overlay {:.2}% of {} curve pixels",
            100.0 * stats.escaping_fraction,
            100.0 * audit.fraction,
            audit.curve_pixels
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "[{}] {n}. {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    let lt = normalized(0.25);
    let mesh = HairConfig::default().mesh;

    report(1, "normalization certificate", &mut criterion_1);
    report(2, "semiconjugacy", &mut criterion_2);
    report(3, "hair contraction", &mut || criterion_3(&lt));
    let hair = constant_hair(&lt, 25, 0.0);
    report(4, "orbit-to-hair distance", &mut || criterion_4(&hair, mesh));
    report(5, "pullback set properties at depth 25", &mut || criterion_5(&lt, &hair, mesh));
    drop(hair);
    report(6, "merge rate", &mut || {
        let a = constant_hair(&lt, 25, 0.5);
        let b = constant_hair(&lt, 25, -0.5);
        criterion_6(&lt, &a, &b, mesh)
    });
    report(7, "disjoint type merge", &mut criterion_7);
    report(8, "lemma campaigns", &mut criterion_8);
    report(9, "rendering", &mut || criterion_9(&lt));

    if all {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("some criteria failed");
        ExitCode::FAILURE
    }
}
