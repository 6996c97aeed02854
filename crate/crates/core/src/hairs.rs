//! Hairs: unbounded curves of escaping points with a prescribed external
//! address, built by pulling back tail curves along the address and
//! cutting at the disks `D_j = D(z_j, 2π)` around an anchor orbit.
//!
//! Unbounded sets are carried as polylines truncated at `truncation_re`.
//! Every pullback shortens a curve to a few units of real part, so each step
//! re-extends the tail with the preimage of the horizontal continuation of
//! the target curve.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, ComplexPoint, Disk, Polyline, PolylineIndex};
use crate::model::{EntireModel, LogTransform, TractLabel};
use crate::symbolic::{pullback_orbit, track_orbit, ExternalAddress, OrbitRecord, DEFAULT_ESCAPE_RE};

pub const DISK_RADIUS: f64 = TAU;
/// Real part of the anchor endpoint placed on the spine of the last label.
pub const ANCHOR_RE: f64 = 55.0;
/// Required margin of `inf Re` over the tracts for a disjoint-type verdict.
pub const DISJOINT_MARGIN: f64 = 0.1;

/// Past this exponent `|F'(w)|` is taken from its leading term.
const FAR_DERIVATIVE: f64 = 300.0;
const BISECTION_STEPS: usize = 80;
const DENSIFY_DEPTH: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairConfig {
    /// Maximal spacing of consecutive curve points.
    pub mesh: f64,
    pub truncation_re: f64,
    /// Vertical offset of the initial tail curves from the tract spines.
    pub spine_offset: f64,
    pub disk_radius: f64,
}

impl Default for HairConfig {
    fn default() -> Self {
        HairConfig {
            mesh: 0.1,
            truncation_re: 1500.0,
            spine_offset: 0.0,
            disk_radius: DISK_RADIUS,
        }
    }
}

impl HairConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mesh > 0.0
            && self.mesh.is_finite()
            && self.truncation_re.is_finite()
            && self.disk_radius > 0.0
            && self.spine_offset.abs() < PI / 2.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration(format!("invalid hair configuration {self:?}")))
        }
    }
}

fn spine_segment(
    lt: &LogTransform,
    label: TractLabel,
    offset: f64,
    re_from: f64,
    re_to: f64,
    n_points: usize,
) -> Result<Polyline> {
    if !(re_from < re_to) || n_points < 2 {
        return Err(Error::Precondition(format!(
            "tail curve needs re_from < re_to and at least 2 points, got [{re_from}, {re_to}] with {n_points}"
        )));
    }
    let y = lt.spine_im(label) + offset;
    let step = (re_to - re_from) / (n_points - 1) as f64;
    let points: Vec<ComplexPoint> = (0..n_points)
        .map(|i| {
            let x = if i + 1 == n_points { re_to } else { re_from + step * i as f64 };
            ComplexPoint::new(x, y)
        })
        .collect();
    if let Some(p) = points.iter().find(|p| lt.membership(**p) != Some(label)) {
        return Err(Error::OutsideTract {
            point: *p,
            nearest: lt.strip_label(*p),
        });
    }
    Polyline::new(points, re_to)
}

/// Horizontal segment through the spine of tract `label`.
pub fn seed_tail_curve(
    lt: &LogTransform,
    label: TractLabel,
    re_from: f64,
    re_to: f64,
    n_points: usize,
) -> Result<Polyline> {
    spine_segment(lt, label, 0.0, re_from, re_to, n_points)
}

/// Pointwise inverse-branch image of a curve, with no cutting or extension.
pub fn pull_back_polyline(lt: &LogTransform, target: &Polyline, label: TractLabel) -> Result<Polyline> {
    let points = target
        .points
        .iter()
        .map(|&t| lt.inverse(t, label))
        .collect::<Result<Vec<_>>>()?;
    Polyline::from_points(points)
}

/// `ln |F'(w)|` without overflow.
fn log_derivative_norm(lt: &LogTransform, w: ComplexPoint) -> f64 {
    if w.re > FAR_DERIVATIVE {
        lt.scale_k.ln() + w.re
    } else {
        lt.derivative(w).norm().ln()
    }
}

/// Preimage samples with the target point they came from, where representable.
struct Pulled {
    pre: Vec<ComplexPoint>,
    image: Vec<Option<ComplexPoint>>,
}

impl Pulled {
    fn push(&mut self, pre: ComplexPoint, image: Option<ComplexPoint>) {
        self.pre.push(pre);
        self.image.push(image);
    }
}

#[allow(clippy::too_many_arguments)]
fn densify(
    lt: &LogTransform,
    label: TractLabel,
    (a_img, a_pre): (ComplexPoint, ComplexPoint),
    (b_img, b_pre): (ComplexPoint, ComplexPoint),
    mesh: f64,
    depth: usize,
    out: &mut Pulled,
) {
    if depth == 0 || (a_pre - b_pre).norm() <= mesh {
        return;
    }
    let m_img = 0.5 * (a_img + b_img);
    let m_pre = lt.inverse_unchecked(m_img, label);
    densify(lt, label, (a_img, a_pre), (m_img, m_pre), mesh, depth - 1, out);
    out.push(m_pre, Some(m_img));
    densify(lt, label, (m_img, m_pre), (b_img, b_pre), mesh, depth - 1, out);
}

/// Preimage of the horizontal ray beyond `origin`, appended until the real
/// part reaches `truncation_re`.
fn extend_tail(
    lt: &LogTransform,
    label: TractLabel,
    origin: ComplexPoint,
    cfg: &HairConfig,
    out: &mut Pulled,
) {
    let step = 0.45 * cfg.mesh;
    let last = *out.pre.last().expect("nonempty pullback");
    let mut sigma = step.ln() + log_derivative_norm(lt, last);
    let mut p = last;
    while p.re < cfg.truncation_re {
        p = lt.inverse_on_ray(origin, sigma, label);
        let image = (sigma < 600.0).then(|| origin + sigma.exp());
        out.push(p, image);
        // d(pre)/dσ = e^σ / |F'(pre)|
        let rate = (sigma - log_derivative_norm(lt, p)).exp();
        sigma += (step / rate).min(0.5);
    }
}

/// Point of the pulled-back carrier on the circle, between an inside and an
/// outside sample; the returned point is never strictly inside.
fn crossing(
    lt: &LogTransform,
    label: TractLabel,
    disk: &Disk,
    (a_pre, a_img): (ComplexPoint, Option<ComplexPoint>),
    (b_pre, b_img): (ComplexPoint, Option<ComplexPoint>),
) -> ComplexPoint {
    let at = |t: f64| match (a_img, b_img) {
        (Some(a), Some(b)) => lt.inverse_unchecked(a + (b - a) * t, label),
        _ => a_pre + (b_pre - a_pre) * t,
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if disk.contains(at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = at(hi);
    if disk.contains(p) {
        b_pre
    } else {
        p
    }
}

fn decimate(points: Vec<ComplexPoint>, min_gap: f64) -> Vec<ComplexPoint> {
    let n = points.len();
    if n <= 2 {
        return points;
    }
    let mut out = vec![points[0]];
    for &p in &points[1..n - 1] {
        if (p - out[out.len() - 1]).norm() >= min_gap {
            out.push(p);
        }
    }
    let last = points[n - 1];
    if out.len() > 1 && (last - out[out.len() - 1]).norm() < min_gap {
        out.pop();
    }
    out.push(last);
    out
}

/// One pullback of `target` into tract `label`, cut at `cut_disk`.
///
/// The result is the part of the preimage after its last point inside the
/// disk, starting at the exact circle crossing, with the tail re-extended to
/// the truncation and consecutive points between `mesh/4` and `mesh` apart.
pub fn pullback_step(
    lt: &LogTransform,
    target: &Polyline,
    label: TractLabel,
    cut_disk: &Disk,
    cfg: &HairConfig,
) -> Result<Polyline> {
    cfg.validate()?;
    let mut pulled = Pulled {
        pre: Vec::with_capacity(target.len()),
        image: Vec::with_capacity(target.len()),
    };
    let mut prev: Option<(ComplexPoint, ComplexPoint)> = None;
    for &t in &target.points {
        let p = lt.inverse(t, label)?;
        if let Some(a) = prev {
            densify(lt, label, a, (t, p), cfg.mesh, DENSIFY_DEPTH, &mut pulled);
        }
        pulled.push(p, Some(t));
        prev = Some((t, p));
    }
    extend_tail(lt, label, target.last(), cfg, &mut pulled);

    let start = match pulled.pre.iter().rposition(|p| cut_disk.contains(*p)) {
        None => 0,
        Some(i) if i + 1 == pulled.pre.len() => {
            return Err(Error::DegenerateCut {
                center: cut_disk.center,
            })
        }
        Some(i) => {
            let c = crossing(
                lt,
                label,
                cut_disk,
                (pulled.pre[i], pulled.image[i]),
                (pulled.pre[i + 1], pulled.image[i + 1]),
            );
            pulled.pre[i] = c;
            i
        }
    };
    let kept = crate::geometry::dedup(pulled.pre.split_off(start));
    Polyline::new(decimate(kept, cfg.mesh / 4.0), cfg.truncation_re)
}

/// A finite-depth approximation of the hair with a given address.
#[derive(Debug, Clone, Serialize)]
pub struct HairApproximation {
    pub address: ExternalAddress,
    #[serde(rename = "depth_K")]
    pub depth: usize,
    /// `curves[j]` approximates the pullback set at index `j`.
    pub curves: Vec<Polyline>,
    pub anchor_orbit: Vec<ComplexPoint>,
    pub disk_radius: f64,
    /// First index from which the anchor orbit stays in the unbounded part
    /// of its tracts.
    pub j0: usize,
    /// Number of anchor points whose membership in the unbounded component
    /// was decided by the horizontal-ray test.
    pub ray_heuristic_checks: usize,
    pub config: HairConfig,
    /// `deltas[k]`: Hausdorff distance of `curves[0]` between depths `k` and `k + 1`.
    pub deltas: Vec<f64>,
    #[serde(skip)]
    pub history: Vec<Polyline>,
    #[serde(skip)]
    model: Option<(EntireModel, f64)>,
}

/// True when the horizontal ray from `z` to the right stays in `label`'s tract.
fn ray_stays_in_tract(lt: &LogTransform, z: ComplexPoint, label: TractLabel) -> bool {
    (0..=200).all(|i| {
        let p = z + 0.05 * i as f64 * (1.0 + i as f64 / 20.0);
        lt.membership(p) == Some(label)
    })
}

fn initial_curve(
    lt: &LogTransform,
    label: TractLabel,
    disk: &Disk,
    cfg: &HairConfig,
) -> Result<Polyline> {
    let y = lt.spine_im(label) + cfg.spine_offset;
    let dy = y - disk.center.im;
    let re_from = if dy.abs() < disk.radius {
        disk.center.re + (disk.radius * disk.radius - dy * dy).sqrt()
    } else {
        lt.boundary_re(label, cfg.spine_offset) + cfg.mesh
    };
    if re_from >= cfg.truncation_re {
        return Err(Error::Precondition(format!(
            "disk at {} reaches past the truncation {}",
            disk.center, cfg.truncation_re
        )));
    }
    let n = ((cfg.truncation_re - re_from) / (0.5 * cfg.mesh)).ceil() as usize + 1;
    spine_segment(lt, label, cfg.spine_offset, re_from, cfg.truncation_re, n.max(2))
}

/// Pulls back spine tails `depth` times along `address`, cutting at the
/// disks around the anchor orbit.
pub fn build_hair(
    lt: &LogTransform,
    address: &ExternalAddress,
    anchor: &OrbitRecord,
    depth: usize,
    cfg: &HairConfig,
) -> Result<HairApproximation> {
    cfg.validate()?;
    let n = address.horizon();
    if depth == 0 || depth + 2 > n {
        return Err(Error::Precondition(format!(
            "depth {depth} needs 1 <= depth <= horizon - 1 for an address of {n} labels"
        )));
    }
    if !anchor.verdict.is_escaping() {
        return Err(Error::Precondition(format!(
            "anchor orbit is {}, not escaping",
            anchor.verdict
        )));
    }
    if anchor.steps.len() < n {
        return Err(Error::Precondition(format!(
            "anchor has {} steps, address needs {n}",
            anchor.steps.len()
        )));
    }
    let labels = address.labels();
    if let Some(j) = (0..n).find(|&j| anchor.steps[j].tract != Some(labels[j])) {
        return Err(Error::Precondition(format!(
            "anchor step {j} is in tract {:?}, address says {}",
            anchor.steps[j].tract, labels[j]
        )));
    }
    let anchor_orbit: Vec<ComplexPoint> = anchor.steps[..n].iter().map(|s| s.point).collect();
    let disks = anchor_orbit
        .iter()
        .map(|&z| Disk::new(z, cfg.disk_radius))
        .collect::<Result<Vec<_>>>()?;

    let mut level = (0..n)
        .into_par_iter()
        .map(|j| initial_curve(lt, labels[j], &disks[j], cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut history = vec![level[0].clone()];
    let mut deltas = Vec::with_capacity(depth);
    for _ in 0..depth {
        let next = (0..level.len() - 1)
            .into_par_iter()
            .map(|j| pullback_step(lt, &level[j + 1], labels[j], &disks[j], cfg))
            .collect::<Result<Vec<_>>>()?;
        deltas.push(hausdorff_distance(&next[0], &level[0]));
        history.push(next[0].clone());
        level = next;
    }

    let mut j0 = n;
    let mut ray_heuristic_checks = 0;
    for j in (0..n).rev() {
        let z = anchor_orbit[j];
        ray_heuristic_checks += 1;
        if z.re > 0.0 && ray_stays_in_tract(lt, z, labels[j]) {
            j0 = j;
        } else {
            break;
        }
    }

    Ok(HairApproximation {
        address: address.clone(),
        depth,
        curves: level,
        anchor_orbit,
        disk_radius: cfg.disk_radius,
        j0,
        ray_heuristic_checks,
        config: *cfg,
        deltas,
        history,
        model: Some((lt.model.clone(), lt.scale_k)),
    })
}

impl HairApproximation {
    fn disk(&self, j: usize) -> Disk {
        Disk {
            center: self.anchor_orbit[j],
            radius: self.disk_radius,
        }
    }

    fn checked(&self) -> impl Iterator<Item = usize> {
        self.j0.min(self.curves.len())..self.curves.len()
    }

    /// Largest depth of a retained point inside its disk.
    pub fn disk_violation(&self) -> f64 {
        self.checked()
            .flat_map(|j| {
                let d = self.disk(j);
                self.curves[j]
                    .points
                    .iter()
                    .map(move |p| d.radius - (p - d.center).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest over `j` of the distance from `curves[j]` to the circle `∂D_j`.
    pub fn boundary_gap(&self) -> f64 {
        self.checked()
            .map(|j| {
                let d = self.disk(j);
                self.curves[j]
                    .points
                    .iter()
                    .map(|p| d.boundary_distance(*p))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Largest distance from an anchor point `z_j` to `curves[j]`.
    pub fn anchor_distance(&self) -> f64 {
        self.checked()
            .map(|j| PolylineIndex::new(&self.curves[j]).distance(self.anchor_orbit[j]))
            .fold(0.0, f64::max)
    }

    /// Largest distance from `F(curves[j])` to `curves[j + 1]`, over points
    /// whose image lies before the truncation.
    pub fn forward_inclusion_residual(&self, lt: &LogTransform) -> f64 {
        let labels = self.address.labels();
        let start = self.j0.min(self.curves.len());
        (start..self.curves.len().saturating_sub(1))
            .into_par_iter()
            .map(|j| {
                let index = PolylineIndex::new(&self.curves[j + 1]);
                self.curves[j]
                    .points
                    .iter()
                    .filter_map(|&p| lt.eval_unchecked(p, labels[j].base).value())
                    .filter(|q| q.re <= self.config.truncation_re)
                    .map(|q| index.distance(q))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Depths `k` at which `deltas[k] > 2π·2^{-k}`.
    pub fn nesting_failures(&self) -> Vec<usize> {
        self.deltas
            .iter()
            .enumerate()
            .filter(|(k, d)| **d > TAU * 0.5f64.powi(*k as i32))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn built_with(&self, lt: &LogTransform) -> bool {
        self.model
            .as_ref()
            .is_none_or(|(m, k)| *m == lt.model && *k == lt.scale_k)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MergeReport {
    /// Hausdorff distance between the two `curves[0]` at each depth.
    pub sup_distance: Vec<f64>,
    /// `sup_distance[k + 1] / sup_distance[k]`, where defined.
    pub ratios: Vec<f64>,
    pub depth: usize,
    pub merged: bool,
}

impl MergeReport {
    /// Merge threshold `2^{1-depth}·π`.
    pub fn bound(depth: usize) -> f64 {
        2.0 * PI * 0.5f64.powi(depth as i32)
    }
}

/// Compares two hairs with the same address depth by depth.
pub fn merge_test(
    lt: &LogTransform,
    a: &HairApproximation,
    b: &HairApproximation,
) -> Result<MergeReport> {
    if a.address != b.address {
        return Err(Error::Precondition("hairs have different addresses".into()));
    }
    if !a.built_with(lt) || !b.built_with(lt) {
        return Err(Error::Precondition("hairs were built with a different transform".into()));
    }
    let depth = a.history.len().min(b.history.len()).saturating_sub(1);
    let sup_distance: Vec<f64> = a
        .history
        .par_iter()
        .zip(b.history.par_iter())
        .map(|(x, y)| hausdorff_distance(x, y))
        .collect();
    let ratios = sup_distance
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let merged = sup_distance
        .last()
        .is_some_and(|d| *d < MergeReport::bound(depth));
    Ok(MergeReport {
        sup_distance,
        ratios,
        depth,
        merged,
    })
}

/// Infimum of `Re` over sampled tract boundary points, including points
/// close to the boundary lines `Im = spine ± π/2`.
pub fn tract_boundary_infimum(lt: &LogTransform, samples: usize) -> f64 {
    let samples = samples.max(2);
    (0..lt.base_count())
        .flat_map(|base| {
            (0..samples).map(move |i| {
                let y = (i as f64 / (samples - 1) as f64 * 2.0 - 1.0) * (PI / 2.0 - 1e-3);
                (TractLabel::new(base, 0), y)
            })
        })
        .map(|(label, y)| lt.boundary_re(label, y))
        .fold(f64::INFINITY, f64::min)
}

/// Disjoint type: the closed tracts lie in the right half-plane, checked as
/// `inf Re > 0.1` over boundary samples. Returns the infimum.
pub fn certify_disjoint_type(lt: &LogTransform) -> Result<f64> {
    let inf = tract_boundary_infimum(lt, 401);
    if inf > DISJOINT_MARGIN {
        Ok(inf)
    } else {
        Err(Error::Precondition(format!(
            "tract boundary reaches Re = {inf}, not disjoint type with margin {DISJOINT_MARGIN}"
        )))
    }
}

/// Anchor orbit for `address`, pulled back from `ANCHOR_RE` on the spine of
/// its last tract.
pub fn anchor_for(lt: &LogTransform, address: &ExternalAddress) -> Result<OrbitRecord> {
    let last = address.labels()[address.horizon() - 1];
    let endpoint = ComplexPoint::new(ANCHOR_RE, lt.spine_im(last));
    pullback_orbit(lt, address, endpoint, DEFAULT_ESCAPE_RE)
}

/// Geometric checks of a built hair plus an escape audit of `curves[0]`.
#[derive(Debug, Clone, Serialize)]
pub struct HairAudit {
    pub disk_violation: f64,
    pub boundary_gap: f64,
    pub anchor_distance: f64,
    pub forward_inclusion_residual: f64,
    pub nesting_failures: Vec<usize>,
    pub escape: EscapeAudit,
    pub mesh: f64,
}

impl HairAudit {
    pub fn new(lt: &LogTransform, hair: &HairApproximation, samples: usize, horizon: usize) -> Result<Self> {
        Ok(HairAudit {
            disk_violation: hair.disk_violation(),
            boundary_gap: hair.boundary_gap(),
            anchor_distance: hair.anchor_distance(),
            forward_inclusion_residual: hair.forward_inclusion_residual(lt),
            nesting_failures: hair.nesting_failures(),
            escape: escape_audit(lt, hair, samples, horizon)?,
            mesh: hair.config.mesh,
        })
    }

    /// Disk avoidance to 1e-9, boundary contact and forward inclusion within
    /// the mesh, anchor within `2π` plus the mesh, and every sample escaping.
    pub fn passed(&self) -> bool {
        self.disk_violation <= 1e-9
            && self.boundary_gap <= self.mesh
            && self.forward_inclusion_residual <= self.mesh
            && self.anchor_distance <= TAU + self.mesh
            && self.escape.escaping == self.escape.samples
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeAudit {
    pub samples: usize,
    pub escaping: usize,
    pub fraction: f64,
    /// Smallest increment of `Re` after the escape threshold, over all samples.
    pub min_growth_margin: Option<f64>,
    pub non_escaping: Vec<ComplexPoint>,
}

/// Tracks evenly spaced points of `curves[0]` and counts escaping verdicts.
pub fn escape_audit(
    lt: &LogTransform,
    hair: &HairApproximation,
    sample_count: usize,
    horizon: usize,
) -> Result<EscapeAudit> {
    let curve = &hair.curves[0];
    let last = curve.len() - 1;
    let picks: Vec<ComplexPoint> = (0..sample_count)
        .map(|s| {
            let i = if sample_count == 1 { 0 } else { s * last / (sample_count - 1) };
            curve.points[i]
        })
        .collect();
    audit_points(lt, &picks, horizon)
}

/// Escape verdicts for an explicit list of points.
pub fn audit_points(lt: &LogTransform, points: &[ComplexPoint], horizon: usize) -> Result<EscapeAudit> {
    let records = points
        .par_iter()
        .map(|&p| track_orbit(lt, p, horizon, DEFAULT_ESCAPE_RE))
        .collect::<Result<Vec<_>>>()?;
    let escaping = records.iter().filter(|r| r.verdict.is_escaping()).count();
    let min_growth_margin = records
        .iter()
        .filter_map(OrbitRecord::growth_margin)
        .reduce(f64::min);
    let non_escaping = records
        .iter()
        .filter(|r| !r.verdict.is_escaping())
        .map(|r| r.seed)
        .collect();
    Ok(EscapeAudit {
        samples: points.len(),
        escaping,
        fraction: if points.is_empty() {
            1.0
        } else {
            escaping as f64 / points.len() as f64
        },
        min_growth_margin,
        non_escaping,
    })
}
