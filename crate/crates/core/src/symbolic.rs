//! Forward orbits under `F`, their escape verdicts and external addresses.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_finite, ComplexPoint};
use crate::model::{FValue, Family, LogTransform, TractLabel};

pub const DEFAULT_ESCAPE_RE: f64 = 50.0;

/// The initial ray is sampled geometrically with this many points per
/// segment.
const PATH_SUBSTEPS: usize = 32;
const PATH_SEGMENTS: usize = 32;
const FAR_TAIL: f64 = 1.0e3;
const SINGULAR_CLEARANCE: f64 = 1e-6;
const CONTINUATION_STEP: f64 = 0.05;
const NEWTON_ITERATIONS: usize = 12;
/// Real part past which a pulled-back tail counts as far out.
const TAIL_RE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitStep {
    pub point: ComplexPoint,
    pub tract: Option<TractLabel>,
    pub re_part: f64,
}

impl OrbitStep {
    fn at(lt: &LogTransform, point: ComplexPoint) -> Self {
        OrbitStep {
            point,
            tract: lt.membership(point),
            re_part: point.re,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Real parts passed the escape threshold and grew monotonically.
    /// `overflow` marks orbits cut short because the next value is not
    /// representable.
    Escaping { horizon: usize, overflow: bool },
    /// The orbit left every tract at step `horizon`.
    Bounded { horizon: usize },
    Inconclusive,
}

impl Verdict {
    pub fn is_escaping(&self) -> bool {
        matches!(self, Verdict::Escaping { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Escaping { horizon, overflow: false } => write!(f, "escaping({horizon})"),
            Verdict::Escaping { horizon, overflow: true } => {
                write!(f, "escaping({horizon}, overflow)")
            }
            Verdict::Bounded { horizon } => write!(f, "bounded({horizon})"),
            Verdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

/// A forward orbit `seed, F(seed), F²(seed), …`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub seed: ComplexPoint,
    pub steps: Vec<OrbitStep>,
    pub verdict: Verdict,
    pub escape_re: f64,
}

impl OrbitRecord {
    pub fn points(&self) -> Vec<ComplexPoint> {
        self.steps.iter().map(|s| s.point).collect()
    }

    /// First index whose real part exceeds the escape threshold.
    pub fn threshold_index(&self) -> Option<usize> {
        self.steps.iter().position(|s| s.re_part > self.escape_re)
    }

    /// Smallest increment of `Re` after the threshold index.
    pub fn growth_margin(&self) -> Option<f64> {
        let start = self.threshold_index()?;
        self.steps[start..]
            .windows(2)
            .map(|w| w[1].re_part - w[0].re_part)
            .reduce(f64::min)
    }
}

fn classify(steps: &[OrbitStep], horizon: usize, overflow: bool, escape_re: f64) -> Verdict {
    let iterations = steps.len() - 1;
    if let Some(n) = steps.iter().position(|s| s.tract.is_none()) {
        if horizon >= 2 {
            return Verdict::Bounded { horizon: n };
        }
        return Verdict::Inconclusive;
    }
    if horizon < 2 {
        return Verdict::Inconclusive;
    }
    let start = match steps.iter().position(|s| s.re_part > escape_re) {
        Some(i) => i,
        None if overflow => steps.len() - 1,
        None => return Verdict::Inconclusive,
    };
    let monotone = steps[start..].windows(2).all(|w| w[1].re_part > w[0].re_part);
    if monotone && (overflow || start < steps.len() - 1) {
        Verdict::Escaping {
            horizon: iterations,
            overflow,
        }
    } else {
        Verdict::Inconclusive
    }
}

fn extend_forward(
    lt: &LogTransform,
    steps: &mut Vec<OrbitStep>,
    iterations: usize,
) -> bool {
    for _ in 0..iterations {
        let last = *steps.last().expect("orbit has a seed");
        let Some(label) = last.tract else {
            return false;
        };
        match lt.eval_unchecked(last.point, label.base) {
            FValue::Value(next) => steps.push(OrbitStep::at(lt, next)),
            FValue::Overflow { .. } => return true,
        }
    }
    false
}

/// Iterates `F` from `seed` for at most `horizon` steps.
pub fn track_orbit(
    lt: &LogTransform,
    seed: ComplexPoint,
    horizon: usize,
    escape_re: f64,
) -> Result<OrbitRecord> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut steps = vec![OrbitStep::at(lt, seed)];
    let overflow = extend_forward(lt, &mut steps, horizon);
    Ok(OrbitRecord {
        seed,
        verdict: classify(&steps, horizon, overflow, escape_re),
        steps,
        escape_re,
    })
}

/// A finite external address `T₀ T₁ … T_{n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<TractLabel>", into = "Vec<TractLabel>")]
pub struct ExternalAddress {
    labels: Vec<TractLabel>,
}

impl ExternalAddress {
    pub fn new(labels: Vec<TractLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Precondition("an address needs at least one label".into()));
        }
        Ok(ExternalAddress { labels })
    }

    pub fn constant(label: TractLabel, horizon: usize) -> Result<Self> {
        ExternalAddress::new(vec![label; horizon])
    }

    pub fn labels(&self) -> &[TractLabel] {
        &self.labels
    }

    pub fn horizon(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, j: usize) -> Option<TractLabel> {
        self.labels.get(j).copied()
    }

    /// The shift `σ`, dropping the first label.
    pub fn shift(&self) -> Result<Self> {
        ExternalAddress::new(self.labels[1..].to_vec())
    }

    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        ExternalAddress::new(self.labels[..horizon.min(self.labels.len())].to_vec())
    }
}

impl TryFrom<Vec<TractLabel>> for ExternalAddress {
    type Error = Error;
    fn try_from(labels: Vec<TractLabel>) -> Result<Self> {
        ExternalAddress::new(labels)
    }
}

impl From<ExternalAddress> for Vec<TractLabel> {
    fn from(a: ExternalAddress) -> Self {
        a.labels
    }
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses whitespace- or comma-separated `base:branch` tokens.
impl FromStr for ExternalAddress {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        ExternalAddress::new(labels)
    }
}

/// Labels of an escaping orbit, one per recorded step.
pub fn forward_address(record: &OrbitRecord) -> Result<ExternalAddress> {
    if !record.verdict.is_escaping() {
        return Err(Error::Precondition(format!(
            "orbit verdict is {}, not escaping",
            record.verdict
        )));
    }
    let labels = record
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.tract.ok_or_else(|| {
                Error::Precondition(format!(
                    "step {i} lies outside every tract; use backward_extend_address"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ExternalAddress::new(labels)
}

/// Orbit ending at `endpoint` whose first steps follow `address`: each point
/// is the inverse branch of the next. The orbit is then continued forward
/// from `endpoint` until it overflows or `extra` more steps are taken.
///
/// Forward iteration loses the address within a few steps in double
/// precision; pulling back keeps every `z_j` exact to rounding.
pub fn pullback_orbit(
    lt: &LogTransform,
    address: &ExternalAddress,
    endpoint: ComplexPoint,
    escape_re: f64,
) -> Result<OrbitRecord> {
    let labels = address.labels();
    let n = labels.len();
    match lt.membership(endpoint) {
        Some(l) if l == labels[n - 1] => {}
        found => {
            return Err(Error::OutsideTract {
                point: endpoint,
                nearest: found.or_else(|| lt.strip_label(endpoint)),
            })
        }
    }
    let mut points = vec![endpoint; n];
    for i in (0..n - 1).rev() {
        points[i] = lt.inverse(points[i + 1], labels[i])?;
    }
    let mut steps: Vec<_> = points.iter().map(|&p| OrbitStep::at(lt, p)).collect();
    if let Some(i) = steps.iter().zip(labels).position(|(s, l)| s.tract != Some(*l)) {
        return Err(Error::OutsideTract {
            point: steps[i].point,
            nearest: steps[i].tract,
        });
    }
    let overflow = extend_forward(lt, &mut steps, 64);
    let horizon = steps.len() - 1;
    Ok(OrbitRecord {
        seed: points[0],
        verdict: classify(&steps, horizon.max(2), overflow, escape_re),
        steps,
        escape_re,
    })
}

/// Continuous logarithm along a path, starting from the principal value.
fn lift_path(path: &[ComplexPoint]) -> Vec<ComplexPoint> {
    let mut out = Vec::with_capacity(path.len());
    let mut w = path[0].ln();
    out.push(w);
    for pair in path.windows(2) {
        w += (pair[1] / pair[0]).ln();
        out.push(w);
    }
    out
}


/// Lift of `f_K∘exp`, correct modulo `2πi`, holomorphic near `w` away from
/// the zeros of `cosh`.
fn lifted_f(lt: &LogTransform, w: ComplexPoint) -> Option<ComplexPoint> {
    let base = match lt.family() {
        Family::Cosh if (w.exp() * lt.scale_k).re < 0.0 => 1,
        _ => 0,
    };
    lt.eval_unchecked(w, base).value()
}

fn wrap(z: ComplexPoint) -> ComplexPoint {
    Complex64::new(z.re, z.im - TAU * (z.im / TAU).round())
}

/// Continues a local inverse of `F` along the lifted path `targets`,
/// starting from `start` with `F(start) ≡ targets[0]`. Segments are split
/// when the predictor step is too long.
fn continue_preimage(
    lt: &LogTransform,
    start: ComplexPoint,
    targets: &[ComplexPoint],
) -> Result<(Vec<ComplexPoint>, Vec<ComplexPoint>)> {
    let mut out_pre = vec![start];
    let mut out_img = vec![targets[0]];
    let mut w = start;
    let mut prev = targets[0];
    let mut queue: Vec<ComplexPoint> = targets[1..].iter().rev().copied().collect();
    while let Some(target) = queue.pop() {
        let d = lt.derivative(w);
        let step = (target - prev) / d;
        if !is_finite(step) || step.norm() > CONTINUATION_STEP {
            if (target - prev).norm() < 1e-12 {
                return Err(Error::NearSingularValue {
                    singular_value: (prev.exp()),
                    distance: d.norm(),
                });
            }
            queue.push(target);
            queue.push(0.5 * (prev + target));
            continue;
        }
        let mut next = w + step;
        let mut converged = false;
        for _ in 0..NEWTON_ITERATIONS {
            let Some(value) = lifted_f(lt, next) else { break };
            let residual = wrap(value - target);
            next -= residual / lt.derivative(next);
            if residual.norm() <= 1e-12 * (1.0 + target.norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            let residual = lifted_f(lt, next).map_or(f64::INFINITY, |v| wrap(v - target).norm());
            return Err(Error::NotConverged { residual });
        }
        w = next;
        prev = target;
        out_pre.push(w);
        out_img.push(target);
    }
    Ok((out_pre, out_img))
}

/// External address of a plane orbit of `f_K` whose entries from index `k`
/// on lie in tracts.
///
/// For `j < k` the horizontal ray from `orbit[k]` is pulled back along the
/// orbit by analytic continuation and `T_j` is the tract containing the
/// unbounded end of the pulled-back ray. Each level only carries a finite
/// piece of the ray; once its end has an image in `H` the rest is replaced
/// by the inverse branch of a horizontal ray, which lies in the same tract.
/// From `k` on, the labels are those of the lifted orbit.
pub fn backward_extend_address(
    lt: &LogTransform,
    orbit: &[ComplexPoint],
    k: usize,
) -> Result<ExternalAddress> {
    if k >= orbit.len() {
        return Err(Error::Precondition(format!(
            "extension index {k} is beyond the orbit of length {}",
            orbit.len()
        )));
    }
    let singular: Vec<_> = lt
        .model
        .singular_values
        .iter()
        .map(|s| s / lt.scale_k)
        .collect();

    let count = PATH_SEGMENTS * PATH_SUBSTEPS;
    let plane_ray: Vec<ComplexPoint> = (0..=count)
        .map(|i| orbit[k] + ((FAR_TAIL + 1.0).ln() * i as f64 / count as f64).exp() - 1.0)
        .collect();
    let mut path = lift_path(&plane_ray);

    // ends[j] = (far point of level j, its image on the level j+1 path)
    let mut ends = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); k];
    for j in (0..k).rev() {
        for &w in &path {
            let p = w.exp();
            for &s in &singular {
                let distance = (p - s).norm();
                if distance < SINGULAR_CLEARANCE {
                    return Err(Error::NearSingularValue {
                        singular_value: s,
                        distance,
                    });
                }
            }
        }
        let (mut pre, mut img) = continue_preimage(lt, orbit[j].ln(), &path)?;
        let end = *img.last().expect("nonempty");
        if end.re <= 0.0 {
            return Err(Error::Precondition(format!(
                "pulled-back ray at step {} ends outside the half-plane",
                j + 1
            )));
        }
        let label = lt.membership(*pre.last().expect("nonempty")).ok_or_else(|| {
            Error::Precondition(format!("pulled-back ray at step {j} ends outside every tract"))
        })?;
        let mut sigma: f64 = -3.0;
        while pre.last().expect("nonempty").re < TAIL_RE {
            sigma += 0.25;
            img.push(end + sigma.exp());
            pre.push(lt.inverse_on_ray(end, sigma, label));
        }
        ends[j] = (*pre.last().expect("nonempty"), *img.last().expect("nonempty"));
        path = pre;
    }

    let mut labels = Vec::with_capacity(orbit.len());
    let mut turns = 0i64;
    for (j, &(far, image)) in ends.iter().enumerate() {
        let label = lt.membership(far).expect("tail points lie in a tract");
        labels.push(label.shifted(turns));
        let pushed = lifted_f(lt, far).ok_or_else(|| {
            Error::Precondition(format!("tail point at step {j} overflowed"))
        })?;
        turns = ((pushed - image).im / TAU).round() as i64;
    }
    let mut w = orbit[k].ln() + Complex64::new(0.0, TAU * turns as f64);
    for j in k..orbit.len() {
        let label = lt.membership(w).ok_or_else(|| {
            Error::Precondition(format!("orbit point {} is outside every tract", orbit[j]))
        })?;
        labels.push(label);
        if let Some(&next) = orbit.get(j + 1) {
            let pushed = lt
                .eval_unchecked(w, label.base)
                .value()
                .ok_or_else(|| Error::Precondition(format!("lifted orbit overflowed at step {j}")))?;
            // Snap to the lift of the recorded orbit to stop rounding growth.
            let exact = next.ln();
            w = exact + Complex64::new(0.0, TAU * ((pushed.im - exact.im) / TAU).round());
        }
    }
    ExternalAddress::new(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntireModel;

    fn quarter() -> LogTransform {
        LogTransform::new(EntireModel::exponential(0.25).unwrap(), 2.0).unwrap()
    }

    const ZERO: TractLabel = TractLabel::new(0, 0);

    #[test]
    fn real_seed_escapes() {
        let lt = quarter();
        let r = track_orbit(&lt, Complex64::new(50.0, 0.0), 40, DEFAULT_ESCAPE_RE).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Escaping {
                horizon: 1,
                overflow: true
            }
        );
        assert!(r.steps.windows(2).all(|w| w[1].re_part > w[0].re_part));
        assert_eq!(r.steps[0].point, r.seed);
    }

    #[test]
    fn attracted_seed_is_bounded() {
        let lt = quarter();
        // Log of the attracting fixed point 0.357 of f is far left of the tract.
        let seed = Complex64::new(0.3574f64.ln(), 0.0);
        let r = track_orbit(&lt, seed, 40, DEFAULT_ESCAPE_RE).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded { horizon: 0 });
        // A tract point left of the repelling fixed point drifts out.
        let r = track_orbit(&lt, Complex64::new(0.06, 0.0), 40, DEFAULT_ESCAPE_RE).unwrap();
        assert!(matches!(r.verdict, Verdict::Bounded { horizon } if horizon > 0));
    }

    #[test]
    fn horizon_one_is_inconclusive() {
        let lt = quarter();
        for seed in [Complex64::new(3.0, 0.2), Complex64::new(60.0, 0.0)] {
            let r = track_orbit(&lt, seed, 1, DEFAULT_ESCAPE_RE).unwrap();
            assert_eq!(r.verdict, Verdict::Inconclusive);
        }
        assert!(track_orbit(&lt, Complex64::new(3.0, 0.0), 0, DEFAULT_ESCAPE_RE).is_err());
    }

    #[test]
    fn steps_follow_f() {
        let lt = quarter();
        let r = track_orbit(&lt, Complex64::new(2.0, 0.3), 10, DEFAULT_ESCAPE_RE).unwrap();
        for w in r.steps.windows(2) {
            let l = w[0].tract.unwrap();
            let image = lt.eval(w[0].point, l).unwrap().value().unwrap();
            assert!((image - w[1].point).norm() <= 1e-10 * image.norm());
        }
    }

    #[test]
    fn real_address_is_constant() {
        let lt = quarter();
        let r = track_orbit(&lt, Complex64::new(3.0, 0.0), 10, DEFAULT_ESCAPE_RE).unwrap();
        let a = forward_address(&r).unwrap();
        assert!(a.labels().iter().all(|l| *l == ZERO));
        assert_eq!(a.horizon(), r.steps.len());
    }

    #[test]
    fn vertical_translate_changes_first_branch() {
        let lt = quarter();
        let seed = Complex64::new(2.5, 0.05);
        let a = forward_address(&track_orbit(&lt, seed, 10, DEFAULT_ESCAPE_RE).unwrap()).unwrap();
        let up = seed + Complex64::new(0.0, TAU);
        let b = forward_address(&track_orbit(&lt, up, 10, DEFAULT_ESCAPE_RE).unwrap()).unwrap();
        assert_eq!(b.get(0).unwrap(), a.get(0).unwrap().shifted(1));
        assert_eq!(&a.labels()[1..], &b.labels()[1..]);
    }

    #[test]
    fn shift_matches_image_address() {
        let lt = quarter();
        let seed = Complex64::new(2.2, -0.3);
        let r = track_orbit(&lt, seed, 10, DEFAULT_ESCAPE_RE).unwrap();
        let a = forward_address(&r).unwrap();
        let image = r.steps[1].point;
        let b = forward_address(&track_orbit(&lt, image, 10, DEFAULT_ESCAPE_RE).unwrap()).unwrap();
        let shifted = a.shift().unwrap();
        let n = shifted.horizon().min(b.horizon());
        assert_eq!(&shifted.labels()[..n], &b.labels()[..n]);
    }

    #[test]
    fn forward_address_needs_escaping_labels() {
        let lt = quarter();
        let r = track_orbit(&lt, Complex64::new(0.06, 0.0), 40, DEFAULT_ESCAPE_RE).unwrap();
        assert!(matches!(forward_address(&r), Err(Error::Precondition(_))));
    }

    #[test]
    fn address_text_round_trip() {
        let a: ExternalAddress = "0:0 0:1, 0:-3".parse().unwrap();
        assert_eq!(a.horizon(), 3);
        assert_eq!(a.to_string(), "0:0 0:1 0:-3");
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"["0:0","0:1","0:-3"]"#);
        assert_eq!(serde_json::from_str::<ExternalAddress>(&json).unwrap(), a);
        assert!("".parse::<ExternalAddress>().is_err());
        assert!("0-1".parse::<ExternalAddress>().is_err());
    }

    #[test]
    fn pullback_orbit_is_consistent() {
        let lt = quarter();
        let address: ExternalAddress = "0:0 0:1 0:-1 0:0 0:2 0:0".parse().unwrap();
        let r = pullback_orbit(&lt, &address, Complex64::new(55.0, 0.0), DEFAULT_ESCAPE_RE).unwrap();
        assert!(r.verdict.is_escaping());
        let got = forward_address(&r).unwrap();
        assert_eq!(&got.labels()[..address.horizon()], address.labels());
        for w in r.steps.windows(2) {
            let image = lt.eval(w[0].point, w[0].tract.unwrap()).unwrap().value().unwrap();
            assert!((image - w[1].point).norm() <= 1e-10 * image.norm());
        }
    }

    #[test]
    fn pullback_orbit_checks_endpoint() {
        let lt = quarter();
        let address = ExternalAddress::constant(TractLabel::new(0, 1), 4).unwrap();
        assert!(pullback_orbit(&lt, &address, Complex64::new(55.0, 0.0), DEFAULT_ESCAPE_RE).is_err());
    }

    #[test]
    fn growth_is_expansive() {
        // Far out Re F(w) ≈ K e^{Re w} cos(Im w), far above 2 Re w.
        let lt = quarter();
        let address = ExternalAddress::constant(ZERO, 31).unwrap();
        let r = pullback_orbit(&lt, &address, Complex64::new(55.0, 0.0), DEFAULT_ESCAPE_RE).unwrap();
        let c = 2.0;
        for w in r.steps.windows(2) {
            if w[0].re_part > 1.0 {
                assert!(w[1].re_part >= 2.0 * w[0].re_part - c);
            }
        }
        assert!(r.growth_margin().unwrap() > 0.0);
    }

    fn cosh_lt() -> LogTransform {
        LogTransform::new(EntireModel::cosh(0.5).unwrap(), 4.0).unwrap()
    }

    /// Plane orbit of `f_K` through 0.8 with three backward steps along the
    /// positive real axis.
    fn cosh_orbit(lt: &LogTransform) -> (Vec<ComplexPoint>, usize) {
        let mut back = vec![Complex64::new(0.8, 0.0)];
        for _ in 0..3 {
            let z = back[0];
            back.insert(0, lt.model.nearest_preimage_rescaled(z, lt.scale_k, Complex64::new(0.6, 0.0)));
        }
        let mut orbit = back;
        for _ in 0..3 {
            let z = *orbit.last().unwrap();
            orbit.push(lt.f_k(z).value().unwrap());
        }
        let k0 = orbit
            .iter()
            .position(|z| lt.membership(z.ln()).is_some())
            .unwrap();
        (orbit, k0)
    }

    #[test]
    fn backward_extension_matches_forward_labels() {
        let lt = cosh_lt();
        let (orbit, k0) = cosh_orbit(&lt);
        assert_eq!(k0, 3);
        let a = backward_extend_address(&lt, &orbit, k0).unwrap();
        assert_eq!(a.horizon(), orbit.len());
        let forward = track_orbit(&lt, orbit[k0].ln(), 3, DEFAULT_ESCAPE_RE).unwrap();
        for (j, step) in forward.steps.iter().enumerate() {
            assert_eq!(a.get(k0 + j), step.tract);
        }
    }

    #[test]
    fn backward_extension_is_stable_in_k() {
        let lt = cosh_lt();
        let (orbit, k0) = cosh_orbit(&lt);
        let base = backward_extend_address(&lt, &orbit, k0).unwrap();
        for k in [k0 + 1, k0 + 2, k0 + 3] {
            assert_eq!(backward_extend_address(&lt, &orbit, k).unwrap(), base);
        }
    }

    #[test]
    fn backward_label_holds_far_tail() {
        // Push far points of the pulled-back ray forward and compare tracts.
        let lt = cosh_lt();
        let (orbit, k0) = cosh_orbit(&lt);
        let a = backward_extend_address(&lt, &orbit, k0).unwrap();
        let j = k0 - 1;
        let far = orbit[k0] + 500.0;
        let mut z = far;
        let mut near = orbit[k0];
        // Continue one preimage along the ray.
        for i in 1..=400 {
            let p = orbit[k0] + (i as f64 / 400.0) * 500.0;
            near = lt.model.nearest_preimage_rescaled(p, lt.scale_k, if i == 1 { orbit[j] } else { near });
            z = p;
        }
        assert_eq!(z, far);
        let tail = near.ln();
        let label = lt.membership(tail).unwrap();
        assert_eq!(label.base, a.get(j).unwrap().base);
        let image = lt.eval(tail, label).unwrap().value().unwrap();
        assert!((image.exp() - far).norm() < 1e-8 * far.norm());
    }

    #[test]
    fn k_zero_agrees_with_forward_address() {
        let lt = quarter();
        let seed = Complex64::new(2.5, 0.05);
        let r = track_orbit(&lt, seed, 3, DEFAULT_ESCAPE_RE).unwrap();
        let plane: Vec<_> = r.steps.iter().map(|s| s.point.exp()).collect();
        let a = backward_extend_address(&lt, &plane, 0).unwrap();
        let lifted = forward_address(&track_orbit(&lt, seed, 3, DEFAULT_ESCAPE_RE).unwrap()).unwrap();
        assert_eq!(a.get(0).unwrap().base, lifted.get(0).unwrap().base);
        assert_eq!(&a.labels()[1..], &lifted.labels()[1..a.horizon()]);
    }

    #[test]
    fn extension_index_must_exist() {
        let lt = quarter();
        assert!(backward_extend_address(&lt, &[Complex64::new(3.0, 0.0)], 1).is_err());
    }
}
