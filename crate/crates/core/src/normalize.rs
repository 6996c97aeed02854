//! Rescaling `z ↦ Kz` until the postsingular set lies in the disk of radius
//! ½ and the logarithmic transform is expanding.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ComplexPoint;
use crate::model::{
    certify_expansion, EntireModel, Eval, ExpansionCertificate, LogTransform, ModelFile,
};

const SETTLE_RUN: usize = 20;
const DIVERGENCE_MODULUS: f64 = 1e100;
const DISK_MARGIN: f64 = 0.5;
const MAX_SCALE: f64 = (1u64 << 60) as f64;
pub const CERTIFICATE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct PostsingularReport {
    /// One forward orbit per singular value, starting with the value itself.
    pub orbits: Vec<Vec<ComplexPoint>>,
    pub bound_radius: f64,
    pub converged: Vec<bool>,
}

impl PostsingularReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// The orbits of `f_K`, which are those of `f` divided by `K`.
    pub fn rescaled_radius(&self, scale_k: f64) -> f64 {
        self.bound_radius / scale_k
    }
}

fn singular_orbit(
    model: &EntireModel,
    start: ComplexPoint,
    horizon: usize,
    settle_tol: f64,
) -> Result<(Vec<ComplexPoint>, bool)> {
    let mut orbit = Vec::with_capacity(horizon + 1);
    orbit.push(start);
    let mut z = start;
    let mut run = 0;
    let mut converged = false;
    for step in 1..=horizon {
        let next = match model.eval(z) {
            Eval::Value(v) if v.norm() <= DIVERGENCE_MODULUS => v,
            _ => {
                return Err(Error::UnboundedOrbit {
                    singular_value: start,
                    step,
                })
            }
        };
        run = if (next - z).norm() < settle_tol { run + 1 } else { 0 };
        if run >= SETTLE_RUN {
            converged = true;
        }
        orbit.push(next);
        z = next;
    }
    Ok((orbit, converged))
}

/// Forward orbits of the singular values up to `horizon` steps.
pub fn postsingular_orbit(
    model: &EntireModel,
    horizon: usize,
    settle_tol: f64,
) -> Result<PostsingularReport> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let results: Vec<_> = model
        .singular_values
        .par_iter()
        .map(|&v| singular_orbit(model, v, horizon, settle_tol))
        .collect::<Result<_>>()?;
    let bound_radius = results
        .iter()
        .flat_map(|(o, _)| o.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let (orbits, converged) = results.into_iter().unzip();
    Ok(PostsingularReport {
        orbits,
        bound_radius,
        converged,
    })
}

/// Serializable description of a transform.
#[derive(Debug, Clone, Serialize)]
pub struct TransformSummary {
    pub family: crate::model::Family,
    pub parameter: ComplexPoint,
    #[serde(rename = "scale_K")]
    pub scale_k: f64,
    pub restriction: f64,
    pub offset: ComplexPoint,
    pub attraction_threshold: f64,
    pub analytic_expansion_bound: f64,
}

impl LogTransform {
    pub fn summary(&self) -> TransformSummary {
        TransformSummary {
            family: self.model.family,
            parameter: self.model.parameter,
            scale_k: self.scale_k,
            restriction: self.restriction(),
            offset: self.offset(),
            attraction_threshold: self.attraction_threshold(),
            analytic_expansion_bound: self.analytic_expansion_bound(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Normalization {
    pub transform: LogTransform,
    pub rescaled_radius: f64,
    pub expansion: ExpansionCertificate,
}

/// Both certificates at a fixed scale.
pub fn certify_scale(
    model: &EntireModel,
    report: &PostsingularReport,
    scale_k: f64,
) -> Result<Normalization> {
    let rescaled_radius = report.rescaled_radius(scale_k);
    if rescaled_radius > DISK_MARGIN {
        return Err(Error::Configuration(format!(
            "rescaled postsingular radius {rescaled_radius} exceeds {DISK_MARGIN} at K = {scale_k}"
        )));
    }
    let transform = LogTransform::new(model.clone(), scale_k)?;
    let expansion = certify_expansion(&transform, CERTIFICATE_SAMPLES)?;
    Ok(Normalization {
        transform,
        rescaled_radius,
        expansion,
    })
}

/// Doubling search for the scale: starts at `max(1, 2·bound_radius)`.
pub fn choose_rescaling(model: &EntireModel, report: &PostsingularReport) -> Result<Normalization> {
    if !report.all_converged() {
        return Err(Error::Precondition(
            "postsingular orbits have not all converged".into(),
        ));
    }
    let mut k = (2.0 * report.bound_radius).max(1.0);
    while k <= MAX_SCALE {
        if let Ok(n) = certify_scale(model, report, k) {
            return Ok(n);
        }
        k *= 2.0;
    }
    Err(Error::Configuration(
        "scale search exceeded 2^60 without certifying".into(),
    ))
}

/// Orbit settings used when a model file carries no scale.
pub const DEFAULT_HORIZON: usize = 200;
pub const DEFAULT_SETTLE_TOL: f64 = 1e-9;

/// Transform for a model file: the stored `scale_K` if present, otherwise
/// the certified scale from [`choose_rescaling`].
pub fn transform_for(file: &ModelFile) -> Result<LogTransform> {
    let model = file.model()?;
    match file.scale_k {
        Some(k) => LogTransform::new(model, k),
        None => {
            let report = postsingular_orbit(&model, DEFAULT_HORIZON, DEFAULT_SETTLE_TOL)?;
            Ok(choose_rescaling(&model, &report)?.transform)
        }
    }
}

/// Outcome of checking that tract points land in `W = {|z| > 1}`.
#[derive(Debug, Clone, Serialize)]
pub struct PreimageCheck {
    pub holds: bool,
    pub samples: usize,
    pub witness: Option<ComplexPoint>,
}

/// Checks `|f_K(e^w)| > 1` on sampled tract points `w`.
pub fn verify_w_preimage(lt: &LogTransform, samples: usize) -> PreimageCheck {
    let witness = lt
        .sample_tract_points(samples, 0x77)
        .into_iter()
        .map(|(w, _)| w)
        .find(|w| lt.model.log_modulus_rescaled(w.exp(), lt.scale_k) <= 0.0);
    PreimageCheck {
        holds: witness.is_none(),
        samples,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quarter() -> EntireModel {
        EntireModel::exponential(0.25).unwrap()
    }

    /// Real fixed point of x = e^x / 4 by bisection on [0, 1].
    fn attracting_fixed_point() -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid.exp() / 4.0 - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn quarter_orbit_converges() {
        let r = postsingular_orbit(&quarter(), 200, 1e-9).unwrap();
        assert!(r.all_converged());
        assert!(r.bound_radius < 0.5);
        let last = *r.orbits[0].last().unwrap();
        assert!((last.re - attracting_fixed_point()).abs() < 1e-9);
        assert!((r.orbits[0][1].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lambda_one_is_unbounded() {
        let err = postsingular_orbit(&EntireModel::exponential(1.0).unwrap(), 200, 1e-9);
        assert!(matches!(err, Err(Error::UnboundedOrbit { .. })));
    }

    #[test]
    fn cosh_small_parameter_converges() {
        let r = postsingular_orbit(&EntireModel::cosh(0.5).unwrap(), 200, 1e-9).unwrap();
        assert_eq!(r.converged, vec![true, true]);
    }

    #[test]
    fn short_horizon_does_not_settle() {
        let r = postsingular_orbit(&quarter(), 10, 1e-9).unwrap();
        assert!(!r.all_converged());
        assert!(choose_rescaling(&quarter(), &r).is_err());
        assert!(postsingular_orbit(&quarter(), 0, 1e-9).is_err());
    }

    #[test]
    fn quarter_needs_scale_two() {
        let model = quarter();
        let r = postsingular_orbit(&model, 200, 1e-9).unwrap();
        // K = 1 already puts P inside the half disk but only expands by ln 4.
        assert!(r.rescaled_radius(1.0) < 0.5);
        assert!(certify_scale(&model, &r, 1.0).is_err());
        let n = choose_rescaling(&model, &r).unwrap();
        assert_eq!(n.transform.scale_k, 2.0);
        for doubling in 1..=3 {
            let k = n.transform.scale_k * f64::powi(2.0, doubling);
            assert!(certify_scale(&model, &r, k).is_ok());
        }
        for orbit in &r.orbits {
            for z in orbit {
                assert!(z.norm() / n.transform.scale_k <= 0.5);
            }
        }
    }

    #[test]
    fn cosh_scale_search() {
        let model = EntireModel::cosh(0.5).unwrap();
        let r = postsingular_orbit(&model, 200, 1e-9).unwrap();
        let n = choose_rescaling(&model, &r).unwrap();
        assert!(n.transform.analytic_expansion_bound() >= 2.0);
        assert!(certify_scale(&model, &r, 2.0 * n.transform.scale_k).is_ok());
    }

    #[test]
    fn rescaled_iterates_conjugate() {
        let model = quarter();
        let k = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let z0 = ComplexPoint::new(rng.random_range(-2.0..0.3), rng.random_range(-2.0..2.0));
            let (mut a, mut b) = (z0, z0 * k);
            for _ in 0..10 {
                a = model.eval_rescaled(a, k).value().unwrap();
                b = model.eval(b).value().unwrap();
                assert!((a - b / k).norm() <= 1e-10 * a.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn w_preimage_check() {
        let lt = LogTransform::new(quarter(), 2.0).unwrap();
        assert!(verify_w_preimage(&lt, 10_000).holds);
        assert!(verify_w_preimage(&lt, 0).holds);
        let loose = LogTransform::with_restriction(quarter(), 2.0, -0.5).unwrap();
        let check = verify_w_preimage(&loose, 2000);
        assert!(!check.holds);
        let w = check.witness.unwrap();
        assert!(loose.f_k(w.exp()).value().unwrap().norm() <= 1.0);
    }
}
