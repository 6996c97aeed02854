use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ComplexPoint;

use super::{LogTransform, TractLabel};

/// Outcome of a successful `|F'| ≥ 2` certification.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCertificate {
    pub samples: usize,
    pub min_observed: f64,
    pub min_witness: Option<ComplexPoint>,
    pub analytic_bound: f64,
}

impl LogTransform {
    /// Random tract points, biased towards the tract boundary where `|F'|`
    /// is smallest. Deterministic in `seed`.
    pub fn sample_tract_points(&self, count: usize, seed: u64) -> Vec<(ComplexPoint, TractLabel)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let label = TractLabel::new(
                rng.random_range(0..self.base_count()),
                rng.random_range(-4..=4),
            );
            let y = rng.random_range(-(FRAC_PI_2 - 0.05)..(FRAC_PI_2 - 0.05));
            let depth = if rng.random_bool(0.7) {
                // exponential, mean 0.3
                -0.3 * (1.0 - rng.random::<f64>()).ln()
            } else {
                rng.random_range(0.0..6.0)
            };
            let x = self.boundary_re(label, y) + depth;
            let w = ComplexPoint::new(x, self.spine_im(label) + y);
            if self.membership(w) == Some(label) {
                out.push((w, label));
            }
        }
        out
    }
}

/// Samples `|F'|` over the tracts and checks the analytic bound `≥ 2`.
pub fn certify_expansion(lt: &LogTransform, samples: usize) -> Result<ExpansionCertificate> {
    let bound = lt.analytic_expansion_bound();
    let mut min_observed = f64::INFINITY;
    let mut min_witness = None;
    for (w, _) in lt.sample_tract_points(samples, 0x5eed) {
        let d = lt.derivative(w).norm();
        if d < min_observed {
            min_observed = d;
            min_witness = Some(w);
        }
    }
    if min_observed < 2.0 - 1e-12 || bound < 2.0 {
        return Err(Error::ExpansionViolated {
            witness: min_witness.unwrap_or_else(|| {
                let l = TractLabel::new(0, 0);
                ComplexPoint::new(lt.boundary_re(l, 0.0), lt.spine_im(l))
            }),
            derivative: min_observed.min(bound),
            bound,
        });
    }
    Ok(ExpansionCertificate {
        samples,
        min_observed,
        min_witness,
        analytic_bound: bound,
    })
}
