use thiserror::Error;

use crate::geometry::ComplexPoint;
use crate::model::TractLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the half-plane Re z > {threshold}")]
    OutsideHalfPlane { point: ComplexPoint, threshold: f64 },

    #[error("point {point} is not in the requested tract (nearest tract: {nearest:?})")]
    OutsideTract {
        point: ComplexPoint,
        nearest: Option<TractLabel>,
    },

    #[error("preimage solve did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("orbit of singular value {singular_value} exceeded modulus 1e100 at step {step}")]
    UnboundedOrbit {
        singular_value: ComplexPoint,
        step: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("expansion certificate failed: |F'| = {derivative} < 2 at {witness} (analytic bound {bound})")]
    ExpansionViolated {
        witness: ComplexPoint,
        derivative: f64,
        bound: f64,
    },

    #[error("inverse-branch continuation passed within {distance:e} of singular value {singular_value}")]
    NearSingularValue {
        singular_value: ComplexPoint,
        distance: f64,
    },

    #[error("pulled-back curve lies entirely inside the cut disk at {center} (address/orbit mismatch)")]
    DegenerateCut { center: ComplexPoint },

    #[error("grid step {step} too coarse for tract neck width {neck}")]
    Resolution { step: f64, neck: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
