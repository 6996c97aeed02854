//! Explicit entire families and their logarithmic transforms.
//!
//! Two families are modeled, `λ·e^z` and `a·cosh z`. Both have closed-form
//! inverse branches, which is what makes the pullback constructions in
//! [`crate::hairs`] computable without root finding.

mod certify;
mod transform;

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_finite, ComplexPoint};

pub use certify::{certify_expansion, ExpansionCertificate};
pub use transform::{
    eval_log_transform, inverse_branch, tract_membership, FValue, LogTransform, TractLabel,
};

/// Real part of an exponent past which evaluation is replaced by an
/// escaped-by-overflow flag (`exp` overflows near 709).
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(alias = "ExponentialFamily")]
    Exponential,
    #[serde(alias = "CoshFamily")]
    Cosh,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Exponential => f.write_str("exponential"),
            Family::Cosh => f.write_str("cosh"),
        }
    }
}

/// Result of evaluating a family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eval {
    Value(ComplexPoint),
    /// The exponent's real part exceeded [`OVERFLOW_EXPONENT`].
    Escaped { exponent_re: f64 },
}

impl Eval {
    pub fn value(self) -> Option<ComplexPoint> {
        match self {
            Eval::Value(z) => Some(z),
            Eval::Escaped { .. } => None,
        }
    }
}

/// `λ·e^z` or `a·cosh z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntireModel {
    pub family: Family,
    pub parameter: ComplexPoint,
    pub singular_values: Vec<ComplexPoint>,
}

impl EntireModel {
    pub fn new(family: Family, parameter: ComplexPoint) -> Result<Self> {
        if !is_finite(parameter) || parameter.norm() == 0.0 {
            return Err(Error::InvalidModel(format!(
                "parameter must be finite and nonzero, got {parameter}"
            )));
        }
        // exp: the omitted value 0 is the only singular value.
        // cosh: critical values ±a, no asymptotic values.
        let singular_values = match family {
            Family::Exponential => vec![Complex64::new(0.0, 0.0)],
            Family::Cosh => vec![parameter, -parameter],
        };
        Ok(EntireModel {
            family,
            parameter,
            singular_values,
        })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        EntireModel::new(Family::Exponential, Complex64::new(lambda, 0.0))
    }

    pub fn cosh(a: f64) -> Result<Self> {
        EntireModel::new(Family::Cosh, Complex64::new(a, 0.0))
    }

    /// Real part of the exponent that drives growth at `z`.
    pub fn escape_exponent(&self, z: ComplexPoint) -> f64 {
        match self.family {
            Family::Exponential => z.re,
            Family::Cosh => z.re.abs(),
        }
    }

    pub fn eval(&self, z: ComplexPoint) -> Eval {
        self.eval_rescaled(z, 1.0)
    }

    /// `f_K(z) = f(K z) / K`.
    pub fn eval_rescaled(&self, z: ComplexPoint, k: f64) -> Eval {
        let u = z * k;
        let exponent_re = self.escape_exponent(u);
        if exponent_re > OVERFLOW_EXPONENT {
            return Eval::Escaped { exponent_re };
        }
        let value = match self.family {
            Family::Exponential => self.parameter * u.exp(),
            Family::Cosh => self.parameter * u.cosh(),
        };
        Eval::Value(value / k)
    }

    /// `ln |f_K(z)|`, finite for all finite `z`.
    pub fn log_modulus_rescaled(&self, z: ComplexPoint, k: f64) -> f64 {
        let u = z * k;
        let base = (self.parameter.norm() / k).ln();
        match self.family {
            Family::Exponential => base + u.re,
            Family::Cosh => {
                let v = if u.re >= 0.0 { u } else { -u };
                // |cosh v| = e^{Re v} |1 + e^{-2v}| / 2
                base + v.re + (1.0 + (-2.0 * v).exp()).norm().ln() - std::f64::consts::LN_2
            }
        }
    }

    /// All preimages of `z` under `f_K` near `near`, returning the closest one.
    pub fn nearest_preimage_rescaled(
        &self,
        z: ComplexPoint,
        k: f64,
        near: ComplexPoint,
    ) -> ComplexPoint {
        let two_pi = std::f64::consts::TAU;
        // Solve in u = K·(preimage), then pick the 2πi-translate closest to K·near.
        let target = near * k;
        let q = z * k / self.parameter;
        let candidates: Vec<ComplexPoint> = match self.family {
            Family::Exponential => vec![q.ln()],
            Family::Cosh => {
                let r = (q + (q * q - 1.0).sqrt()).ln();
                vec![r, -r]
            }
        };
        let mut best = candidates[0];
        let mut best_d = f64::INFINITY;
        for c in candidates {
            let n = ((target.im - c.im) / two_pi).round();
            let cand = c + Complex64::new(0.0, two_pi * n);
            let d = (cand - target).norm();
            if d < best_d {
                best_d = d;
                best = cand;
            }
        }
        best / k
    }
}

/// `f(z)` for the family member.
pub fn eval_f(model: &EntireModel, z: ComplexPoint) -> Eval {
    model.eval(z)
}

/// On-disk model description: `{family, parameter: [re, im], scale_K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub family: Family,
    pub parameter: [f64; 2],
    #[serde(rename = "scale_K", default, skip_serializing_if = "Option::is_none")]
    pub scale_k: Option<f64>,
}

impl ModelFile {
    pub fn model(&self) -> Result<EntireModel> {
        EntireModel::new(
            self.family,
            Complex64::new(self.parameter[0], self.parameter[1]),
        )
    }

    pub fn from_model(model: &EntireModel, scale_k: Option<f64>) -> Self {
        ModelFile {
            family: model.family,
            parameter: [model.parameter.re, model.parameter.im],
            scale_k,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ModelFile::parse(&std::fs::read_to_string(path)?)
    }
}
