use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::ComplexPoint;

use super::{EntireModel, Eval, Family, OVERFLOW_EXPONENT};

/// One tract of a logarithmic transform: a family-specific base tract and
/// its `2πi·branch` translate. Written as `base:branch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TractLabel {
    pub base: u8,
    pub branch: i64,
}

impl TractLabel {
    pub const fn new(base: u8, branch: i64) -> Self {
        TractLabel { base, branch }
    }

    pub fn shifted(self, by: i64) -> Self {
        TractLabel {
            base: self.base,
            branch: self.branch + by,
        }
    }
}

impl fmt::Display for TractLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.base, self.branch)
    }
}

impl FromStr for TractLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("bad tract token {s:?}, expected base:branch"));
        let (base, branch) = s.trim().split_once(':').ok_or_else(bad)?;
        Ok(TractLabel {
            base: base.parse().map_err(|_| bad())?,
            branch: branch.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for TractLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TractLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Value of the logarithmic transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FValue {
    Value(ComplexPoint),
    Overflow { exponent_re: f64 },
}

impl FValue {
    pub fn value(self) -> Option<ComplexPoint> {
        match self {
            FValue::Value(z) => Some(z),
            FValue::Overflow { .. } => None,
        }
    }
}

/// Logarithmic transform `F` of the rescaled map `f_K(z) = f(Kz)/K`, so that
/// `exp ∘ F = f_K ∘ exp` on the tracts.
///
/// With `u = K e^w`:
/// * exponential: `F(w) = u + log(λ/K)`
/// * cosh: `F(w) = log(a/K) - ln 2 + s·u + log(1 + e^{-2su})`, `s = ±1` on the
///   right/left tract.
///
/// `F` is `2πi`-periodic, so a label only picks which translate a point
/// belongs to; the value itself never depends on the branch.
///
/// Tracts are `{w in the strip of the label : Re F(w) > restriction}`. With
/// the default restriction 0 each tract maps conformally onto the right
/// half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTransform {
    pub model: EntireModel,
    pub scale_k: f64,
    restriction: f64,
    offset: ComplexPoint,
}

impl LogTransform {
    pub fn new(model: EntireModel, scale_k: f64) -> Result<Self> {
        LogTransform::with_restriction(model, scale_k, 0.0)
    }

    /// Tracts cut down to `{Re F > restriction}`. A negative restriction
    /// enlarges the tracts past the preimage of the half-plane; it exists to
    /// exercise the certificate checks.
    pub fn with_restriction(model: EntireModel, scale_k: f64, restriction: f64) -> Result<Self> {
        if !(scale_k.is_finite() && scale_k > 0.0) {
            return Err(Error::InvalidModel(format!(
                "scale_K must be positive, got {scale_k}"
            )));
        }
        let ratio = (model.parameter / scale_k).ln();
        let offset = match model.family {
            Family::Exponential => ratio,
            Family::Cosh => ratio - LN_2,
        };
        let lt = LogTransform {
            model,
            scale_k,
            restriction,
            offset,
        };
        // The tract inequality must exclude the imaginary axis of the
        // u-plane, otherwise the strips are not separate tracts.
        let ok = match lt.model.family {
            Family::Exponential => lt.exp_threshold() > 0.0,
            Family::Cosh => lt.cosh_threshold() > 1.0,
        };
        if !ok {
            return Err(Error::InvalidModel(format!(
                "scale_K = {scale_k} too small for parameter {}: tracts are not separated",
                lt.model.parameter
            )));
        }
        Ok(lt)
    }

    pub fn restriction(&self) -> f64 {
        self.restriction
    }

    pub fn family(&self) -> Family {
        self.model.family
    }

    /// Additive constant of `F`.
    pub fn offset(&self) -> ComplexPoint {
        self.offset
    }

    /// Exponential family: tract is `Re e^w > t`.
    fn exp_threshold(&self) -> f64 {
        (self.restriction - self.offset.re) / self.scale_k
    }

    /// Cosh family: tract is `|cosh(K e^w)| > M`.
    fn cosh_threshold(&self) -> f64 {
        self.scale_k * self.restriction.exp() / self.model.parameter.norm()
    }

    pub fn base_count(&self) -> u8 {
        match self.model.family {
            Family::Exponential => 1,
            Family::Cosh => 2,
        }
    }

    /// Imaginary part of the horizontal line through the middle of a tract.
    pub fn spine_im(&self, label: TractLabel) -> f64 {
        let base = if label.base == 1 { PI } else { 0.0 };
        base + TAU * label.branch as f64
    }

    /// Which strip `w` lies in, ignoring the tract inequality.
    pub fn strip_label(&self, w: ComplexPoint) -> Option<TractLabel> {
        let cos = w.im.cos();
        if cos > 0.0 {
            Some(TractLabel::new(0, (w.im / TAU).round() as i64))
        } else if cos < 0.0 && self.model.family == Family::Cosh {
            Some(TractLabel::new(1, ((w.im - PI) / TAU).round() as i64))
        } else {
            None
        }
    }

    fn sign(base: u8) -> f64 {
        if base == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// `F(w)` using the formula of tract `base`, without a membership check.
    pub fn eval_unchecked(&self, w: ComplexPoint, base: u8) -> FValue {
        if w.re > OVERFLOW_EXPONENT {
            return FValue::Overflow { exponent_re: w.re };
        }
        let u = reduced(w).exp() * self.scale_k;
        let v = match self.model.family {
            Family::Exponential => u,
            Family::Cosh => {
                let su = u * Self::sign(base);
                su + ((-2.0 * su).exp() + 1.0).ln()
            }
        };
        FValue::Value(self.offset + v)
    }

    /// `F'(w)`; the same expression for both families up to the `tanh` factor.
    pub fn derivative(&self, w: ComplexPoint) -> ComplexPoint {
        let u = reduced(w).exp() * self.scale_k;
        match self.model.family {
            Family::Exponential => u,
            Family::Cosh => u * stable_tanh(u),
        }
    }

    /// Re F(w) > restriction, evaluated without overflow.
    fn satisfies_tract_inequality(&self, w: ComplexPoint, base: u8) -> bool {
        if w.re > OVERFLOW_EXPONENT {
            // Re F ~ K e^{Re w} cos(Im w): astronomically large inside the strip.
            return true;
        }
        match self.eval_unchecked(w, base) {
            FValue::Value(z) => z.re > self.restriction,
            FValue::Overflow { .. } => true,
        }
    }

    pub fn membership(&self, w: ComplexPoint) -> Option<TractLabel> {
        let label = self.strip_label(w)?;
        self.satisfies_tract_inequality(w, label.base)
            .then_some(label)
    }

    pub fn eval(&self, w: ComplexPoint, label: TractLabel) -> Result<FValue> {
        match self.membership(w) {
            Some(l) if l == label => Ok(self.eval_unchecked(w, label.base)),
            _ => Err(Error::OutsideTract {
                point: w,
                nearest: self.strip_label(w),
            }),
        }
    }

    /// Preimage of `zeta` in the tract `label`.
    pub fn inverse(&self, zeta: ComplexPoint, label: TractLabel) -> Result<ComplexPoint> {
        if !(zeta.re > 0.0) || !zeta.im.is_finite() {
            return Err(Error::OutsideHalfPlane {
                point: zeta,
                threshold: 0.0,
            });
        }
        self.check_base(label)?;
        Ok(self.inverse_unchecked(zeta, label))
    }

    fn check_base(&self, label: TractLabel) -> Result<()> {
        if label.base >= self.base_count() {
            return Err(Error::Precondition(format!(
                "tract base {} does not exist for the {} family",
                label.base, self.model.family
            )));
        }
        Ok(())
    }

    pub(crate) fn inverse_unchecked(&self, zeta: ComplexPoint, label: TractLabel) -> ComplexPoint {
        let eta = zeta - self.offset;
        let v = match self.model.family {
            Family::Exponential => eta,
            Family::Cosh => {
                // Invert v + log(1 + e^{-2v}) = eta.
                let q = (-2.0 * eta).exp() * 4.0;
                eta + ((Complex64::new(1.0, 0.0) - q).sqrt() + 1.0).ln() - LN_2
            }
        };
        (v / self.scale_k).ln() + Complex64::new(0.0, self.spine_im(label))
    }

    /// Preimage of `origin + e^sigma` (a point far along the horizontal ray
    /// from `origin`), valid for any `sigma` including ones whose exponential
    /// is not representable.
    pub fn inverse_on_ray(&self, origin: ComplexPoint, sigma: f64, label: TractLabel) -> ComplexPoint {
        if sigma < 600.0 {
            return self.inverse_unchecked(origin + sigma.exp(), label);
        }
        // Far out both families reduce to e^w ≈ (zeta - offset) / K.
        let rel = (origin - self.offset) * (-sigma).exp();
        Complex64::new(sigma - self.scale_k.ln(), 0.0)
            + (rel + 1.0).ln()
            + Complex64::new(0.0, self.spine_im(label))
    }

    /// Real part of the tract boundary on the horizontal line through
    /// `spine_im(label) + y_offset`, for `|y_offset| < π/2`.
    pub fn boundary_re(&self, label: TractLabel, y_offset: f64) -> f64 {
        let y = self.spine_im(label) + y_offset;
        if self.model.family == Family::Exponential {
            return (self.exp_threshold() / y_offset.cos()).ln();
        }
        let inside = |x: f64| self.satisfies_tract_inequality(Complex64::new(x, y), label.base);
        let mut hi = -5.0;
        while !inside(hi) {
            hi += 1.0;
        }
        let mut lo = hi - 1.0;
        while inside(lo) && lo > -60.0 {
            lo -= 1.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Infimum of `Re w` over the tracts, sampled along the boundary.
    pub fn attraction_threshold(&self) -> f64 {
        if self.model.family == Family::Exponential {
            return self.exp_threshold().ln();
        }
        (0..self.base_count())
            .flat_map(|base| {
                (-40..=40).map(move |i| (TractLabel::new(base, 0), i as f64 * (PI / 2.0 - 0.05) / 40.0))
            })
            .map(|(label, y)| self.boundary_re(label, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Analytic lower bound for `|F'|` on the tracts.
    pub fn analytic_expansion_bound(&self) -> f64 {
        match self.model.family {
            // |F'| = K|e^w| ≥ K Re e^w > K t
            Family::Exponential => self.scale_k * self.exp_threshold(),
            // |F'| = |u||tanh u| with Re u > acosh M and |tanh u|² ≥ 1 - 1/M²
            Family::Cosh => {
                let m = self.cosh_threshold();
                m.acosh() * (1.0 - 1.0 / (m * m)).sqrt()
            }
        }
    }

    /// The rescaled map `f_K`.
    pub fn f_k(&self, z: ComplexPoint) -> Eval {
        self.model.eval_rescaled(z, self.scale_k)
    }
}

/// `w` translated by a multiple of `2πi` into `|Im| ≤ π`, so that `F` is
/// exactly periodic in floating point.
fn reduced(w: ComplexPoint) -> ComplexPoint {
    Complex64::new(w.re, w.im - TAU * (w.im / TAU).round())
}

fn stable_tanh(u: ComplexPoint) -> ComplexPoint {
    let s = if u.re >= 0.0 { 1.0 } else { -1.0 };
    let e = (-2.0 * s * u).exp();
    (Complex64::new(1.0, 0.0) - e) / (e + 1.0) * s
}

/// `F(w)` with the label's branch convention; errors when `w` is not in that tract.
pub fn eval_log_transform(lt: &LogTransform, w: ComplexPoint, label: TractLabel) -> Result<FValue> {
    lt.eval(w, label)
}

pub fn inverse_branch(lt: &LogTransform, zeta: ComplexPoint, label: TractLabel) -> Result<ComplexPoint> {
    lt.inverse(zeta, label)
}

pub fn tract_membership(lt: &LogTransform, w: ComplexPoint) -> Option<TractLabel> {
    lt.membership(w)
}
