use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, Polyline};

const C: fn(f64, f64) -> ComplexPoint = ComplexPoint::new;

/// Truncation abscissa of generated serpentines.
pub const SERPENTINE_MOUTH: f64 = 16.0;
const MAX_HEIGHT: f64 = TAU - 0.2;
const NECK_SAMPLE_SPACING: f64 = 0.1;

/// A polygonal tract. The outline runs from the top of the mouth at
/// `Re = truncation_re` around the tract to the bottom of the mouth; the
/// mouth segment closing it stands for the unbounded end.
#[derive(Debug, Clone, Serialize)]
pub struct SyntheticTract {
    pub boundary: Polyline,
    pub period_disjoint: bool,
    #[serde(skip)]
    centerline: Option<(Vec<ComplexPoint>, f64)>,
}

fn cross(a: ComplexPoint, b: ComplexPoint) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Closed segments `[p, q]` and `[r, s]` meet.
fn segments_meet(p: ComplexPoint, q: ComplexPoint, r: ComplexPoint, s: ComplexPoint) -> bool {
    let d1 = cross(q - p, r - p);
    let d2 = cross(q - p, s - p);
    let d3 = cross(s - r, p - r);
    let d4 = cross(s - r, q - r);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: ComplexPoint, b: ComplexPoint, c: ComplexPoint, d: f64| {
        d == 0.0
            && c.re >= a.re.min(b.re)
            && c.re <= a.re.max(b.re)
            && c.im >= a.im.min(b.im)
            && c.im <= a.im.max(b.im)
    };
    on(p, q, r, d1) || on(p, q, s, d2) || on(r, s, p, d3) || on(r, s, q, d4)
}

impl SyntheticTract {
    pub fn from_outline(points: Vec<ComplexPoint>) -> Result<Self> {
        let truncation = points.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        let (first, last) = (points[0], points[points.len() - 1]);
        if first.re != truncation || last.re != truncation {
            return Err(Error::Precondition(
                "tract outline must start and end on the mouth at maximal Re".into(),
            ));
        }
        let boundary = Polyline::new(points, truncation)?;
        let mut tract = SyntheticTract {
            boundary,
            period_disjoint: false,
            centerline: None,
        };
        tract.period_disjoint = tract.disjoint_from_translate(ComplexPoint::new(0.0, TAU));
        Ok(tract)
    }

    /// The rectangle `[x_min, x_max] × [-h, h]`.
    pub fn strip(x_min: f64, x_max: f64, half_height: f64) -> Result<Self> {
        SyntheticTract::from_outline(vec![
            C(x_max, half_height),
            C(x_min, half_height),
            C(x_min, -half_height),
            C(x_max, -half_height),
        ])
    }

    /// A thick orthogonal path of width `width` around `centerline`, which
    /// must start on the mouth and consist of axis-parallel segments.
    pub fn thick_path(centerline: Vec<ComplexPoint>, width: f64) -> Result<Self> {
        let h = width / 2.0;
        let n = centerline.len();
        let normal = |a: ComplexPoint, b: ComplexPoint| {
            let d = (b - a) / (b - a).norm();
            ComplexPoint::new(-d.im, d.re)
        };
        let offset = |side: f64| -> Vec<ComplexPoint> {
            (0..n)
                .map(|i| {
                    let shift = if i == 0 {
                        normal(centerline[0], centerline[1])
                    } else if i == n - 1 {
                        normal(centerline[n - 2], centerline[n - 1])
                    } else {
                        // Miter of two perpendicular unit normals.
                        normal(centerline[i - 1], centerline[i])
                            + normal(centerline[i], centerline[i + 1])
                    };
                    centerline[i] + shift * (side * h)
                })
                .collect()
        };
        let mut outline = offset(1.0);
        outline.extend(offset(-1.0).into_iter().rev());
        // Orient so the outline starts at the upper end of the mouth.
        if outline[0].im < outline[outline.len() - 1].im {
            outline.reverse();
        }
        let mut tract = SyntheticTract::from_outline(outline)?;
        tract.centerline = Some((centerline, width));
        Ok(tract)
    }

    /// Random serpentine: 2 to 5 horizontal lanes joined by U-turns,
    /// alternating between the left (`Re < 3`) and right (`7 < Re < 11`)
    /// sides, with total height below `2π`.
    pub fn serpentine<R: Rng>(rng: &mut R) -> Self {
        let lanes = rng.random_range(2..=5usize);
        let mut width = rng.random_range(0.5..0.9);
        let mut gap = rng.random_range(0.35..0.7);
        let height = lanes as f64 * width + (lanes - 1) as f64 * gap;
        if height >= MAX_HEIGHT {
            let s = 0.98 * MAX_HEIGHT / height;
            width *= s;
            gap *= s;
        }
        let top = (lanes as f64 * width + (lanes - 1) as f64 * gap) / 2.0 - width / 2.0;
        let y = |i: usize| top - i as f64 * (width + gap);
        let mut centerline = vec![C(SERPENTINE_MOUTH, y(0))];
        for lane in 0..lanes {
            let x = if lane % 2 == 0 {
                rng.random_range(0.5..3.0)
            } else {
                rng.random_range(7.0..11.0)
            };
            centerline.push(C(x, y(lane)));
            if lane + 1 < lanes {
                centerline.push(C(x, y(lane + 1)));
            }
        }
        SyntheticTract::thick_path(centerline, width).expect("serpentine outline is valid")
    }

    pub fn truncation_re(&self) -> f64 {
        self.boundary.truncation_re
    }

    /// Closed outline segments, including the mouth.
    pub fn edges(&self) -> impl Iterator<Item = (ComplexPoint, ComplexPoint)> + '_ {
        let p = &self.boundary.points;
        self.boundary
            .segments()
            .chain(std::iter::once((p[p.len() - 1], p[0])))
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, z: ComplexPoint) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn vertical_extent(&self) -> f64 {
        let (lo, hi) = self
            .boundary
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.im), hi.max(p.im)));
        hi - lo
    }

    pub fn is_simple(&self) -> bool {
        let edges: Vec<_> = self.edges().collect();
        let n = edges.len();
        for i in 0..n {
            for k in i + 1..n {
                let adjacent = k == i + 1 || (i == 0 && k == n - 1);
                if !adjacent && segments_meet(edges[i].0, edges[i].1, edges[k].0, edges[k].1) {
                    return false;
                }
            }
        }
        true
    }

    fn disjoint_from_translate(&self, by: ComplexPoint) -> bool {
        let edges: Vec<_> = self.edges().collect();
        edges.iter().all(|&(a, b)| {
            edges
                .iter()
                .all(|&(c, d)| !segments_meet(a, b, c + by, d + by))
        })
    }

    /// Smallest distance between boundary points whose separation along the
    /// boundary is more than three times their distance.
    pub fn neck_width(&self) -> f64 {
        let mut samples = Vec::new();
        let mut arc = 0.0;
        for (a, b) in self.boundary.segments() {
            let len = (b - a).norm();
            let n = (len / NECK_SAMPLE_SPACING).ceil().max(1.0) as usize;
            for i in 0..n {
                let t = i as f64 / n as f64;
                samples.push((a + (b - a) * t, arc + len * t));
            }
            arc += len;
        }
        samples.push((self.boundary.last(), arc));
        let mut best = f64::INFINITY;
        for (i, &(p, s)) in samples.iter().enumerate() {
            for &(q, t) in &samples[i + 1..] {
                let d = (p - q).norm();
                if d < best && (t - s) > 3.0 * d {
                    best = d;
                }
            }
        }
        best
    }

    /// A curve inside the tract from arc length `start` along the centerline
    /// out to the mouth, displaced sideways by `amplitude·sin(freq·s + phase)`.
    pub fn centerline_curve(
        &self,
        start: f64,
        amplitude: f64,
        freq: f64,
        phase: f64,
        spacing: f64,
    ) -> Result<Polyline> {
        let (line, width) = self
            .centerline
            .as_ref()
            .ok_or_else(|| Error::Precondition("tract has no centerline".into()))?;
        if amplitude.abs() >= width / 2.0 {
            return Err(Error::Precondition("curve amplitude exceeds half the lane width".into()));
        }
        let mut points = Vec::new();
        let mut s = 0.0;
        for pair in line.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = (b - a).norm();
            let dir = (b - a) / len;
            let normal = ComplexPoint::new(-dir.im, dir.re);
            let n = (len / spacing).ceil() as usize;
            for i in 0..=n {
                let t = len * i as f64 / n as f64;
                if s + t > start {
                    break;
                }
                let offset = amplitude * (freq * (s + t) + phase).sin();
                points.push(a + dir * t + normal * offset);
            }
            s += len;
            if s > start {
                break;
            }
        }
        points.reverse();
        Polyline::from_points(points).map(|mut p| {
            p.truncation_re = self.truncation_re();
            p
        })
    }

    /// Length of the centerline, if any.
    pub fn centerline_length(&self) -> Option<f64> {
        self.centerline
            .as_ref()
            .map(|(line, _)| line.windows(2).map(|w| (w[1] - w[0]).norm()).sum())
    }

    pub fn lane_width(&self) -> Option<f64> {
        self.centerline.as_ref().map(|(_, w)| *w)
    }
}

/// Non-tract control for the separation lemma: the rectangle
/// `[0, 16] × [0, 12]`.
pub fn tall_rectangle() -> SyntheticTract {
    SyntheticTract::from_outline(vec![C(16.0, 12.0), C(0.0, 12.0), C(0.0, 0.0), C(16.0, 0.0)])
        .expect("valid rectangle")
}

/// Non-tract control for the proximity lemma: two lanes ten apart joined at
/// the left end.
pub fn wide_u_shape() -> SyntheticTract {
    SyntheticTract::thick_path(
        vec![C(16.0, 5.0), C(0.5, 5.0), C(0.5, -5.0), C(16.0, -5.0)],
        0.8,
    )
    .expect("valid U shape")
}
