use std::io::{Read, Write};

use rstar::primitives::Line;
use rstar::{PointDistance, RTree};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{default_tolerance, is_finite, ComplexPoint};

/// Ordered point list approximating an unbounded curve, cut off at
/// `truncation_re`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<ComplexPoint>,
    pub truncation_re: f64,
}

impl Polyline {
    pub fn new(points: Vec<ComplexPoint>, truncation_re: f64) -> Result<Self> {
        let line = Polyline {
            points,
            truncation_re,
        };
        line.validate()?;
        Ok(line)
    }

    /// Builds a polyline truncated at the real part of its last point,
    /// dropping consecutive duplicates first.
    pub fn from_points(points: Vec<ComplexPoint>) -> Result<Self> {
        let points = dedup(points);
        let truncation_re = points.last().map_or(0.0, |p| p.re);
        Polyline::new(points, truncation_re)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Precondition(format!(
                "polyline needs at least 2 points, got {}",
                self.points.len()
            )));
        }
        if let Some(p) = self.points.iter().find(|p| !is_finite(**p)) {
            return Err(Error::Precondition(format!("non-finite polyline point {p}")));
        }
        if self.points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(
                "consecutive polyline points must be distinct".into(),
            ));
        }
        let last = self.points[self.points.len() - 1];
        if last.re < self.truncation_re - default_tolerance() {
            return Err(Error::Precondition(format!(
                "last point Re {} falls short of truncation Re {}",
                last.re, self.truncation_re
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> ComplexPoint {
        self.points[0]
    }

    pub fn last(&self) -> ComplexPoint {
        self.points[self.points.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (ComplexPoint, ComplexPoint)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn max_gap(&self) -> f64 {
        self.segments()
            .map(|(a, b)| (b - a).norm())
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, by: ComplexPoint) -> Polyline {
        Polyline {
            points: self.points.iter().map(|p| p + by).collect(),
            truncation_re: self.truncation_re + by.re,
        }
    }

    /// Copy with extra points inserted so that no segment is longer than `max_step`.
    pub fn densified(&self, max_step: f64) -> Polyline {
        let mut out = Vec::with_capacity(self.points.len());
        out.push(self.points[0]);
        for (a, b) in self.segments() {
            let n = ((b - a).norm() / max_step).ceil().max(1.0) as usize;
            for i in 1..=n {
                out.push(a + (b - a) * (i as f64 / n as f64));
            }
        }
        Polyline {
            points: out,
            truncation_re: self.truncation_re,
        }
    }

    /// Diameter of the vertex set (quadratic; meant for short curves).
    pub fn vertex_diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let line: Polyline = serde_json::from_str(s)?;
        line.validate()?;
        Ok(line)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["re", "im"])?;
        for p in &self.points {
            w.write_record([p.re.to_string(), p.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `re,im` rows. CSV carries no truncation, so it is taken from
    /// the argument or else from the last point.
    pub fn read_csv<R: Read>(reader: R, truncation_re: Option<f64>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "re" || &headers[1] != "im" {
            return Err(Error::Precondition(format!(
                "expected CSV header \"re,im\", got {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut points = Vec::new();
        for row in r.deserialize() {
            let (re, im): (f64, f64) = row?;
            points.push(ComplexPoint::new(re, im));
        }
        let trunc = truncation_re.unwrap_or_else(|| points.last().map_or(0.0, |p| p.re));
        Polyline::new(points, trunc)
    }
}

pub(crate) fn dedup(mut points: Vec<ComplexPoint>) -> Vec<ComplexPoint> {
    points.dedup();
    points
}

pub fn point_segment_distance(p: ComplexPoint, a: ComplexPoint, b: ComplexPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Euclidean distance from `p` to the union of the segments of `c`.
pub fn point_to_polyline_distance(p: ComplexPoint, c: &Polyline) -> f64 {
    if c.points.len() == 1 {
        return (p - c.points[0]).norm();
    }
    c.segments()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// R-tree over the segments of a polyline, for repeated distance queries
/// against long curves.
pub struct PolylineIndex {
    tree: RTree<Line<[f64; 2]>>,
}

impl PolylineIndex {
    pub fn new(c: &Polyline) -> Self {
        let segs = c
            .segments()
            .map(|(a, b)| Line::new([a.re, a.im], [b.re, b.im]))
            .collect();
        PolylineIndex {
            tree: RTree::bulk_load(segs),
        }
    }

    pub fn distance(&self, p: ComplexPoint) -> f64 {
        let q = [p.re, p.im];
        self.tree
            .nearest_neighbor(q)
            .map_or(f64::INFINITY, |seg| seg.distance_2(&q).sqrt())
    }
}

/// Sup over the vertices of `a` of the distance to the polyline `b`.
pub fn directed_hausdorff(a: &Polyline, b: &Polyline) -> f64 {
    let index = PolylineIndex::new(b);
    a.points
        .iter()
        .map(|p| index.distance(*p))
        .fold(0.0, f64::max)
}

pub fn hausdorff_distance(a: &Polyline, b: &Polyline) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn perpendicular_foot() {
        let line = Polyline::new(vec![c(1.0, 0.0), c(1.0, 1.0)], 1.0).unwrap();
        assert!((point_to_polyline_distance(c(0.0, 0.0), &line) - 1.0).abs() < 1e-15);
        assert_eq!(point_to_polyline_distance(c(1.0, 1.0), &line), 0.0);
    }

    #[test]
    fn validation() {
        assert!(Polyline::new(vec![c(0.0, 0.0)], 0.0).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(0.0, 0.0)], 0.0).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(1.0, 0.0)], 5.0).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(f64::NAN, 0.0)], 0.0).is_err());
        assert!(Polyline::from_points(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).is_ok());
    }

    #[test]
    fn json_and_csv_formats() {
        let line = Polyline::new(vec![c(0.5, -1.0), c(2.0, 0.25)], 2.0).unwrap();
        let json = line.to_json().unwrap();
        assert_eq!(json, r#"{"points":[[0.5,-1.0],[2.0,0.25]],"truncation_re":2.0}"#);
        assert_eq!(Polyline::from_json(&json).unwrap(), line);

        let mut buf = Vec::new();
        line.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("re,im\n"));
        assert_eq!(Polyline::read_csv(&buf[..], Some(2.0)).unwrap(), line);
        assert!(Polyline::read_csv("x,y\n1,2\n3,4\n".as_bytes(), None).is_err());
    }

    #[test]
    fn index_agrees_with_linear_scan() {
        let pts: Vec<_> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.05;
                c(t, (3.0 * t).sin())
            })
            .collect();
        let line = Polyline::from_points(pts).unwrap();
        let index = PolylineIndex::new(&line);
        for k in 0..50 {
            let p = c(k as f64 * 0.21 - 1.0, (k as f64 * 0.7).cos() * 2.0);
            let d0 = point_to_polyline_distance(p, &line);
            assert!((index.distance(p) - d0).abs() < 1e-12);
        }
    }

    proptest! {
        // Segment-exact distance never exceeds the sampled minimum, and the
        // sampled minimum overshoots by at most half the sample spacing.
        #[test]
        fn distance_matches_dense_sampling(
            px in -5.0..5.0f64, py in -5.0..5.0f64,
            xs in proptest::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 2..6),
        ) {
            let pts: Vec<_> = xs.iter().map(|&(x, y)| c(x, y)).collect();
            let Ok(line) = Polyline::from_points(pts) else { return Ok(()); };
            if line.len() < 2 { return Ok(()); }
            let p = c(px, py);
            let exact = point_to_polyline_distance(p, &line);
            let total: f64 = line.segments().map(|(a, b)| (b - a).norm()).sum();
            let n = 10_000;
            let spacing = total / n as f64;
            let mut best = f64::INFINITY;
            for (a, b) in line.segments() {
                let m = (((b - a).norm() / spacing).ceil() as usize).max(1);
                for i in 0..=m {
                    let q = a + (b - a) * (i as f64 / m as f64);
                    best = best.min((p - q).norm());
                }
            }
            prop_assert!(exact <= best + 1e-12);
            prop_assert!(best - exact <= spacing / 2.0 + 1e-12);
        }
    }
}
