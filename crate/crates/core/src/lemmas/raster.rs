use crate::error::{Error, Result};
use crate::geometry::ComplexPoint;

use super::SyntheticTract;

const MAX_CELLS: usize = 60_000_000;

/// Cell-center rasterization of a tract. The last column lies just inside
/// the mouth and stands for the unbounded end.
#[derive(Debug, Clone)]
pub struct Raster {
    pub x0: f64,
    pub y0: f64,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
    inside: Vec<bool>,
}

impl Raster {
    pub fn new(tract: &SyntheticTract, step: f64) -> Result<Self> {
        let pts = &tract.boundary.points;
        let (mut xmin, mut ymin, mut ymax) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            xmin = xmin.min(p.re);
            ymin = ymin.min(p.im);
            ymax = ymax.max(p.im);
        }
        let x0 = xmin - 2.0 * step;
        let y0 = ymin - 2.0 * step;
        let nx = ((tract.truncation_re() - x0) / step).floor() as usize;
        let ny = ((ymax + 2.0 * step - y0) / step).ceil() as usize;
        if nx.saturating_mul(ny) > MAX_CELLS {
            return Err(Error::Configuration(format!(
                "raster of {nx} x {ny} cells at step {step} is too large"
            )));
        }
        let edges: Vec<_> = tract.edges().collect();
        let mut inside = vec![false; nx * ny];
        let mut xs = Vec::new();
        for j in 0..ny {
            let y = y0 + (j as f64 + 0.5) * step;
            xs.clear();
            for &(a, b) in &edges {
                if (a.im > y) != (b.im > y) {
                    xs.push(a.re + (y - a.im) * (b.re - a.re) / (b.im - a.im));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let from = ((pair[0] - x0) / step - 0.5).ceil().max(0.0) as usize;
                let to = (((pair[1] - x0) / step - 0.5).floor() as isize).min(nx as isize - 1);
                if to >= from as isize {
                    inside[j * nx + from..=j * nx + to as usize].fill(true);
                }
            }
        }
        Ok(Raster {
            x0,
            y0,
            step,
            nx,
            ny,
            inside,
        })
    }

    pub fn center(&self, i: usize, j: usize) -> ComplexPoint {
        ComplexPoint::new(
            self.x0 + (i as f64 + 0.5) * self.step,
            self.y0 + (j as f64 + 0.5) * self.step,
        )
    }

    pub fn cell_of(&self, p: ComplexPoint) -> Option<(usize, usize)> {
        let i = ((p.re - self.x0) / self.step).floor();
        let j = ((p.im - self.y0) / self.step).floor();
        (i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then_some((i as usize, j as usize))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.index(i, j)]
    }

    /// Inside, together with the eight neighbouring cells.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0
            && j > 0
            && i + 1 < self.nx
            && j + 1 < self.ny
            && (j - 1..=j + 1).all(|b| (i - 1..=i + 1).all(|a| self.is_inside(a, b)))
    }

    /// 4-connected fill from the inside cells of the mouth column through
    /// cells accepted by `allowed`. `visit` may abort the fill by returning
    /// false; the second value reports whether the fill completed.
    pub fn flood<A, V>(&self, allowed: A, mut visit: V) -> (Vec<bool>, bool)
    where
        A: Fn(usize, usize) -> bool,
        V: FnMut(usize) -> bool,
    {
        let mut seen = vec![false; self.nx * self.ny];
        let mut stack = Vec::new();
        let ok = |i: usize, j: usize| self.is_inside(i, j) && allowed(i, j);
        let last = self.nx - 1;
        for j in 0..self.ny {
            if ok(last, j) {
                seen[self.index(last, j)] = true;
                stack.push((last, j));
            }
        }
        while let Some((i, j)) = stack.pop() {
            if !visit(self.index(i, j)) {
                return (seen, false);
            }
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (a, b) in neighbours {
                if a < self.nx && b < self.ny && !seen[self.index(a, b)] && ok(a, b) {
                    seen[self.index(a, b)] = true;
                    stack.push((a, b));
                }
            }
        }
        (seen, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_cells() {
        let t = SyntheticTract::strip(0.0, 4.0, 1.0).unwrap();
        let r = Raster::new(&t, 0.1).unwrap();
        let count = (0..r.ny)
            .flat_map(|j| (0..r.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| r.is_inside(i, j))
            .count();
        // 20 rows inside; columns with centers in (0, 4) before the mouth.
        let cols = (0..r.nx).filter(|&i| r.center(i, 0).re > 0.0).count();
        assert_eq!(count, 20 * cols);
        let (fill, done) = r.flood(|_, _| true, |_| true);
        assert!(done);
        assert_eq!(fill.iter().filter(|b| **b).count(), count);
    }

    #[test]
    fn blocked_fill() {
        let t = SyntheticTract::strip(0.0, 4.0, 1.0).unwrap();
        let r = Raster::new(&t, 0.1).unwrap();
        let wall = r.cell_of(ComplexPoint::new(2.0, 0.0)).unwrap().0;
        let (fill, _) = r.flood(|i, _| i != wall, |_| true);
        let (i, j) = r.cell_of(ComplexPoint::new(1.0, 0.0)).unwrap();
        assert!(!fill[r.index(i, j)]);
        let (i, j) = r.cell_of(ComplexPoint::new(3.0, 0.0)).unwrap();
        assert!(fill[r.index(i, j)]);
    }
}
