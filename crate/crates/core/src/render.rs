//! Escape-time images in the dynamical plane and in logarithmic
//! coordinates, with hair curves drawn on top. Output is binary PPM.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, Polyline};
use crate::hairs::HairApproximation;
use crate::model::{EntireModel, Eval, FValue, LogTransform, ModelFile};
use crate::normalize::transform_for;
use crate::symbolic::DEFAULT_ESCAPE_RE;

pub const MAX_SIDE: usize = 16384;

pub const NON_ESCAPING: [u8; 3] = [0, 0, 0];
pub const CURVE_COLOR: [u8; 3] = [255, 255, 255];
pub const DISK_COLOR: [u8; 3] = [255, 48, 160];

const STOPS: [[i32; 3]; 5] = [
    [24, 28, 96],
    [32, 150, 168],
    [248, 224, 96],
    [224, 96, 40],
    [24, 28, 96],
];

const fn build_palette() -> [[u8; 3]; 256] {
    let mut out = [[0u8; 3]; 256];
    let mut i = 0;
    while i < 256 {
        let seg = i / 64;
        let t = (i % 64) as i32;
        let mut c = 0;
        while c < 3 {
            let a = STOPS[seg][c];
            let b = STOPS[seg + 1][c];
            out[i][c] = (a + (b - a) * t / 64) as u8;
            c += 1;
        }
        i += 1;
    }
    out
}

/// Band colors; escape count `n` uses entry `BAND_STRIDE·n mod 256`.
pub const PALETTE: [[u8; 3]; 256] = build_palette();
pub const BAND_STRIDE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenderMode {
    PlaneEscapeTime,
    LogPlaneEscapeTime,
    HairOverlay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: ComplexPoint,
    pub width: f64,
    pub height: f64,
}

impl Window {
    /// Center of pixel `(px, py)`; row 0 is the top edge.
    pub fn pixel_to_point(&self, px: f64, py: f64, res: (usize, usize)) -> ComplexPoint {
        let sx = self.width / res.0 as f64;
        let sy = self.height / res.1 as f64;
        ComplexPoint::new(
            self.center.re - self.width / 2.0 + (px + 0.5) * sx,
            self.center.im + self.height / 2.0 - (py + 0.5) * sy,
        )
    }

    /// Inverse of [`Window::pixel_to_point`], in fractional pixels.
    pub fn point_to_pixel(&self, z: ComplexPoint, res: (usize, usize)) -> (f64, f64) {
        let sx = self.width / res.0 as f64;
        let sy = self.height / res.1 as f64;
        (
            (z.re - self.center.re + self.width / 2.0) / sx - 0.5,
            (self.center.im + self.height / 2.0 - z.im) / sy - 0.5,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderJob {
    pub model_path: PathBuf,
    pub window: Window,
    pub resolution: (usize, usize),
    pub horizon: usize,
    pub mode: RenderMode,
    pub output_path: PathBuf,
}

impl RenderJob {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.resolution;
        if w == 0 || h == 0 || w > MAX_SIDE || h > MAX_SIDE {
            return Err(Error::Configuration(format!(
                "resolution {w}x{h} must be between 1 and {MAX_SIDE} per side"
            )));
        }
        if !(self.window.width > 0.0 && self.window.height > 0.0) {
            return Err(Error::Configuration("window width and height must be positive".into()));
        }
        Ok(())
    }
}

/// First iteration count at which each pixel passed the escape threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeTimes {
    pub width: usize,
    pub height: usize,
    pub times: Vec<Option<u32>>,
}

impl EscapeTimes {
    pub fn get(&self, px: usize, py: usize) -> Option<u32> {
        self.times[py * self.width + px]
    }

    pub fn escaping_fraction(&self) -> f64 {
        self.times.iter().filter(|t| t.is_some()).count() as f64 / self.times.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn from_times(times: &EscapeTimes) -> Image {
        let pixels = times
            .times
            .iter()
            .map(|t| t.map_or(NON_ESCAPING, |n| PALETTE[(BAND_STRIDE * n as usize) % 256]))
            .collect();
        Image {
            width: times.width,
            height: times.height,
            pixels,
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(&self.to_ppm())?;
        Ok(())
    }

    fn set(&mut self, px: usize, py: usize, color: [u8; 3]) {
        self.pixels[py * self.width + px] = color;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RenderStats {
    pub pixels: usize,
    pub escaping: usize,
    pub escaping_fraction: f64,
    pub elapsed_seconds: f64,
}

/// Dynamical-plane escape time under `f`: the first `n` with the growth
/// exponent of `f^n(z)` above `escape_re`.
pub fn plane_escape_time(model: &EntireModel, z: ComplexPoint, horizon: usize, escape_re: f64) -> Option<u32> {
    let mut z = z;
    for n in 0..horizon {
        if model.escape_exponent(z) > escape_re {
            return Some(n as u32);
        }
        match model.eval(z) {
            Eval::Value(v) => z = v,
            Eval::Escaped { .. } => return Some(n as u32 + 1),
        }
    }
    None
}

/// Escape time under the logarithmic transform: points leaving the tracts
/// never escape.
pub fn log_escape_time(lt: &LogTransform, w: ComplexPoint, horizon: usize, escape_re: f64) -> Option<u32> {
    let mut w = w;
    for n in 0..horizon {
        if w.re > escape_re {
            return Some(n as u32);
        }
        let label = lt.membership(w)?;
        match lt.eval_unchecked(w, label.base) {
            FValue::Value(v) => w = v,
            FValue::Overflow { .. } => return Some(n as u32 + 1),
        }
    }
    None
}

/// Escape times over a window, rows computed in parallel.
pub fn escape_times<F>(window: &Window, res: (usize, usize), time: F) -> EscapeTimes
where
    F: Fn(ComplexPoint) -> Option<u32> + Sync,
{
    let (width, height) = res;
    let mut times = vec![None; width * height];
    times
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(py, row)| {
            for (px, t) in row.iter_mut().enumerate() {
                *t = time(window.pixel_to_point(px as f64, py as f64, res));
            }
        });
    EscapeTimes {
        width,
        height,
        times,
    }
}

fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    ModelFile::parse(&text).map_err(|e| Error::InvalidModel(format!("{}: {e}", path.display())))
}

fn times_for(job: &RenderJob, file: &ModelFile) -> Result<(EscapeTimes, Option<LogTransform>)> {
    Ok(match job.mode {
        RenderMode::PlaneEscapeTime => {
            let model = file.model()?;
            let times = escape_times(&job.window, job.resolution, |z| {
                plane_escape_time(&model, z, job.horizon, DEFAULT_ESCAPE_RE)
            });
            (times, None)
        }
        RenderMode::LogPlaneEscapeTime | RenderMode::HairOverlay => {
            let lt = transform_for(file)?;
            let times = escape_times(&job.window, job.resolution, |w| {
                log_escape_time(&lt, w, job.horizon, DEFAULT_ESCAPE_RE)
            });
            (times, Some(lt))
        }
    })
}

fn stats(times: &EscapeTimes, start: Instant) -> RenderStats {
    let escaping = times.times.iter().filter(|t| t.is_some()).count();
    RenderStats {
        pixels: times.times.len(),
        escaping,
        escaping_fraction: escaping as f64 / times.times.len() as f64,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Escape-time image for `job`. `HairOverlay` renders the log-plane base.
pub fn render_escape_time(job: &RenderJob) -> Result<(Image, RenderStats)> {
    job.validate()?;
    let start = Instant::now();
    let file = load_model(&job.model_path)?;
    let (times, _) = times_for(job, &file)?;
    Ok((Image::from_times(&times), stats(&times, start)))
}

/// Pixels of the curves and the disks drawn by an overlay.
#[derive(Debug, Clone, Serialize)]
pub struct OverlayAudit {
    pub curve_pixels: usize,
    /// Curve pixels whose own base pixel escapes.
    pub on_escaping: usize,
    /// Curve pixels that escape or touch an escaping pixel.
    pub on_escaping_or_adjacent: usize,
    /// `on_escaping_or_adjacent / curve_pixels`, 1 when nothing was drawn.
    pub fraction: f64,
    pub disks_drawn: usize,
}

/// Pixels met by `c`, sampled at a quarter pixel.
pub fn polyline_pixels(c: &Polyline, window: &Window, res: (usize, usize)) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut push = |(x, y): (f64, f64)| {
        let (px, py) = (x.round(), y.round());
        if px >= 0.0 && py >= 0.0 && (px as usize) < res.0 && (py as usize) < res.1 {
            out.push((px as usize, py as usize));
        }
    };
    if c.len() == 1 {
        push(window.point_to_pixel(c.first(), res));
    }
    for (a, b) in c.segments() {
        let (pa, pb) = (window.point_to_pixel(a, res), window.point_to_pixel(b, res));
        let len = (pb.0 - pa.0).hypot(pb.1 - pa.1);
        // Skip segments far outside the window.
        let lo = pa.0.min(pb.0).min(pa.1.min(pb.1));
        let hi_x = pa.0.max(pb.0);
        let hi_y = pa.1.max(pb.1);
        if lo > (res.0.max(res.1) + 1) as f64 || hi_x < -1.0 || hi_y < -1.0 {
            continue;
        }
        let n = (4.0 * len).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn circle(center: ComplexPoint, radius: f64) -> Polyline {
    let n = 720;
    let pts = (0..=n)
        .map(|i| center + ComplexPoint::from_polar(radius, std::f64::consts::TAU * i as f64 / n as f64))
        .collect();
    Polyline {
        points: pts,
        truncation_re: f64::INFINITY,
    }
}

/// Draws disks and then curves over a base image and audits the curve
/// pixels against the escape classification.
pub fn overlay(
    base: &Image,
    times: &EscapeTimes,
    window: &Window,
    curves: &[Polyline],
    disks: &[(ComplexPoint, f64)],
) -> (Image, OverlayAudit) {
    let res = (base.width, base.height);
    let mut image = base.clone();
    for &(c, r) in disks {
        for (px, py) in polyline_pixels(&circle(c, r), window, res) {
            image.set(px, py, DISK_COLOR);
        }
    }
    let mut pixels: Vec<(usize, usize)> = curves
        .iter()
        .flat_map(|c| polyline_pixels(c, window, res))
        .collect();
    pixels.sort_unstable();
    pixels.dedup();
    let escapes = |x: isize, y: isize| {
        x >= 0
            && y >= 0
            && (x as usize) < res.0
            && (y as usize) < res.1
            && times.get(x as usize, y as usize).is_some()
    };
    let (mut on, mut near) = (0, 0);
    for &(px, py) in &pixels {
        image.set(px, py, CURVE_COLOR);
        let (x, y) = (px as isize, py as isize);
        if escapes(x, y) {
            on += 1;
            near += 1;
        } else if (-1..=1).any(|dy| (-1..=1).any(|dx| escapes(x + dx, y + dy))) {
            near += 1;
        }
    }
    let audit = OverlayAudit {
        curve_pixels: pixels.len(),
        on_escaping: on,
        on_escaping_or_adjacent: near,
        fraction: if pixels.is_empty() { 1.0 } else { near as f64 / pixels.len() as f64 },
        disks_drawn: disks.len(),
    };
    (image, audit)
}

/// Log-plane escape-time image with the hair's curves and its disks
/// `D(anchor_j, 2π)` drawn on top.
pub fn render_hair_overlay(job: &RenderJob, hair: &HairApproximation) -> Result<(Image, RenderStats, OverlayAudit)> {
    job.validate()?;
    let start = Instant::now();
    let file = load_model(&job.model_path)?;
    let mut log_job = job.clone();
    log_job.mode = RenderMode::LogPlaneEscapeTime;
    let (times, lt) = times_for(&log_job, &file)?;
    let lt = lt.expect("log-plane render has a transform");
    if !hair.built_with(&lt) {
        return Err(Error::Precondition(
            "hair was built with a different transform than the model file gives".into(),
        ));
    }
    let base = Image::from_times(&times);
    let disks: Vec<_> = hair
        .anchor_orbit
        .iter()
        .take(hair.curves.len())
        .map(|&c| (c, hair.disk_radius))
        .collect();
    let (image, audit) = overlay(&base, &times, &job.window, &hair.curves, &disks);
    Ok((image, stats(&times, start), audit))
}
