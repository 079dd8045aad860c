//! Basin-of-attraction rasters, extra-attractor detection and rendering.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::newton::{self, NewtonMapModel, OrbitKind, OrbitParams};
use crate::{Error, Point, Result};

pub const CODE_OTHER: u8 = 251;
pub const CODE_CYCLE: u8 = 252;
pub const CODE_ESCAPED: u8 = 253;
pub const CODE_UNDECIDED: u8 = 254;
pub const CODE_INDETERMINATE: u8 = 255;

/// Root codes must stay below this.
pub const MAX_ROOTS: usize = 250;

/// Axis-aligned rectangle of the plane. Pixel `(0, 0)` is the top-left one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) && x_min < x_max && y_min < y_max;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "window [{x_min}, {x_max}] x [{y_min}, {y_max}] must have positive area"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn square(half: f64) -> Self {
        Self { x_min: -half, x_max: half, y_min: -half, y_max: half }
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    /// Centre of pixel `(i, j)` on a `width x height` grid.
    #[inline]
    pub fn pixel_center(&self, i: usize, j: usize, width: usize, height: usize) -> Point {
        [
            self.x_min + (i as f64 + 0.5) * (self.x_max - self.x_min) / width as f64,
            self.y_max - (j as f64 + 0.5) * (self.y_max - self.y_min) / height as f64,
        ]
    }

    /// Continuous pixel coordinates of `p`; pixel `(i, j)` covers `[i, i+1) x [j, j+1)`.
    pub fn to_pixel(&self, p: Point, width: usize, height: usize) -> (f64, f64) {
        (
            (p[0] - self.x_min) / (self.x_max - self.x_min) * width as f64,
            (self.y_max - p[1]) / (self.y_max - self.y_min) * height as f64,
        )
    }
}

/// Outcome codes and iteration counts on a pixel grid, row-major from the top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinRaster {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub codes: Vec<u8>,
    pub iters: Vec<u32>,
    pub max_iter: usize,
    pub tol: f64,
    pub n_roots: usize,
}

/// Outcome code of a classified orbit.
pub fn outcome_code(kind: &OrbitKind) -> u8 {
    match kind {
        OrbitKind::ConvergedToRoot { root_index, .. } => (*root_index).min(MAX_ROOTS - 1) as u8,
        OrbitKind::Cycle { .. } => CODE_CYCLE,
        OrbitKind::Escaped { .. } => CODE_ESCAPED,
        OrbitKind::HitIndeterminacy { .. } => CODE_INDETERMINATE,
        OrbitKind::Undecided { .. } => CODE_UNDECIDED,
    }
}

pub fn code_name(code: u8) -> String {
    match code {
        CODE_OTHER => "other-attractor".into(),
        CODE_CYCLE => "cycle".into(),
        CODE_ESCAPED => "escaped".into(),
        CODE_UNDECIDED => "undecided".into(),
        CODE_INDETERMINATE => "indeterminate".into(),
        k => format!("root {k}"),
    }
}

impl BasinRaster {
    pub fn code_at(&self, i: usize, j: usize) -> u8 {
        self.codes[j * self.width + i]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Fraction of pixels carrying `code`.
    pub fn fraction(&self, code: u8) -> f64 {
        self.codes.iter().filter(|c| **c == code).count() as f64 / self.len() as f64
    }

    /// Fraction of pixels in some root basin.
    pub fn root_fraction(&self) -> f64 {
        self.codes.iter().filter(|c| (**c as usize) < self.n_roots).count() as f64 / self.len() as f64
    }

    /// `(code, name)` pairs for every code that can occur.
    pub fn legend(&self) -> Vec<(u8, String)> {
        let mut v: Vec<(u8, String)> = (0..self.n_roots.min(MAX_ROOTS)).map(|k| (k as u8, code_name(k as u8))).collect();
        for c in [CODE_OTHER, CODE_CYCLE, CODE_ESCAPED, CODE_UNDECIDED, CODE_INDETERMINATE] {
            v.push((c, code_name(c)));
        }
        v
    }
}

/// Classifies the orbit of every pixel centre. Rows run in parallel and are
/// collected in order, so the result does not depend on the schedule.
pub fn raster_basins(
    model: &NewtonMapModel,
    window: &Window,
    width: usize,
    height: usize,
    params: &OrbitParams,
) -> Result<BasinRaster> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("raster must be at least 1x1".into()));
    }
    let rows: Vec<(Vec<u8>, Vec<u32>)> = (0..height)
        .into_par_iter()
        .map(|j| {
            let mut codes = Vec::with_capacity(width);
            let mut iters = Vec::with_capacity(width);
            for i in 0..width {
                let o = newton::classify_orbit(model, window.pixel_center(i, j, width, height), params);
                codes.push(outcome_code(&o.kind));
                iters.push(o.iters() as u32);
            }
            (codes, iters)
        })
        .collect();
    let mut codes = Vec::with_capacity(width * height);
    let mut iters = Vec::with_capacity(width * height);
    for (c, it) in rows {
        codes.extend(c);
        iters.extend(it);
    }
    Ok(BasinRaster {
        width,
        height,
        window: *window,
        codes,
        iters,
        max_iter: params.max_iter,
        tol: params.tol,
        n_roots: model.roots.len(),
    })
}

/// Settings for [`detect_extra_attractor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtraAttractorParams {
    pub samples: usize,
    pub orbit_len: usize,
    /// Mean distance to a ghost line below which a tail lies on it.
    pub line_tol: f64,
    /// Occupied cells of a 64x64 tail histogram above which a tail is 2-D.
    pub fill_cells: usize,
    /// Candidate pixels below this fraction are treated as noise.
    pub min_fraction: f64,
}

impl Default for ExtraAttractorParams {
    fn default() -> Self {
        Self { samples: 24, orbit_len: 10_000, line_tol: 0.05, fill_cells: 100, min_fraction: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraAttractorReport {
    pub present: bool,
    /// Fraction of pixels that are neither in a root basin nor escaped.
    pub candidate_fraction: f64,
    /// Sampled long orbits that neither converged nor escaped.
    pub persistent: usize,
    pub sampled: usize,
    /// Mean distance of persistent tails to the closest ghost line.
    pub mean_line_distance: Option<f64>,
    pub near_ghost_line: bool,
    /// Largest number of occupied 64x64 histogram cells over persistent tails.
    pub occupied_cells: usize,
    pub fills_region: bool,
    /// Last 500 points of each persistent sampled orbit.
    pub sample_orbits: Vec<Vec<Point>>,
}

/// Re-runs long orbits from non-root, non-escaped pixels and decides whether
/// they settle on an attractor other than the roots.
pub fn detect_extra_attractor(
    model: &NewtonMapModel,
    raster: &BasinRaster,
    params: &ExtraAttractorParams,
) -> ExtraAttractorReport {
    let cand: Vec<usize> = (0..raster.len())
        .filter(|&k| matches!(raster.codes[k], CODE_OTHER | CODE_CYCLE | CODE_UNDECIDED))
        .collect();
    let candidate_fraction = cand.len() as f64 / raster.len().max(1) as f64;
    let mut report = ExtraAttractorReport {
        present: false,
        candidate_fraction,
        persistent: 0,
        sampled: 0,
        mean_line_distance: None,
        near_ghost_line: false,
        occupied_cells: 0,
        fills_region: false,
        sample_orbits: Vec::new(),
    };
    if cand.is_empty() || candidate_fraction < params.min_fraction {
        return report;
    }
    let n = params.samples.min(cand.len()).max(1);
    let picks: Vec<usize> = (0..n).map(|s| cand[(2 * s + 1) * cand.len() / (2 * n)]).collect();
    let ghosts: Vec<[f64; 3]> = model.complex_roots.iter().map(|c| crate::pencil::ghost_line(*c)).collect();
    let tails: Vec<Option<Vec<Point>>> = picks
        .par_iter()
        .map(|&k| {
            let z0 = raster.window.pixel_center(k % raster.width, k / raster.width, raster.width, raster.height);
            let tr = newton::trace_orbit(model, z0, params.orbit_len);
            if tr.len() <= params.orbit_len {
                return None;
            }
            let last = tr[tr.len() - 1];
            if model.nearest_root(last, 1e-6).is_some() || linalg::norm(last) > 1e8 {
                return None;
            }
            Some(tr[tr.len() / 2..].to_vec())
        })
        .collect();
    report.sampled = n;
    let mut dsum = 0.0;
    let mut dcount = 0usize;
    for tail in tails.into_iter().flatten() {
        report.persistent += 1;
        if !ghosts.is_empty() {
            let d = ghosts
                .iter()
                .map(|l| tail.iter().map(|p| (l[0] * p[0] + l[1] * p[1] + l[2]).abs()).sum::<f64>() / tail.len() as f64)
                .fold(f64::INFINITY, f64::min);
            dsum += d;
            dcount += 1;
        }
        let mut cells = vec![false; 64 * 64];
        for p in &tail {
            if raster.window.contains(*p) {
                let (x, y) = raster.window.to_pixel(*p, 64, 64);
                cells[(y as usize).min(63) * 64 + (x as usize).min(63)] = true;
            }
        }
        report.occupied_cells = report.occupied_cells.max(cells.iter().filter(|c| **c).count());
        report.sample_orbits.push(tail[tail.len().saturating_sub(500)..].to_vec());
    }
    if dcount > 0 {
        let d = dsum / dcount as f64;
        report.mean_line_distance = Some(d);
        report.near_ghost_line = d < params.line_tol;
    }
    report.fills_region = report.occupied_cells > params.fill_cells;
    // an attractor is present when most sampled orbits never settle
    report.present = 2 * report.persistent > report.sampled;
    report
}

/// Relabels every undecided or cycle pixel as [`CODE_OTHER`].
pub fn mark_other_attractor(raster: &mut BasinRaster) {
    for c in &mut raster.codes {
        if matches!(*c, CODE_CYCLE | CODE_UNDECIDED) {
            *c = CODE_OTHER;
        }
    }
}

/// 8-bit RGB image, row-major from the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        let data = fill.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, data }
    }

    pub fn get(&self, i: usize, j: usize) -> [u8; 3] {
        let k = 3 * (j * self.width + i);
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub fn put(&mut self, i: i64, j: i64, c: [u8; 3]) {
        if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
            return;
        }
        let k = 3 * (j as usize * self.width + i as usize);
        self.data[k..k + 3].copy_from_slice(&c);
    }

    /// Binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }
}

/// Colours for root codes (cycled) and the special codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub roots: Vec<[u8; 3]>,
    pub other: [u8; 3],
    pub cycle: [u8; 3],
    pub escaped: [u8; 3],
    pub undecided: [u8; 3],
    pub indeterminate: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            roots: vec![[200, 30, 40], [30, 90, 200], [240, 140, 20], [40, 170, 190], [120, 60, 170], [60, 160, 60]],
            other: [212, 175, 55],
            cycle: [212, 175, 55],
            escaped: [20, 20, 20],
            undecided: [90, 90, 90],
            indeterminate: [255, 255, 255],
        }
    }
}

impl Palette {
    pub fn color(&self, code: u8) -> [u8; 3] {
        match code {
            CODE_OTHER => self.other,
            CODE_CYCLE => self.cycle,
            CODE_ESCAPED => self.escaped,
            CODE_UNDECIDED => self.undecided,
            CODE_INDETERMINATE => self.indeterminate,
            k if self.roots.is_empty() => [k.wrapping_mul(37), k.wrapping_mul(91), k.wrapping_mul(53)],
            k => self.roots[k as usize % self.roots.len()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shading {
    None,
    /// Root pixels darken with `t = log(1 + iters) / log(1 + max_iter)`, down to
    /// 20% of the base color at `t = 1`.
    LogIter,
}

pub fn render(raster: &BasinRaster, palette: &Palette, shading: Shading) -> RgbImage {
    let denom = (1.0 + raster.max_iter as f64).ln().max(f64::MIN_POSITIVE);
    let mut img = RgbImage::new(raster.width, raster.height, [0, 0, 0]);
    for (k, (&code, &it)) in raster.codes.iter().zip(&raster.iters).enumerate() {
        let base = palette.color(code);
        let c = match shading {
            Shading::LogIter if (code as usize) < raster.n_roots => {
                let t = ((1.0 + it as f64).ln() / denom).clamp(0.0, 1.0);
                base.map(|v| (v as f64 * (1.0 - 0.8 * t)).round() as u8)
            }
            _ => base,
        };
        img.data[3 * k..3 * k + 3].copy_from_slice(&c);
    }
    img
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlayShape {
    Points { points: Vec<Point> },
    Polyline { points: Vec<Point> },
    /// `a x + b y + c = 0`.
    Line { coeffs: [f64; 3] },
    Marker { at: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayItem {
    pub shape: OverlayShape,
    pub color: [u8; 3],
}

fn draw_segment(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: [u8; 3]) {
    let lim = 4.0 * (img.width + img.height) as f64;
    if !(a.0.abs() < lim && a.1.abs() < lim && b.0.abs() < lim && b.1.abs() < lim) {
        // clip far endpoints first so the pixel walk stays short
        let Some((a2, b2)) = clip(a, b, (-1.0, -1.0), (img.width as f64 + 1.0, img.height as f64 + 1.0)) else {
            return;
        };
        return draw_segment(img, a2, b2, c);
    }
    let (mut x0, mut y0) = (a.0.floor() as i64, a.1.floor() as i64);
    let (x1, y1) = (b.0.floor() as i64, b.1.floor() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.put(x0, y0, c);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Liang–Barsky clipping of segment `a b` to a box.
fn clip(a: (f64, f64), b: (f64, f64), lo: (f64, f64), hi: (f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.0 - lo.0), (dx, hi.0 - a.0), (-dy, a.1 - lo.1), (dy, hi.1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some(((a.0 + t0 * dx, a.1 + t0 * dy), (a.0 + t1 * dx, a.1 + t1 * dy)))
}

/// Draws items in list order with one-pixel strokes; anything outside the
/// image is clipped.
pub fn overlay(img: &mut RgbImage, window: &Window, items: &[OverlayItem]) {
    let (w, h) = (img.width, img.height);
    let px = |p: Point| window.to_pixel(p, w, h);
    for item in items {
        let c = item.color;
        match &item.shape {
            OverlayShape::Points { points } => {
                for p in points {
                    let (x, y) = px(*p);
                    if x.is_finite() && y.is_finite() {
                        img.put(x.floor() as i64, y.floor() as i64, c);
                    }
                }
            }
            OverlayShape::Polyline { points } => {
                for s in points.windows(2) {
                    draw_segment(img, px(s[0]), px(s[1]), c);
                }
                if let [p] = points.as_slice() {
                    let (x, y) = px(*p);
                    img.put(x.floor() as i64, y.floor() as i64, c);
                }
            }
            OverlayShape::Line { coeffs: [a, b, cc] } => {
                let corners = [
                    [window.x_min, window.y_min],
                    [window.x_max, window.y_min],
                    [window.x_max, window.y_max],
                    [window.x_min, window.y_max],
                ];
                // intersections of the line with the window boundary
                let mut hits = Vec::new();
                for k in 0..4 {
                    let (p, q) = (corners[k], corners[(k + 1) % 4]);
                    let (fp, fq) = (a * p[0] + b * p[1] + cc, a * q[0] + b * q[1] + cc);
                    if (fp <= 0.0 && fq >= 0.0) || (fp >= 0.0 && fq <= 0.0) {
                        let t = if fp == fq { 0.0 } else { fp / (fp - fq) };
                        hits.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                    }
                }
                if hits.len() >= 2 {
                    let (mut best, mut d) = ((0, 1), -1.0);
                    for i in 0..hits.len() {
                        for j in i + 1..hits.len() {
                            let dd = linalg::dist(hits[i], hits[j]);
                            if dd > d {
                                d = dd;
                                best = (i, j);
                            }
                        }
                    }
                    draw_segment(img, px(hits[best.0]), px(hits[best.1]), c);
                }
            }
            OverlayShape::Marker { at } => {
                let (x, y) = px(*at);
                let (x, y) = (x.floor() as i64, y.floor() as i64);
                for d in -2..=2 {
                    img.put(x + d, y, c);
                    img.put(x, y + d, c);
                }
            }
        }
    }
}
