//! Sweeps over the normal-form parameter plane: the fate of one fixed initial
//! point per parameter, and the number of real roots per parameter.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::newton::{self, NewtonMapModel, OrbitParams};
use crate::pencil::{self, NormalForm};
use crate::raster::{self, BasinRaster, Window, CODE_ESCAPED, CODE_INDETERMINATE};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParamFamily {
    Parabolic,
    Hyperbolic { a: f64 },
}

impl ParamFamily {
    pub fn form(&self, x0: f64, y0: f64) -> NormalForm {
        match *self {
            ParamFamily::Parabolic => NormalForm::Parabolic { x0, y0 },
            ParamFamily::Hyperbolic { a } => NormalForm::Hyperbolic { x0, y0, a },
        }
    }

    /// Initial point used by default for this family.
    pub fn default_initial_point(&self) -> Point {
        match self {
            ParamFamily::Parabolic => [0.0, 6.0],
            ParamFamily::Hyperbolic { .. } => [5.0, 5.0],
        }
    }
}

/// A `width x height` grid of `(x0, y0)` cells sharing one initial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub family: ParamFamily,
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub initial_point: Point,
}

impl ParamGrid {
    /// Parameters `(x0, y0)` at the centre of cell `(i, j)`.
    pub fn params(&self, i: usize, j: usize) -> Point {
        self.window.pixel_center(i, j, self.width, self.height)
    }

    fn check(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("parameter grid must be at least 1x1".into()));
        }
        if let ParamFamily::Hyperbolic { a } = self.family {
            if !(a > 0.0) {
                return Err(Error::InvalidArgument(format!("hyperbolic parameter a must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

/// Outcome code and iteration count of the initial point for one cell.
pub fn mps_cell(grid: &ParamGrid, i: usize, j: usize, params: &OrbitParams) -> (u8, u32) {
    let [x0, y0] = grid.params(i, j);
    match NewtonMapModel::from_normal_form(&grid.family.form(x0, y0)) {
        Ok(model) => {
            let o = newton::classify_orbit(&model, grid.initial_point, params);
            (raster::outcome_code(&o.kind), o.iters() as u32)
        }
        Err(Error::EverywhereSingular) => (CODE_INDETERMINATE, 0),
        Err(_) => (CODE_ESCAPED, 0),
    }
}

/// Rows `rows` of the sweep, each row a `(codes, iters)` pair. Rows are
/// independent, so a sweep can be split and resumed by row.
pub fn mps_sweep_rows(
    grid: &ParamGrid,
    rows: std::ops::Range<usize>,
    params: &OrbitParams,
) -> Result<Vec<(Vec<u8>, Vec<u32>)>> {
    grid.check()?;
    if rows.end > grid.height {
        return Err(Error::InvalidArgument(format!("row range {rows:?} exceeds height {}", grid.height)));
    }
    Ok(rows
        .into_par_iter()
        .map(|j| (0..grid.width).map(|i| mps_cell(grid, i, j, params)).unzip())
        .collect())
}

/// Full sweep as a raster in parameter coordinates. Root codes index the
/// roots of each cell's form sorted by `x` then `y`.
pub fn mps_sweep(grid: &ParamGrid, params: &OrbitParams) -> Result<BasinRaster> {
    let rows = mps_sweep_rows(grid, 0..grid.height, params)?;
    let mut codes = Vec::with_capacity(grid.width * grid.height);
    let mut iters = Vec::with_capacity(grid.width * grid.height);
    for (c, it) in rows {
        codes.extend(c);
        iters.extend(it);
    }
    Ok(BasinRaster {
        width: grid.width,
        height: grid.height,
        window: grid.window,
        codes,
        iters,
        max_iter: params.max_iter,
        tol: params.tol,
        n_roots: 4,
    })
}

/// Real root count of one form; odd counts (a double root split by rounding)
/// are replaced by the majority count at nearby parameters.
pub fn root_count(family: ParamFamily, x0: f64, y0: f64) -> u8 {
    let n = pencil::real_roots(&family.form(x0, y0)).real.len() as u8;
    if n.is_multiple_of(2) {
        return n;
    }
    let h = 1e-6 * (1.0 + x0.abs().max(y0.abs()));
    let mut votes = [0usize; 5];
    for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h)] {
        let k = pencil::real_roots(&family.form(x0 + dx, y0 + dy)).real.len();
        if k.is_multiple_of(2) && k <= 4 {
            votes[k] += 1;
        }
    }
    // max_by_key keeps the last maximum, so ties go to the larger count
    [0u8, 2, 4].into_iter().max_by_key(|k| votes[*k as usize]).unwrap_or(n)
}

/// Grid of real root counts, row-major from the top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountGrid {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub counts: Vec<u8>,
}

pub fn root_count_map(grid: &ParamGrid) -> Result<CountGrid> {
    grid.check()?;
    let counts = (0..grid.width * grid.height)
        .into_par_iter()
        .map(|k| {
            let [x0, y0] = grid.params(k % grid.width, k / grid.width);
            root_count(grid.family, x0, y0)
        })
        .collect();
    Ok(CountGrid { width: grid.width, height: grid.height, window: grid.window, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub four_root_cells: usize,
    /// Fraction of 4-root cells whose outcome is a root (1 when there are none).
    pub root_fraction: f64,
    /// `(i, j, code)` of 4-root cells with a non-root outcome.
    pub violations: Vec<(usize, usize, u8)>,
}

/// Checks that the initial point reaches a root wherever the form has four real roots.
pub fn mps_consistency_report(mps: &BasinRaster, counts: &CountGrid) -> Result<ConsistencyReport> {
    if mps.width != counts.width || mps.height != counts.height || mps.codes.len() != counts.counts.len() {
        return Err(Error::GridMismatch(format!(
            "outcome grid {}x{} vs count grid {}x{}",
            mps.width, mps.height, counts.width, counts.height
        )));
    }
    let mut four = 0;
    let mut violations = Vec::new();
    for (k, (&code, &n)) in mps.codes.iter().zip(&counts.counts).enumerate() {
        if n != 4 {
            continue;
        }
        four += 1;
        if code >= 4 {
            violations.push((k % mps.width, k / mps.width, code));
        }
    }
    let root_fraction = if four == 0 { 1.0 } else { 1.0 - violations.len() as f64 / four as f64 };
    Ok(ConsistencyReport { four_root_cells: four, root_fraction, violations })
}

/// `x0,y0,outcome,iters,root_count` per cell, row-major from the top.
pub fn write_mps_csv<W: Write>(mut w: W, mps: &BasinRaster, counts: &CountGrid) -> Result<()> {
    if mps.codes.len() != counts.counts.len() {
        return Err(Error::GridMismatch("csv inputs differ in size".into()));
    }
    let io_err = |e: io::Error| Error::Format(e.to_string());
    writeln!(w, "x0,y0,outcome,iters,root_count").map_err(io_err)?;
    for k in 0..mps.codes.len() {
        let [x0, y0] = mps.window.pixel_center(k % mps.width, k / mps.width, mps.width, mps.height);
        writeln!(w, "{x0},{y0},{},{},{}", raster::code_name(mps.codes[k]), mps.iters[k], counts.counts[k]).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_at_known_parameters() {
        assert_eq!(root_count(ParamFamily::Parabolic, 0.0, 0.0), 2);
        assert_eq!(root_count(ParamFamily::Parabolic, -2.0, 2.0), 4);
        assert_eq!(root_count(ParamFamily::Parabolic, -2.0, -2.0), 0);
    }

    #[test]
    fn cells_at_known_parameters() {
        let grid = ParamGrid {
            family: ParamFamily::Parabolic,
            window: Window::new(-2.5, -1.5, 1.5, 2.5).unwrap(),
            width: 1,
            height: 1,
            initial_point: [0.0, 6.0],
        };
        let (code, _) = mps_cell(&grid, 0, 0, &OrbitParams::default());
        assert!(code < 4, "code {code}");
        let grid = ParamGrid { window: Window::new(-2.5, -1.5, -2.5, -1.5).unwrap(), ..grid };
        let (code, _) = mps_cell(&grid, 0, 0, &OrbitParams::default());
        assert!(code >= 4);
    }

    #[test]
    fn resumable_by_row() {
        let grid = ParamGrid {
            family: ParamFamily::Parabolic,
            window: Window::new(-10.0, 5.0, -5.0, 10.0).unwrap(),
            width: 6,
            height: 5,
            initial_point: [0.0, 6.0],
        };
        let p = OrbitParams::default();
        let full = mps_sweep_rows(&grid, 0..5, &p).unwrap();
        let mut split = mps_sweep_rows(&grid, 0..2, &p).unwrap();
        split.extend(mps_sweep_rows(&grid, 2..5, &p).unwrap());
        assert_eq!(full, split);
    }

    #[test]
    fn synthetic_consistency() {
        let w = Window::square(1.0);
        let mps = BasinRaster {
            width: 2,
            height: 1,
            window: w,
            codes: vec![0, 3],
            iters: vec![1, 1],
            max_iter: 10,
            tol: 1e-9,
            n_roots: 4,
        };
        let counts = CountGrid { width: 2, height: 1, window: w, counts: vec![4, 4] };
        let r = mps_consistency_report(&mps, &counts).unwrap();
        assert_eq!((r.root_fraction, r.violations.len()), (1.0, 0));
        let bad = CountGrid { width: 1, height: 2, ..counts };
        assert!(matches!(mps_consistency_report(&mps, &bad), Err(Error::GridMismatch(_))));
    }
}
