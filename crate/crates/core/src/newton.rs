//! The Newton map of a planar polynomial map as an explicit rational map.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inverse::InverseBranchSystem;
use crate::linalg::{self, Mat2};
use crate::pencil::{self, ComplexPoint, MapAnalysis, NormalForm, RootSet};
use crate::poly2::{pencil_type, Axis, DensePoly, PencilType};
use crate::raster::Window;
use crate::{univariate, AffineMap2, Error, PlanarMap, Point, Poly2, Result};

/// Relative threshold on `|den|`, see [`NewtonMapModel::den_cutoff`].
pub const DEN_EPS: f64 = 1e-12;

/// `N_f(z) = (num_x(z), num_y(z)) / den(z)` together with everything needed to
/// iterate it.
#[derive(Debug, Clone)]
pub struct NewtonMapModel {
    pub source: PlanarMap,
    pub num_x: Poly2,
    pub num_y: Poly2,
    /// `det Df = p_x q_y - p_y q_x`.
    pub den: Poly2,
    pub pencil_type: PencilType,
    pub normal_form: Option<NormalForm>,
    pub witness: Option<pencil::ConjugacyWitness>,
    /// Real roots of the source map, sorted by `x` then `y`.
    pub roots: Vec<Point>,
    /// One representative per complex-conjugate pair of roots.
    pub complex_roots: Vec<ComplexPoint>,
    pub inverse: Option<InverseBranchSystem>,
    fast: Compiled,
}

#[derive(Debug, Clone)]
struct Compiled {
    num_x: DensePoly,
    num_y: DensePoly,
    den: DensePoly,
    den_deg: i32,
    num_deg: i32,
    f: [DensePoly; 2],
    df: [[DensePoly; 2]; 2],
    // hess[b] = [f^b_xx, f^b_xy, f^b_yy]
    hess: [[DensePoly; 3]; 2],
}

impl Compiled {
    fn new(src: &PlanarMap, num_x: &Poly2, num_y: &Poly2, den: &Poly2) -> Self {
        let j = src.jacobian_polys();
        let h = |p: &Poly2| {
            let px = p.partial(Axis::X);
            let py = p.partial(Axis::Y);
            [px.partial(Axis::X).compile(), px.partial(Axis::Y).compile(), py.partial(Axis::Y).compile()]
        };
        Self {
            num_x: num_x.compile(),
            num_y: num_y.compile(),
            den: den.compile(),
            den_deg: den.degree(),
            num_deg: num_x.degree().max(num_y.degree()),
            f: [src.p.compile(), src.q.compile()],
            df: [
                [j[0][0].compile(), j[0][1].compile()],
                [j[1][0].compile(), j[1][1].compile()],
            ],
            hess: [h(&src.p), h(&src.q)],
        }
    }
}

/// Numerators and denominator of `N_f`, assembled from the adjugate of `Df`.
pub fn newton_polys(f: &PlanarMap) -> (Poly2, Poly2, Poly2) {
    let [[px, py], [qx, qy]] = f.jacobian_polys();
    let den = &(&px * &qy) - &(&py * &qx);
    let x = Poly2::x();
    let y = Poly2::y();
    let num_x = &(&x * &den) - &(&(&qy * &f.p) - &(&py * &f.q));
    let num_y = &(&y * &den) - &(&(&px * &f.q) - &(&qx * &f.p));
    (num_x, num_y, den)
}

impl NewtonMapModel {
    /// Builds the model, finding roots, normal form and closed-form inverse
    /// branches where available.
    pub fn new(f: PlanarMap) -> Result<Self> {
        let analysis = pencil::analyze_map(&f)?;
        Self::from_analysis(f, analysis)
    }

    pub fn from_analysis(f: PlanarMap, analysis: MapAnalysis) -> Result<Self> {
        let (num_x, num_y, den) = newton_polys(&f);
        if den.is_zero() {
            return Err(Error::EverywhereSingular);
        }
        let inverse = match (&analysis.normal_form, &analysis.witness) {
            (Some(form), Some(w)) => InverseBranchSystem::for_form(form, w.psi),
            _ => None,
        };
        let fast = Compiled::new(&f, &num_x, &num_y, &den);
        Ok(Self {
            num_x,
            num_y,
            den,
            pencil_type: analysis.pencil_type,
            normal_form: analysis.normal_form,
            witness: analysis.witness,
            roots: analysis.roots.real,
            complex_roots: analysis.roots.complex_pairs,
            inverse,
            fast,
            source: f,
        })
    }

    /// Model with caller-supplied roots and no normal form.
    pub fn with_roots(f: PlanarMap, roots: RootSet) -> Result<Self> {
        let pencil_type = pencil_type(&f)?;
        let analysis = MapAnalysis { pencil_type, normal_form: None, witness: None, roots };
        Self::from_analysis(f, analysis)
    }

    /// Model of a normal form itself, skipping the reduction.
    pub fn from_normal_form(form: &NormalForm) -> Result<Self> {
        let f = form.map();
        let analysis = MapAnalysis {
            pencil_type: pencil_type(&f)?,
            normal_form: Some(form.clone()),
            witness: Some(pencil::ConjugacyWitness::IDENTITY),
            roots: pencil::real_roots(form),
        };
        Self::from_analysis(f, analysis)
    }

    pub fn root_set(&self) -> RootSet {
        RootSet { real: self.roots.clone(), complex_pairs: self.complex_roots.clone() }
    }

    /// `1e-12 (1 + |z|^2)^(deg den / 2)`: below this `|den(z)|` counts as zero.
    pub fn den_cutoff(&self, z: Point) -> f64 {
        DEN_EPS * (1.0 + z[0] * z[0] + z[1] * z[1]).powf(0.5 * self.fast.den_deg as f64)
    }

    fn num_cutoff(&self, z: Point) -> f64 {
        1e-10 * (1.0 + z[0] * z[0] + z[1] * z[1]).powf(0.5 * self.fast.num_deg as f64)
    }

    fn check_den(&self, z: Point, den: f64) -> Result<()> {
        if den.abs() > self.den_cutoff(z) {
            return Ok(());
        }
        let (nx, ny) = (self.fast.num_x.eval(z), self.fast.num_y.eval(z));
        let eps = self.num_cutoff(z);
        if nx.abs() <= eps && ny.abs() <= eps {
            Err(Error::NearIndeterminate { x: z[0], y: z[1] })
        } else {
            Err(Error::NearSingular { x: z[0], y: z[1], den })
        }
    }

    /// `N_f(z)` from the rational form.
    #[inline]
    pub fn eval(&self, z: Point) -> Result<Point> {
        let d = self.fast.den.eval(z);
        self.check_den(z, d)?;
        Ok([self.fast.num_x.eval(z) / d, self.fast.num_y.eval(z) / d])
    }

    /// `z - Df(z)^{-1} f(z)` by a direct 2x2 solve.
    pub fn eval_direct(&self, z: Point) -> Result<Point> {
        let (df, d) = self.df(z);
        self.check_den(z, d)?;
        let f = [self.fast.f[0].eval(z), self.fast.f[1].eval(z)];
        let a = linalg::adjugate(&df);
        let v = linalg::mat_vec(&a, f);
        Ok([z[0] - v[0] / d, z[1] - v[1] / d])
    }

    fn df(&self, z: Point) -> (Mat2, f64) {
        let j = &self.fast.df;
        let m = [[j[0][0].eval(z), j[0][1].eval(z)], [j[1][0].eval(z), j[1][1].eval(z)]];
        (m, linalg::det(&m))
    }

    /// `DN_f(z) = Df^{-1} M` with `M_{bc} = sum_k d_k d_c f^b v^k` and
    /// `v = Df^{-1} f` the Newton step.
    pub fn jacobian(&self, z: Point) -> Result<Mat2> {
        let (df, _) = self.df(z);
        let d = self.fast.den.eval(z);
        self.check_den(z, d)?;
        let a = linalg::adjugate(&df);
        let f = [self.fast.f[0].eval(z), self.fast.f[1].eval(z)];
        let av = linalg::mat_vec(&a, f);
        let v = [av[0] / d, av[1] / d];
        let mut m = [[0.0; 2]; 2];
        for b in 0..2 {
            let h = &self.fast.hess[b];
            let (hxx, hxy, hyy) = (h[0].eval(z), h[1].eval(z), h[2].eval(z));
            m[b][0] = hxx * v[0] + hxy * v[1];
            m[b][1] = hxy * v[0] + hyy * v[1];
        }
        let am = linalg::mul(&a, &m);
        Ok([[am[0][0] / d, am[0][1] / d], [am[1][0] / d, am[1][1] / d]])
    }

    /// Index of a root within `tol` of `z`.
    pub fn nearest_root(&self, z: Point, tol: f64) -> Option<usize> {
        self.roots.iter().position(|r| linalg::dist(*r, z) <= tol)
    }
}

/// Point of the projective plane, stored with `max |c| = 1` and the first
/// nonzero coordinate positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ProjectivePoint {
    /// `None` for the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Option<Self> {
        let m = x.abs().max(y.abs()).max(z.abs());
        if !(m > 0.0) || !m.is_finite() {
            return None;
        }
        let first = [x, y, z].into_iter().find(|c| *c != 0.0).unwrap_or(1.0);
        let s = if first < 0.0 { -m } else { m };
        Some(Self { x: x / s, y: y / s, z: z / s })
    }

    pub fn affine(p: Point) -> Self {
        Self::new(p[0], p[1], 1.0).expect("nonzero")
    }

    pub fn is_at_infinity(&self) -> bool {
        self.z == 0.0
    }

    pub fn to_affine(&self) -> Option<Point> {
        (self.z != 0.0).then(|| [self.x / self.z, self.y / self.z])
    }

    pub fn dist(&self, other: &ProjectivePoint) -> f64 {
        let d = |a: &Self, b: &Self| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
        d(self, other)
    }
}

/// Point where the denominator and at least one numerator of `N_f` vanish.
/// `full` records whether every numerator vanishes there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndeterminacyPoint {
    pub point: ProjectivePoint,
    pub full: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndeterminacySearch {
    pub window: Window,
    pub seeds: usize,
    pub residual: f64,
    pub merge: f64,
}

impl Default for IndeterminacySearch {
    fn default() -> Self {
        Self { window: Window::new(-20.0, 20.0, -20.0, 20.0).expect("valid"), seeds: 64, residual: 1e-10, merge: 1e-6 }
    }
}

fn rel_residual(p: &Poly2, z: Point) -> f64 {
    let v = p.eval(z).abs();
    if v == 0.0 {
        0.0
    } else {
        v / p.eval_abs(z).max(f64::MIN_POSITIVE)
    }
}

/// Levenberg–Marquardt on `(g1, g2) = 0`, then plain Newton polishing.
fn solve_pair(g: [&Poly2; 2], dg: &[[Poly2; 2]; 2], mut z: Point) -> Option<Point> {
    let eval = |z: Point| [g[0].eval(z), g[1].eval(z)];
    let jac = |z: Point| [[dg[0][0].eval(z), dg[0][1].eval(z)], [dg[1][0].eval(z), dg[1][1].eval(z)]];
    let mut lambda = 1e-3;
    let mut r = eval(z);
    let mut cost = r[0] * r[0] + r[1] * r[1];
    for _ in 0..200 {
        if cost == 0.0 {
            break;
        }
        let j = jac(z);
        let jtj = [
            [j[0][0] * j[0][0] + j[1][0] * j[1][0], j[0][0] * j[0][1] + j[1][0] * j[1][1]],
            [j[0][0] * j[0][1] + j[1][0] * j[1][1], j[0][1] * j[0][1] + j[1][1] * j[1][1]],
        ];
        let jtr = [j[0][0] * r[0] + j[1][0] * r[1], j[0][1] * r[0] + j[1][1] * r[1]];
        let mut improved = false;
        for _ in 0..12 {
            let m = [[jtj[0][0] * (1.0 + lambda), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + lambda)]];
            let Some(mi) = linalg::inverse(&m) else {
                lambda *= 10.0;
                continue;
            };
            let s = linalg::mat_vec(&mi, jtr);
            let z1 = [z[0] - s[0], z[1] - s[1]];
            let r1 = eval(z1);
            let c1 = r1[0] * r1[0] + r1[1] * r1[1];
            if c1 < cost {
                let small = linalg::norm(s) <= 1e-15 * (1.0 + linalg::norm(z));
                z = z1;
                r = r1;
                cost = c1;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || linalg::norm(z) > 1e8 {
            break;
        }
    }
    for _ in 0..4 {
        let Some(ji) = linalg::inverse(&jac(z)) else { break };
        let s = linalg::mat_vec(&ji, eval(z));
        let z1 = [z[0] - s[0], z[1] - s[1]];
        let r1 = eval(z1);
        if r1[0].hypot(r1[1]) < r[0].hypot(r[1]) {
            z = z1;
            r = r1;
        } else {
            break;
        }
    }
    (z[0].is_finite() && z[1].is_finite()).then_some(z)
}

/// Common zeros of two binary forms of degree `d` on the line at infinity.
fn common_zeros_at_infinity(forms: &[Poly2], d: u32) -> Vec<ProjectivePoint> {
    let forms: Vec<&Poly2> = forms.iter().filter(|f| !f.is_zero()).collect();
    if forms.is_empty() {
        return Vec::new();
    }
    let mut cands = Vec::new();
    // [0:1:0] is a zero when no form has a pure y^d term
    if forms.iter().all(|f| f.coeff(0, d).abs() <= 1e-12 * f.max_abs_coeff()) {
        cands.push(ProjectivePoint::new(0.0, 1.0, 0.0).expect("nonzero"));
    }
    // [1:t:0]
    for f in &forms {
        let c: Vec<f64> = (0..=d).map(|j| f.coeff(d - j, j)).collect();
        for z in univariate::roots(&c) {
            if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                continue;
            }
            let t = z.re;
            let all = forms.iter().all(|g| {
                let v = g.eval([1.0, t]);
                v.abs() <= 1e-8 * g.eval_abs([1.0, t]).max(f64::MIN_POSITIVE) || v == 0.0
            });
            if all {
                let p = ProjectivePoint::new(1.0, t, 0.0).expect("nonzero");
                if !cands.iter().any(|q: &ProjectivePoint| q.dist(&p) < 1e-6) {
                    cands.push(p);
                }
            }
        }
    }
    cands
}

/// Points of indeterminacy with the default search settings.
pub fn indeterminacy_points(model: &NewtonMapModel) -> Vec<IndeterminacyPoint> {
    indeterminacy_points_with(model, &IndeterminacySearch::default())
}

/// Affine points where `den` and a numerator that is not identically zero
/// both vanish, followed by common zeros of the top-degree forms at infinity.
pub fn indeterminacy_points_with(model: &NewtonMapModel, cfg: &IndeterminacySearch) -> Vec<IndeterminacyPoint> {
    let den = &model.den;
    let dden = [den.partial(Axis::X), den.partial(Axis::Y)];
    let nums: Vec<&Poly2> = [&model.num_x, &model.num_y].into_iter().filter(|p| !p.is_zero()).collect();
    let w = &cfg.window;
    let n = cfg.seeds.max(1);
    let seeds: Vec<Point> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            [
                w.x_min + (i as f64 + 0.5) * (w.x_max - w.x_min) / n as f64,
                w.y_min + (j as f64 + 0.5) * (w.y_max - w.y_min) / n as f64,
            ]
        })
        .collect();
    let mut found: Vec<Point> = Vec::new();
    for num in &nums {
        let dg = [[dden[0].clone(), dden[1].clone()], [num.partial(Axis::X), num.partial(Axis::Y)]];
        let sols: Vec<Point> = seeds
            .par_iter()
            .filter_map(|&s| solve_pair([den, num], &dg, s))
            .filter(|&z| rel_residual(den, z) < cfg.residual && rel_residual(num, z) < cfg.residual)
            .collect();
        for z in sols {
            if !found.iter().any(|q| linalg::dist(*q, z) < cfg.merge) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<IndeterminacyPoint> = found
        .into_iter()
        .map(|z| IndeterminacyPoint {
            point: ProjectivePoint::affine(z),
            full: nums.iter().all(|p| rel_residual(p, z) < 1e-8),
        })
        .collect();
    let d = model.num_x.degree().max(model.num_y.degree()).max(den.degree()).max(0) as u32;
    let tops = [model.num_x.homogeneous_part(d), model.num_y.homogeneous_part(d), den.homogeneous_part(d)];
    for p in common_zeros_at_infinity(&tops, d) {
        out.push(IndeterminacyPoint { point: p, full: true });
    }
    out
}

/// How an invariant line arises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineKind {
    RootPair,
    Ghost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantLine {
    /// `[a, b, c]` with `a x + b y + c = 0` and `a^2 + b^2 = 1`.
    pub line: [f64; 3],
    pub kind: LineKind,
}

/// Samples 20 points of the line and checks their images stay on it.
/// Returns the largest residual.
pub fn verify_invariant_line(model: &NewtonMapModel, l: [f64; 3]) -> Result<f64> {
    let (a, b, c) = (l[0], l[1], l[2]);
    let n2 = a * a + b * b;
    let base = [-a * c / n2, -b * c / n2];
    let dir = [-b, a];
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..40 {
        if used == 20 {
            break;
        }
        // irrational spacing keeps samples away from special points
        let t = -4.0 + 8.0 * ((k as f64) * 0.618_033_988_749_895).fract() + 0.013;
        let z = [base[0] + t * dir[0], base[1] + t * dir[1]];
        let Ok(w) = model.eval(z) else { continue };
        if model.den.eval(z).abs() < 1e-6 * model.den.eval_abs(z) {
            continue;
        }
        let r = (a * w[0] + b * w[1] + c).abs() / (1.0 + linalg::norm(w));
        worst = worst.max(r);
        used += 1;
    }
    if used == 0 || worst > 1e-8 {
        return Err(Error::VerificationFailed { line: l, residual: worst });
    }
    Ok(worst)
}

/// Lines through pairs of real roots and ghost lines of complex pairs, each
/// verified by sampling.
pub fn invariant_lines(model: &NewtonMapModel) -> Result<Vec<InvariantLine>> {
    let mut out = Vec::new();
    let r = &model.roots;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let (p, q) = (r[i], r[j]);
            let a = q[1] - p[1];
            let b = p[0] - q[0];
            let line = pencil::normalize_line([a, b, -(a * p[0] + b * p[1])]);
            verify_invariant_line(model, line)?;
            out.push(InvariantLine { line, kind: LineKind::RootPair });
        }
    }
    for c in &model.complex_roots {
        let line = pencil::ghost_line(*c);
        verify_invariant_line(model, line)?;
        out.push(InvariantLine { line, kind: LineKind::Ghost });
    }
    Ok(out)
}

/// Iteration limits for orbit classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitParams {
    pub max_iter: usize,
    pub tol: f64,
    pub escape_radius: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-9, escape_radius: 1e8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitKind {
    ConvergedToRoot { root_index: usize, iters: usize },
    Cycle { period: usize, points: Vec<Point>, iters: usize },
    Escaped { iters: usize },
    HitIndeterminacy { iters: usize },
    Undecided { iters: usize },
}

/// Forward-orbit classification; `trace_len` counts the iterates visited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitOutcome {
    pub kind: OrbitKind,
    pub trace_len: usize,
}

/// Flat JSON summary of an orbit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    pub iters: usize,
}

impl OrbitOutcome {
    pub fn iters(&self) -> usize {
        match self.kind {
            OrbitKind::ConvergedToRoot { iters, .. }
            | OrbitKind::Cycle { iters, .. }
            | OrbitKind::Escaped { iters }
            | OrbitKind::HitIndeterminacy { iters }
            | OrbitKind::Undecided { iters } => iters,
        }
    }

    pub fn summary(&self) -> OrbitSummary {
        let (kind, root_index, period) = match &self.kind {
            OrbitKind::ConvergedToRoot { root_index, .. } => ("converged_to_root", Some(*root_index), None),
            OrbitKind::Cycle { period, .. } => ("cycle", None, Some(*period)),
            OrbitKind::Escaped { .. } => ("escaped", None, None),
            OrbitKind::HitIndeterminacy { .. } => ("hit_indeterminacy", None, None),
            OrbitKind::Undecided { .. } => ("undecided", None, None),
        };
        OrbitSummary { kind: kind.into(), root_index, period, iters: self.iters() }
    }
}

fn confirm_cycle(model: &NewtonMapModel, z: Point, lam: usize, tol: f64) -> Option<Vec<Point>> {
    let mut pts = Vec::with_capacity(lam + 1);
    pts.push(z);
    let mut w = z;
    for _ in 0..lam {
        w = model.eval(w).ok()?;
        pts.push(w);
    }
    if linalg::dist(w, z) > tol {
        return None;
    }
    // minimal period by divisor scan
    let period = (1..=lam).find(|p| lam.is_multiple_of(*p) && linalg::dist(pts[*p], z) <= tol)?;
    if period < 2 {
        return None;
    }
    pts.truncate(period);
    Some(pts)
}

/// Forward iteration until the orbit settles on a root, escapes, closes a
/// cycle or runs out of steps.
pub fn classify_orbit(model: &NewtonMapModel, z0: Point, params: &OrbitParams) -> OrbitOutcome {
    let tol = params.tol;
    let mut z = z0;
    let mut last_root: Option<usize> = model.nearest_root(z, tol);
    // Brent cycle detection
    let mut tortoise = z0;
    let mut power = 1usize;
    let mut lam = 0usize;
    for it in 1..=params.max_iter.max(1) {
        let next = match model.eval(z) {
            Ok(w) => w,
            Err(Error::NearIndeterminate { .. }) => {
                return OrbitOutcome { kind: OrbitKind::HitIndeterminacy { iters: it - 1 }, trace_len: it };
            }
            Err(_) => return OrbitOutcome { kind: OrbitKind::Escaped { iters: it - 1 }, trace_len: it },
        };
        z = next;
        if !(linalg::norm(z) <= params.escape_radius) {
            return OrbitOutcome { kind: OrbitKind::Escaped { iters: it }, trace_len: it + 1 };
        }
        let here = model.nearest_root(z, tol);
        if let Some(root_index) = here.filter(|_| here == last_root) {
            return OrbitOutcome { kind: OrbitKind::ConvergedToRoot { root_index, iters: it }, trace_len: it + 1 };
        }
        last_root = here;
        lam += 1;
        if linalg::dist(tortoise, z) <= tol {
            if let Some(points) = confirm_cycle(model, z, lam, tol) {
                let period = points.len();
                return OrbitOutcome { kind: OrbitKind::Cycle { period, points, iters: it }, trace_len: it + 1 };
            }
        }
        if lam == power {
            tortoise = z;
            power *= 2;
            lam = 0;
        }
    }
    let iters = params.max_iter.max(1);
    OrbitOutcome { kind: OrbitKind::Undecided { iters }, trace_len: iters + 1 }
}

/// The first `n + 1` points `z0, N(z0), ...`, stopping early where `N` is
/// undefined.
pub fn trace_orbit(model: &NewtonMapModel, z0: Point, n: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(z0);
    let mut z = z0;
    for _ in 0..n {
        match model.eval(z) {
            Ok(w) if w[0].is_finite() && w[1].is_finite() => {
                z = w;
                out.push(z);
            }
            _ => break,
        }
    }
    out
}

/// Newton map of a map of type `(m, 1)`, restricted to its invariant line.
///
/// In the normalized coordinates `g = phi ∘ f ∘ psi = (p(x, y), y)` the
/// Newton map of `g` is `(N_q(x), 0)` with `q(x) = p(x, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedNewton1d {
    /// Coefficients of `q`, lowest degree first.
    pub q: Vec<f64>,
    pub psi: AffineMap2,
    pub phi: Mat2,
}

impl ReducedNewton1d {
    /// `N_q(x) = x - q(x) / q'(x)`; `None` where `q'(x) = 0`.
    pub fn newton(&self, x: f64) -> Option<f64> {
        let dq = univariate::eval(&univariate::derivative(&self.q), x);
        (dq != 0.0).then(|| x - univariate::eval(&self.q, x) / dq)
    }

    /// `N_q'(x) = q q'' / q'^2`.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        let d1 = univariate::derivative(&self.q);
        let d2 = univariate::derivative(&d1);
        let dq = univariate::eval(&d1, x);
        (dq != 0.0).then(|| univariate::eval(&self.q, x) * univariate::eval(&d2, x) / (dq * dq))
    }

    /// `(x q' - q, q')`, the numerator and denominator of `N_q`.
    pub fn rational(&self) -> (Vec<f64>, Vec<f64>) {
        let dq = univariate::derivative(&self.q);
        let n = self.q.len().max(dq.len() + 1);
        let mut num = vec![0.0; n];
        for (k, c) in dq.iter().enumerate() {
            num[k + 1] += c;
        }
        for (k, c) in self.q.iter().enumerate() {
            num[k] -= c;
        }
        (num, dq)
    }

    /// The point `psi(x, 0)` of the original plane.
    pub fn embed(&self, x: f64) -> Point {
        self.psi.apply([x, 0.0])
    }
}

pub fn reduce_degenerate(f: &PlanarMap) -> Result<ReducedNewton1d> {
    let ty = pencil_type(f)?;
    if ty.lo != 1 {
        return Err(Error::WrongType { expected: "(m, 1)", found: ty });
    }
    let (form, w) = pencil::normalize_line_pencil(f)?;
    Ok(ReducedNewton1d { q: form.root_polynomial(), psi: w.psi, phi: w.phi })
}

/// Zero set of `den` in `window` by marching squares on a
/// `resolution x resolution` cell grid, as polylines.
pub fn degeneracy_curve(model: &NewtonMapModel, window: &Window, resolution: usize) -> Vec<Vec<Point>> {
    zero_set(&model.den, window, resolution.max(16))
}

/// Marching squares for the zero set of a polynomial.
pub fn zero_set(p: &Poly2, window: &Window, n: usize) -> Vec<Vec<Point>> {
    let dp = p.compile();
    let dx = (window.x_max - window.x_min) / n as f64;
    let dy = (window.y_max - window.y_min) / n as f64;
    let node = |i: usize, j: usize| [window.x_min + i as f64 * dx, window.y_min + j as f64 * dy];
    let vals: Vec<f64> = (0..(n + 1) * (n + 1)).map(|k| dp.eval(node(k % (n + 1), k / (n + 1)))).collect();
    let v = |i: usize, j: usize| vals[j * (n + 1) + i];
    let neg = |x: f64| x < 0.0;

    // edge ids: horizontal (i, j)->(i+1, j) = 2 * (j * (n + 1) + i), vertical (i, j)->(i, j+1) = that + 1
    let h_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i);
    let v_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i) + 1;
    let mut points: HashMap<usize, Point> = HashMap::new();
    let mut crossing = |e: usize, a: Point, b: Point, fa: f64| -> usize {
        points.entry(e).or_insert_with(|| bisect(&dp, a, b, fa));
        e
    };
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (f00, f10, f11, f01) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            let case = (neg(f00) as u8) | (neg(f10) as u8) << 1 | (neg(f11) as u8) << 2 | (neg(f01) as u8) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            // edges: bottom, right, top, left
            let mut e = |k: usize| match k {
                0 => crossing(h_edge(i, j), node(i, j), node(i + 1, j), f00),
                1 => crossing(v_edge(i + 1, j), node(i + 1, j), node(i + 1, j + 1), f10),
                2 => crossing(h_edge(i, j + 1), node(i, j + 1), node(i + 1, j + 1), f01),
                _ => crossing(v_edge(i, j), node(i, j), node(i, j + 1), f00),
            };
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 | 10 => {
                    let c = dp.eval([window.x_min + (i as f64 + 0.5) * dx, window.y_min + (j as f64 + 0.5) * dy]);
                    // corners 00 and 11 share a sign; the centre decides whether they connect
                    if neg(c) == neg(f00) {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => &[],
            };
            for &(a, b) in pairs {
                let (ea, eb) = (e(a), e(b));
                segs.push((ea, eb));
            }
        }
    }
    chain_segments(&segs, &points)
}

fn bisect(p: &DensePoly, mut a: Point, mut b: Point, fa: f64) -> Point {
    let sa = fa < 0.0;
    for _ in 0..80 {
        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == sa {
            a = m;
        } else {
            b = m;
        }
        if a == b || linalg::dist(a, b) <= f64::EPSILON * (1.0 + linalg::norm(a)) {
            break;
        }
    }
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn chain_segments(segs: &[(usize, usize)], points: &HashMap<usize, Point>) -> Vec<Vec<Point>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    // open chains start at endpoints of degree one; sorted for determinism
    let mut starts: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    starts.sort_unstable();
    let mut all: Vec<usize> = adj.keys().copied().collect();
    all.sort_unstable();
    starts.extend(all);
    for s in starts {
        let Some(&first) = adj[&s].iter().find(|k| !used[**k]) else { continue };
        let mut chain = vec![points[&s]];
        let mut cur = s;
        let mut seg = first;
        loop {
            used[seg] = true;
            let (a, b) = segs[seg];
            let next = if a == cur { b } else { a };
            chain.push(points[&next]);
            cur = next;
            match adj[&cur].iter().find(|k| !used[**k]) {
                Some(&k) => seg = k,
                None => break,
            }
        }
        out.push(chain);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        linalg::dist(a, b) <= tol
    }

    #[test]
    fn origin_form_formula() {
        let m = NewtonMapModel::new(families::parabolic(0.0, 0.0)).unwrap();
        assert_eq!(m.num_x, "2x^2y + y^2".parse().unwrap());
        assert_eq!(m.num_y, "x^2 + 2xy^2".parse().unwrap());
        assert_eq!(m.den, "4xy - 1".parse().unwrap());
        assert_eq!(m.eval([0.0, 0.0]).unwrap(), [0.0, 0.0]);
        assert!(close(m.eval([2.0, 1.0]).unwrap(), [9.0 / 7.0, 8.0 / 7.0], 1e-15));
        assert_eq!(m.eval([0.0, -1.0]).unwrap(), [-1.0, 0.0]);
        assert_eq!(m.eval([-1.0, 0.0]).unwrap(), [0.0, -1.0]);
    }

    #[test]
    fn singular_points_are_reported() {
        let m = NewtonMapModel::new(families::parabolic(0.0, 0.0)).unwrap();
        assert!(matches!(m.eval([1.0, 0.25]), Err(Error::NearSingular { .. })));
        assert!(matches!(m.eval([-0.5, -0.5]), Err(Error::NearIndeterminate { .. })));
        let f: PlanarMap = "x + y; 2x + 2y + 1".parse().unwrap();
        assert_eq!(NewtonMapModel::new(f).unwrap_err(), Error::EverywhereSingular);
    }

    #[test]
    fn rational_and_direct_forms_agree() {
        for (_, f) in families::named() {
            let m = NewtonMapModel::new(f).unwrap();
            for z in [[0.3, 1.7], [-2.2, 0.4], [5.1, -3.3]] {
                let (a, b) = (m.eval(z).unwrap(), m.eval_direct(z).unwrap());
                assert!(linalg::dist(a, b) <= 1e-10 * (1.0 + linalg::norm(a)));
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let m = NewtonMapModel::new(families::parabolic(0.0, 0.0)).unwrap();
        let p = OrbitParams::default();
        let o = classify_orbit(&m, [0.1, 0.05], &p);
        assert!(matches!(o.kind, OrbitKind::ConvergedToRoot { root_index: 0, .. }), "{o:?}");
        let o = classify_orbit(&m, [0.0, -1.0], &p);
        let OrbitKind::Cycle { period, points, .. } = o.kind else { panic!("{o:?}") };
        assert_eq!(period, 2);
        assert_eq!(points, vec![[-1.0, 0.0], [0.0, -1.0]]);
        let o = classify_orbit(&m, [-0.5, -0.5], &p);
        assert!(matches!(o.kind, OrbitKind::HitIndeterminacy { iters: 0 }));
        let json = serde_json::to_value(o.summary()).unwrap();
        assert_eq!(json["kind"], "hit_indeterminacy");
    }

    #[test]
    fn reduced_examples() {
        let r = reduce_degenerate(&families::cubic()).unwrap();
        let (num, den) = r.rational();
        assert_eq!(num, vec![0.0, 0.0, 0.0, 2.0]);
        assert_eq!(den, vec![-1.0, 0.0, 3.0]);
        let r = reduce_degenerate(&families::two_cycle()).unwrap();
        assert_eq!(r.newton(0.0), Some(1.0));
        assert_eq!(r.newton(1.0), Some(0.0));
        assert!(reduce_degenerate(&families::parabolic(0.0, 0.0)).is_err());
    }

    #[test]
    fn projective_normalization() {
        let p = ProjectivePoint::new(-2.0, -2.0, 4.0).unwrap();
        assert_eq!(p, ProjectivePoint { x: 0.5, y: 0.5, z: -1.0 });
        assert_eq!(ProjectivePoint::new(3.0, 3.0, -6.0), Some(p));
        assert!(ProjectivePoint::new(0.0, 0.0, 0.0).is_none());
    }

    #[test]
    fn empty_zero_set() {
        let m = NewtonMapModel::new(families::parabolic(0.0, 0.0)).unwrap();
        let w = Window::new(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(degeneracy_curve(&m, &w, 32).is_empty());
    }
}
