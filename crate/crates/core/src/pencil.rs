//! Quadratic pencils: conic classification, reduction of `(2, 2)` maps to the
//! parabolic or hyperbolic normal form, and root sets.

use nalgebra::Complex;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::linalg::{self, Mat2};
use crate::newton::{self, NewtonMapModel};
use crate::poly2::{low_degree_member, pencil_type};
use crate::{families, univariate, AffineMap2, Error, PlanarMap, Point, Poly2, Result};

pub use crate::poly2::PencilType;

type C64 = Complex<f64>;
pub type ComplexPoint = [C64; 2];

/// Roots closer than this are treated as a multiple root.
pub const GENERIC_SEPARATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConicClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Degenerate,
}

/// `(a, b, c)` with top form `a x^2 + 2 b xy + c y^2`.
fn quadratic_form(p: &Poly2) -> (f64, f64, f64) {
    (p.coeff(2, 0), 0.5 * p.coeff(1, 1), p.coeff(0, 2))
}

/// Type of the level curves of a degree-2 polynomial.
pub fn classify_conic(p: &Poly2) -> Result<ConicClass> {
    if p.degree() != 2 {
        return Err(Error::WrongDegree(p.degree()));
    }
    let (a, b, c) = quadratic_form(p);
    let (d, e, f) = (0.5 * p.coeff(1, 0), 0.5 * p.coeff(0, 1), p.coeff(0, 0));
    let top = a.abs().max(b.abs()).max(c.abs());
    let all = top.max(d.abs()).max(e.abs()).max(f.abs());
    let det3 = a * (c * f - e * e) - b * (b * f - e * d) + d * (b * e - c * d);
    if det3.abs() <= 1e-12 * all.powi(3) {
        return Ok(ConicClass::Degenerate);
    }
    let disc = a * c - b * b;
    Ok(if disc.abs() <= 1e-12 * top * top {
        ConicClass::Parabolic
    } else if disc > 0.0 {
        ConicClass::Elliptic
    } else {
        ConicClass::Hyperbolic
    })
}

/// Canonical representative of an affine conjugacy class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum NormalForm {
    /// `(y - x^2, (x - x0) - (y - y0)^2)`, canonicalized to `x0 + y0 >= 0`.
    Parabolic { x0: f64, y0: f64 },
    /// `(xy - 1, (x - x0)^2 - a (y - y0)^2 - 1)` with `a > 0`, canonicalized
    /// to `x0 >= 0` (and `y0 >= 0` when `x0 = 0`).
    Hyperbolic { x0: f64, y0: f64, a: f64 },
    /// `(p(x, y), y)`: a pencil containing a line.
    DegenerateLine { p: Poly2 },
}

impl NormalForm {
    pub fn map(&self) -> PlanarMap {
        match self {
            NormalForm::Parabolic { x0, y0 } => families::parabolic(*x0, *y0),
            NormalForm::Hyperbolic { x0, y0, a } => families::hyperbolic(*x0, *y0, *a),
            NormalForm::DegenerateLine { p } => PlanarMap { p: p.clone(), q: Poly2::y() },
        }
    }

    /// Coefficients, lowest degree first, of the univariate polynomial whose
    /// roots are the x-coordinates of the roots of the form.
    pub fn root_polynomial(&self) -> Vec<f64> {
        match *self {
            NormalForm::Parabolic { x0, y0 } => vec![x0 + y0 * y0, -1.0, -2.0 * y0, 0.0, 1.0],
            NormalForm::Hyperbolic { x0, y0, a } => {
                vec![-a, 2.0 * a * y0, x0 * x0 - a * y0 * y0 - 1.0, -2.0 * x0, 1.0]
            }
            NormalForm::DegenerateLine { ref p } => {
                let deg = p.degree().max(0) as u32;
                (0..=deg).map(|i| p.coeff(i, 0)).collect()
            }
        }
    }

    /// The point `(x, y)` of the form over a root `x` of [`Self::root_polynomial`].
    fn lift(&self, x: C64) -> ComplexPoint {
        match self {
            NormalForm::Parabolic { .. } => [x, x * x],
            NormalForm::Hyperbolic { .. } => [x, x.inv()],
            NormalForm::DegenerateLine { .. } => [x, C64::new(0.0, 0.0)],
        }
    }
}

/// Affine change of coordinates `psi` and linear recombination `phi` with
/// `phi ∘ f ∘ psi = g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyWitness {
    pub psi: AffineMap2,
    pub phi: Mat2,
}

impl ConjugacyWitness {
    pub const IDENTITY: ConjugacyWitness =
        ConjugacyWitness { psi: AffineMap2::IDENTITY, phi: linalg::IDENTITY };

    pub fn apply(&self, f: &PlanarMap) -> PlanarMap {
        f.compose_affine(&self.psi).combine(&self.phi)
    }

    /// Largest coefficient error of `phi ∘ f ∘ psi` against `g`.
    pub fn residual(&self, f: &PlanarMap, g: &PlanarMap) -> f64 {
        self.apply(f).max_coeff_diff(g)
    }

    /// Witness for `f` given one for `phi ∘ f ∘ psi`, i.e. `self` after `other`.
    fn then(&self, other: &ConjugacyWitness) -> ConjugacyWitness {
        ConjugacyWitness {
            psi: self.psi.compose(&other.psi),
            phi: linalg::mul(&other.phi, &self.phi),
        }
    }
}

/// Real roots and complex-conjugate pairs of a planar map.
///
/// Each complex pair is stored by one representative; its partner is the
/// componentwise conjugate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootSet {
    pub real: Vec<Point>,
    pub complex_pairs: Vec<ComplexPoint>,
}

impl RootSet {
    pub fn count(&self) -> usize {
        self.real.len() + 2 * self.complex_pairs.len()
    }

    /// Both members of every complex pair.
    pub fn complex_roots(&self) -> Vec<ComplexPoint> {
        self.complex_pairs.iter().flat_map(|r| [*r, [r[0].conj(), r[1].conj()]]).collect()
    }
}

impl Serialize for RootSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[[[f64; 2]; 2]; 2]> = self
            .complex_pairs
            .iter()
            .map(|r| {
                let c = |z: C64| [z.re, z.im];
                [[c(r[0]), c(r[1])], [c(r[0].conj()), c(r[1].conj())]]
            })
            .collect();
        let mut st = s.serialize_struct("RootSet", 2)?;
        st.serialize_field("real", &self.real)?;
        st.serialize_field("complex_pairs", &pairs)?;
        st.end()
    }
}

/// Everything known about the roots and normal form of a map.
#[derive(Debug, Clone, Serialize)]
pub struct MapAnalysis {
    pub pencil_type: PencilType,
    pub normal_form: Option<NormalForm>,
    pub witness: Option<ConjugacyWitness>,
    pub roots: RootSet,
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn too_small(x: f64, scale: f64) -> bool {
    !(x.abs() > 1e-10 * scale)
}

/// Affine reduction of a `(2, 2)` map to its normal form.
pub fn reduce_to_normal_form(f: &PlanarMap) -> Result<(NormalForm, ConjugacyWitness)> {
    let ty = pencil_type(f)?;
    if ty != (PencilType { hi: 2, lo: 2 }) {
        return Err(Error::WrongType { expected: "(2, 2)", found: ty });
    }
    // normalize the coefficient scale so tolerances below are relative
    let s = 1.0 / f.p.max_abs_coeff().max(f.q.max_abs_coeff());
    let pre = ConjugacyWitness { psi: AffineMap2::IDENTITY, phi: [[s, 0.0], [0.0, s]] };
    let fs = pre.apply(f);

    let (ap, bp, cp) = quadratic_form(&fs.p);
    let (aq, bq, cq) = quadratic_form(&fs.q);
    let a = ap * cp - bp * bp;
    let c = aq * cq - bq * bq;
    let b = ap * cq + aq * cp - 2.0 * bp * bq;
    let disc = b * b - 4.0 * a * c;
    let np = (ap * ap + 2.0 * bp * bp + cp * cp).sqrt();
    let nq = (aq * aq + 2.0 * bq * bq + cq * cq).sqrt();
    let scale = (np * nq).powi(2);
    let (form, w) = if disc > 1e-10 * scale {
        reduce_parabolic(&fs, a, b, c)?
    } else if disc < -1e-10 * scale {
        reduce_hyperbolic(&fs)?
    } else {
        return Err(Error::NotGeneric("pencil has a double parabolic member".into()));
    };
    let w = pre.then(&w);
    check_separation(&form)?;
    Ok((form, w))
}

fn check_separation(form: &NormalForm) -> Result<()> {
    let rts: Vec<ComplexPoint> =
        univariate::roots(&form.root_polynomial()).into_iter().map(|x| form.lift(x)).collect();
    for i in 0..rts.len() {
        for j in i + 1..rts.len() {
            let d = ((rts[i][0] - rts[j][0]).norm_sqr() + (rts[i][1] - rts[j][1]).norm_sqr()).sqrt();
            if d < GENERIC_SEPARATION {
                return Err(Error::NotGeneric(format!("multiple root near {:?}", rts[i])));
            }
        }
    }
    Ok(())
}

/// Rank-one factor of a degenerate quadratic form: returns `(eps, l)` with
/// `form ≈ eps (l·z)^2`.
fn rank_one_factor(a: f64, b: f64, c: f64) -> (f64, Point) {
    let (l1, v1, l2, v2) = linalg::sym_eig(a, b, c);
    let (l, v) = if l1.abs() >= l2.abs() { (l1, v1) } else { (l2, v2) };
    let r = l.abs().sqrt();
    (sign(l), [r * v[0], r * v[1]])
}

fn reduce_parabolic(f: &PlanarMap, a: f64, b: f64, c: f64) -> Result<(NormalForm, ConjugacyWitness)> {
    // parabolic members s p + t q: roots (s : t) of a s^2 + b s t + c t^2
    let disc = b * b - 4.0 * a * c;
    let qr = -0.5 * (b + sign(b) * disc.sqrt());
    let unit = |v: [f64; 2]| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    let members = [unit([qr, a]), unit([c, qr])];
    let first = reduce_parabolic_ordered(f, members)?;
    let NormalForm::Parabolic { x0, y0 } = first.0 else { unreachable!() };
    if x0 + y0 >= 0.0 {
        return Ok(first);
    }
    reduce_parabolic_ordered(f, [members[1], members[0]])
}

fn reduce_parabolic_ordered(f: &PlanarMap, members: [[f64; 2]; 2]) -> Result<(NormalForm, ConjugacyWitness)> {
    let mut ls = [[0.0; 2]; 2];
    let mut phi = [[0.0; 2]; 2];
    for (k, &[s, t]) in members.iter().enumerate() {
        let (pa, pb, pc) = quadratic_form(&f.p);
        let (qa, qb, qc) = quadratic_form(&f.q);
        let (eps, l) = rank_one_factor(s * pa + t * qa, s * pb + t * qb, s * pc + t * qc);
        ls[k] = l;
        // -eps (s p + t q) has top form -(l·z)^2
        phi[k] = [-eps * s, -eps * t];
    }
    let lmat: Mat2 = [ls[0], ls[1]];
    let Some(linv) = linalg::inverse(&lmat) else {
        return Err(Error::NotGeneric("parabolic members share their axis".into()));
    };
    let psi1 = AffineMap2::linear(linv);
    let g = f.compose_affine(&psi1).combine(&phi);
    // g = (-X^2 + a1 X + b1 Y + c1, -Y^2 + a2 X + b2 Y + c2)
    let (a1, b1, c1) = (g.p.coeff(1, 0), g.p.coeff(0, 1), g.p.coeff(0, 0));
    let (a2, b2) = (g.q.coeff(1, 0), g.q.coeff(0, 1));
    let scale = g.p.max_abs_coeff().max(g.q.max_abs_coeff());
    if too_small(b1, scale) || too_small(a2, scale) {
        return Err(Error::NotGeneric("a parabolic member has a root at infinity".into()));
    }
    let c1t = c1 + a1 * a1 / 4.0 + b1 * b2 / 2.0;
    let sigma = (a2 * b1 * b1).cbrt();
    let tau = sigma * sigma / b1;
    let kappa = -c1t / b1;
    let psi2 = AffineMap2::new([[sigma, 0.0], [0.0, tau]], [a1 / 2.0, kappa + b2 / 2.0]);
    let phi2 = [[1.0 / (sigma * sigma), 0.0], [0.0, 1.0 / (tau * tau)]];
    let w = ConjugacyWitness { psi: psi1.compose(&psi2), phi: linalg::mul(&phi2, &phi) };
    let h = w.apply(f);
    let y0 = h.q.coeff(0, 1) / 2.0;
    let x0 = -(h.q.coeff(0, 0) + y0 * y0);
    Ok((NormalForm::Parabolic { x0: x0 + 0.0, y0: y0 + 0.0 }, w))
}

fn reduce_hyperbolic(f: &PlanarMap) -> Result<(NormalForm, ConjugacyWitness)> {
    let cands: [[[f64; 2]; 2]; 4] = [
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0], [1.0, 0.0]],
        [[1.0, 1.0], [1.0, -1.0]],
        [[1.0, -1.0], [1.0, 1.0]],
    ];
    let mut last = Error::NotGeneric("no hyperbolic reduction found".into());
    for phi0 in cands {
        match reduce_hyperbolic_with(f, phi0) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn reduce_hyperbolic_with(f: &PlanarMap, phi0: Mat2) -> Result<(NormalForm, ConjugacyWitness)> {
    let g0 = f.combine(&phi0);
    let (a, b, c) = quadratic_form(&g0.p);
    let (l1, r1, l2, r2) = linalg::sym_eig(a, b, c);
    if !(l1 > 0.0 && l2 < 0.0) {
        return Err(Error::NotGeneric("first member is not hyperbolic".into()));
    }
    let (s1, s2) = (l1.sqrt(), (-l2).sqrt());
    let ell1 = [s1 * r1[0] - s2 * r2[0], s1 * r1[1] - s2 * r2[1]];
    let ell2 = [s1 * r1[0] + s2 * r2[0], s1 * r1[1] + s2 * r2[1]];
    let linv = linalg::inverse(&[ell1, ell2]).expect("independent asymptotes");
    let psi1 = AffineMap2::linear(linv);
    let g1 = g0.compose_affine(&psi1);
    // g1.p = XY + d X + e Y + c
    let mu = g1.q.coeff(1, 1) / g1.p.coeff(1, 1);
    let phi1 = [[1.0 / g1.p.coeff(1, 1), 0.0], [-mu, 1.0]];
    let g2 = g1.combine(&phi1);
    let (d, e) = (g2.p.coeff(1, 0), g2.p.coeff(0, 1));
    let psi2 = AffineMap2::translation([-e, -d]);
    let g3 = g2.compose_affine(&psi2);
    let cp = g3.p.coeff(0, 0);
    // g3.q = A X^2 + B Y^2 + u X + v Y + w
    let (qa, qb) = (g3.q.coeff(2, 0), g3.q.coeff(0, 2));
    let (u, v, w) = (g3.q.coeff(1, 0), g3.q.coeff(0, 1), g3.q.coeff(0, 0));
    let scale = g3.p.max_abs_coeff().max(g3.q.max_abs_coeff());
    if too_small(cp, scale) || too_small(qa, scale) || too_small(qb, scale) {
        return Err(Error::NotGeneric("hyperbolic reduction degenerates".into()));
    }
    let (mut xc, mut yc) = (-u / (2.0 * qa), -v / (2.0 * qb));
    let fp = w - qa * xc * xc - qb * yc * yc;
    if too_small(fp, scale) {
        return Err(Error::NotGeneric("second member is a line pair".into()));
    }
    let (mut qa, mut qb) = (qa, qb);
    let mut swap = AffineMap2::IDENTITY;
    if qa / -fp < 0.0 {
        swap = AffineMap2::swap();
        std::mem::swap(&mut qa, &mut qb);
        std::mem::swap(&mut xc, &mut yc);
    }
    let alpha = (-fp / qa).sqrt();
    let beta = -cp / alpha;
    let a_par = qb * beta * beta / fp;
    let (mut x0, mut y0) = (xc / alpha, yc / beta);
    let mut psi3 = AffineMap2::linear([[alpha, 0.0], [0.0, beta]]);
    if x0 < 0.0 || (x0 == 0.0 && y0 < 0.0) {
        psi3 = psi3.compose(&AffineMap2::linear([[-1.0, 0.0], [0.0, -1.0]]));
        x0 = -x0;
        y0 = -y0;
    }
    let phi3 = [[-1.0 / cp, 0.0], [0.0, -1.0 / fp]];
    let psi = psi1.compose(&psi2).compose(&swap).compose(&psi3);
    let phi = linalg::mul(&phi3, &linalg::mul(&phi1, &phi0));
    let form = NormalForm::Hyperbolic { x0: x0 + 0.0, y0: y0 + 0.0, a: a_par };
    let wit = ConjugacyWitness { psi, phi };
    if wit.residual(f, &form.map()) > 1e-6 {
        return Err(Error::NotGeneric("hyperbolic reduction failed to verify".into()));
    }
    Ok((form, wit))
}

/// Normalizes a map of type `(m, 1)` to `(p(x, y), y)`.
pub fn normalize_line_pencil(f: &PlanarMap) -> Result<(NormalForm, ConjugacyWitness)> {
    let ty = pencil_type(f)?;
    if ty.lo != 1 {
        return Err(Error::WrongType { expected: "(m, 1)", found: ty });
    }
    let [lam, mu] = low_degree_member(f, 2).expect("a member of degree one");
    let ell = &f.p.scale(lam) + &f.q.scale(mu);
    let n = [ell.coeff(1, 0), ell.coeff(0, 1)];
    let n2 = n[0] * n[0] + n[1] * n[1];
    let c = ell.coeff(0, 0);
    // columns: a direction along the line, then the unit-level normal
    let psi = AffineMap2::new([[n[1], n[0] / n2], [-n[0], n[1] / n2]], [-c * n[0] / n2, -c * n[1] / n2]);
    let row1 = if mu.abs() >= lam.abs() { [1.0, 0.0] } else { [0.0, 1.0] };
    let phi = [row1, [lam, mu]];
    let g = f.compose_affine(&psi).combine(&phi);
    Ok((NormalForm::DegenerateLine { p: g.p }, ConjugacyWitness { psi, phi }))
}

fn polish_real(f: &PlanarMap, mut z: Point) -> Point {
    let mut r = linalg::norm(f.eval(z));
    for _ in 0..8 {
        let Some(ji) = linalg::inverse(&f.jacobian(z)) else { break };
        let step = linalg::mat_vec(&ji, f.eval(z));
        let z1 = [z[0] - step[0], z[1] - step[1]];
        let r1 = linalg::norm(f.eval(z1));
        if !(r1 < r) {
            break;
        }
        z = z1;
        r = r1;
        if r == 0.0 {
            break;
        }
    }
    z
}

fn polish_complex(f: &PlanarMap, mut z: ComplexPoint) -> ComplexPoint {
    let res = |z: ComplexPoint| {
        let v = f.eval_complex(z);
        (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
    };
    let jp = f.jacobian_polys();
    let mut r = res(z);
    for _ in 0..8 {
        let j = [
            [jp[0][0].eval_complex(z), jp[0][1].eval_complex(z)],
            [jp[1][0].eval_complex(z), jp[1][1].eval_complex(z)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let v = f.eval_complex(z);
        let s0 = (j[1][1] * v[0] - j[0][1] * v[1]) / det;
        let s1 = (j[0][0] * v[1] - j[1][0] * v[0]) / det;
        let z1 = [z[0] - s0, z[1] - s1];
        let r1 = res(z1);
        if !(r1 < r) {
            break;
        }
        z = z1;
        r = r1;
        if r == 0.0 {
            break;
        }
    }
    z
}

fn sort_points(pts: &mut [Point]) {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
}

/// Imaginary parts below this (relative) make a root of the root polynomial real.
const IMAG_TOL: f64 = 1e-7;

/// Roots of a normal form, sorted by `x` then `y`.
pub fn real_roots(form: &NormalForm) -> RootSet {
    roots_through(form, &ConjugacyWitness::IDENTITY, &form.map())
}

/// Roots of `f` from its normal form `form = phi ∘ f ∘ psi`.
fn roots_through(form: &NormalForm, w: &ConjugacyWitness, f: &PlanarMap) -> RootSet {
    let xs = univariate::roots(&form.root_polynomial());
    let (real_x, cplx_x) = univariate::split_roots(&xs, IMAG_TOL);
    let mut real: Vec<Point> = real_x
        .into_iter()
        .map(|x| {
            let z = form.lift(C64::new(x, 0.0));
            polish_real(f, w.psi.apply([z[0].re, z[1].re]))
        })
        .collect();
    sort_points(&mut real);
    let complex_pairs = cplx_x
        .into_iter()
        .map(|x| polish_complex(f, w.psi.apply_complex(form.lift(x))))
        .collect();
    RootSet { real, complex_pairs }
}

/// Real roots of an arbitrary map by seeded Newton iteration on `f`; complex
/// roots are not searched for.
pub fn search_real_roots(f: &PlanarMap, half_width: f64, seeds: usize) -> Vec<Point> {
    let mut found: Vec<Point> = Vec::new();
    for i in 0..seeds {
        for j in 0..seeds {
            let t = |k: usize| -half_width + 2.0 * half_width * (k as f64 + 0.5) / seeds as f64;
            let mut z = [t(i), t(j)];
            for _ in 0..60 {
                let Some(ji) = linalg::inverse(&f.jacobian(z)) else { break };
                let s = linalg::mat_vec(&ji, f.eval(z));
                let n = linalg::norm(s);
                let damp = if n > 10.0 { 10.0 / n } else { 1.0 };
                z = [z[0] - damp * s[0], z[1] - damp * s[1]];
                if !(z[0].is_finite() && z[1].is_finite()) || n < 1e-15 * (1.0 + linalg::norm(z)) {
                    break;
                }
            }
            if !(z[0].is_finite() && z[1].is_finite()) {
                continue;
            }
            let z = polish_real(f, z);
            let v = f.eval(z);
            let ok = v[0].abs() <= 1e-10 * (1.0 + f.p.eval_abs(z)) && v[1].abs() <= 1e-10 * (1.0 + f.q.eval_abs(z));
            if ok && !found.iter().any(|r| linalg::dist(*r, z) < 1e-6) {
                found.push(z);
            }
        }
    }
    sort_points(&mut found);
    found
}

/// Pencil type, normal form (when one applies) and roots of `f`.
pub fn analyze_map(f: &PlanarMap) -> Result<MapAnalysis> {
    let ty = pencil_type(f)?;
    let reduced = if ty == (PencilType { hi: 2, lo: 2 }) {
        reduce_to_normal_form(f).ok()
    } else if ty.lo == 1 {
        Some(normalize_line_pencil(f)?)
    } else {
        None
    };
    let roots = match &reduced {
        Some((form, w)) => roots_through(form, w, f),
        None => RootSet { real: search_real_roots(f, 20.0, 32), complex_pairs: Vec::new() },
    };
    let (normal_form, witness) = match reduced {
        Some((form, w)) => (Some(form), Some(w)),
        None => (None, None),
    };
    Ok(MapAnalysis { pencil_type: ty, normal_form, witness, roots })
}

/// Homogeneous coefficients `[a, b, c]` of `a x + b y + c = 0`, scaled so
/// `a^2 + b^2 = 1` with the first nonzero of `a, b` positive.
pub fn normalize_line(l: [f64; 3]) -> [f64; 3] {
    let n = l[0].hypot(l[1]);
    let s = if l[0] < 0.0 || (l[0] == 0.0 && l[1] < 0.0) { -n } else { n };
    [l[0] / s, l[1] / s, l[2] / s]
}

/// The real line carrying the complex line through `r` and its conjugate.
pub fn ghost_line(r: ComplexPoint) -> [f64; 3] {
    let (a, b, c, d) = (r[0].re, r[0].im, r[1].re, r[1].im);
    normalize_line([d, -b, b * c - a * d])
}

/// Ghost lines of a normal form, each checked for invariance under its
/// Newton map.
pub fn ghost_lines(form: &NormalForm, roots: &RootSet) -> Result<Vec<[f64; 3]>> {
    let model = NewtonMapModel::new(form.map())?;
    roots
        .complex_pairs
        .iter()
        .map(|r| {
            let l = ghost_line(*r);
            newton::verify_invariant_line(&model, l).map(|_| l)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly2 {
        s.parse().unwrap()
    }

    #[test]
    fn conic_examples() {
        assert_eq!(classify_conic(&p("x^2 + y^2 - 1")).unwrap(), ConicClass::Elliptic);
        assert_eq!(classify_conic(&p("xy - 1")).unwrap(), ConicClass::Hyperbolic);
        assert_eq!(classify_conic(&p("y - x^2")).unwrap(), ConicClass::Parabolic);
        assert_eq!(classify_conic(&p("x^2 - y^2")).unwrap(), ConicClass::Degenerate);
        assert_eq!(classify_conic(&p("x + y")), Err(Error::WrongDegree(1)));
    }

    #[test]
    fn normal_forms_are_fixed() {
        let (form, w) = reduce_to_normal_form(&families::parabolic(0.0, 0.0)).unwrap();
        assert_eq!(form, NormalForm::Parabolic { x0: 0.0, y0: 0.0 });
        assert!(w.residual(&families::parabolic(0.0, 0.0), &form.map()) < 1e-12);
        let f = families::hyperbolic(5.0, 0.0, 1.0);
        let (form, w) = reduce_to_normal_form(&f).unwrap();
        let NormalForm::Hyperbolic { x0, y0, a } = form else { panic!("{form:?}") };
        assert!((x0 - 5.0).abs() < 1e-12 && y0.abs() < 1e-12 && (a - 1.0).abs() < 1e-12);
        assert!(w.residual(&f, &form.map()) < 1e-12);
    }

    #[test]
    fn swapped_components() {
        let f: PlanarMap = "x - y^2; y - x^2".parse().unwrap();
        let (form, w) = reduce_to_normal_form(&f).unwrap();
        let NormalForm::Parabolic { x0, y0 } = form else { panic!() };
        assert!(x0.abs() < 1e-12 && y0.abs() < 1e-12);
        assert!(w.residual(&f, &form.map()) < 1e-12);
    }

    #[test]
    fn parabolic_canonical_half_plane() {
        let f = families::parabolic(-2.0, -2.0);
        let (form, w) = reduce_to_normal_form(&f).unwrap();
        let NormalForm::Parabolic { x0, y0 } = form else { panic!("{form:?}") };
        assert!((x0 - 2.0).abs() < 1e-12 && (y0 - 2.0).abs() < 1e-12);
        assert!(w.residual(&f, &form.map()) < 1e-12);
    }

    #[test]
    fn roots_of_examples() {
        let rs = real_roots(&NormalForm::Parabolic { x0: 0.0, y0: 0.0 });
        assert_eq!(rs.real.len(), 2);
        assert!(linalg::dist(rs.real[0], [0.0, 0.0]) < 1e-14);
        assert!(linalg::dist(rs.real[1], [1.0, 1.0]) < 1e-14);
        assert_eq!(rs.complex_pairs.len(), 1);
        let rs = real_roots(&NormalForm::Parabolic { x0: -2.0, y0: -2.0 });
        assert_eq!(rs.real.len(), 0);
        assert_eq!(rs.count(), 4);
    }

    #[test]
    fn ghost_line_of_origin_form() {
        let form = NormalForm::Parabolic { x0: 0.0, y0: 0.0 };
        let lines = ghost_lines(&form, &real_roots(&form)).unwrap();
        assert_eq!(lines.len(), 1);
        let s = 0.5f64.sqrt();
        let want = [s, s, s];
        assert!(lines[0].iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{lines:?}");
    }

    #[test]
    fn line_pencil_normalization() {
        let f: PlanarMap = "y + 2x - 1; x^3 + 3x y".parse().unwrap();
        let (form, w) = normalize_line_pencil(&f).unwrap();
        assert!(w.residual(&f, &form.map()) < 1e-12);
        assert!(linalg::det(&w.phi).abs() > 1e-12 && w.psi.det().abs() > 1e-12);
    }
}
