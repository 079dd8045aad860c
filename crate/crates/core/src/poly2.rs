//! Sparse real bivariate polynomials, affine changes of coordinates and
//! planar polynomial maps.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{self, Mat2};
use crate::{Error, Point, Result};

/// Coefficients smaller than this fraction of the largest one are dropped
/// from the result of every arithmetic operation.
pub const PRUNE_REL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Sparse polynomial in `x` and `y`: a map from exponent pairs `(i, j)` to the
/// coefficient of `x^i y^j`. No stored coefficient is zero.
#[derive(Clone, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: f64, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((i, j), c);
        }
        Self { terms }
    }

    pub fn x() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(1.0, 0, 1)
    }

    /// Builds a polynomial from `(i, j, c)` triples, summing repeated exponents.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, f64)>>(terms: I) -> Self {
        let mut out = BTreeMap::new();
        for (i, j, c) in terms {
            *out.entry((i, j)).or_insert(0.0) += c;
        }
        out.retain(|_, c| *c != 0.0);
        Self { terms: out }
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms.keys().map(|&(i, j)| (i + j) as i32).max().unwrap_or(-1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, pt: Point) -> f64 {
        let [x, y] = pt;
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    /// Sum of the absolute values of the terms at `pt`; the natural scale for
    /// judging whether `eval(pt)` is zero up to round-off.
    pub fn eval_abs(&self, pt: Point) -> f64 {
        let [x, y] = [pt[0].abs(), pt[1].abs()];
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c.abs() * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn eval_complex(&self, z: [Complex<f64>; 2]) -> Complex<f64> {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| z[0].powi(i as i32) * z[1].powi(j as i32) * c)
            .sum()
    }

    pub fn partial(&self, axis: Axis) -> Poly2 {
        let terms = self.terms.iter().filter_map(|(&(i, j), &c)| match axis {
            Axis::X if i > 0 => Some((i - 1, j, c * i as f64)),
            Axis::Y if j > 0 => Some((i, j - 1, c * j as f64)),
            _ => None,
        });
        Poly2::from_terms(terms)
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2::from_terms(self.terms().map(|(i, j, c)| (i, j, c * s)))
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly2 {
        Poly2::from_terms(self.terms().filter(|&(i, j, _)| i + j == d))
    }

    /// Drops coefficients below `PRUNE_REL` times the largest one.
    pub fn pruned(mut self) -> Poly2 {
        let thr = PRUNE_REL * self.max_abs_coeff();
        self.terms.retain(|_, c| *c != 0.0 && c.abs() >= thr);
        self
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        let mut out = Poly2::constant(1.0);
        for _ in 0..n {
            out = out.mul_raw(self);
        }
        out.pruned()
    }

    fn mul_raw(&self, other: &Poly2) -> Poly2 {
        let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                *out.entry((i1 + i2, j1 + j2)).or_insert(0.0) += c1 * c2;
            }
        }
        out.retain(|_, c| *c != 0.0);
        Poly2 { terms: out }
    }

    fn add_scaled(&self, other: &Poly2, s: f64) -> Poly2 {
        let mut out = self.terms.clone();
        for (&k, &c) in &other.terms {
            *out.entry(k).or_insert(0.0) += s * c;
        }
        out.retain(|_, c| *c != 0.0);
        Poly2 { terms: out }.pruned()
    }

    /// `self ∘ psi`, i.e. the polynomial `z ↦ self(A z + u)`.
    pub fn compose_affine(&self, psi: &AffineMap2) -> Poly2 {
        let deg = self.degree().max(0) as u32;
        let [[a00, a01], [a10, a11]] = psi.a;
        let sx = Poly2::from_terms([(1, 0, a00), (0, 1, a01), (0, 0, psi.u[0])]);
        let sy = Poly2::from_terms([(1, 0, a10), (0, 1, a11), (0, 0, psi.u[1])]);
        let mut px = vec![Poly2::constant(1.0)];
        let mut py = vec![Poly2::constant(1.0)];
        for k in 1..=deg as usize {
            px.push(px[k - 1].mul_raw(&sx));
            py.push(py[k - 1].mul_raw(&sy));
        }
        let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            let t = px[i as usize].mul_raw(&py[j as usize]);
            for (&k, &v) in &t.terms {
                *out.entry(k).or_insert(0.0) += c * v;
            }
        }
        out.retain(|_, c| *c != 0.0);
        Poly2 { terms: out }.pruned()
    }

    /// Dense representation for fast repeated evaluation.
    pub fn compile(&self) -> DensePoly {
        DensePoly::new(self)
    }

    /// Largest coefficient-wise difference to `other`.
    pub fn max_coeff_diff(&self, other: &Poly2) -> f64 {
        let mut keys: Vec<_> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|(i, j)| (self.coeff(i, j) - other.coeff(i, j)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({self})")
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        self.add_scaled(rhs, 1.0)
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self.add_scaled(rhs, -1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        self.mul_raw(rhs).pruned()
    }
}

impl Mul<f64> for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: f64) -> Poly2 {
        self.scale(rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly2> for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: &Poly2) -> Poly2 {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        // descending total degree, then descending power of x
        keys.sort_by_key(|&(i, j)| std::cmp::Reverse((i + j, i)));
        for (n, (i, j)) in keys.into_iter().enumerate() {
            let c = self.terms[&(i, j)];
            let mag = c.abs();
            match (n, c < 0.0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts = Vec::new();
            if mag != 1.0 || (i == 0 && j == 0) {
                parts.push(format!("{mag}"));
            }
            match i {
                0 => {}
                1 => parts.push("x".into()),
                _ => parts.push(format!("x^{i}")),
            }
            match j {
                0 => {}
                1 => parts.push("y".into()),
                _ => parts.push(format!("y^{j}")),
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl FromStr for Poly2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser::new(s).parse()
    }
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Recursive-descent parser for sums of monomials such as `"y - x^2"`,
/// `"3xy + 2.5*x^2*y - 1"` or `"yx"`.
struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, chars: src.chars().collect(), pos: 0 }
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse { input: self.src.to_string(), reason: reason.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Poly2> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return Err(self.err("empty expression")),
                None => break,
                Some('+') => {
                    self.pos += 1;
                    1.0
                }
                Some('-') => {
                    self.pos += 1;
                    -1.0
                }
                Some(_) if first => 1.0,
                Some(c) => return Err(self.err(format!("expected '+' or '-' at {c:?}"))),
            };
            first = false;
            let (c, i, j) = self.term()?;
            terms.push((i, j, sign * c));
        }
        Ok(Poly2::from_terms(terms))
    }

    fn term(&mut self) -> Result<(f64, u32, u32)> {
        let (mut c, mut i, mut j) = (1.0, 0u32, 0u32);
        let mut factors = 0;
        loop {
            match self.peek() {
                Some('*') if factors > 0 => {
                    self.pos += 1;
                    continue;
                }
                Some(ch) if ch.is_ascii_digit() || ch == '.' => c *= self.number()?,
                Some(ch @ ('x' | 'X' | 'y' | 'Y')) => {
                    self.pos += 1;
                    let e = if self.peek() == Some('^') {
                        self.pos += 1;
                        self.exponent()?
                    } else {
                        1
                    };
                    if ch.eq_ignore_ascii_case(&'x') {
                        i += e;
                    } else {
                        j += e;
                    }
                }
                _ => break,
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(self.err(format!("expected a term at position {}", self.pos)));
        }
        Ok((c, i, j))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let n = self.chars.len();
        while self.pos < n && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.') {
            self.pos += 1;
        }
        if self.pos < n && matches!(self.chars[self.pos], 'e' | 'E') {
            let mut k = self.pos + 1;
            if k < n && matches!(self.chars[k], '+' | '-') {
                k += 1;
            }
            if k < n && self.chars[k].is_ascii_digit() {
                self.pos = k;
                while self.pos < n && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err(format!("bad number {text:?}")))
    }

    fn exponent(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("exponent must be a non-negative integer"))
    }
}

/// Dense coefficient table of a [`Poly2`], evaluated by nested Horner.
#[derive(Debug, Clone)]
pub struct DensePoly {
    deg: usize,
    // coeffs[j * (deg + 1) + i] multiplies x^i y^j
    coeffs: Vec<f64>,
}

impl DensePoly {
    fn new(p: &Poly2) -> Self {
        let deg = p.degree().max(0) as usize;
        let mut coeffs = vec![0.0; (deg + 1) * (deg + 1)];
        for (i, j, c) in p.terms() {
            coeffs[j as usize * (deg + 1) + i as usize] = c;
        }
        Self { deg, coeffs }
    }

    #[inline]
    pub fn eval(&self, pt: Point) -> f64 {
        let n = self.deg + 1;
        let mut acc = 0.0;
        for j in (0..n).rev() {
            let row = &self.coeffs[j * n..(j + 1) * n];
            let mut r = 0.0;
            for i in (0..n - j).rev() {
                r = r * pt[0] + row[i];
            }
            acc = acc * pt[1] + r;
        }
        acc
    }
}

/// Affine automorphism `z ↦ A z + u` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap2 {
    pub a: Mat2,
    pub u: Point,
}

impl AffineMap2 {
    pub const IDENTITY: AffineMap2 = AffineMap2 { a: linalg::IDENTITY, u: [0.0, 0.0] };

    pub fn new(a: Mat2, u: Point) -> Self {
        Self { a, u }
    }

    pub fn linear(a: Mat2) -> Self {
        Self { a, u: [0.0, 0.0] }
    }

    pub fn translation(u: Point) -> Self {
        Self { a: linalg::IDENTITY, u }
    }

    /// `(x, y) ↦ (y, x)`.
    pub fn swap() -> Self {
        Self::linear([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn apply(&self, z: Point) -> Point {
        let v = linalg::mat_vec(&self.a, z);
        [v[0] + self.u[0], v[1] + self.u[1]]
    }

    pub fn apply_complex(&self, z: [Complex<f64>; 2]) -> [Complex<f64>; 2] {
        let a = &self.a;
        [
            z[0] * a[0][0] + z[1] * a[0][1] + self.u[0],
            z[0] * a[1][0] + z[1] * a[1][1] + self.u[1],
        ]
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap2) -> AffineMap2 {
        AffineMap2 { a: linalg::mul(&self.a, &inner.a), u: self.apply(inner.u) }
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.a)
    }

    pub fn inverse(&self) -> Option<AffineMap2> {
        let ai = linalg::inverse(&self.a)?;
        let v = linalg::mat_vec(&ai, self.u);
        Some(AffineMap2 { a: ai, u: [-v[0], -v[1]] })
    }
}

/// Polynomial map `f = (p, q)` of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarMap {
    pub p: Poly2,
    pub q: Poly2,
}

impl PlanarMap {
    pub fn new(p: Poly2, q: Poly2) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::ZeroMap);
        }
        Ok(Self { p, q })
    }

    pub fn eval(&self, z: Point) -> Point {
        [self.p.eval(z), self.q.eval(z)]
    }

    pub fn eval_complex(&self, z: [Complex<f64>; 2]) -> [Complex<f64>; 2] {
        [self.p.eval_complex(z), self.q.eval_complex(z)]
    }

    /// Symbolic Jacobian `[[p_x, p_y], [q_x, q_y]]`.
    pub fn jacobian_polys(&self) -> [[Poly2; 2]; 2] {
        [
            [self.p.partial(Axis::X), self.p.partial(Axis::Y)],
            [self.q.partial(Axis::X), self.q.partial(Axis::Y)],
        ]
    }

    pub fn jacobian(&self, z: Point) -> Mat2 {
        let j = self.jacobian_polys();
        [[j[0][0].eval(z), j[0][1].eval(z)], [j[1][0].eval(z), j[1][1].eval(z)]]
    }

    /// `det Df = p_x q_y - p_y q_x`.
    pub fn jacobian_det(&self) -> Poly2 {
        let j = self.jacobian_polys();
        &(&j[0][0] * &j[1][1]) - &(&j[0][1] * &j[1][0])
    }

    pub fn degree(&self) -> i32 {
        self.p.degree().max(self.q.degree())
    }

    /// `f ∘ psi`.
    pub fn compose_affine(&self, psi: &AffineMap2) -> PlanarMap {
        PlanarMap { p: self.p.compose_affine(psi), q: self.q.compose_affine(psi) }
    }

    /// `phi ∘ f` for a linear map `phi` of the target plane.
    pub fn combine(&self, phi: &Mat2) -> PlanarMap {
        PlanarMap {
            p: &self.p.scale(phi[0][0]) + &self.q.scale(phi[0][1]),
            q: &self.p.scale(phi[1][0]) + &self.q.scale(phi[1][1]),
        }
    }

    pub fn max_coeff_diff(&self, other: &PlanarMap) -> f64 {
        self.p.max_coeff_diff(&other.p).max(self.q.max_coeff_diff(&other.q))
    }
}

impl fmt::Display for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; {}", self.p, self.q)
    }
}

impl FromStr for PlanarMap {
    type Err = Error;

    /// Parses `"p; q"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let (Some(p), Some(q), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                input: s.to_string(),
                reason: "expected two components separated by ';'".into(),
            });
        };
        PlanarMap::new(p.parse()?, q.parse()?)
    }
}

/// Highest and lowest degree over the nonzero members of `span(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PencilType {
    pub hi: u32,
    pub lo: u32,
}

impl fmt::Display for PencilType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.hi, self.lo)
    }
}

const RANK_TOL: f64 = 1e-12;

/// True when the coefficient vectors of `p` and `q` restricted to monomials of
/// total degree `>= d` span less than two dimensions.
fn tail_rank_deficient(p: &Poly2, q: &Poly2, d: u32) -> bool {
    let norm_p = p.terms().map(|t| t.2 * t.2).sum::<f64>().sqrt();
    let norm_q = q.terms().map(|t| t.2 * t.2).sum::<f64>().sqrt();
    let mut keys: Vec<(u32, u32)> = p
        .terms()
        .chain(q.terms())
        .filter(|&(i, j, _)| i + j >= d)
        .map(|(i, j, _)| (i, j))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    for (i, j) in keys {
        let (a, b) = (p.coeff(i, j), q.coeff(i, j));
        aa += a * a;
        bb += b * b;
        ab += a * b;
    }
    if aa.sqrt() <= RANK_TOL * norm_p || bb.sqrt() <= RANK_TOL * norm_q {
        return true;
    }
    // squared sine of the angle between the two tails
    let sin2 = 1.0 - (ab * ab) / (aa * bb);
    sin2 <= RANK_TOL * RANK_TOL
}

/// Type of the pencil spanned by the components of `f`.
pub fn pencil_type(f: &PlanarMap) -> Result<PencilType> {
    if tail_rank_deficient(&f.p, &f.q, 0) {
        return Err(Error::DegeneratePencil);
    }
    let hi = f.degree().max(0) as u32;
    // lo is the least d such that some member has no terms of degree > d
    let lo = (0..=hi).find(|&d| tail_rank_deficient(&f.p, &f.q, d + 1)).unwrap_or(hi);
    Ok(PencilType { hi, lo })
}

/// Coefficients `(lambda, mu)` of a member `lambda p + mu q` whose terms of
/// degree `>= d` vanish, normalized to unit length. `None` when only the zero
/// combination does.
pub fn low_degree_member(f: &PlanarMap, d: u32) -> Option<[f64; 2]> {
    if !tail_rank_deficient(&f.p, &f.q, d) {
        return None;
    }
    let mut keys: Vec<(u32, u32)> =
        f.p.terms().chain(f.q.terms()).filter(|&(i, j, _)| i + j >= d).map(|(i, j, _)| (i, j)).collect();
    keys.sort_unstable();
    keys.dedup();
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    for (i, j) in keys {
        let (a, b) = (f.p.coeff(i, j), f.q.coeff(i, j));
        aa += a * a;
        bb += b * b;
        ab += a * b;
    }
    // null vector of the 2x2 Gram matrix [[aa, ab], [ab, bb]]
    let (_, _, _, v) = linalg::sym_eig(aa, ab, bb);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly2 {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("y - x^2").eval([1.0, 1.0]), 0.0);
        assert_eq!(p("xy - 1").eval([2.0, 0.5]), 0.0);
        assert_eq!(p("x^4 - 3x^2 + xy + 2").eval([1.0, 0.0]), 0.0);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(p("y - x^2").partial(Axis::X), p("-2x"));
        assert_eq!(p("xy - 1").partial(Axis::Y), p("x"));
        assert_eq!(p("x^3 + 3xy - x").partial(Axis::X), p("3x^2 + 3y - 1"));
    }

    #[test]
    fn degree_of_zero_is_negative() {
        assert_eq!(Poly2::zero().degree(), -1);
        assert_eq!(p("3").degree(), 0);
        assert_eq!(p("x^2y + y").degree(), 3);
    }

    #[test]
    fn compose_examples() {
        let f = p("y - x^2");
        assert_eq!(f.compose_affine(&AffineMap2::IDENTITY), f);
        assert_eq!(p("x").compose_affine(&AffineMap2::translation([3.0, 0.0])), p("x + 3"));
        assert_eq!(f.compose_affine(&AffineMap2::swap()), p("x - y^2"));
    }

    #[test]
    fn parser_accepts_common_spellings() {
        assert_eq!(p("3*x*y"), p("3xy"));
        assert_eq!(p("yx"), p("x y"));
        assert_eq!(p("x^2y"), Poly2::monomial(1.0, 2, 1));
        assert_eq!(p("-x + 2.5e-1 y^3"), Poly2::from_terms([(1, 0, -1.0), (0, 3, 0.25)]));
        assert_eq!(p(" - 1 + x - x"), p("-1"));
        assert!("".parse::<Poly2>().is_err());
        assert!("x +".parse::<Poly2>().is_err());
        assert!("x ^ -2".parse::<Poly2>().is_err());
        assert!("x z".parse::<Poly2>().is_err());
    }

    #[test]
    fn display_parses_back() {
        for s in ["y - x^2", "x^3 + 3xy - x", "0.1x^2 - 1e-7 y + 4", "0", "-x^2*y^2"] {
            let a = p(s);
            assert_eq!(p(&a.to_string()), a, "{s} -> {a}");
        }
    }

    #[test]
    fn dense_matches_sparse() {
        let a = p("x^4 - 3x^2 + xy + 2 - 0.5y^3 + x^2y^2");
        let d = a.compile();
        for z in [[0.3, -1.2], [2.0, 0.5], [-3.0, 7.0]] {
            assert!((d.eval(z) - a.eval(z)).abs() < 1e-12 * (1.0 + a.eval_abs(z)));
        }
    }

    #[test]
    fn pencil_type_examples() {
        let f: PlanarMap = "x^3 + 3xy - x; y".parse().unwrap();
        assert_eq!(pencil_type(&f).unwrap(), PencilType { hi: 3, lo: 1 });
        let f: PlanarMap = "y - x^2; x - y^2".parse().unwrap();
        assert_eq!(pencil_type(&f).unwrap(), PencilType { hi: 2, lo: 2 });
        let f: PlanarMap = "x^2; 2x^2".parse().unwrap();
        assert_eq!(pencil_type(&f), Err(Error::DegeneratePencil));
        // a combination cancels the leading forms: x^2 + y and x^2 + x - 1
        let f: PlanarMap = "x^2 + y; x^2 + x - 1".parse().unwrap();
        assert_eq!(pencil_type(&f).unwrap(), PencilType { hi: 2, lo: 1 });
        let f: PlanarMap = "x^2 + y; x^2 + 3".parse().unwrap();
        assert_eq!(pencil_type(&f).unwrap(), PencilType { hi: 2, lo: 1 });
        let f: PlanarMap = "x^2 + 1; x^2 + 3".parse().unwrap();
        assert_eq!(pencil_type(&f).unwrap(), PencilType { hi: 2, lo: 0 });
    }

    #[test]
    fn affine_group_laws() {
        let a = AffineMap2::new([[1.0, 2.0], [-0.5, 3.0]], [0.25, -1.0]);
        let b = AffineMap2::new([[0.0, 1.0], [1.0, 1.0]], [2.0, 0.0]);
        let z = [0.7, -1.3];
        let ab = a.compose(&b);
        assert!(linalg::dist(ab.apply(z), a.apply(b.apply(z))) < 1e-14);
        let id = a.compose(&a.inverse().unwrap());
        assert!(linalg::dist(id.apply(z), z) < 1e-14);
        assert!(AffineMap2::linear([[1.0, 1.0], [1.0, 1.0]]).inverse().is_none());
    }

    #[test]
    fn planar_map_parsing() {
        let f: PlanarMap = "y-x^2;x-y^2".parse().unwrap();
        assert_eq!(f.eval([1.0, 1.0]), [0.0, 0.0]);
        assert_eq!(f.jacobian_det(), p("4xy - 1"));
        assert!("y".parse::<PlanarMap>().is_err());
        assert_eq!("0; 0".parse::<PlanarMap>(), Err(Error::ZeroMap));
    }
}
