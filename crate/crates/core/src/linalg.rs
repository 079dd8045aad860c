//! Small fixed-size linear algebra used throughout the crate.

use crate::Point;

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[inline]
pub fn adjugate(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let a = adjugate(m);
    Some([[a[0][0] / d, a[0][1] / d], [a[1][0] / d, a[1][1] / d]])
}

#[inline]
pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Point) -> Point {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn frobenius(m: &Mat2) -> f64 {
    (m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2)).sqrt()
}

pub fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

#[inline]
pub fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Eigen-decomposition of the symmetric matrix `[[a, b], [b, c]]`.
///
/// Returns `(lambda1, v1, lambda2, v2)` with `lambda1 >= lambda2` and unit
/// eigenvectors.
pub fn sym_eig(a: f64, b: f64, c: f64) -> (f64, Point, f64, Point) {
    let half_tr = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    let l1 = half_tr + r;
    let l2 = half_tr - r;
    if b == 0.0 {
        return if a >= c {
            (a, [1.0, 0.0], c, [0.0, 1.0])
        } else {
            (c, [0.0, 1.0], a, [1.0, 0.0])
        };
    }
    // (A - l1 I) v = 0, pick the better conditioned row
    let v = if (a - l2).abs() >= (c - l2).abs() {
        [a - l2, b]
    } else {
        [b, c - l2]
    };
    let n = norm(v);
    let v1 = [v[0] / n, v[1] / n];
    (l1, v1, l2, [-v1[1], v1[0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, -1.0], [0.5, 3.0]];
        let p = mul(&m, &inverse(&m).unwrap());
        assert!(frobenius(&sub(&p, &IDENTITY)) < 1e-15);
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn symmetric_eigenpairs() {
        for &(a, b, c) in &[(0.0, 0.5, 0.0), (2.0, 1.0, -3.0), (1.0, 0.0, 4.0), (-1.0, 1e-9, -1.0)] {
            let (l1, v1, l2, v2) = sym_eig(a, b, c);
            assert!(l1 >= l2);
            for (l, v) in [(l1, v1), (l2, v2)] {
                let av = [a * v[0] + b * v[1], b * v[0] + c * v[1]];
                assert!(dist(av, [l * v[0], l * v[1]]) < 1e-12, "{a} {b} {c}");
                assert!((norm(v) - 1.0).abs() < 1e-14);
            }
        }
    }
}
