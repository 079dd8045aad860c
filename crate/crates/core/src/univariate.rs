//! Real univariate polynomials given by ascending coefficient slices.

use nalgebra::{Complex, DMatrix};

type C64 = Complex<f64>;

/// Horner evaluation of `c[0] + c[1] x + ... + c[n] x^n`.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn eval_complex(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Drops leading coefficients that are zero relative to the largest one.
pub fn trim(c: &[f64]) -> &[f64] {
    let scale = c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut n = c.len();
    while n > 0 && c[n - 1].abs() <= 1e-14 * scale {
        n -= 1;
    }
    &c[..n]
}

/// All complex roots, with multiplicity.
///
/// Degrees one and two use closed forms; higher degrees take the eigenvalues
/// of the balanced companion matrix and polish each one with a few Newton
/// steps on the original coefficients.
pub fn roots(c: &[f64]) -> Vec<C64> {
    let c = trim(c);
    // factor out roots at zero
    let zeros = c.iter().take_while(|a| **a == 0.0).count();
    let mut out = vec![C64::new(0.0, 0.0); zeros];
    let c = &c[zeros..];
    match c.len() {
        0 | 1 => {}
        2 => out.push(C64::new(-c[0] / c[1], 0.0)),
        3 => out.extend(quadratic(c[2], c[1], c[0])),
        _ => out.extend(companion_roots(c).into_iter().map(|z| polish(c, z))),
    }
    out
}

fn quadratic(a: f64, b: f64, c: f64) -> [C64; 2] {
    let d = b * b - 4.0 * a * c;
    if d >= 0.0 {
        // avoid cancellation
        let sq = d.sqrt();
        let s = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        if s == 0.0 {
            return [C64::new(0.0, 0.0); 2];
        }
        [C64::new(s / a, 0.0), C64::new(c / s, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-d).sqrt() / (2.0 * a.abs());
        [C64::new(re, im), C64::new(re, -im)]
    }
}

fn companion_roots(c: &[f64]) -> Vec<C64> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    m.complex_eigenvalues().iter().copied().collect()
}

/// Parlett–Reinsch diagonal balancing with powers of two.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if col == 0.0 || r == 0.0 {
                continue;
            }
            let s = col + r;
            let mut f = 1.0;
            let mut cc = col;
            while cc < r / 2.0 {
                cc *= 4.0;
                f *= 2.0;
            }
            while cc > r * 2.0 {
                cc /= 4.0;
                f /= 2.0;
            }
            if (col * f + r / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Newton steps on the complex polynomial, kept only while the residual drops.
pub fn polish(c: &[f64], mut z: C64) -> C64 {
    let dc = derivative(c);
    let mut r = eval_complex(c, z).norm();
    for _ in 0..8 {
        let d = eval_complex(&dc, z);
        if d.norm() == 0.0 || r == 0.0 {
            break;
        }
        let z1 = z - eval_complex(c, z) / d;
        let r1 = eval_complex(c, z1).norm();
        if !(r1 < r) {
            break;
        }
        z = z1;
        r = r1;
    }
    z
}

/// Roots split into real ones (ascending) and conjugate pairs (positive
/// imaginary part listed), using `imag_tol` relative to `1 + |re|`.
pub fn split_roots(rts: &[C64], imag_tol: f64) -> (Vec<f64>, Vec<C64>) {
    let mut real = Vec::new();
    let mut cplx = Vec::new();
    for z in rts {
        if z.im.abs() <= imag_tol * (1.0 + z.re.abs()) {
            real.push(z.re);
        } else if z.im > 0.0 {
            cplx.push(*z);
        }
    }
    real.sort_by(f64::total_cmp);
    cplx.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    (real, cplx)
}

/// Real roots in ascending order.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    split_roots(&roots(c), 1e-7).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factored_quartic() {
        // (x - 2)(x + 1)(x^2 + x - 1) = x^4 - 4x^2 - x + 2
        let r = real_roots(&[2.0, -1.0, -4.0, 0.0, 1.0]);
        let s5 = 5f64.sqrt();
        let want = [(-1.0 - s5) / 2.0, -1.0, (-1.0 + s5) / 2.0, 2.0];
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_pair_of_cubic() {
        // x^3 - 1: one real root and e^{±2πi/3}
        let rts = roots(&[-1.0, 0.0, 0.0, 1.0]);
        let (real, cplx) = split_roots(&rts, 1e-9);
        assert_eq!(real.len(), 1);
        assert!((real[0] - 1.0).abs() < 1e-14);
        assert_eq!(cplx.len(), 1);
        assert!((cplx[0] - C64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn low_degree_cases() {
        assert!(roots(&[3.0]).is_empty());
        assert_eq!(roots(&[1.0, 2.0])[0], C64::new(-0.5, 0.0));
        let q = roots(&[1.0, 1.0, 1.0]);
        assert!(q.iter().all(|z| eval_complex(&[1.0, 1.0, 1.0], *z).norm() < 1e-15));
        let r = real_roots(&[0.0, 0.0, 1.0, -1.0]);
        assert_eq!(r, vec![0.0, 0.0, 1.0]);
        // tiny leading coefficient is trimmed
        assert_eq!(roots(&[-1.0, 1.0, 1e-300]).len(), 1);
    }

    #[test]
    fn large_and_small_roots() {
        // (x - 1e4)(x - 1e-4)(x^2 + 1)
        let c = [1e0, -1e4 - 1e-4, 2.0, -1e4 - 1e-4, 1.0];
        let rts = roots(&c);
        for z in rts {
            assert!(eval_complex(&c, z).norm() < 1e-6 * (1.0 + z.norm().powi(4)));
        }
    }
}
