//! Hausdorff distance between finite point sets via an implicit k-d tree.

use rayon::prelude::*;

use crate::{Error, Point, Result};

/// Balanced 2-d tree stored in place: the median of each range is its node.
pub struct KdIndex {
    points: Vec<Point>,
}

impl KdIndex {
    /// `None` for an empty set.
    pub fn new(points: &[Point]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let mut points = points.to_vec();
        build(&mut points, 0);
        Some(Self { points })
    }

    /// Distance from `q` to the nearest indexed point.
    pub fn nearest_distance(&self, q: Point) -> f64 {
        let mut best = f64::INFINITY;
        search(&self.points, 0, q, &mut best);
        best
    }
}

fn build(pts: &mut [Point], axis: usize) {
    if pts.len() <= 1 {
        return;
    }
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = pts.split_at_mut(mid);
    build(left, 1 - axis);
    build(&mut right[1..], 1 - axis);
}

fn search(pts: &[Point], axis: usize, q: Point, best: &mut f64) {
    if pts.is_empty() {
        return;
    }
    let mid = pts.len() / 2;
    let p = pts[mid];
    *best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 { (&pts[..mid], &pts[mid + 1..]) } else { (&pts[mid + 1..], &pts[..mid]) };
    search(near, 1 - axis, q, best);
    if diff.abs() <= *best {
        search(far, 1 - axis, q, best);
    }
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    let idx = KdIndex::new(b).ok_or(Error::EmptyInput)?;
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(a.par_iter().map(|&p| idx.nearest_distance(p)).reduce(|| 0.0, f64::max))
}

/// Symmetric Hausdorff distance between two nonempty finite sets.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    Ok(directed_distance(a, b)?.max(directed_distance(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&a, &[[0.0, 0.0]]).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&a, &[]), Err(Error::EmptyInput));
    }

    #[test]
    fn matches_brute_force() {
        let pts = |s: u64, n: usize| -> Vec<Point> {
            let mut x = s;
            (0..n)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let u = (x >> 11) as f64 / (1u64 << 53) as f64;
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let v = (x >> 11) as f64 / (1u64 << 53) as f64;
                    [10.0 * u - 5.0, 3.0 * v * v]
                })
                .collect()
        };
        let (a, b) = (pts(1, 300), pts(2, 50));
        let brute = a
            .iter()
            .map(|p| b.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(directed_distance(&a, &b).unwrap(), brute);
    }

    #[test]
    fn clustered_sets_with_far_outliers() {
        let mut a: Vec<Point> = (0..200_000).map(|k| [(k % 500) as f64 * 1e-4, (k / 500) as f64 * 1e-4]).collect();
        a.push([1e7, -1e7]);
        let b: Vec<Point> = a.iter().map(|p| [p[0] + 1e-5, p[1]]).collect();
        let d = hausdorff_distance(&a, &b).unwrap();
        assert!((d - 1e-5).abs() < 1e-9, "{d}");
    }
}
