//! Closed-form inverse branches of the normal-form Newton maps and the
//! backward-orbit constructions built on them.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hausdorff;
use crate::pencil::NormalForm;
use crate::{AffineMap2, Error, Point, Result};

/// Default bound on the size of a preimage level.
pub const DEFAULT_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Family {
    Parabolic { x0: f64, y0: f64 },
    Hyperbolic { x0: f64, y0: f64, a: f64 },
}

/// `w_{m,n}` for the parabolic family, `w_+` / `w_-` for the hyperbolic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchId {
    Parabolic { m: u8, n: u8 },
    Plus,
    Minus,
}

pub const PARABOLIC_IDS: [BranchId; 4] = [
    BranchId::Parabolic { m: 0, n: 0 },
    BranchId::Parabolic { m: 0, n: 1 },
    BranchId::Parabolic { m: 1, n: 0 },
    BranchId::Parabolic { m: 1, n: 1 },
];

pub const HYPERBOLIC_IDS: [BranchId; 2] = [BranchId::Plus, BranchId::Minus];

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchId::Parabolic { m, n } => write!(f, "w{m}{n}"),
            BranchId::Plus => write!(f, "w+"),
            BranchId::Minus => write!(f, "w-"),
        }
    }
}

impl FromStr for BranchId {
    type Err = Error;

    /// Accepts `w10`, `10`, `w+`, `+`, `w-`, `-`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix('w').unwrap_or(t);
        match t {
            "+" => Ok(BranchId::Plus),
            "-" => Ok(BranchId::Minus),
            _ => {
                let b = t.as_bytes();
                if b.len() == 2 && b.iter().all(|c| *c == b'0' || *c == b'1') {
                    Ok(BranchId::Parabolic { m: b[0] - b'0', n: b[1] - b'0' })
                } else {
                    Err(Error::InvalidArgument(format!("unknown branch {s:?}")))
                }
            }
        }
    }
}

/// Real preimages of `p` under the parabolic normal-form Newton map.
///
/// `N(z) = p` is equivalent to `f(p) = D^2 f(p - z, p - z) / 2`, which for
/// this family decouples into two square roots.
pub fn parabolic_branches(x0: f64, y0: f64, p: Point) -> Vec<(BranchId, Point)> {
    let r1 = p[0] * p[0] - p[1];
    let r2 = (p[1] - y0) * (p[1] - y0) - p[0] + x0;
    if r1 < 0.0 || r2 < 0.0 {
        return Vec::new();
    }
    let (s1, s2) = (r1.sqrt(), r2.sqrt());
    PARABOLIC_IDS
        .iter()
        .map(|&id| {
            let BranchId::Parabolic { m, n } = id else { unreachable!() };
            let sx = if m == 0 { s1 } else { -s1 };
            let sy = if n == 0 { s2 } else { -s2 };
            (id, [p[0] + sx, p[1] + sy])
        })
        .collect()
}

/// Real preimages of `p` under the hyperbolic normal-form Newton map.
///
/// With `u = p - z`, the equations are `u_x u_y = c1` and
/// `u_x^2 - a u_y^2 = c2`, where `c1`, `c2` are the components of `f(p)`.
pub fn hyperbolic_branches(x0: f64, y0: f64, a: f64, p: Point) -> Vec<(BranchId, Point)> {
    let c1 = p[0] * p[1] - 1.0;
    let c2 = (p[0] - x0).powi(2) - a * (p[1] - y0).powi(2) - 1.0;
    let out = |u: [f64; 2]| {
        vec![(BranchId::Plus, [p[0] - u[0], p[1] - u[1]]), (BranchId::Minus, [p[0] + u[0], p[1] + u[1]])]
    };
    if c1 == 0.0 {
        return if c2 > 0.0 {
            out([c2.sqrt(), 0.0])
        } else if c2 < 0.0 {
            out([0.0, (-c2 / a).sqrt()])
        } else {
            out([0.0, 0.0])
        };
    }
    // positive root of t^2 - c2 t - a c1^2 = 0, t = u_x^2
    let d = (c2 * c2 + 4.0 * a * c1 * c1).sqrt();
    let t = if c2 >= 0.0 { 0.5 * (c2 + d) } else { 2.0 * a * c1 * c1 / (d - c2) };
    let ux = t.sqrt();
    out([ux, c1 / ux])
}

/// Inverse branches of the Newton map of `f`, where `phi ∘ f ∘ psi` is a
/// normal form: the branches are `psi ∘ w ∘ psi^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseBranchSystem {
    pub family: Family,
    pub psi: AffineMap2,
    psi_inv: AffineMap2,
}

impl InverseBranchSystem {
    pub fn new(family: Family) -> Self {
        Self { family, psi: AffineMap2::IDENTITY, psi_inv: AffineMap2::IDENTITY }
    }

    pub fn parabolic(x0: f64, y0: f64) -> Self {
        Self::new(Family::Parabolic { x0, y0 })
    }

    pub fn hyperbolic(x0: f64, y0: f64, a: f64) -> Self {
        Self::new(Family::Hyperbolic { x0, y0, a })
    }

    /// `None` when the form has no closed-form branches or `psi` is singular.
    pub fn for_form(form: &NormalForm, psi: AffineMap2) -> Option<Self> {
        let family = match *form {
            NormalForm::Parabolic { x0, y0 } => Family::Parabolic { x0, y0 },
            NormalForm::Hyperbolic { x0, y0, a } => Family::Hyperbolic { x0, y0, a },
            NormalForm::DegenerateLine { .. } => return None,
        };
        let psi_inv = psi.inverse()?;
        Some(Self { family, psi, psi_inv })
    }

    pub fn ids(&self) -> &'static [BranchId] {
        match self.family {
            Family::Parabolic { .. } => &PARABOLIC_IDS,
            Family::Hyperbolic { .. } => &HYPERBOLIC_IDS,
        }
    }

    /// All real branches at `p`.
    pub fn branches(&self, p: Point) -> Vec<(BranchId, Point)> {
        let q = self.psi_inv.apply(p);
        let mut v = match self.family {
            Family::Parabolic { x0, y0 } => parabolic_branches(x0, y0, q),
            Family::Hyperbolic { x0, y0, a } => hyperbolic_branches(x0, y0, a, q),
        };
        for (_, z) in &mut v {
            *z = self.psi.apply(*z);
        }
        v
    }

    /// Smallest absolute radicand of the branch formulas at `p`. Points where
    /// it is small sit near the boundary of the region with real preimages.
    /// Hyperbolic branches are real everywhere, so the margin is infinite.
    pub fn radicand_margin(&self, p: Point) -> f64 {
        let q = self.psi_inv.apply(p);
        match self.family {
            Family::Parabolic { x0, y0 } => {
                let r1 = q[0] * q[0] - q[1];
                let r2 = (q[1] - y0) * (q[1] - y0) - q[0] + x0;
                r1.abs().min(r2.abs())
            }
            Family::Hyperbolic { .. } => f64::INFINITY,
        }
    }

    pub fn branch(&self, id: BranchId, p: Point) -> Option<Point> {
        self.branches(p).into_iter().find(|(b, _)| *b == id).map(|(_, z)| z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    PreimageTree { depth: usize },
    ChaosGame { n: usize, seed: u64 },
    RepellorIteration { n: usize },
    Seeds,
}

/// Finite set of points with per-point flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
    /// Parallel to `points`; set where a chaos game had to leave the allowed
    /// branches.
    pub flags: Vec<bool>,
    pub provenance: Provenance,
    /// A level exceeded its cap and was subsampled.
    pub truncated: bool,
}

impl PointCloud {
    pub fn new(points: Vec<Point>, provenance: Provenance) -> Self {
        let flags = vec![false; points.len()];
        Self { points, flags, provenance, truncated: false }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn flagged_fraction(&self) -> f64 {
        if self.flags.is_empty() {
            0.0
        } else {
            self.flags.iter().filter(|f| **f).count() as f64 / self.flags.len() as f64
        }
    }
}

/// Keeps `cap` points chosen uniformly (seeded), preserving their order.
fn subsample(points: Vec<Point>, cap: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    if points.len() <= cap {
        return points;
    }
    let mut idx = index::sample(rng, points.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i]).collect()
}

fn expand<F>(sys: &InverseBranchSystem, level: &[Point], keep: F) -> Vec<Point>
where
    F: Fn(Point) -> bool + Sync,
{
    level
        .par_iter()
        .flat_map_iter(|&p| sys.branches(p).into_iter().map(|(_, z)| z).filter(|z| keep(*z)))
        .collect()
}

/// The last level of the breadth-first preimage tree of `p`.
pub fn preimage_tree(sys: &InverseBranchSystem, p: Point, depth: usize, cap: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = vec![p];
    let mut truncated = false;
    for _ in 0..depth {
        let next = expand(sys, &level, |z| z[0].is_finite() && z[1].is_finite());
        truncated |= next.len() > cap;
        level = subsample(next, cap, &mut rng);
        if level.is_empty() {
            break;
        }
    }
    let mut cloud = PointCloud::new(level, Provenance::PreimageTree { depth });
    cloud.truncated = truncated;
    cloud
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosGameParams {
    /// Total number of backward steps.
    pub n: usize,
    pub seed: u64,
    /// Leading steps discarded; clamped to `n - 1`.
    pub burnin: usize,
}

impl ChaosGameParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, burnin: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosGame {
    pub cloud: PointCloud,
    /// The orbit reached a point with no real preimage and ended early.
    pub stalled: bool,
}

/// Random backward orbit of `z0`: each step picks uniformly among the allowed
/// branches whose image passes `region` and has real preimages of its own.
/// When none does it picks among all real branches, still avoiding dead ends
/// if it can, and flags the point.
pub fn chaos_game<F>(
    sys: &InverseBranchSystem,
    allowed: &[BranchId],
    region: F,
    z0: Point,
    params: &ChaosGameParams,
) -> ChaosGame
where
    F: Fn(Point) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let burnin = params.burnin.min(params.n.saturating_sub(1));
    let mut points = Vec::with_capacity(params.n - burnin);
    let mut flags = Vec::with_capacity(params.n - burnin);
    let mut z = z0;
    let mut stalled = false;
    let mut good = Vec::with_capacity(4);
    for step in 0..params.n {
        let all: Vec<(BranchId, Point)> =
            sys.branches(z).into_iter().filter(|(_, w)| w[0].is_finite() && w[1].is_finite()).collect();
        if all.is_empty() {
            stalled = true;
            break;
        }
        let live: Vec<(BranchId, Point)> = all.iter().copied().filter(|(_, w)| has_real_preimage(sys, *w)).collect();
        let fallback = if live.is_empty() { &all } else { &live };
        good.clear();
        good.extend(live.iter().filter(|(id, w)| allowed.contains(id) && region(*w)).map(|(_, w)| *w));
        let (next, flag) = if good.is_empty() {
            (fallback[rng.gen_range(0..fallback.len())].1, true)
        } else {
            (good[rng.gen_range(0..good.len())], false)
        };
        z = next;
        if step >= burnin {
            points.push(z);
            flags.push(flag);
        }
    }
    let cloud = PointCloud {
        points,
        flags,
        provenance: Provenance::ChaosGame { n: params.n, seed: params.seed },
        truncated: false,
    };
    ChaosGame { cloud, stalled }
}

fn has_real_preimage(sys: &InverseBranchSystem, z: Point) -> bool {
    sys.branches(z).iter().any(|(_, w)| w[0].is_finite() && w[1].is_finite())
}

/// Images of `sample` under the allowed branches, restricted to `region`.
pub fn hutchinson<F>(sys: &InverseBranchSystem, allowed: &[BranchId], region: F, sample: &[Point]) -> Vec<Point>
where
    F: Fn(Point) -> bool,
{
    sample
        .iter()
        .flat_map(|&p| sys.branches(p))
        .filter(|(id, w)| allowed.contains(id) && region(*w))
        .map(|(_, w)| w)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repellor {
    pub cloud: PointCloud,
    /// `level_sizes[k]` is the size of level `k + 1`.
    pub level_sizes: Vec<usize>,
    /// Hausdorff distance between levels `k` and `k + 1`, measured in the
    /// chart [`sphere_chart`]; `None` once a level is empty.
    pub level_distances: Vec<Option<f64>>,
}

/// `z / sqrt(1 + |z|^2)`: the upper hemisphere model of the projective plane,
/// seen from above. Preimages escaping to the line at infinity stay at bounded
/// distance from each other.
pub fn sphere_chart(z: Point) -> Point {
    let s = (1.0 + z[0] * z[0] + z[1] * z[1]).sqrt();
    [z[0] / s, z[1] / s]
}

/// Iterates full preimage sets restricted to `region`, `n` times, keeping at
/// most `cap` points per level.
pub fn repellor_iterate<F>(
    sys: &InverseBranchSystem,
    region: F,
    seeds: &PointCloud,
    n: usize,
    cap: usize,
    seed: u64,
) -> Result<Repellor>
where
    F: Fn(Point) -> bool + Sync,
{
    if seeds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = seeds.points.clone();
    let mut charted: Vec<Point> = level.iter().map(|&z| sphere_chart(z)).collect();
    let mut truncated = false;
    let mut level_sizes = Vec::with_capacity(n);
    let mut level_distances = Vec::with_capacity(n);
    for _ in 0..n {
        let next = expand(sys, &level, &region);
        truncated |= next.len() > cap;
        let next = subsample(next, cap, &mut rng);
        level_sizes.push(next.len());
        let next_charted: Vec<Point> = next.iter().map(|&z| sphere_chart(z)).collect();
        level_distances.push(hausdorff::hausdorff_distance(&charted, &next_charted).ok());
        level = next;
        charted = next_charted;
        if level.is_empty() {
            break;
        }
    }
    let mut cloud = PointCloud::new(level, Provenance::RepellorIteration { n });
    cloud.truncated = truncated;
    Ok(Repellor { cloud, level_sizes, level_distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::dist;
    use crate::newton::NewtonMapModel;

    #[test]
    fn radicand_margin_vanishes_on_the_parabolas() {
        let sys = InverseBranchSystem::parabolic(0.0, 0.0);
        assert_eq!(sys.radicand_margin([2.0, 4.0]), 0.0);
        assert_eq!(sys.radicand_margin([4.0, 2.0]), 0.0);
        assert!((sys.radicand_margin([10.0, -3.6]) - 2.96).abs() < 1e-12);
        assert_eq!(InverseBranchSystem::hyperbolic(5.0, 0.0, 1.0).radicand_margin([1.0, 1.0]), f64::INFINITY);
    }

    #[test]
    fn chaos_game_steps_around_dead_ends() {
        // (3, -3.6) has no real preimage here, but its image does have others.
        let sys = InverseBranchSystem::parabolic(-2.0, -2.0);
        let dead = [3.0, -3.6];
        assert!(sys.branches(dead).is_empty());
        let z = NewtonMapModel::new(families::parabolic(-2.0, -2.0)).unwrap().eval(dead).unwrap();
        let pre = sys.branches(z);
        assert!(pre.iter().any(|(_, w)| dist(*w, dead) < 1e-9) && pre.len() > 1);
        let mut params = ChaosGameParams::new(1, 0);
        for seed in 0..20 {
            params.seed = seed;
            let g = chaos_game(&sys, &PARABOLIC_IDS, |_| true, z, &params);
            assert!(dist(g.cloud.points[0], dead) > 1e-6);
            assert!(!g.cloud.flags[0] && !g.stalled);
        }
    }

    #[test]
    fn coincident_branches_at_a_fixed_point() {
        let b = parabolic_branches(0.0, 0.0, [1.0, 1.0]);
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|(_, z)| *z == [1.0, 1.0]));
        let b = parabolic_branches(-2.0, 2.0, [2.0, 4.0]);
        assert!(b.iter().all(|(_, z)| *z == [2.0, 4.0]));
    }

    #[test]
    fn four_preimages_round_trip() {
        let m = NewtonMapModel::new(families::parabolic(0.0, 0.0)).unwrap();
        let b = parabolic_branches(0.0, 0.0, [-2.0, -2.0]);
        assert_eq!(b.len(), 4);
        let s = 6f64.sqrt();
        assert!(b.iter().any(|(_, z)| dist(*z, [-2.0 + s, -2.0 - s]) < 1e-15));
        for (_, z) in b {
            assert!(dist(m.eval(z).unwrap(), [-2.0, -2.0]) < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_points_on_the_hyperbola() {
        let m = NewtonMapModel::new(families::hyperbolic(5.0, 0.0, 1.0)).unwrap();
        let b = hyperbolic_branches(5.0, 0.0, 1.0, [1.0, 1.0]);
        let s = 14f64.sqrt();
        assert!(dist(b[0].1, [1.0 - s, 1.0]) < 1e-15 && dist(b[1].1, [1.0 + s, 1.0]) < 1e-15);
        for (_, z) in b {
            assert!(dist(m.eval(z).unwrap(), [1.0, 1.0]) < 1e-12);
        }
    }

    #[test]
    fn branch_ids_parse() {
        for id in PARABOLIC_IDS.iter().chain(&HYPERBOLIC_IDS) {
            assert_eq!(id.to_string().parse::<BranchId>().unwrap(), *id);
        }
        assert!("w2".parse::<BranchId>().is_err());
    }

    #[test]
    fn tree_depth_zero_is_the_point() {
        let sys = InverseBranchSystem::parabolic(0.0, 0.0);
        let c = preimage_tree(&sys, [1.0, -3.6], 0, DEFAULT_CAP, 0);
        assert_eq!(c.points, vec![[1.0, -3.6]]);
    }

    #[test]
    fn chaos_game_single_step() {
        let sys = InverseBranchSystem::parabolic(0.0, 0.0);
        let g = chaos_game(&sys, &PARABOLIC_IDS, |_| true, [3.0, -3.6], &ChaosGameParams::new(1, 7));
        assert_eq!(g.cloud.len(), 1);
        let first = g.cloud.points[0];
        assert!(sys.branches([3.0, -3.6]).iter().any(|(_, z)| *z == first));
    }
}
