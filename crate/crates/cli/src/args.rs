use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use newton_planar::raster::Window;

fn floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {what} as {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
        if !o.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

/// `x,y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pair(pub [f64; 2]);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        floats::<2>(s, "a point").map(Pair)
    }
}

/// `a,b,c` for the closed half-plane `a x + b y + c <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfPlane(pub [f64; 3]);

impl FromStr for HalfPlane {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = floats::<3>(s, "a half-plane")?;
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err("half-plane needs a nonzero normal (a, b)".into());
        }
        Ok(HalfPlane(v))
    }
}

impl HalfPlane {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.0[0] * p[0] + self.0[1] * p[1] + self.0[2] <= 0.0
    }
}

/// `x_min,x_max,y_min,y_max`; the area check happens in [`WindowArg::window`]
/// so that it exits with a validation error rather than a usage error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WindowArg(pub [f64; 4]);

impl FromStr for WindowArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        floats::<4>(s, "a window x_min,x_max,y_min,y_max").map(WindowArg)
    }
}

impl WindowArg {
    pub fn window(&self) -> newton_planar::Result<Window> {
        let [a, b, c, d] = self.0;
        Window::new(a, b, c, d)
    }
}

/// `N` or `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Resolution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad resolution {s:?}"));
        let (width, height) = match s.split_once(['x', 'X']) {
            Some((w, h)) => (parse(w)?, parse(h)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if width == 0 || height == 0 || width > 1 << 15 || height > 1 << 15 {
            return Err(format!("resolution {s:?} must be between 1 and 32768 per side"));
        }
        Ok(Resolution { width, height })
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Parabolic,
    Hyperbolic,
}

/// A map given either as a named normal form or as a free-form pair `p; q`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MapArgs {
    /// Normal-form family (default: parabolic with x0 = y0 = 0).
    #[arg(long, value_enum, conflicts_with = "map")]
    pub family: Option<FamilyName>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y0: f64,
    /// Hyperbolic shape parameter, must be positive.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Free-form map `p; q`, e.g. "y - x^2; x - y^2".
    #[arg(long)]
    pub map: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Convergence radius around a root.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e8)]
    pub escape: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadingArg {
    None,
    LogIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlayKind {
    /// Real roots.
    Roots,
    /// Invariant lines through root pairs and ghost lines.
    Lines,
    /// The degeneracy curve `det Df = 0`.
    Z,
    /// Bounded points of indeterminacy.
    Indeterminacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// Full preimage tree of one point.
    Tree,
    /// Random backward orbit with restricted branches.
    Chaos,
    /// Repeated full preimages of a seed inside a region.
    Repellor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageFormat {
    Png,
    Ppm,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct BasinsArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value = "-10,10,-10,10", allow_hyphen_values = true)]
    pub window: WindowArg,
    #[arg(long, default_value = "512")]
    pub res: Resolution,
    #[command(flatten)]
    pub orbit: OrbitArgs,
    #[arg(long, value_enum, default_value_t = ShadingArg::LogIter)]
    pub shading: ShadingArg,
    /// Comma-separated overlays drawn on top of the basins.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub overlay: Vec<OverlayKind>,
    /// Look for an attractor other than the roots and paint it separately.
    #[arg(long)]
    pub detect: bool,
    /// Image path; `.png` or `.ppm`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump raw codes and iteration counts to `<RAW>.bin` + `<RAW>.json`.
    #[arg(long)]
    pub raw: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_enum, default_value_t = AlphaMode::Tree)]
    pub mode: AlphaMode,
    /// Root of the preimage tree, or seed of the repellor iteration.
    #[arg(long, default_value = "1,-3.6", allow_hyphen_values = true)]
    pub point: Pair,
    /// Tree depth, or number of repellor levels.
    #[arg(long, default_value_t = 11)]
    pub depth: usize,
    /// Start of the chaos game.
    #[arg(long, default_value = "3,-3.6", allow_hyphen_values = true)]
    pub start: Pair,
    /// Chaos-game steps.
    #[arg(long, default_value_t = 300_000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub burnin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allowed branches, e.g. w10,w01,w11 (default: all).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub branches: Vec<String>,
    /// Region `a x + b y + c <= 0` the chaos game and repellor stay in.
    #[arg(long, allow_hyphen_values = true)]
    pub half_plane: Option<HalfPlane>,
    /// Repellor: drop points whose branch radicands are within this margin of zero.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    /// Maximum points kept per tree or repellor level.
    #[arg(long, default_value_t = newton_planar::inverse::DEFAULT_CAP)]
    pub cap: usize,
    /// Cloud path; `.csv`, or NPC1 binary for any other extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional rendering of the cloud (`.png` or `.ppm`).
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, default_value = "-10,10,-10,10", allow_hyphen_values = true)]
    pub image_window: WindowArg,
    #[arg(long, default_value = "800")]
    pub image_res: Resolution,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct MpsArgs {
    #[arg(long, value_enum, default_value_t = FamilyName::Parabolic)]
    pub family: FamilyName,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Parameter window over (x0, y0); defaults to [-10,5]x[-5,10] (parabolic)
    /// or [-10,10]^2 (hyperbolic).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<WindowArg>,
    #[arg(long, default_value = "256")]
    pub res: Resolution,
    /// Initial point shared by all cells; defaults to (0,6) or (5,5).
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<Pair>,
    #[command(flatten)]
    pub orbit: OrbitArgs,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub format: ImageFormat,
    /// Writes `<PREFIX>.mps.<ext>`, `<PREFIX>.roots.<ext>`, `<PREFIX>.csv`
    /// and `<PREFIX>.report.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct Reduce1dArgs {
    /// Map of type (m, 1), e.g. "x^3 + x y - 2x + 2; y".
    #[arg(long)]
    pub map: String,
    /// Optional start of a 1-D Newton orbit.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `.run.json` record written next to an earlier output.
    pub record: PathBuf,
    /// Write the outputs into this directory instead of their original places.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Normal form, roots, invariant lines and indeterminacy points (JSON).
    Classify(ClassifyArgs),
    /// Basins of attraction of the roots.
    Basins(BasinsArgs),
    /// Backward orbits: preimage trees, chaos games, repellor iteration.
    Alpha(AlphaArgs),
    /// Parameter-space sweep of a fixed initial point.
    Mps(MpsArgs),
    /// Newton map of a degenerate (m, 1) map restricted to its invariant line.
    #[command(name = "reduce1d")]
    Reduce1d(Reduce1dArgs),
    /// Re-run the command stored in a run record.
    Replay(ReplayArgs),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!("1,-3.6".parse::<Pair>().unwrap(), Pair([1.0, -3.6]));
        assert!("1".parse::<Pair>().is_err());
        assert!("nan,1".parse::<Pair>().is_err());
        assert_eq!("-6,10,-10,6".parse::<WindowArg>().unwrap(), WindowArg([-6.0, 10.0, -10.0, 6.0]));
        assert!("1,1,0,1".parse::<WindowArg>().unwrap().window().is_err());
        assert_eq!("64x32".parse::<Resolution>().unwrap(), Resolution { width: 64, height: 32 });
        assert_eq!("7".parse::<Resolution>().unwrap(), Resolution { width: 7, height: 7 });
        assert!("0".parse::<Resolution>().is_err());
        let h: HalfPlane = "1,1,1".parse().unwrap();
        assert!(h.contains([-1.0, 0.0]) && !h.contains([0.0, 0.0]));
        assert!("0,0,1".parse::<HalfPlane>().is_err());
    }
}
