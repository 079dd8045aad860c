use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use newton_planar::inverse::{self, BranchId, ChaosGameParams, InverseBranchSystem, PointCloud, Provenance};
use newton_planar::mps::{self, ParamFamily, ParamGrid};
use newton_planar::newton::{self, NewtonMapModel, OrbitParams};
use newton_planar::pencil::{self, NormalForm};
use newton_planar::raster::{self, OverlayItem, OverlayShape, Palette, RgbImage, Shading, Window};
use newton_planar::{io, univariate, PlanarMap, Point};

use crate::args::*;
use crate::output::{self, CliResult, Failure, RunRecord};

const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];
const GHOST: [u8; 3] = [255, 0, 255];
const Z_CURVE: [u8; 3] = [120, 200, 255];
const INDETERMINATE: [u8; 3] = [40, 40, 255];
const FLAGGED: [u8; 3] = [0, 160, 0];

pub fn run(cmd: &Command) -> CliResult<Value> {
    match cmd {
        Command::Classify(a) => classify(a),
        Command::Basins(a) => basins(a, cmd),
        Command::Alpha(a) => alpha(a, cmd),
        Command::Mps(a) => mps_cmd(a, cmd),
        Command::Reduce1d(a) => reduce1d(a),
        Command::Replay(a) => replay(a),
    }
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--{name} must be a finite number, got {v}")))
    }
}

/// The normal form named on the command line, or the parsed free-form map.
pub enum ResolvedMap {
    Form(NormalForm),
    Free(PlanarMap),
}

pub fn resolve_map(m: &MapArgs) -> CliResult<ResolvedMap> {
    if let Some(text) = &m.map {
        return Ok(ResolvedMap::Free(text.parse()?));
    }
    let (x0, y0) = (finite("x0", m.x0)?, finite("y0", m.y0)?);
    match m.family.unwrap_or(FamilyName::Parabolic) {
        FamilyName::Parabolic => Ok(ResolvedMap::Form(NormalForm::Parabolic { x0, y0 })),
        FamilyName::Hyperbolic => {
            let a = finite("a", m.a)?;
            if a <= 0.0 {
                return Err(Failure::Usage(format!(
                    "--a must be positive (got {a}); a <= 0 changes the type of the map"
                )));
            }
            if x0 < 0.0 || (x0 == 0.0 && y0 < 0.0) {
                return Err(Failure::Usage(format!(
                    "hyperbolic maps are taken with x0 >= 0; (x0, y0) = ({x0}, {y0}) is conjugate by z -> -z \
                     to the same map with --x0 {} --y0 {}",
                    -x0 + 0.0,
                    -y0 + 0.0
                )));
            }
            Ok(ResolvedMap::Form(NormalForm::Hyperbolic { x0, y0, a }))
        }
    }
}

pub fn build_model(m: &MapArgs) -> CliResult<NewtonMapModel> {
    Ok(match resolve_map(m)? {
        ResolvedMap::Form(form) => NewtonMapModel::from_normal_form(&form)?,
        ResolvedMap::Free(f) => NewtonMapModel::new(f)?,
    })
}

fn orbit_params(o: &OrbitArgs) -> CliResult<OrbitParams> {
    if o.max_iter == 0 {
        return Err(Failure::Usage("--max-iter must be positive".into()));
    }
    if !(o.tol > 0.0 && o.tol.is_finite()) || !(o.escape > 0.0) {
        return Err(Failure::Usage("--tol and --escape must be positive".into()));
    }
    Ok(OrbitParams { max_iter: o.max_iter, tol: o.tol, escape_radius: o.escape })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn write_record(primary: &Path, cmd: &Command, outputs: &[PathBuf], summary: &Value) -> CliResult<PathBuf> {
    let path = output::record_path(primary);
    let rec = RunRecord::new(cmd, outputs.to_vec(), summary.clone());
    output::write_atomic(&path, &output::to_json(&rec))?;
    Ok(path)
}

// ---- classify -------------------------------------------------------------

fn classify(a: &ClassifyArgs) -> CliResult<Value> {
    let model = build_model(&a.map)?;
    let canonical = if model.pencil_type.hi == 2 && model.pencil_type.lo == 2 {
        pencil::reduce_to_normal_form(&model.source).ok().map(|(form, _)| form)
    } else {
        None
    };
    let lines = newton::invariant_lines(&model)?;
    let ind = newton::indeterminacy_points(&model);
    let bounded: Vec<Point> = ind.iter().filter_map(|p| p.point.to_affine()).collect();
    let at_infinity: Vec<[f64; 3]> =
        ind.iter().filter(|p| p.point.is_at_infinity()).map(|p| [p.point.x, p.point.y, p.point.z]).collect();
    let ghost = lines.iter().filter(|l| l.kind == newton::LineKind::Ghost).count();
    Ok(json!({
        "map": model.source.to_string(),
        "pencil_type": model.pencil_type,
        "normal_form": model.normal_form,
        "canonical_form": canonical,
        "witness": model.witness,
        "roots": model.root_set(),
        "real_root_count": model.roots.len(),
        "invariant_lines": lines,
        "ghost_line_count": ghost,
        "indeterminacy": {
            "count": ind.len(),
            "bounded": bounded,
            "at_infinity": at_infinity,
            "points": ind,
        },
        "closed_form_inverse": model.inverse.is_some(),
    }))
}

// ---- basins ---------------------------------------------------------------

fn basin_overlays(model: &NewtonMapModel, window: &Window, kinds: &[OverlayKind], res: usize) -> CliResult<Vec<OverlayItem>> {
    let mut items = Vec::new();
    for kind in kinds {
        match kind {
            OverlayKind::Z => {
                for poly in newton::degeneracy_curve(model, window, res) {
                    items.push(OverlayItem { shape: OverlayShape::Polyline { points: poly }, color: Z_CURVE });
                }
            }
            OverlayKind::Lines => {
                for l in newton::invariant_lines(model)? {
                    let color = if l.kind == newton::LineKind::Ghost { GHOST } else { WHITE };
                    items.push(OverlayItem { shape: OverlayShape::Line { coeffs: l.line }, color });
                }
            }
            OverlayKind::Indeterminacy => {
                for p in newton::indeterminacy_points(model) {
                    if let Some(at) = p.point.to_affine() {
                        items.push(OverlayItem { shape: OverlayShape::Marker { at }, color: INDETERMINATE });
                    }
                }
            }
            OverlayKind::Roots => {
                for &at in &model.roots {
                    items.push(OverlayItem { shape: OverlayShape::Marker { at }, color: WHITE });
                }
            }
        }
    }
    Ok(items)
}

fn basins(a: &BasinsArgs, cmd: &Command) -> CliResult<Value> {
    let window = a.window.window()?;
    let params = orbit_params(&a.orbit)?;
    output::image_format(&a.out)?;
    let mut outputs = vec![a.out.clone()];
    if let Some(raw) = &a.raw {
        outputs.push(with_suffix(raw, ".bin"));
        outputs.push(with_suffix(raw, ".json"));
    }
    for p in &outputs {
        output::check_writable(p)?;
    }
    let model = build_model(&a.map)?;
    let (w, h) = (a.res.width, a.res.height);
    let mut r = raster::raster_basins(&model, &window, w, h, &params)?;
    let extra = if a.detect {
        let rep = raster::detect_extra_attractor(&model, &r, &raster::ExtraAttractorParams::default());
        if rep.present {
            raster::mark_other_attractor(&mut r);
        }
        Some(rep)
    } else {
        None
    };
    let shading = match a.shading {
        ShadingArg::None => Shading::None,
        ShadingArg::LogIter => Shading::LogIter,
    };
    let mut img = raster::render(&r, &Palette::default(), shading);
    raster::overlay(&mut img, &window, &basin_overlays(&model, &window, &a.overlay, w.max(h) / 2)?);
    output::write_image(&a.out, &img)?;
    if a.raw.is_some() {
        let mut bin = Vec::new();
        io::write_raster_bin(&mut bin, &r)?;
        output::write_atomic(&outputs[1], &bin)?;
        output::write_atomic(&outputs[2], &output::to_json(&io::raster_header(&r)))?;
    }
    let fractions: Vec<Value> =
        r.legend().into_iter().map(|(code, name)| json!({"code": code, "class": name, "fraction": r.fraction(code)})).collect();
    let mut summary = json!({
        "map": model.source.to_string(),
        "roots": model.roots,
        "root_fraction": r.root_fraction(),
        "classes": fractions,
    });
    if let Some(rep) = extra {
        summary["extra_attractor"] = json!({
            "present": rep.present,
            "candidate_fraction": rep.candidate_fraction,
            "persistent": rep.persistent,
            "sampled": rep.sampled,
            "mean_line_distance": rep.mean_line_distance,
            "near_ghost_line": rep.near_ghost_line,
        });
    }
    let rec = write_record(&a.out, cmd, &outputs, &summary)?;
    summary["record"] = json!(rec);
    Ok(summary)
}

// ---- alpha ----------------------------------------------------------------

fn allowed_branches(sys: &InverseBranchSystem, names: &[String]) -> CliResult<Vec<BranchId>> {
    if names.is_empty() {
        return Ok(sys.ids().to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let id: BranchId = n.parse()?;
        if !sys.ids().contains(&id) {
            let known: Vec<String> = sys.ids().iter().map(|b| b.to_string()).collect();
            return Err(Failure::Usage(format!("branch {n} does not exist for this map; choose from {}", known.join(","))));
        }
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

pub fn render_cloud(cloud: &PointCloud, window: &Window, res: Resolution) -> RgbImage {
    let mut img = RgbImage::new(res.width, res.height, WHITE);
    let (plain, flagged): (Vec<(Point, bool)>, Vec<(Point, bool)>) =
        cloud.points.iter().copied().zip(cloud.flags.iter().copied()).partition(|(_, f)| !f);
    let items = [
        OverlayItem { shape: OverlayShape::Points { points: plain.into_iter().map(|(p, _)| p).collect() }, color: BLACK },
        OverlayItem { shape: OverlayShape::Points { points: flagged.into_iter().map(|(p, _)| p).collect() }, color: FLAGGED },
    ];
    raster::overlay(&mut img, window, &items);
    img
}

fn alpha(a: &AlphaArgs, cmd: &Command) -> CliResult<Value> {
    let image_window = a.image_window.window()?;
    if a.mode != AlphaMode::Chaos && !a.branches.is_empty() {
        return Err(Failure::Usage("--branches only applies to --mode chaos".into()));
    }
    if a.mode == AlphaMode::Tree && (a.half_plane.is_some() || a.margin != 0.0) {
        return Err(Failure::Usage("--half-plane and --margin do not apply to --mode tree".into()));
    }
    if !(a.margin >= 0.0 && a.margin.is_finite()) {
        return Err(Failure::Usage("--margin must be a nonnegative number".into()));
    }
    if a.cap == 0 {
        return Err(Failure::Usage("--cap must be positive".into()));
    }
    for p in [a.point.0, a.start.0].iter().flatten() {
        finite("point", *p)?;
    }
    let mut outputs = vec![a.out.clone()];
    if let Some(img) = &a.image {
        output::image_format(img)?;
        outputs.push(img.clone());
    }
    for p in &outputs {
        output::check_writable(p)?;
    }
    let model = build_model(&a.map)?;
    let sys = model.inverse.ok_or_else(|| {
        Failure::Math(
            "closed-form inverse branches are only available for maps reducible to the parabolic or hyperbolic normal form"
                .into(),
        )
    })?;
    let half = a.half_plane;
    let margin = a.margin;
    let region = move |z: Point| half.is_none_or(|h| h.contains(z)) && (margin == 0.0 || sys.radicand_margin(z) > margin);
    let mut summary = json!({ "map": model.source.to_string(), "mode": a.mode });
    let cloud = match a.mode {
        AlphaMode::Tree => inverse::preimage_tree(&sys, a.point.0, a.depth, a.cap, a.seed),
        AlphaMode::Chaos => {
            if a.n == 0 {
                return Err(Failure::Usage("--n must be positive".into()));
            }
            let allowed = allowed_branches(&sys, &a.branches)?;
            let params = ChaosGameParams { n: a.n, seed: a.seed, burnin: a.burnin };
            let game = inverse::chaos_game(&sys, &allowed, region, a.start.0, &params);
            summary["stalled"] = json!(game.stalled);
            summary["branches"] = json!(allowed.iter().map(|b| b.to_string()).collect::<Vec<_>>());
            game.cloud
        }
        AlphaMode::Repellor => {
            let seeds = PointCloud::new(vec![a.point.0], Provenance::Seeds);
            let rep = inverse::repellor_iterate(&sys, region, &seeds, a.depth, a.cap, a.seed)?;
            summary["level_sizes"] = json!(rep.level_sizes);
            summary["level_distances"] = json!(rep.level_distances);
            rep.cloud
        }
    };
    let mut bytes = Vec::new();
    let is_csv = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        io::write_cloud_csv(&mut bytes, &cloud)?;
    } else {
        io::write_npc1(&mut bytes, &cloud)?;
    }
    output::write_atomic(&a.out, &bytes)?;
    if let Some(path) = &a.image {
        output::write_image(path, &render_cloud(&cloud, &image_window, a.image_res))?;
    }
    summary["points"] = json!(cloud.len());
    summary["flagged_fraction"] = json!(cloud.flagged_fraction());
    summary["truncated"] = json!(cloud.truncated);
    summary["provenance"] = json!(cloud.provenance);
    let rec = write_record(&a.out, cmd, &outputs, &summary)?;
    summary["record"] = json!(rec);
    Ok(summary)
}

// ---- mps ------------------------------------------------------------------

fn count_image(counts: &mps::CountGrid) -> RgbImage {
    let mut img = RgbImage::new(counts.width, counts.height, BLACK);
    for (k, &n) in counts.counts.iter().enumerate() {
        let c = match n {
            4 => WHITE,
            2 => [128, 128, 128],
            _ => BLACK,
        };
        img.data[3 * k..3 * k + 3].copy_from_slice(&c);
    }
    img
}

fn mps_cmd(a: &MpsArgs, cmd: &Command) -> CliResult<Value> {
    let family = match a.family {
        FamilyName::Parabolic => ParamFamily::Parabolic,
        FamilyName::Hyperbolic => {
            let v = finite("a", a.a)?;
            if v <= 0.0 {
                return Err(Failure::Usage(format!("--a must be positive (got {v})")));
            }
            ParamFamily::Hyperbolic { a: v }
        }
    };
    let window = match a.window {
        Some(w) => w.window()?,
        None => match family {
            ParamFamily::Parabolic => Window::new(-10.0, 5.0, -5.0, 10.0)?,
            ParamFamily::Hyperbolic { .. } => Window::square(10.0),
        },
    };
    let initial_point = match a.init {
        Some(p) => [finite("init", p.0[0])?, finite("init", p.0[1])?],
        None => family.default_initial_point(),
    };
    let params = orbit_params(&a.orbit)?;
    let ext = match a.format {
        ImageFormat::Png => "png",
        ImageFormat::Ppm => "ppm",
    };
    let outputs = vec![
        with_suffix(&a.out_prefix, &format!(".mps.{ext}")),
        with_suffix(&a.out_prefix, &format!(".roots.{ext}")),
        with_suffix(&a.out_prefix, ".csv"),
        with_suffix(&a.out_prefix, ".report.json"),
    ];
    for p in &outputs {
        output::check_writable(p)?;
    }
    let grid = ParamGrid { family, window, width: a.res.width, height: a.res.height, initial_point };
    let sweep = mps::mps_sweep(&grid, &params)?;
    let counts = mps::root_count_map(&grid)?;
    let report = mps::mps_consistency_report(&sweep, &counts)?;
    let mut csv = Vec::new();
    mps::write_mps_csv(&mut csv, &sweep, &counts)?;
    let count_fraction = |n: u8| counts.counts.iter().filter(|c| **c == n).count() as f64 / counts.counts.len() as f64;
    let summary = json!({
        "family": family,
        "window": window,
        "initial_point": initial_point,
        "root_outcome_fraction": sweep.root_fraction(),
        "root_count_fractions": { "0": count_fraction(0), "2": count_fraction(2), "4": count_fraction(4) },
        "four_root_cells": report.four_root_cells,
        "four_root_cells_reaching_a_root": report.root_fraction,
        "violations": report.violations.len(),
    });
    output::write_atomic(&outputs[0], &output::encode_image(&raster::render(&sweep, &Palette::default(), Shading::LogIter), ext)?)?;
    output::write_atomic(&outputs[1], &output::encode_image(&count_image(&counts), ext)?)?;
    output::write_atomic(&outputs[2], &csv)?;
    output::write_atomic(&outputs[3], &output::to_json(&json!({ "summary": summary, "report": report })))?;
    let mut summary = summary;
    let rec = write_record(&a.out_prefix, cmd, &outputs, &summary)?;
    summary["record"] = json!(rec);
    Ok(summary)
}

// ---- reduce1d -------------------------------------------------------------

fn reduce1d(a: &Reduce1dArgs) -> CliResult<Value> {
    let f: PlanarMap = a.map.parse()?;
    let r = newton::reduce_degenerate(&f)?;
    let (num, den) = r.rational();
    let roots = univariate::real_roots(&r.q);
    let mut out = json!({
        "map": f.to_string(),
        "q": r.q,
        "newton_numerator": num,
        "newton_denominator": den,
        "real_roots": roots,
        "embedded_roots": roots.iter().map(|&x| r.embed(x)).collect::<Vec<_>>(),
        "psi": r.psi,
        "phi": r.phi,
    });
    if let Some(x0) = a.start {
        let x0 = finite("start", x0)?;
        let mut orbit = vec![x0];
        let mut x = x0;
        for _ in 0..a.steps {
            match r.newton(x) {
                Some(next) if next.is_finite() => x = next,
                _ => break,
            }
            orbit.push(x);
        }
        out["orbit"] = json!(orbit);
        out["orbit_in_plane"] = json!(orbit.iter().map(|&x| r.embed(x)).collect::<Vec<_>>());
    }
    Ok(out)
}

// ---- replay ---------------------------------------------------------------

fn rebase(p: &mut PathBuf, dir: &Path) {
    if let Some(name) = p.file_name() {
        *p = dir.join(name);
    }
}

fn replay(a: &ReplayArgs) -> CliResult<Value> {
    let rec = RunRecord::load(&a.record)?;
    let mut cmd = rec.config;
    if let Some(dir) = &a.out_dir {
        match &mut cmd {
            Command::Basins(b) => {
                rebase(&mut b.out, dir);
                if let Some(r) = &mut b.raw {
                    rebase(r, dir);
                }
            }
            Command::Alpha(b) => {
                rebase(&mut b.out, dir);
                if let Some(i) = &mut b.image {
                    rebase(i, dir);
                }
            }
            Command::Mps(b) => rebase(&mut b.out_prefix, dir),
            Command::Classify(_) | Command::Reduce1d(_) | Command::Replay(_) => {}
        }
    }
    if matches!(cmd, Command::Replay(_)) {
        return Err(Failure::Usage("a run record cannot contain another replay".into()));
    }
    run(&cmd)
}
