use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_newton-planar"));
    c.env_remove("NEWTON_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn inventory(v: &Value) -> (u64, u64, u64) {
    (
        v["real_root_count"].as_u64().unwrap(),
        v["ghost_line_count"].as_u64().unwrap(),
        v["indeterminacy"]["count"].as_u64().unwrap(),
    )
}

#[test]
fn classify_parabolic_origin() {
    let v = json(&run(&["classify", "--family", "parabolic", "--x0", "0", "--y0", "0"]));
    assert_eq!(inventory(&v), (2, 1, 3));
    let b = &v["indeterminacy"]["bounded"][0];
    assert!((b[0].as_f64().unwrap() + 0.5).abs() < 1e-8 && (b[1].as_f64().unwrap() + 0.5).abs() < 1e-8);

    let w = json(&run(&["classify", "--map", "y-x^2;x-y^2"]));
    assert_eq!(inventory(&w), (2, 1, 3));
    assert_eq!(w["canonical_form"]["type"], "Parabolic");
}

#[test]
fn classify_hyperbolic_and_negative_parameters() {
    let v = json(&run(&["classify", "--family", "hyperbolic", "--x0", "5", "--y0", "0", "--a", "1"]));
    assert_eq!(v["real_root_count"], 4);
    let v = json(&run(&["classify", "--family", "parabolic", "--x0", "-2", "--y0", "2"]));
    assert_eq!(v["real_root_count"], 4);
    assert_eq!(v["indeterminacy"]["count"], 5);
}

#[test]
fn classify_errors() {
    assert_eq!(code(&run(&["classify", "--map", "x^2;2x^2"])), 3);
    assert_eq!(code(&run(&["classify", "--map", "x^2 +* y;y"])), 2);
    let neg = run(&["classify", "--family", "hyperbolic", "--x0", "-5", "--y0", "1"]);
    assert_eq!(code(&neg), 2);
    assert!(String::from_utf8_lossy(&neg.stderr).contains("--x0 5 --y0 -1"));
    assert_eq!(code(&run(&["classify", "--family", "hyperbolic", "--x0", "5", "--a", "-1"])), 2);
    assert_eq!(code(&run(&["classify", "--family", "parabolic", "--map", "x;y"])), 2);
}

#[test]
fn basins_validation_and_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.png");
    let o = out.to_str().unwrap();
    assert_eq!(code(&run(&["basins", "--window", "1,1,0,1", "--res", "8", "--out", o])), 2);
    assert_eq!(code(&run(&["basins", "--res", "0", "--out", o])), 2);
    assert_eq!(code(&run(&["basins", "--res", "8", "--out", "x.gif"])), 2);
    let missing = dir.path().join("no/such/dir/b.png");
    assert_eq!(code(&run(&["basins", "--res", "8", "--out", missing.to_str().unwrap()])), 4);
    assert!(!out.exists());
}

#[test]
fn basins_are_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "basins", "--family", "parabolic", "--x0", "-2", "--y0", "2", "--window", "-6,10,-10,6", "--res", "64x48",
        "--overlay", "roots,lines,z,indeterminacy", "--out", "b.png", "--raw", "raw",
    ];
    let v = json(&run_in(dir.path(), &args));
    assert!(v["root_fraction"].as_f64().unwrap() > 0.9);
    let first = std::fs::read(dir.path().join("b.png")).unwrap();
    let raw = std::fs::read(dir.path().join("raw.bin")).unwrap();
    assert_eq!(raw.len(), 64 * 48 * 5);

    for threads in ["1", "3"] {
        let other = tempfile::tempdir().unwrap();
        let o = bin().current_dir(other.path()).env("NEWTON_THREADS", threads).args(args).output().unwrap();
        assert!(o.status.success());
        assert_eq!(std::fs::read(other.path().join("b.png")).unwrap(), first);
        assert_eq!(std::fs::read(other.path().join("raw.bin")).unwrap(), raw);
    }

    let copy = tempfile::tempdir().unwrap();
    let rec = dir.path().join("b.png.run.json");
    json(&run(&["replay", rec.to_str().unwrap(), "--out-dir", copy.path().to_str().unwrap()]));
    assert_eq!(std::fs::read(copy.path().join("b.png")).unwrap(), first);
    assert_eq!(std::fs::read(copy.path().join("raw.bin")).unwrap(), raw);
    let load = |p: &Path| serde_json::from_slice::<Value>(&std::fs::read(p).unwrap()).unwrap();
    assert_eq!(load(&copy.path().join("b.png.run.json"))["summary"], load(&rec)["summary"]);
}

#[test]
fn basins_of_a_degenerate_map_and_ppm_output() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run_in(
        dir.path(),
        &["basins", "--map", "x^3+3xy-x;y", "--window", "-4,4,-4,4", "--res", "32", "--shading", "none", "--out", "f.ppm"],
    ));
    assert!(v["root_fraction"].as_f64().unwrap() > 0.5);
    let ppm = std::fs::read(dir.path().join("f.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n32 32\n255\n"));
    assert_eq!(ppm.len(), 13 + 32 * 32 * 3);
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = bin().env("NEWTON_THREADS", "zero").args(["classify"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn alpha_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run_in(dir.path(), &["alpha", "--mode", "tree", "--point", "1,-3.6", "--depth", "0", "--out", "t.csv"]));
    assert_eq!(v["points"], 1);
    assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x,y,flag\n1,-3.6,0\n");

    let v = json(&run_in(dir.path(), &["alpha", "--mode", "tree", "--depth", "3", "--out", "t.npc1"]));
    let bytes = std::fs::read(dir.path().join("t.npc1")).unwrap();
    assert_eq!(&bytes[..4], b"NPC1");
    assert_eq!(bytes.len() as u64, 32 + 16 * v["points"].as_u64().unwrap());

    let args = [
        "alpha", "--mode", "chaos", "--n", "5000", "--start", "3,-3.6", "--branches", "w10,w01,w11", "--half-plane",
        "1,1,1", "--seed", "8", "--out", "c.csv", "--image", "c.png", "--image-window", "-3,3,-3,3", "--image-res", "64",
    ];
    let v = json(&run_in(dir.path(), &args));
    assert_eq!(v["points"], 4900);
    assert_eq!(v["flagged_fraction"], 0.0);
    let first = std::fs::read(dir.path().join("c.csv")).unwrap();
    json(&run_in(dir.path(), &args));
    assert_eq!(std::fs::read(dir.path().join("c.csv")).unwrap(), first);

    let v = json(&run_in(
        dir.path(),
        &["alpha", "--mode", "repellor", "--point", "10,-3.6", "--depth", "6", "--margin", "0.05", "--out", "r.npc1"],
    ));
    assert_eq!(v["level_sizes"].as_array().unwrap().len(), 6);
}

#[test]
fn alpha_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("c.csv");
    let o = o.to_str().unwrap();
    assert_eq!(code(&run(&["alpha", "--map", "x^3+3xy-x;y", "--out", o])), 3);
    assert_eq!(code(&run(&["alpha", "--mode", "chaos", "--branches", "w+", "--out", o])), 2);
    assert_eq!(code(&run(&["alpha", "--mode", "tree", "--branches", "w00", "--out", o])), 2);
    assert_eq!(code(&run(&["alpha", "--mode", "chaos", "--n", "0", "--out", o])), 2);
}

#[test]
fn mps_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run_in(dir.path(), &["mps", "--family", "parabolic", "--res", "1", "--out-prefix", "one"]));
    assert_eq!(v["initial_point"], serde_json::json!([0.0, 6.0]));
    for f in ["one.mps.png", "one.roots.png", "one.csv", "one.report.json", "one.run.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("-2.5,2.5,"));

    let v = json(&run_in(dir.path(), &["mps", "--family", "hyperbolic", "--res", "16", "--format", "ppm", "--out-prefix", "h"]));
    assert!(v["four_root_cells"].as_u64().unwrap() > 0);
    assert!(dir.path().join("h.mps.ppm").exists());
    assert_eq!(code(&run_in(dir.path(), &["mps", "--family", "hyperbolic", "--a", "0", "--out-prefix", "h"])), 2);
}

#[test]
fn reduce1d_finds_the_two_cycle() {
    let v = json(&run(&["reduce1d", "--map", "x^3 + x y - 2x + 2; y", "--start", "0", "--steps", "4"]));
    assert_eq!(v["orbit"], serde_json::json!([0.0, 1.0, 0.0, 1.0, 0.0]));
    assert_eq!(code(&run(&["reduce1d", "--map", "y - x^2; x - y^2"])), 3);
}
