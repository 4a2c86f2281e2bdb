//! End-to-end runs of the binary: exit codes, file emission, and byte
//! determinism. The heavy verification battery is exercised by the library's
//! own integration tests; here we keep to fast commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bianchi-heights"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bianchi-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed with {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn empty_ball_reports_cleanly() {
    let dir = tmp_dir("empty-ball");
    let out = bin()
        .args(["ball", "--D", "1", "--T", "1", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let json = fs::read_to_string(dir.join("ball.json")).unwrap();
    assert!(json.contains("\"schema\": 1"), "summary must carry the schema tag");
    assert!(json.contains("\"count\": 0"), "radius 1 holds no element:\n{json}");
}

#[test]
fn malformed_spec_exits_two() {
    let dir = tmp_dir("bad-spec");
    let bad = dir.join("bad.spec");
    fs::write(&bad, "D 1\n1 0 1 0 0 0\n").unwrap();
    let out = bin()
        .args(["ball", "--T", "2", "--spec"])
        .arg(&bad)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "parse errors are exit 2");
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line"),
        "diagnostic should name the offending line"
    );
}

#[test]
fn conflicting_group_flags_exit_two() {
    let out = bin()
        .args(["ball", "--D", "1", "--spec", "nowhere.spec"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn admissible_lattice_sees_the_even_obstruction() {
    let dir = tmp_dir("admissible");
    let out = bin()
        .args(["admissible", "--D", "1", "--T", "6", "--prime-bound", "3", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let json = fs::read_to_string(dir.join("admissible.json")).unwrap();
    assert!(json.contains("\"l\": 4"), "Gaussian lattice stabilizes at modulus 4:\n{json}");
}

#[test]
fn circle_csv_is_deterministic() {
    let run = |tag: &str| {
        let dir = tmp_dir(tag);
        let out = bin()
            .args(["circle", "--D", "1", "--N", "256", "--out"])
            .arg(&dir)
            .output()
            .unwrap();
        run_ok(&out);
        (
            fs::read(dir.join("circle.csv")).unwrap(),
            fs::read(dir.join("circle.json")).unwrap(),
        )
    };
    let (csv1, json1) = run("circle-a");
    let (csv2, json2) = run("circle-b");
    assert_eq!(csv1, csv2, "identical inputs must give identical bytes");
    assert_eq!(json1, json2);
    let text = String::from_utf8(csv1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,admissible,R_sharp,R_smooth,major,minor"));
    assert_eq!(lines.count(), 257, "one row per n in [256, 512]");
}

#[test]
fn circle_accepts_explicit_radius() {
    let dir = tmp_dir("circle-t");
    let out = bin()
        .args(["circle", "--D", "1", "--N", "256", "--T", "2", "--Q0", "2", "--K0", "8", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let json = fs::read_to_string(dir.join("circle.json")).unwrap();
    assert!(json.contains("\"x\": \"8\""), "X is pinned by N = T^2 X^2:\n{json}");
}

#[test]
fn lgp_small_range_runs_clean() {
    let dir = tmp_dir("lgp");
    let out = bin()
        .args(["lgp", "--D", "1", "--N", "64", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    let stdout = run_ok(&out);
    assert!(stdout.contains("admissible"), "progress lines name the phases");
    let json = fs::read_to_string(dir.join("lgp.json")).unwrap();
    assert!(json.contains("\"oracle_confirmed\": []"), "no genuine exception here:\n{json}");
}

#[test]
fn heights_against_oracle() {
    let dir = tmp_dir("heights");
    let out = bin()
        .args(["heights", "--D", "1", "--T", "4", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let csv = fs::read_to_string(dir.join("heights.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,count,represented"));
    // 1 = |0|^2 + |1|^2 is a height of the inversion generator itself.
    assert!(csv.contains("\n1,") || csv.starts_with("1,"), "height 1 appears");
}

#[test]
fn density_tables_agree_on_fixture() {
    let dir = tmp_dir("density");
    let out = bin()
        .args(["density", "--prime-bound", "7", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let json = fs::read_to_string(dir.join("density.json")).unwrap();
    assert!(json.contains("\"all_agree\": true"), "closed forms match brute force:\n{json}");
}

#[test]
fn thin_fixture_parses_and_enumerates() {
    let dir = tmp_dir("thin");
    let spec = fixtures().join("thin_d1.spec");
    assert!(spec.exists(), "fixture missing at {}", spec.display());
    let out = bin()
        .args(["ball", "--T", "8", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let json = fs::read_to_string(dir.join("ball.json")).unwrap();
    assert!(json.contains("\"saturated\": true"), "small thin ball saturates:\n{json}");
}
