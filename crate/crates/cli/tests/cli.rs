use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factorsource")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metric(stdout: &str, name: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name}=")))
        .unwrap_or_else(|| panic!("no {name} in {stdout}"))
        .parse()
        .unwrap()
}

fn write_config(dir: &Path, from: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = edit(std::fs::read_to_string(config(from)).unwrap());
    let p = dir.join("edited.conf");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn kite_strip_simulate_and_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kite_strip.conf");
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    let record = std::fs::read_to_string(dir.path().join("kite_strip_dir0.csv")).unwrap();
    assert_eq!(record.lines().count(), 32);
    assert_eq!(record.lines().next(), Some("k,re,im"));

    let stdout = run_ok(&["reconstruct", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    assert!(metric(&stdout, "strip_contrast") >= 10.0);
    assert!(dir.path().join("kite_strip_field.csv").exists());
    assert!(dir.path().join("kite_strip_field.pgm").exists());
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kite_strip.conf");
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    run_ok(&["reconstruct", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    for name in ["simulate_manifest.json", "reconstruct_manifest.json"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let manifest: factorsource::RunManifest = serde_json::from_str(&text).unwrap();
        assert!(!manifest.files.is_empty());
        assert!(manifest.verify(dir.path()).is_empty(), "{name}");
    }
}

#[test]
fn eight_directions_give_eight_records() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["simulate", "--config", path(&config("kite_hull.conf")), "--out", path(dir.path()), "--quiet"]);
    let records = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("kite_hull_dir"))
        .count();
    assert_eq!(records, 8);
}

#[test]
fn noisy_run_still_reports_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kite_hull_noise10.conf");
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    let stdout = run_ok(&["reconstruct", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    assert!(metric(&stdout, "hull_contrast") > 0.0);
    assert!(metric(&stdout, "peak_centroid_y1").is_finite());
}

#[test]
fn seed_override_reproduces_and_changes_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kite_hull_noise10.conf");
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    let field = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let data = path(dir.path());
        run_ok(&[
            "reconstruct",
            "--config",
            path(&cfg),
            "--data",
            data,
            "--out",
            path(&out),
            "--seed",
            seed,
            "--quiet",
        ]);
        std::fs::read(out.join("kite_hull_noise10_field.csv")).unwrap()
    };
    let a = field("3", "a");
    assert_eq!(a, field("3", "b"));
    assert_ne!(a, field("4", "c"));
}

#[test]
fn cube_reconstruct_writes_y2_slice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "cube_annulus.conf", |s| s.replace("counts = [61, 61, 61]", "counts = [21, 21, 21]"));
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    let stdout = run_ok(&["reconstruct", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    assert!(metric(&stdout, "annulus_contrast") >= 10.0);
    let pgm = std::fs::read(dir.path().join("cube_annulus_slice_y2_0.0.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n21 21\n65535\n"));
    assert_eq!(pgm.len(), "P5\n21 21\n65535\n".len() + 2 * 21 * 21);
}

#[test]
fn zero_measure_lattice_exits_2_naming_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kite_strip.conf", |s| s.replace("upper = [3, 3]", "upper = [3, -3]"));
    let out = run(&["simulate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 26") && stderr.contains("`lower`"), "{stderr}");
}

#[test]
fn missing_data_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reconstruct", "--config", path(&config("kite_strip.conf")), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mismatched_band_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kite_strip.conf");
    run_ok(&["simulate", "--config", path(&cfg), "--out", path(dir.path()), "--quiet"]);
    let other = write_config(dir.path(), "kite_strip.conf", |s| s.replace("samples = 16", "samples = 20"));
    let out = run(&["reconstruct", "--config", path(&other), "--data", path(dir.path()), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn validate_builtin_catalog_passes() {
    let stdout = run_ok(&["validate", "--quiet"]);
    assert!(stdout.contains("kite_const.factorization_residual"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn mismatched_quadrature_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", "--mismatched-quadrature", "--quiet", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("factorization_residual"));
    let csv = std::fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert!(csv.starts_with("check,value,bound,relation,passed\n"));
}

#[test]
fn empty_catalog_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kite_strip.conf", |s| s.replace("theta = [0.25]", "theta = []"));
    let out = run(&["validate", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_from_config() {
    let stdout = run_ok(&["validate", "--config", path(&config("kite_hull.conf")), "--quiet"]);
    assert!(stdout.contains("kite_hull_7.factorization_residual"));
}

#[test]
fn extents_report_ground_truth() {
    let stdout = run_ok(&["extents", "--config", path(&config("cube_annulus.conf"))]);
    assert!(stdout.starts_with("point 0 (1.5,0.0,0.0): inner=1.0 outer=2.12132034355964"), "{stdout}");
}
