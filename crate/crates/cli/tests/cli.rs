use std::path::Path;
use std::process::{Command, Output};

const FIG5: &str = "label = \"fig5\"\nepsilon = 0.15\n\n[[corners]]\nK = 0.8\nsigma = \"1/4\"\n\n[[corners]]\nK = 0.2\nsigma = \"1/4\"\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shipwave-cli"))
        .current_dir(dir)
        .env_remove("SHIPWAVE_WORKERS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig5.toml"), FIG5).unwrap();
    dir
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn empty_hull_exits_2_without_artifacts() {
    let dir = setup();
    std::fs::write(dir.path().join("empty.toml"), "").unwrap();
    let out = run(dir.path(), &["--out", "o", "predict", "empty.toml", "--eps", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty.toml:1:1"), "{err}");
    assert!(err.contains("\"error\":\"config\""), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn invalid_hull_reports_line() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), "[[corners]]\nK = 1\nsigma = 0.5\n\n[[corners]]\nK = -1\nsigma = 0.2\n").unwrap();
    let out = run(dir.path(), &["--out", "o", "trace-stokes", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml:5:"));
}

#[test]
fn missing_eps_is_a_usage_error() {
    let dir = setup();
    std::fs::write(dir.path().join("noeps.toml"), "[[corners]]\nK = 1\nsigma = \"1/2\"\n").unwrap();
    let out = run(dir.path(), &["--out", "o", "predict", "noeps.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn predict_writes_components_and_total() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "predict", "fig5.toml", "--dominance"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "o/prediction.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "corner,amplitude,phase");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("total,"));
    let total: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!(total > 0.0 && total < 1e-5, "{total}");
    assert!(read(dir.path(), "o/dominance.csv").starts_with("corner,im_integral,gamma,log_prefactor"));
}

#[test]
fn manifest_lists_checksums_of_outputs() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "omega-table", "--sigma-min", "0.25", "--sigma-max", "0.5", "--step", "0.25"]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_str(&read(dir.path(), "o/manifest.json")).unwrap();
    let entry = &m["outputs"][0];
    assert_eq!(entry["file"], "omega.csv");
    let bytes = std::fs::read(dir.path().join("o/omega.csv")).unwrap();
    use sha2::Digest;
    let hex: String = sha2::Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(entry["sha256"], hex.as_str());
    assert_eq!(m["parameters"]["tol"], "1e-10");
    assert_eq!(read(dir.path(), "o/omega.csv").lines().count(), 3);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let dir = setup();
    let args = |o: &'static str, w: &'static str| {
        vec!["--out", o, "--workers", w, "sweep-corner", "--a1-min", "0.6", "--a1-max", "0.9", "--step", "0.1"]
    };
    assert!(run(dir.path(), &args("a", "1")).status.success());
    assert!(run(dir.path(), &args("b", "3")).status.success());
    assert_eq!(read(dir.path(), "a/sweep_corner.csv"), read(dir.path(), "b/sweep_corner.csv"));
    assert_eq!(read(dir.path(), "a/sweep_corner.csv").lines().count(), 5);
}

#[test]
fn simplified_solve_dumps_profile() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "solve-simplified", "fig5.toml", "--dump-profile", "p/profile.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "p/profile.csv").starts_with("phi,q,re_u,im_u"));
    let m = read(dir.path(), "o/measurement.csv");
    let amp: f64 = m.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(amp > 1e-7 && amp < 1e-6, "{amp}");
}

#[test]
fn rejected_measurement_exits_4() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "solve-simplified", "fig5.toml", "--eps", "0.08", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"error\":\"measurement\""));
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn full_solve_round_trips_its_profile() {
    let dir = setup();
    std::fs::write(dir.path().join("one.toml"), "[[corners]]\nK = 1\nsigma = \"1/4\"\n").unwrap();
    let first = run(dir.path(), &["--out", "a", "solve-full", "one.toml", "--eps", "0.3", "--n", "600", "--dphi", "0.03", "--dump-profile", "full.csv"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(read(dir.path(), "full.csv").starts_with("phi,q,theta"));
    let second = run(
        dir.path(),
        &["--out", "b", "solve-full", "one.toml", "--eps", "0.3", "--n", "600", "--dphi", "0.03", "--continue-from", "full.csv"],
    );
    assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));
    let m: serde_json::Value = serde_json::from_str(&read(dir.path(), "b/manifest.json")).unwrap();
    assert_eq!(m["parameters"]["newton_iterations"], "0");
}

#[test]
fn repro_fig3_census() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "repro", "fig3"]);
    assert!(out.status.success());
    let s = read(dir.path(), "o/fig3_summary.csv");
    let counts: Vec<&str> = s.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(counts, ["1", "1", "5"]);
}

#[test]
fn repro_fig5_minimum_near_the_stern() {
    let dir = setup();
    let out = run(dir.path(), &["--out", "o", "repro", "fig5"]);
    assert!(out.status.success());
    assert!(read(dir.path(), "o/fig5_sweep.svg").starts_with("<svg"));
    let s = read(dir.path(), "o/fig5_minimum.csv");
    for line in s.lines().skip(1) {
        let a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.93..=0.98).contains(&a), "{line}");
    }
}
