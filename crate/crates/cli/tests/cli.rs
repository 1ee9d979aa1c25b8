use std::path::Path;
use std::process::{Command, Output};

use maurey_cli::report::{from_csv, from_json, FitRow, IntegrateRow, MatnormRow, RegionRow};

fn maurey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maurey"))
        .args(args)
        .env_remove("MAUREY_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn regions_report_has_twelve_tabulated_rows_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["regions", "--theta", "0.3,0.7", "--n", "16,256", "--format", "csv", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let all: Vec<RegionRow> = from_csv(&read(dir.path(), "regions.csv")).unwrap();
    let rows: Vec<&RegionRow> = all.iter().filter(|r| r.target.is_some()).collect();
    assert_eq!(rows.len(), 4 * 12);
    for th in [0.3, 0.7] {
        for n in [16.0, 256.0] {
            let k = rows.iter().filter(|r| r.theta == th && r.n == n).count();
            assert_eq!(k, 12, "θ={th} n={n}");
        }
    }
    assert!(rows.iter().all(|r| r.ratio.is_some_and(|x| x > 0.0)));
    assert!(dir.path().join("region_bounds.csv").exists());
    assert!(!dir.path().join("regions.json").exists());
}

#[test]
fn empty_n_list_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["integrate", "--n", "", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n list is empty"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(maurey(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(maurey(&["integrate", "--theta", "abc"]).status.code(), Some(1));
    assert_eq!(maurey(&["integrate", "--n", "64..16"]).status.code(), Some(1));
    assert_eq!(maurey(&["verify", "--suite", "nonsense"]).status.code(), Some(1));
    assert_eq!(maurey(&["--help"]).status.code(), Some(0));
    assert_eq!(maurey(&["fit", "--help"]).status.code(), Some(0));
}

#[test]
fn n_exponent_fit_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["fit", "--scenario", "oh_to_lp", "--theta", "0.5", "--n", "16..4096", "--format", "json", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<FitRow> = from_json(&read(dir.path(), "fit.json")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].exponent - 0.75).abs() <= 0.02, "{}", rows[0].exponent);
    assert_eq!(rows[0].points.split(';').count(), 9);
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["integrate", "--theta", "0.4", "--n", "2..64", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let a: Vec<IntegrateRow> = from_csv(&read(dir.path(), "integrate.csv")).unwrap();
    let b: Vec<IntegrateRow> = from_json(&read(dir.path(), "integrate.json")).unwrap();
    assert_eq!(a.len(), 6);
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[1].integral > w[0].integral));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maurey"))
        .args(["integrate", "--format", "csv"])
        .env("MAUREY_OUT_DIR", dir.path())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("integrate.csv").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "theta = [0.2, 0.6]\nn = \"16,32\"\nformat = \"json\"\n").unwrap();
    let o = maurey(&["integrate", "--config", cfg.to_str().unwrap(), "--n", "8", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<IntegrateRow> = from_json(&read(dir.path(), "integrate.json")).unwrap();
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta, r.n)).collect();
    assert_eq!(pts, vec![(0.2, 8.0), (0.6, 8.0)]);
    assert!(!dir.path().join("integrate.csv").exists());

    std::fs::write(&cfg, "thetta = [0.2]\n").unwrap();
    let o = maurey(&["integrate", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let runs: Vec<(String, String)> = ["1", "8"]
        .iter()
        .map(|w| {
            let dir = tempfile::tempdir().unwrap();
            let out = out_arg(dir.path());
            let mc = ["integrate", "--oracle", "mc", "--mc-samples", "20000", "--theta", "0.3,0.6", "--n", "4..64"];
            let o = maurey(&[&mc[..], &["--workers", w, "--format", "csv", "--out", &out]].concat());
            assert_eq!(o.status.code(), Some(0));
            let o = maurey(&["matnorm", "--count", "4", "--m", "3", "--k", "2", "--workers", w, "--format", "csv", "--out", &out]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            (read(dir.path(), "integrate.csv"), read(dir.path(), "matnorm.csv"))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let mats: Vec<MatnormRow> = from_csv(&runs[0].1).unwrap();
    assert_eq!(mats.len(), 4 * 3);
    assert!(mats.iter().all(|r| r.cp_norm > 0.0 && r.oh_norm > 0.0));
}

#[test]
fn matrix_tuple_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tuple.json");
    // Two diagonal matrix units: OH norm 1, C_p norm 1.
    std::fs::write(&input, "[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]").unwrap();
    let o = maurey(&["matnorm", "--input", input.to_str().unwrap(), "--p", "1.5", "--format", "json", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<MatnormRow> = from_json(&read(dir.path(), "matnorm.json")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].oh_norm - 1.0).abs() < 1e-12);
}

#[test]
fn verify_writes_check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["verify", "--suite", "log_factor,scaling", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("criterion 3 [scaling]: PASS"));
    assert!(lines[1].starts_with("criterion 4 [log_factor]: PASS"));
    assert!(dir.path().join("verify_scaling.csv").exists());
    assert!(dir.path().join("scaling_fits.json").exists());
}

#[test]
fn table2_suite_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = maurey(&["verify", "--suite", "table2", "--theta", "0.5", "--n", "16,64,256", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows: Vec<RegionRow> = from_csv(&read(dir.path(), "table2_regions.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 12);
    for n in [16.0, 64.0, 256.0] {
        assert_eq!(rows.iter().filter(|r| r.n == n).count(), 12);
    }
    assert!(rows.iter().all(|r| r.ratio.is_some_and(|x| (0.01..=100.0).contains(&x))));
}
