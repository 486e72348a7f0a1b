use std::fs;
use std::process::Command;

use collarlab_cli::report::{from_json, to_csv, to_json, to_svg_lines};
use collarlab_cli::{run_all, CheckRecord, CliError, Format, RunConfig, Rule, SuiteId, SuiteReport, CSV_HEADER};
use collarlab::Complex64;

fn quick_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid.n_tau = 1024;
    cfg.suites = vec![SuiteId::WpAsymptotics, SuiteId::Lengths];
    cfg
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collarlab"))
}

#[test]
fn csv_has_the_fixed_header_and_one_row_per_record() {
    let cfg = quick_config();
    let reports = run_all(&cfg, &cfg.suites, Some(2)).unwrap();
    let text = to_csv(&reports).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), reports.iter().map(|r| r.records.len()).sum::<usize>());
    let first = rows[0].split(',').collect::<Vec<_>>();
    assert_eq!(first.len(), 10);
    assert_eq!(first[0], "wp-asymptotics");
    let u: f64 = first[2].parse().unwrap();
    let t_abs: f64 = first[3].parse().unwrap();
    assert!((t_abs - (-std::f64::consts::PI / u).exp()).abs() <= 1e-15 * t_abs);
}

#[test]
fn json_round_trips_bit_for_bit() {
    let cfg = quick_config();
    let reports = run_all(&cfg, &cfg.suites, None).unwrap();
    let back = from_json(&to_json(&reports).unwrap()).unwrap();
    for (a, b) in reports.iter().zip(&back) {
        assert_eq!(a.records, b.records);
        assert_eq!(a.pass, b.pass);
    }
}

#[test]
fn one_svg_per_check_id() {
    let cfg = quick_config();
    let reports = run_all(&cfg, &cfg.suites, None).unwrap();
    let mut ids: Vec<&str> = reports.iter().flat_map(|r| r.records.iter().map(|c| c.check_id.as_str())).collect();
    ids.sort();
    ids.dedup();
    let svgs = to_svg_lines(&reports);
    assert_eq!(svgs.len(), ids.len());
    assert!(svgs.values().all(|s| s.starts_with("<svg") && s.trim_end().ends_with("</svg>")));
}

#[test]
fn band_and_report_only_rules() {
    let band = CheckRecord::real("s", "r", None, 12.0, 1.0, Rule::Band { lo: 1.0, hi: 10.0 });
    assert!(!band.pass && (band.rel_err - 0.2).abs() < 1e-15);
    let note = CheckRecord::real("s", "n", None, 5.0, 1.0, Rule::ReportOnly);
    assert!(note.pass && !note.counts());
    let zero = CheckRecord::real("s", "z", None, 3e-9, 0.0, Rule::Relative { tolerance: 1e-8 });
    assert!(zero.pass && zero.rel_err == 3e-9);
    let nan = CheckRecord::new("s", "x", Some(0.1), Complex64::new(f64::NAN, 0.0), Complex64::new(1.0, 0.0), Rule::Relative { tolerance: 1.0 });
    assert!(!nan.pass && nan.rel_err.is_finite());
    let report = SuiteReport::new("s", vec![note, zero], vec![], 0.0);
    assert!(report.pass);
    assert!(!SuiteReport::new("s", vec![], vec!["boom".into()], 0.0).pass);
}

#[test]
fn config_errors_are_reported() {
    assert!(matches!(RunConfig::from_json(r#"{"sweep": {"u_min": 0.2, "u_max": 0.1, "points": 4}}"#), Err(CliError::Config(_))));
    assert!(matches!(RunConfig::from_json(r#"{"bogus": 1}"#), Err(CliError::Config(_))));
    assert!(matches!(RunConfig::from_json(r#"{"collars": [{"u": 0.05, "t": [0.001, 0.0]}]}"#), Err(CliError::Config(_))));
    assert!(matches!(RunConfig::from_json(r#"{"grid": {"n_tau": 64, "n_modes": 8}}"#), Err(CliError::Config(_))));
    assert!("nope".parse::<SuiteId>().is_err());
    assert_eq!("svg-lines".parse::<Format>().unwrap(), Format::SvgLines);
    let cfg = RunConfig::from_json(r#"{"collars": [{"t": [4.5399929762484854e-5, 0.0]}], "seed": 7}"#).unwrap();
    assert!((cfg.pinned_points()[0] - std::f64::consts::PI / 10.0).abs() < 1e-12);
    assert_eq!(cfg.sweep_points().len(), 4);
    assert!((cfg.reference_point() - 0.025).abs() < 1e-15);
}

#[test]
fn empty_suite_list_gives_empty_reports() {
    let cfg = quick_config();
    let reports = run_all(&cfg, &[], None).unwrap();
    assert!(reports.is_empty());
    assert_eq!(to_csv(&reports).unwrap().lines().count(), 1);
}

#[test]
fn binary_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, r#"{"grid": {"n_tau": 1024, "n_modes": 32}}"#).unwrap();
    let out = dir.path().join("out");

    let ok = binary()
        .args(["run", "--config", cfg_path.to_str().unwrap(), "--suite", "lengths", "--suite", "wp-asymptotics", "--format", "csv,json,markdown,svg-lines", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    for f in ["report.csv", "report.json", "report.md", "length-reference.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(fs::read_dir(&out).unwrap().all(|e| e.unwrap().path().extension().unwrap() != "partial"));
    let first = fs::read(out.join("report.json")).unwrap();

    let again = binary().args(["run", "--config", cfg_path.to_str().unwrap(), "--suite", "lengths", "--suite", "wp-asymptotics", "--format", "json", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, fs::read(out.join("report.json")).unwrap(), "identical configs give identical JSON");

    let failing = binary().args(["run", "--config", cfg_path.to_str().unwrap(), "--suite", "equivalence", "--format", "csv", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(failing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failing.stderr).contains("mcmullen-variation"));

    let bad = binary().args(["run", "--config", cfg_path.to_str().unwrap(), "--suite", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let missing = binary().args(["run", "--config", dir.path().join("absent.json").to_str().unwrap()]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let workers = binary().env("COLLARLAB_WORKERS", "zero").args(["run", "--config", cfg_path.to_str().unwrap(), "--suite", "lengths", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(workers.status.code(), Some(2));
}
