use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rigidity_lab::{run, ExperimentConfig, ExperimentKind, Sink};

const BIN: &str = env!("CARGO_BIN_EXE_rigidity-lab");

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().unwrap().status.code().unwrap()
}

fn run_to_file(kind: ExperimentKind, json: &str, dir: &Path) -> (rigidity_lab::Outcome, String) {
    let config: ExperimentConfig = serde_json::from_str(json).unwrap();
    let out = dir.join("out.csv");
    let sink = Sink {
        hash: config.hash(),
        path: Some(out.clone()),
    };
    let outcome = run(kind, &config, &sink).unwrap();
    (outcome, fs::read_to_string(out).unwrap())
}

const TWO_SITE: &str = r#"{"family": "custom", "a": [0, 1], "b": [1], "prefactor": 0.5, "lattice": true}"#;

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing_t = write_config(dir.path(), "a.json", r#"{"kernel": {"family": "bessel", "s": 0}, "R": 1}"#);
    let descending = write_config(
        dir.path(),
        "b.json",
        r#"{"kernel": {"family": "bessel", "s": 0}, "R": 1, "T": [1000, 100]}"#,
    );
    let malformed = write_config(dir.path(), "c.json", r#"{"kernel": {"family": "bessel", "s": 0}, "R": "#);
    let no_seed = write_config(
        dir.path(),
        "d.json",
        r#"{"kernel": {"family": "sine"}, "window": [0, 4], "samples": 10}"#,
    );
    for (cmd, path) in [
        ("variance-scan", &missing_t),
        ("variance-scan", &descending),
        ("bounds", &malformed),
        ("sample", &no_seed),
    ] {
        assert_eq!(exit_code(&[cmd, "--config", path.to_str().unwrap()]), 1, "{cmd} {}", path.display());
    }
    assert_eq!(exit_code(&["no-such-command"]), 1);
    assert_eq!(exit_code(&["bounds"]), 1);
}

#[test]
fn counterexample_is_flagged_growing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.json",
        r#"{"kernel": {"family": "custom", "a": [0, 1], "b": [1], "prefactor": 1, "lattice": false},
            "R": 1, "conditions": ["off-diagonal"], "grid": {"points_per_decade": 8, "extent_factor": 1000}}"#,
    );
    let out = dir.path().join("r.json");
    let code = exit_code(&["bounds", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["verdict"], "growing");
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn two_site_generating_function() {
    let dir = tempfile::tempdir().unwrap();
    for (z1, z2) in [(1.0, 1.0), (0.3, 1.9)] {
        let json = format!(
            r#"{{"kernel": {TWO_SITE}, "window": [0, 1], "samples": 2000, "seed": 5,
                "regions": [{{"lo": 0, "hi": 0, "z": {z1}}}, {{"lo": 1, "hi": 1, "z": {z2}}}]}}"#
        );
        let (outcome, text) = run_to_file(ExperimentKind::FredholmCheck, &json, dir.path());
        let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        let det: f64 = row[2].parse().unwrap();
        assert!((det - 0.5 * (z1 + z2)).abs() < 1e-14, "{det}");
        if z1 == 1.0 && z2 == 1.0 {
            assert_eq!(row[3].parse::<f64>().unwrap(), 1.0);
        }
        assert!(outcome.flag.is_none());
    }
}

#[test]
fn overlapping_regions_are_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "o.json",
        r#"{"kernel": {"family": "bessel", "s": 0}, "window": [0, 10], "samples": 10, "seed": 1,
            "regions": [{"lo": 0, "hi": 4, "z": 0.5}, {"lo": 3, "hi": 8, "z": 1.5}]}"#,
    );
    assert_eq!(exit_code(&["fredholm-check", "--config", config.to_str().unwrap()]), 1);
}

#[test]
fn demo_requires_the_taper_to_cover_b() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "d.json",
        r#"{"kernel": {"family": "gamma", "z_re": 0.2, "zp_re": 0.7}, "R": 1, "T": [20],
            "B": [-4.5, 4.5], "samples": 10, "seed": 1}"#,
    );
    assert_eq!(exit_code(&["demo", "--config", config.to_str().unwrap()]), 1);
}

#[test]
fn demo_with_empty_b_counts_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"kernel": {"family": "gamma", "z_re": 0.2, "zp_re": 0.7}, "R": 4.5, "T": [20],
                  "B": [1, 0], "samples": 200, "seed": 3}"#;
    let (_, _) = run_to_file(ExperimentKind::Demo, json, dir.path());
    let rows = fs::read_to_string(dir.path().join("out.samples.csv")).unwrap();
    for line in rows.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "0");
        // the estimate is E S_f − S_f, the whole fluctuation
        assert_eq!(fields[4], fields[6]);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "s.json",
        r#"{"kernel": {"family": "bessel", "s": 0}, "window": [0, 20], "samples": 300, "seed": 11}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "2", "1"] {
        let out = dir.path().join(format!("s{}.csv", outputs.len()));
        let code = exit_code(&[
            "sample",
            "--config",
            config.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(fs::read(out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
    assert!(text.starts_with("# config-sha256: "));
    assert_eq!(text.lines().count(), 2 + 300);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "s.json",
        r#"{"kernel": {"family": "sine"}, "window": [0, 6], "samples": 50, "seed": 1}"#,
    );
    let read = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["sample", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        if !seed.is_empty() {
            args.extend(["--seed", seed]);
        }
        assert_eq!(exit_code(&args), 0);
        fs::read_to_string(out).unwrap()
    };
    let from_config = read("", "a.csv");
    assert_eq!(read("1", "b.csv"), from_config);
    assert_ne!(read("2", "c.csv"), from_config);
}

#[test]
fn eval_writes_values_and_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"kernel": {"family": "sine"}, "points": [[0, 0], [0, 0.5], [1, 1.0000001]]}"#;
    let (_, text) = run_to_file(ExperimentKind::Eval, json, dir.path());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "x,y,value,regime");
    assert_eq!(lines[2], "0,0,1,diagonal");
    assert!(lines[3].ends_with(",generic"));
    assert!(lines[4].ends_with(",near-diagonal"));
}
