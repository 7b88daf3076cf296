use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netscore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netscore"))
        .args(args)
        .env_remove("NETSCORE_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn montecarlo_writes_manifest_and_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = netscore(&[
        "montecarlo",
        "--preset",
        "paper-n100",
        "--seed",
        "42",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 42"));
    assert!(manifest.contains("n_clients = 100"));
    for f in [
        "trajectories_recursive_scoring.csv",
        "summary_risk_prediction.csv",
        "bounds_recursive_scoring.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
        assert!(manifest.contains(f));
    }
}

#[test]
fn missing_config_is_an_io_error() {
    let out = netscore(&["simulate", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("missing.cfg"));
}

#[test]
fn out_of_range_override_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = netscore(&[
        "montecarlo",
        "--preset",
        "paper-n50",
        "--set",
        "nu=1.5",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("nu") && err.contains("(0, 1]"), "{err}");
    assert!(!dir.path().join("manifest.toml").exists());
}

#[test]
fn unknown_override_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = netscore(&["simulate", "--set", "sigma=2", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("sigma"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(netscore(&["montecarlo", "--bogus"]).status.code(), Some(2));
    assert_eq!(netscore(&["simulate", "--set", "novalue"]).status.code(), Some(2));
    assert_eq!(netscore(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn presets_lists_parameter_tables() {
    let out = netscore(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["paper-n50", "paper-n100", "n_clients", "horizon", "nu", "score_cap"] {
        assert!(text.contains(needle), "{needle}");
    }
}

#[test]
fn same_invocation_gives_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("run.toml");
    fs::write(
        &cfg,
        "schema_version = 1\npreset = \"paper-n50\"\nreplications = 5\nhorizon = 6\n",
    )
    .unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = netscore(&[
            "--threads",
            threads,
            "montecarlo",
            "--config",
            path(&cfg),
            "--out",
            path(dir.path()),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for f in [
        "trajectories_risk_prediction.csv",
        "summary_recursive_scoring.csv",
        "manifest.toml",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn manifest_reruns_and_metrics_rebuilds_summary() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = netscore(&[
        "simulate",
        "--preset",
        "paper-n50",
        "--seed",
        "9",
        "--out",
        path(a.path()),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let manifest = a.path().join("manifest.toml");
    let again = netscore(&["simulate", "--config", path(&manifest), "--out", path(b.path())]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(
        fs::read(a.path().join("trajectories_recursive_scoring.csv")).unwrap(),
        fs::read(b.path().join("trajectories_recursive_scoring.csv")).unwrap()
    );

    let summary = b.path().join("rebuilt.csv");
    let traj = a.path().join("trajectories_recursive_scoring.csv");
    let m = netscore(&["metrics", "--input", path(&traj), "--out", path(&summary)]);
    assert!(m.status.success(), "{}", stderr(&m));
    // inputs were rounded to 12 significant digits, so compare numerically
    let rebuilt = fs::read_to_string(&summary).unwrap();
    let original = fs::read_to_string(a.path().join("summary_recursive_scoring.csv")).unwrap();
    assert_eq!(rebuilt.lines().count(), original.lines().count());
    for (x, y) in rebuilt.lines().zip(original.lines()).skip(1) {
        for (u, v) in x.split(',').zip(y.split(',')) {
            match (u.parse::<f64>(), v.parse::<f64>()) {
                (Ok(u), Ok(v)) => assert!(u == v || (u - v).abs() <= 1e-9 * u.abs().max(1.0), "{x} vs {y}"),
                _ => assert_eq!(u, v),
            }
        }
    }
}

#[test]
fn out_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_netscore"))
        .args(["simulate", "--preset", "paper-n50", "--set", "horizon=3"])
        .env("NETSCORE_OUT", &target)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(target.join("manifest.toml").is_file());
}

#[test]
fn compare_reports_bins() {
    let dir = tempfile::tempdir().unwrap();
    for (name, sub) in [("paper-n50", "a"), ("paper-n100", "b")] {
        let d = dir.path().join(sub);
        let out = netscore(&[
            "montecarlo",
            "--preset",
            name,
            "--set",
            "replications=10",
            "--set",
            "scenario=recursive_scoring",
            "--out",
            path(&d),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let traj = |s: &str| dir.path().join(s).join("trajectories_recursive_scoring.csv");
    let cmp = dir.path().join("cmp.csv");
    let out = netscore(&[
        "compare",
        "--a",
        path(&traj("a")),
        "--b",
        path(&traj("b")),
        "--out",
        path(&cmp),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&cmp).unwrap();
    assert!(text.starts_with("bin_lo,bin_hi,middle,"));
    assert_eq!(text.lines().count(), 16);
}
