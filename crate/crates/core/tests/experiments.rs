use std::fs;

use netscore::exec::ExecMode;
use netscore::experiments::{
    compare_n, load_config, parse_config, preset, read_trajectories, run_experiment, run_monte_carlo, ExperimentConfig,
};
use netscore::metrics::{aggregate, CrlbAggregation};
use netscore::Scenario;

fn small() -> ExperimentConfig {
    let mut cfg = preset("paper-n50").unwrap();
    cfg.params.n_clients = 15;
    cfg.params.horizon = 5;
    cfg.replications = 8;
    cfg.master_seed = 77;
    cfg
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn outputs_are_listed_in_manifest_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let (run, manifest) = run_experiment(&cfg, dir.path(), ExecMode::default()).unwrap();

    for name in [
        "trajectories_risk_prediction.csv",
        "trajectories_recursive_scoring.csv",
        "summary_risk_prediction.csv",
        "summary_recursive_scoring_outliers.csv",
        "network_recursive_scoring.csv",
        "bounds_recursive_scoring.csv",
    ] {
        assert!(manifest.files.iter().any(|f| f == name), "{name} missing from manifest");
        assert!(dir.path().join(name).is_file());
    }
    // the manifest spells out the defaulted prior mean
    let mut explicit = cfg.clone();
    explicit.params.prior_mean = Some(cfg.params.prior_mean());
    assert_eq!(load_config(&manifest.path).unwrap(), explicit);

    let summary = fs::read_to_string(dir.path().join("summary_recursive_scoring.csv")).unwrap();
    assert!(summary.starts_with("estimator,client,t,x_true,bias,variance,mse,crlb,median,q25,q75\n"));
    // one row per (client, t >= 1)
    assert_eq!(summary.lines().count(), 1 + 15 * 5);

    let edges = fs::read_to_string(dir.path().join("network_recursive_scoring.csv")).unwrap();
    let first = &run.trajectories[&Scenario::RecursiveScoring][0];
    let expected: usize = first.networks.iter().map(|g| g.edge_count()).sum();
    assert_eq!(edges.lines().count(), 1 + expected);
}

#[test]
fn trajectory_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (run, _) = run_experiment(&small(), dir.path(), ExecMode::Sequential).unwrap();
    for scenario in Scenario::ALL {
        let original = &run.trajectories[&scenario];
        let back = read_trajectories(&dir.path().join(format!("trajectories_{scenario}.csv"))).unwrap();
        assert_eq!(back.len(), original.len());
        for (a, b) in original.iter().zip(&back) {
            assert_eq!(b.scenario, scenario);
            assert_eq!((a.n_clients(), a.horizon()), (b.n_clients(), b.horizon()));
            for t in 0..=a.horizon() {
                for i in 0..a.n_clients() {
                    let (x, y) = (a.at(t, i), b.at(t, i));
                    assert!(close(x.x_true, y.x_true));
                    assert!(close(x.posterior.mean, y.posterior.mean));
                    assert!(close(x.posterior.variance, y.posterior.variance));
                    assert_eq!(x.degree, y.degree);
                }
            }
        }
        // summaries recomputed from the CSV agree with the in-memory ones
        let again = aggregate(&back, scenario, CrlbAggregation::Mean).unwrap();
        for (r, s) in run.summaries[&scenario].rows.iter().zip(&again.rows) {
            assert!(close(r.mse, s.mse) && close(r.bias, s.bias) && r.crlb == s.crlb);
        }
    }
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (_, manifest) = run_experiment(&small(), a.path(), ExecMode::default()).unwrap();
    let cfg = load_config(&manifest.path).unwrap();
    let (_, again) = run_experiment(&cfg, b.path(), ExecMode::Sequential).unwrap();
    assert_eq!(manifest.files, again.files);
    for f in manifest.files.iter().chain(["manifest.toml".to_string()].iter()) {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn aggregates_ignore_replication_order() {
    let run = run_monte_carlo(&small(), ExecMode::Sequential).unwrap();
    for scenario in Scenario::ALL {
        let mut trajs = run.trajectories[&scenario].clone();
        trajs.reverse();
        trajs.swap(1, 5);
        let permuted = aggregate(&trajs, scenario, CrlbAggregation::Mean).unwrap();
        for (r, s) in run.summaries[&scenario].rows.iter().zip(&permuted.rows) {
            assert!(close(r.x_true, s.x_true));
            assert!(close(r.bias, s.bias));
            assert!(close(r.variance, s.variance));
            assert!(close(r.mse, s.mse));
            assert!(close(r.crlb, s.crlb));
            assert_eq!(r.boxplot, s.boxplot);
        }
    }
}

#[test]
fn config_text_matches_preset() {
    let cfg = parse_config("schema_version = 1\npreset = \"paper-n100\"\nseed = 42\n").unwrap();
    let mut expected = preset("paper-n100").unwrap();
    expected.master_seed = 42;
    assert_eq!(cfg, expected);
    assert!(parse_config("schema_version = 2").is_err());
    assert!(parse_config("sigma = 1").is_err());
}

fn recursive(name: &str, seed: u64) -> Vec<netscore::Trajectory> {
    let mut cfg = preset(name).unwrap();
    cfg.master_seed = seed;
    cfg.scenarios = vec![Scenario::RecursiveScoring];
    run_monte_carlo(&cfg, ExecMode::default())
        .unwrap()
        .trajectories
        .remove(&Scenario::RecursiveScoring)
        .unwrap()
}

#[test]
fn larger_network_narrows_middle_class_errors() {
    let (n50, n100) = (recursive("paper-n50", 2021), recursive("paper-n100", 2021));
    let cmp = compare_n(&n50, &n100, 15, 15.0, 1.0, (4.0, 12.0)).unwrap();
    assert_eq!(cmp.bins.iter().filter(|b| b.middle).count(), 8);
    assert!(cmp.fraction_b_smaller > 0.6, "fraction {}", cmp.fraction_b_smaller);
}

#[test]
fn same_size_comparison_is_null() {
    let (a, b) = (recursive("paper-n100", 3), recursive("paper-n100", 4));
    let cmp = compare_n(&a, &b, 15, 15.0, 1.0, (4.0, 12.0)).unwrap();
    let mut ratios: Vec<f64> = cmp.bins.iter().map(|b| b.ratio.ln()).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2].exp();
    assert!((median - 1.0).abs() < 0.1, "median ratio {median}");
    assert!(cmp.bins.iter().all(|b| b.ratio > 0.6 && b.ratio < 1.6));
}
