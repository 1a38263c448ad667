use std::path::{Path, PathBuf};
use std::process::Command;

use disc_cli::{
    cluster_with_matrices, convergence_trace_export, random_relationship_baseline, run_experiment,
    run_on_dataset, DataSource, ExperimentConfig, Report, Strategy, StrategyMatrices,
};
use disc_core::{acc, fit, init_kmodes, synth_generate, FitConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn zoo_config() -> ExperimentConfig {
    let source = DataSource::new(data_file("zoo.csv"))
        .label("type")
        .ignore("animal_name");
    ExperimentConfig::new(source, 7)
}

#[test]
fn zoo_report_has_one_record_per_restart() {
    let report = run_experiment(&zoo_config()).unwrap();
    assert_eq!((report.n, report.l_cat), (101, 16));
    assert_eq!(report.restarts.len(), 10);
    let seeds: Vec<u64> = report.restarts.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, (0..10).collect::<Vec<_>>());
    let acc = report.aggregates.acc.unwrap();
    assert_eq!(acc.count, 10);
    let values: Vec<f64> = report.restarts.iter().map(|r| r.acc.unwrap()).collect();
    let mean = values.iter().sum::<f64>() / 10.0;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0;
    assert!((acc.mean - mean).abs() < 1e-12);
    assert!((acc.std - var.sqrt()).abs() < 1e-12);
    let best = report.best_record().objective;
    assert!(report.restarts.iter().all(|r| r.objective >= best));
    assert_eq!(report.config, zoo_config());
    assert_eq!(report.version, disc_cli::ARTIFACT_VERSION);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let mut cfg = zoo_config();
    cfg.restarts = 4;
    cfg.seed = 30;
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.without_timings(), b.without_timings());
}

#[test]
fn single_restart_has_zero_spread() {
    let mut cfg = zoo_config();
    cfg.restarts = 1;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.aggregates.acc.unwrap().std, 0.0);
    assert_eq!(report.aggregates.objective.std, 0.0);
    cfg.restarts = 0;
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn unlabeled_data_reports_cmp_only() {
    let source = DataSource::new(data_file("car_features.csv"));
    let mut cfg = ExperimentConfig::new(source, 4);
    cfg.restarts = 2;
    let report = run_experiment(&cfg).unwrap();
    assert!(report.aggregates.acc.is_none() && report.aggregates.ari.is_none());
    assert!(report.restarts.iter().all(|r| (0.0..=1.0).contains(&r.cmp)));
}

#[test]
fn artifacts_are_written_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = zoo_config();
    cfg.restarts = 3;
    cfg.seed = 5;
    cfg.out = Some(dir.path().to_path_buf());
    let report = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    for seed in 5..8 {
        let trace = std::fs::read_to_string(dir.path().join(format!("trace_{seed}.csv"))).unwrap();
        assert!(trace.starts_with("outer,inner,z,tree_updated\n"));
        let rows =
            std::fs::read_to_string(dir.path().join(format!("assignments_{seed}.csv"))).unwrap();
        assert_eq!(rows.lines().count(), 102);
    }
}

#[test]
fn mixed_runs_use_the_numeric_columns() {
    let data = synth_generate(120, 4, 3, 2, 4).unwrap();
    let numeric: Vec<Vec<f64>> = data
        .labels()
        .unwrap()
        .iter()
        .map(|&c| vec![c as f64])
        .collect();
    let data = data.with_numeric(&numeric).unwrap();
    let mut cfg = ExperimentConfig::new(DataSource::new("unused.csv"), 2);
    cfg.restarts = 3;
    cfg.gamma = Some(1.0);
    let mixed = run_on_dataset(&data, &cfg).unwrap();
    assert_eq!(mixed.l_num, 1);
    cfg.gamma = None;
    let categorical = run_on_dataset(&data, &cfg).unwrap();
    assert!(mixed.aggregates.acc.unwrap().mean > categorical.aggregates.acc.unwrap().mean);
    assert!(mixed.aggregates.acc.unwrap().mean >= 0.9);
    cfg.gamma = Some(-1.0);
    assert!(run_on_dataset(&data, &cfg).is_err());
}

#[test]
fn trace_export_starts_at_initialization_and_descends_per_block() {
    let data = synth_generate(266, 35, 3, 15, 0).unwrap();
    let model = fit(&data, &FitConfig::new(15, 0)).unwrap();
    let mut out = Vec::new();
    convergence_trace_export(&model, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), model.trace.len());
    assert_eq!(rows[0][..2], ["0", "0"]);
    assert_eq!(rows[0][3], "true");
    assert!(rows.iter().filter(|r| r[3] == "true").count() >= 2);
    let z: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for t in 1..rows.len() {
        if rows[t][3] == "false" {
            assert!(z[t] <= z[t - 1] + 1e-12);
        }
    }
    assert_eq!(z[z.len() - 1], z[z.len() - 2]);
}

#[test]
fn hamming_strategy_is_the_same_in_every_trial() {
    let data = synth_generate(150, 6, 4, 3, 2).unwrap();
    let acc = random_relationship_baseline(&data, 3, Strategy::Hamming, 12, 0).unwrap();
    assert!(acc.iter().all(|&a| a == acc[0]));
    // from a k-modes fixed point the Hamming loop does not move
    let (init, _) = init_kmodes(&data, 3, 0).unwrap();
    assert_eq!(
        acc[0],
        disc_core::acc(&init, data.labels().unwrap()).unwrap()
    );
}

#[test]
fn customized_with_identical_clusters_is_the_uniform_strategy() {
    let data = synth_generate(150, 5, 4, 3, 6).unwrap();
    let truth = data.labels().unwrap();
    let cards = data.cardinalities();
    let (init, _) = init_kmodes(&data, 3, 0).unwrap();
    for trial in 0..20 {
        let uniform = StrategyMatrices::generate(
            Strategy::Uniform,
            3,
            &cards,
            &mut ChaCha8Rng::seed_from_u64(trial),
        );
        // the same draws laid out one matrix per attribute and copied to every cluster
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let per_attr: Vec<Vec<f64>> = cards
            .iter()
            .map(|&o| {
                let mut m = vec![0.0; o * o];
                for u in 0..o {
                    for s in u + 1..o {
                        let d: f64 = rng.gen();
                        m[u * o + s] = d;
                        m[s * o + u] = d;
                    }
                }
                m
            })
            .collect();
        let collapsed = StrategyMatrices::shared(3, &cards, per_attr);
        assert_eq!(collapsed, uniform);
        let a = acc(&cluster_with_matrices(&data, &init, &collapsed), truth).unwrap();
        let b = acc(&cluster_with_matrices(&data, &init, &uniform), truth).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn baseline_needs_labels_and_trials() {
    let data = disc_core::Dataset::from_codes(&[vec![0], vec![1], vec![0]], None).unwrap();
    assert!(random_relationship_baseline(&data, 2, Strategy::Uniform, 3, 0).is_err());
    let labeled = synth_generate(30, 3, 3, 2, 0).unwrap();
    assert!(random_relationship_baseline(&labeled, 2, Strategy::Uniform, 0, 0).is_err());
    assert_eq!(
        random_relationship_baseline(&labeled, 2, Strategy::Weighted, 5, 1)
            .unwrap()
            .len(),
        5
    );
}

fn disc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_disc"))
}

#[test]
fn binary_fits_and_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zo");
    let zoo = data_file("zoo.csv");
    let status = disc()
        .args(["fit", "--data"])
        .arg(&zoo)
        .args([
            "--label-col",
            "type",
            "--ignore-cols",
            "animal_name",
            "--k",
            "7",
            "--restarts",
            "2",
        ])
        .args(["--variant", "no-relearn", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.variant, Variant::NoRelearn);

    let eval = disc()
        .args(["eval", "--data"])
        .arg(&zoo)
        .args([
            "--label-col",
            "type",
            "--ignore-cols",
            "animal_name",
            "--assignments",
        ])
        .arg(out.join("assignments_0.csv"))
        .output()
        .unwrap();
    assert!(eval.status.success());
    let scores: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(
        scores["acc"].as_f64().unwrap(),
        report.restarts[0].acc.unwrap()
    );
}

#[test]
fn binary_synth_and_encoding() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let ok = disc()
        .args([
            "synth", "--n", "60", "--l", "4", "--values", "3", "--k", "2", "--out",
        ])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(ok.success());
    let ok = disc()
        .args(["export-encoding", "--data"])
        .arg(&csv)
        .args(["--label-col", "class", "--k", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let encoding = std::fs::read_to_string(dir.path().join("encoding.csv")).unwrap();
    assert_eq!(encoding.lines().next().unwrap(), "cluster,a0,a1,a2,a3");
    assert_eq!(encoding.lines().count(), 61);
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let missing = disc()
        .args(["fit", "--data", "/nonexistent.csv", "--k", "2"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent.csv"));
    let bad_variant = disc()
        .args(["fit", "--data"])
        .arg(data_file("zoo.csv"))
        .args(["--k", "2", "--variant", "nope"])
        .output()
        .unwrap();
    assert!(!bad_variant.status.success());
}
