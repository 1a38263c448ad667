//! Multi-restart runs and their report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use disc_core::{acc, ari, cmp, fit, fit_mixed, Dataset, DiscModel, MixedConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{create_dir, ExperimentConfig};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed: u64,
    pub acc: Option<f64>,
    pub ari: Option<f64>,
    pub cmp: f64,
    pub objective: f64,
    pub inner_iterations: usize,
    pub tree_updates: usize,
    pub converged: bool,
    pub wall_seconds: f64,
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for one value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Self {
            mean,
            std,
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub acc: Option<Summary>,
    pub ari: Option<Summary>,
    pub cmp: Summary,
    pub objective: Summary,
    pub inner_iterations: Summary,
    pub tree_updates: Summary,
    pub wall_seconds: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub n: usize,
    pub l_cat: usize,
    pub l_num: usize,
    pub restarts: Vec<RestartRecord>,
    pub aggregates: Aggregates,
    /// Index into `restarts` of the lowest objective (first on ties).
    pub best: usize,
}

impl Report {
    /// Copy with every wall time zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.restarts {
            r.wall_seconds = 0.0;
        }
        out.aggregates.wall_seconds = Summary {
            mean: 0.0,
            std: 0.0,
            count: out.restarts.len(),
        };
        out
    }

    pub fn best_record(&self) -> &RestartRecord {
        &self.restarts[self.best]
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(())
    }
}

/// Result of one restart, kept in memory alongside its record.
pub struct Restart {
    pub record: RestartRecord,
    pub model: DiscModel,
}

pub fn fit_one(data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<DiscModel> {
    let base = config.fit_config(seed);
    let model = match config.gamma {
        Some(gamma) => fit_mixed(data, &MixedConfig::new(base).with_gamma(gamma))?,
        None => fit(data, &base)?,
    };
    Ok(model)
}

fn evaluate(data: &Dataset, model: DiscModel, wall_seconds: f64) -> Result<Restart> {
    let (acc, ari) = match data.labels() {
        Some(truth) => (
            Some(acc(&model.partition, truth)?),
            Some(ari(&model.partition, truth)?),
        ),
        None => (None, None),
    };
    let record = RestartRecord {
        seed: model.seed,
        acc,
        ari,
        cmp: cmp(data, &model.partition)?,
        objective: model.objective,
        inner_iterations: model.inner_iterations,
        tree_updates: model.tree_updates,
        converged: model.converged,
        wall_seconds,
    };
    let finite = [record.cmp, record.objective]
        .into_iter()
        .chain(record.acc)
        .chain(record.ari)
        .all(f64::is_finite);
    if !finite {
        bail!("non-finite metric for seed {}: {record:?}", record.seed);
    }
    Ok(Restart { record, model })
}

/// Fits every restart on an already loaded dataset, in parallel, ordered by seed.
pub fn run_restarts(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<Restart>> {
    config.validate()?;
    let seeds: Vec<u64> = config.seeds().collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let start = Instant::now();
            let model = fit_one(data, config, seed)?;
            evaluate(data, model, start.elapsed().as_secs_f64())
        })
        .collect()
}

pub fn build_report(data: &Dataset, config: &ExperimentConfig, runs: &[Restart]) -> Report {
    let records: Vec<RestartRecord> = runs.iter().map(|r| r.record.clone()).collect();
    let column = |f: &dyn Fn(&RestartRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let optional = |f: &dyn Fn(&RestartRecord) -> Option<f64>| {
        let values: Option<Vec<f64>> = records.iter().map(f).collect();
        values.and_then(|v| Summary::of(&v))
    };
    let summary = |values: Vec<f64>| Summary::of(&values).expect("at least one restart");
    let aggregates = Aggregates {
        acc: optional(&|r| r.acc),
        ari: optional(&|r| r.ari),
        cmp: summary(column(&|r| r.cmp)),
        objective: summary(column(&|r| r.objective)),
        inner_iterations: summary(column(&|r| r.inner_iterations as f64)),
        tree_updates: summary(column(&|r| r.tree_updates as f64)),
        wall_seconds: summary(column(&|r| r.wall_seconds)),
    };
    let best = records
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)))
        .map_or(0, |(i, _)| i);
    Report {
        version: ARTIFACT_VERSION.to_string(),
        config: config.clone(),
        n: data.n(),
        l_cat: data.l_cat(),
        l_num: data.l_num(),
        restarts: records,
        aggregates,
        best,
    }
}

/// Writes `report.json`, `trace_<seed>.csv` and `assignments_<seed>.csv`.
pub fn write_artifacts(dir: &Path, report: &Report, runs: &[Restart]) -> Result<()> {
    create_dir(dir)?;
    report.write_json(&dir.join("report.json"))?;
    for run in runs {
        let seed = run.record.seed;
        let trace = dir.join(format!("trace_{seed}.csv"));
        let file = File::create(&trace).with_context(|| format!("creating {}", trace.display()))?;
        let mut out = BufWriter::new(file);
        run.model.write_trace_csv(&mut out)?;
        out.flush()?;

        let path = dir.join(format!("assignments_{seed}.csv"));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "row,cluster")?;
        for (i, j) in run.model.partition.assign.iter().enumerate() {
            writeln!(out, "{i},{j}")?;
        }
        out.flush()?;
    }
    Ok(())
}

pub fn run_on_dataset(data: &Dataset, config: &ExperimentConfig) -> Result<Report> {
    let runs = run_restarts(data, config)?;
    let report = build_report(data, config, &runs);
    if let Some(dir) = &config.out {
        write_artifacts(dir, &report, &runs)?;
    }
    Ok(report)
}

/// Loads the configured dataset, runs all restarts and persists artifacts
/// when an output directory is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let data = config.data.load()?;
    run_on_dataset(&data, config)
}
