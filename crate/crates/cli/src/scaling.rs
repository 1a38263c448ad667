//! Runtime against sample count and attribute count on synthetic data.

use std::io::Write;
use std::time::Instant;

use anyhow::{ensure, Result};
use disc_core::{fit, synth_generate, FitConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub n_grid: Vec<usize>,
    pub l_grid: Vec<usize>,
    /// Attribute count used along the n axis.
    pub fixed_l: usize,
    /// Sample count used along the l axis.
    pub fixed_n: usize,
    pub values: usize,
    pub k: usize,
    pub seed: u64,
    /// Replicates per grid point; replicate `r` generates and fits with seed
    /// `seed + r`, and the mean time is kept.
    pub repeats: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![10_000, 20_000, 40_000, 80_000],
            l_grid: vec![100, 200, 400, 800],
            fixed_l: 20,
            fixed_n: 2000,
            values: 5,
            k: 5,
            seed: 0,
            repeats: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    L,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::N => "n",
            Axis::L => "l",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub axis: Axis,
    pub value: usize,
    pub seconds: f64,
    /// Mean inner iterations over the replicates.
    pub inner_iterations: f64,
    /// Mean seconds per inner iteration.
    pub seconds_per_iteration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<TimingRow>,
    pub slope_n: Option<f64>,
    pub slope_l: Option<f64>,
    pub slope_n_per_iteration: Option<f64>,
    pub slope_l_per_iteration: Option<f64>,
}

impl ScalingTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "axis,value,seconds,inner_iterations,seconds_per_iteration"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.axis, r.value, r.seconds, r.inner_iterations, r.seconds_per_iteration
            )?;
        }
        Ok(())
    }
}

/// Least-squares slope of `ln y` against `ln x`; needs two distinct x values.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if logs.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn time_point(
    cfg: &ScalingConfig,
    axis: Axis,
    n: usize,
    l: usize,
    value: usize,
) -> Result<TimingRow> {
    let mut seconds = 0.0;
    let mut inner = 0.0;
    let mut per_iteration = 0.0;
    for r in 0..cfg.repeats as u64 {
        let seed = cfg.seed + r;
        let data = synth_generate(n, l, cfg.values, cfg.k, seed)?;
        let start = Instant::now();
        let model = fit(&data, &FitConfig::new(cfg.k, seed))?;
        let t = start.elapsed().as_secs_f64();
        seconds += t;
        inner += model.inner_iterations as f64;
        per_iteration += t / model.inner_iterations.max(1) as f64;
    }
    let m = cfg.repeats as f64;
    Ok(TimingRow {
        axis,
        value,
        seconds: seconds / m,
        inner_iterations: inner / m,
        seconds_per_iteration: per_iteration / m,
    })
}

/// Grid points run one after another so that timings do not compete for
/// cores; each fit is itself parallel.
pub fn scaling_benchmark(cfg: &ScalingConfig) -> Result<ScalingTable> {
    ensure!(
        !cfg.n_grid.is_empty() || !cfg.l_grid.is_empty(),
        "at least one grid must be non-empty"
    );
    ensure!(cfg.repeats >= 1, "repeats must be at least 1");
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        rows.push(time_point(cfg, Axis::N, n, cfg.fixed_l, n)?);
    }
    for &l in &cfg.l_grid {
        rows.push(time_point(cfg, Axis::L, cfg.fixed_n, l, l)?);
    }
    let slope = |axis: Axis, y: fn(&TimingRow) -> f64| {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.axis == axis)
            .map(|r| (r.value as f64, y(r)))
            .collect();
        log_log_slope(&points)
    };
    Ok(ScalingTable {
        slope_n: slope(Axis::N, |r| r.seconds),
        slope_l: slope(Axis::L, |r| r.seconds),
        slope_n_per_iteration: slope(Axis::N, |r| r.seconds_per_iteration),
        slope_l_per_iteration: slope(Axis::L, |r| r.seconds_per_iteration),
        rows,
    })
}
