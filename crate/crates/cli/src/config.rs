use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use disc_core::{encode, load_csv, CsvOptions, Dataset, FitConfig, Schema, Variant};
use serde::{Deserialize, Serialize};

/// A CSV file plus the roles of its columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSource {
    pub path: PathBuf,
    pub label: Option<String>,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub ignored: Vec<String>,
}

impl DataSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            label: None,
            numeric: Vec::new(),
            ignored: Vec::new(),
        }
    }

    pub fn label(mut self, column: &str) -> Self {
        self.label = Some(column.to_string());
        self
    }

    pub fn ignore(mut self, column: &str) -> Self {
        self.ignored.push(column.to_string());
        self
    }

    pub fn numeric(mut self, column: &str) -> Self {
        self.numeric.push(column.to_string());
        self
    }

    pub fn schema(&self) -> Schema {
        Schema {
            label: self.label.clone(),
            numeric: self.numeric.clone(),
            ignored: self.ignored.clone(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let table = load_csv(&self.path, &CsvOptions::default())?;
        encode(&table, &self.schema()).with_context(|| format!("encoding {}", self.path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub variant: Variant,
    /// Weight of the numeric term; `None` clusters the categorical columns only.
    pub gamma: Option<f64>,
    pub max_inner: usize,
    pub max_outer: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, k: usize) -> Self {
        let defaults = FitConfig::new(k, 0);
        Self {
            data,
            k,
            restarts: 10,
            seed: 0,
            variant: Variant::Disc,
            gamma: None,
            max_inner: defaults.max_inner,
            max_outer: defaults.max_outer,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.restarts >= 1, "restarts must be at least 1");
        ensure!(self.k >= 1, "k must be at least 1");
        if let Some(g) = self.gamma {
            ensure!(
                g.is_finite() && g >= 0.0,
                "gamma must be finite and non-negative"
            );
        }
        Ok(())
    }

    pub fn fit_config(&self, seed: u64) -> FitConfig {
        let mut cfg = FitConfig::new(self.k, seed).with_variant(self.variant);
        cfg.max_inner = self.max_inner;
        cfg.max_outer = self.max_outer;
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        cfg
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.restarts as u64).map(move |i| self.seed + i)
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
