//! External (ACC, ARI) and internal (CMP) clustering indices, plus the
//! per-sample coordinate export of a fitted model.

use std::io::Write;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::cluster::{DiscModel, Partition};
use crate::data::Dataset;
use crate::error::{DiscError, Result};
use crate::relation::cluster_counts;

/// Co-occurrence counts of predicted clusters (rows) and true classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl Contingency {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(DiscError::LengthMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        let rows = pred.iter().max().map_or(0, |m| m + 1);
        let cols = truth.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&p, &t) in pred.iter().zip(truth) {
            counts[p][t] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols)
            .map(|c| counts.iter().map(|r| r[c]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }
}

/// Accuracy under the best one-to-one matching of clusters to classes.
pub fn acc(pred: &Partition, truth: &[usize]) -> Result<f64> {
    acc_labels(&pred.assign, truth)
}

pub fn acc_labels(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    if table.n == 0 {
        return Err(DiscError::Empty("no samples to score".into()));
    }
    let size = table
        .counts
        .len()
        .max(table.row_sums.len())
        .max(table.col_sums.len());
    let mut weights = Matrix::new(size, size, 0i64);
    for (p, row) in table.counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            weights[(p, t)] = c as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / table.n as f64)
}

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index.
pub fn ari(pred: &Partition, truth: &[usize]) -> Result<f64> {
    ari_labels(&pred.assign, truth)
}

pub fn ari_labels(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    if table.n < 2 {
        return Err(DiscError::InvalidDataset(
            "ARI needs at least two samples".into(),
        ));
    }
    let index: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: f64 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let b: f64 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let expected = a * b / pairs(table.n);
    let max = (a + b) / 2.0;
    if max == expected {
        // both partitions are trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Mean normalized within-cluster entropy over attributes; 0 when every
/// attribute is constant inside every cluster, 1 when uniform.
pub fn cmp(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    if partition.len() != dataset.n() {
        return Err(DiscError::LengthMismatch {
            left: partition.len(),
            right: dataset.n(),
        });
    }
    let sizes = partition.sizes();
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(DiscError::EmptyCluster(j));
    }
    let counts = cluster_counts(dataset, partition);
    let l = dataset.l_cat();
    if l == 0 {
        return Err(DiscError::InvalidDataset(
            "no categorical attributes".into(),
        ));
    }
    let mut total = 0.0;
    for (j, per_attr) in counts.iter().enumerate() {
        for (r, values) in per_attr.iter().enumerate() {
            let o = dataset.cardinality(r);
            if o < 2 {
                continue;
            }
            total += normalized_entropy(values, sizes[j], (o as f64).ln());
        }
    }
    Ok(total / (l * partition.k) as f64)
}

/// `Σ_u −p_u ln p_u / ln o`, arranged as `Σ_u c_u · (ln(N/c_u) / ln o) / N`
/// so that a uniform cell gives exactly 1 and a constant cell exactly 0.
fn normalized_entropy(counts: &[usize], size: usize, log_o: f64) -> f64 {
    let weighted: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * ((size as f64 / c as f64).ln() / log_o))
        .sum();
    weighted / size as f64
}

/// Per-sample coordinates on the relation trees of the assigned cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedTable {
    pub header: Vec<String>,
    pub clusters: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl EncodedTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "cluster,{}", self.header.join(","))?;
        for (j, row) in self.clusters.iter().zip(&self.rows) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(out, "{j},{}", cells.join(","))?;
        }
        Ok(())
    }
}

pub fn export_encoded(dataset: &Dataset, model: &DiscModel) -> Result<EncodedTable> {
    let rel = model.relations.as_ref().ok_or_else(|| {
        DiscError::InvalidConfig("model has no relation trees to encode with".into())
    })?;
    if rel.l() != dataset.l_cat() {
        return Err(DiscError::SchemaMismatch(format!(
            "model has {} categorical attributes, dataset has {}",
            rel.l(),
            dataset.l_cat()
        )));
    }
    let clusters = if dataset.n() == model.partition.len() {
        model.partition.assign.clone()
    } else {
        crate::cluster::predict(model, dataset)?.assign
    };
    let rows = clusters
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            dataset
                .row(i)
                .iter()
                .enumerate()
                .map(|(r, &u)| rel.coordinate(j, r, u))
                .collect()
        })
        .collect();
    Ok(EncodedTable {
        header: dataset.cat_names().to_vec(),
        clusters,
        rows,
    })
}
