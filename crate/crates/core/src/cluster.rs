//! Joint optimization of the partition, the cluster centers and the
//! per-cluster relation trees.
//!
//! An inner loop alternates sample assignment and center updates under fixed
//! trees until the partition stops changing. The outer loop then reinfers the
//! trees from the converged partition and repeats until reinference no longer
//! moves any sample. The Hamming baseline (plain k-modes) provides the
//! initialization and the `hamming` ablation; `no-relearn` builds the trees
//! once and runs a single inner loop.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{DiscError, Result};
use crate::relation::{cluster_counts, infer_all, RelationModel};

/// Iteration cap of the k-modes initialization.
pub const KMODES_MAX_ITER: usize = 100;

/// Hard assignment of each sample to one of `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    pub assign: Vec<usize>,
    pub k: usize,
}

impl Partition {
    pub fn new(assign: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(DiscError::InvalidConfig("k must be at least 1".into()));
        }
        if let Some(&bad) = assign.iter().find(|&&j| j >= k) {
            return Err(DiscError::InvalidConfig(format!(
                "cluster index {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { assign, k })
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &j in &self.assign {
            sizes[j] += 1;
        }
        sizes
    }

    /// The `n × k` indicator matrix with exactly one 1 per row.
    pub fn indicator(&self) -> Vec<Vec<u8>> {
        self.assign
            .iter()
            .map(|&j| {
                let mut row = vec![0; self.k];
                row[j] = 1;
                row
            })
            .collect()
    }

    /// Renames cluster `j` to `perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self {
            assign: self.assign.iter().map(|&j| perm[j]).collect(),
            k: self.k,
        }
    }
}

/// Cluster centers: one categorical mode per attribute plus numeric means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centers {
    k: usize,
    l: usize,
    q: usize,
    modes: Vec<usize>,
    num_means: Vec<f64>,
}

impl Centers {
    pub fn new(k: usize, modes: Vec<Vec<usize>>, num_means: Vec<Vec<f64>>) -> Result<Self> {
        if modes.len() != k || (!num_means.is_empty() && num_means.len() != k) {
            return Err(DiscError::InvalidConfig(
                "center count differs from k".into(),
            ));
        }
        let l = modes.first().map_or(0, Vec::len);
        let q = num_means.first().map_or(0, Vec::len);
        if modes.iter().any(|m| m.len() != l) || num_means.iter().any(|m| m.len() != q) {
            return Err(DiscError::InvalidConfig("ragged center rows".into()));
        }
        Ok(Self {
            k,
            l,
            q,
            modes: modes.concat(),
            num_means: num_means.concat(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn mode(&self, j: usize, r: usize) -> usize {
        self.modes[j * self.l + r]
    }

    pub fn modes(&self, j: usize) -> &[usize] {
        &self.modes[j * self.l..(j + 1) * self.l]
    }

    pub fn means(&self, j: usize) -> &[f64] {
        &self.num_means[j * self.q..(j + 1) * self.q]
    }

    pub fn has_numeric(&self) -> bool {
        self.q > 0
    }

    fn validate_for(&self, dataset: &Dataset) -> Result<()> {
        if self.l != dataset.l_cat() {
            return Err(DiscError::SchemaMismatch(format!(
                "centers have {} categorical attributes, dataset has {}",
                self.l,
                dataset.l_cat()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Full joint learning with tree reinference.
    Disc,
    /// Trees inferred once from the initialization, one inner loop.
    NoRelearn,
    /// Hamming distance, no trees (k-modes).
    Hamming,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Disc => "disc",
            Variant::NoRelearn => "no-relearn",
            Variant::Hamming => "hamming",
        })
    }
}

impl FromStr for Variant {
    type Err = DiscError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(Variant::Disc),
            "no-relearn" | "disc_no_relearn" => Ok(Variant::NoRelearn),
            "hamming" => Ok(Variant::Hamming),
            other => Err(DiscError::InvalidConfig(format!(
                "unknown variant `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub k: usize,
    pub seed: u64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub variant: Variant,
    /// Weight of the numeric term; only used by mixed fits.
    pub gamma: f64,
}

impl FitConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_inner: 100,
            max_outer: 50,
            variant: Variant::Disc,
            gamma: 1.0,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.k == 0 {
            return Err(DiscError::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(DiscError::InvalidConfig(
                "iteration caps must be at least 1".into(),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(DiscError::InvalidConfig(
                "gamma must be finite and non-negative".into(),
            ));
        }
        if dataset.n() < self.k {
            return Err(DiscError::InvalidConfig(format!(
                "k = {} exceeds the sample count {}",
                self.k,
                dataset.n()
            )));
        }
        if dataset.l_cat() == 0 {
            return Err(DiscError::InvalidDataset(
                "no categorical attributes".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub outer: usize,
    pub inner: usize,
    pub z: f64,
    pub tree_updated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscModel {
    pub partition: Partition,
    pub centers: Centers,
    /// Absent for the Hamming variant.
    pub relations: Option<RelationModel>,
    pub objective: f64,
    pub trace: Vec<TraceRow>,
    pub seed: u64,
    /// Total inner iterations across all outer loops.
    pub inner_iterations: usize,
    /// Number of tree reinferences after the initial build.
    pub tree_updates: usize,
    pub converged: bool,
    pub config: FitConfig,
    /// Numeric weight when fitted on mixed data.
    pub numeric_weight: Option<f64>,
    pub cardinalities: Vec<usize>,
}

impl DiscModel {
    pub fn metric(&self) -> Metric<'_> {
        metric_of(&self.relations)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_trace_csv(&self.trace, out)
    }
}

/// Writes `outer,inner,z,tree_updated` rows.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "outer,inner,z,tree_updated")?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{}",
            row.outer, row.inner, row.z, row.tree_updated
        )?;
    }
    Ok(())
}

/// Value-to-value dissimilarity used for the categorical part.
#[derive(Debug, Clone, Copy)]
pub enum Metric<'a> {
    Hamming,
    Learned(&'a RelationModel),
}

impl Metric<'_> {
    #[inline]
    pub fn value_distance(&self, j: usize, r: usize, u: usize, s: usize) -> f64 {
        match self {
            Metric::Hamming => {
                if u == s {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Learned(rel) => rel.distance(j, r, u, s),
        }
    }
}

/// Categorical sample–cluster distance `Σ_r D_{j,r}(x_r, m_{j,r})`.
pub fn sample_cluster_distance(
    x: &[usize],
    j: usize,
    centers: &Centers,
    relations: &RelationModel,
) -> f64 {
    categorical_distance(x, j, centers, Metric::Learned(relations))
}

pub(crate) fn categorical_distance(
    x: &[usize],
    j: usize,
    centers: &Centers,
    metric: Metric<'_>,
) -> f64 {
    x.iter()
        .enumerate()
        .map(|(r, &u)| metric.value_distance(j, r, u, centers.mode(j, r)))
        .sum()
}

pub(crate) fn numeric_distance(x: &[f64], means: &[f64]) -> f64 {
    x.iter().zip(means).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Distances from every value to every center, flattened for fast lookup.
struct CenterTable<'a> {
    data: &'a Dataset,
    centers: &'a Centers,
    offsets: Vec<usize>,
    width: usize,
    table: Vec<f64>,
    gamma: Option<f64>,
}

impl<'a> CenterTable<'a> {
    fn build(
        data: &'a Dataset,
        centers: &'a Centers,
        metric: Metric<'_>,
        gamma: Option<f64>,
    ) -> Self {
        let card = data.cardinalities();
        let mut offsets = Vec::with_capacity(card.len());
        let mut width = 0;
        for &o in &card {
            offsets.push(width);
            width += o;
        }
        let mut table = vec![0.0; centers.k() * width];
        for j in 0..centers.k() {
            for (r, &o) in card.iter().enumerate() {
                let mode = centers.mode(j, r);
                for u in 0..o {
                    table[j * width + offsets[r] + u] = metric.value_distance(j, r, u, mode);
                }
            }
        }
        Self {
            data,
            centers,
            offsets,
            width,
            table,
            gamma,
        }
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        let base = j * self.width;
        let mut total = 0.0;
        for (r, &u) in self.data.row(i).iter().enumerate() {
            total += self.table[base + self.offsets[r] + u];
        }
        if let Some(gamma) = self.gamma {
            total += gamma * numeric_distance(self.data.numeric_row(i), self.centers.means(j));
        }
        total
    }

    /// Nearest center per sample (ties to the lowest index) and its distance.
    fn assign(&self) -> (Vec<usize>, Vec<f64>) {
        let k = self.centers.k();
        (0..self.data.n())
            .into_par_iter()
            .map(|i| {
                let mut best = (0, self.distance(i, 0));
                for j in 1..k {
                    let d = self.distance(i, j);
                    if d < best.1 {
                        best = (j, d);
                    }
                }
                best
            })
            .unzip()
    }

    fn objective(&self, partition: &Partition) -> f64 {
        let per_sample: Vec<f64> = partition
            .assign
            .par_iter()
            .enumerate()
            .map(|(i, &j)| self.distance(i, j))
            .collect();
        per_sample.iter().sum()
    }
}

/// Assigns every sample to its nearest center; ties go to the lowest index.
pub fn assign_step(dataset: &Dataset, centers: &Centers, relations: &RelationModel) -> Partition {
    let table = CenterTable::build(dataset, centers, Metric::Learned(relations), None);
    Partition {
        assign: table.assign().0,
        k: centers.k(),
    }
}

/// Per-cluster modes (ties to the lowest code) and numeric means.
pub fn update_centers(dataset: &Dataset, partition: &Partition) -> Result<Centers> {
    compute_centers(dataset, partition, Metric::Hamming, dataset.l_num() > 0)
}

/// Objective `z`: summed distance of each sample to its own cluster center.
pub fn objective(
    dataset: &Dataset,
    partition: &Partition,
    centers: &Centers,
    relations: &RelationModel,
) -> f64 {
    CenterTable::build(dataset, centers, Metric::Learned(relations), None).objective(partition)
}

/// Center update under `metric`. For each (cluster, attribute) the chosen
/// value minimizes the members' summed distance to it; ties go to the more
/// frequent value, then the lower code. Under Hamming distance this is
/// exactly the mode.
pub(crate) fn compute_centers(
    dataset: &Dataset,
    partition: &Partition,
    metric: Metric<'_>,
    with_numeric: bool,
) -> Result<Centers> {
    let k = partition.k;
    let l = dataset.l_cat();
    let counts = cluster_counts(dataset, partition);
    let sizes = partition.sizes();
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(DiscError::EmptyCluster(j));
    }
    let mut modes = vec![0usize; k * l];
    for j in 0..k {
        for r in 0..l {
            modes[j * l + r] =
                best_center_value(&counts[j][r], |u, s| metric.value_distance(j, r, u, s));
        }
    }
    let q = if with_numeric { dataset.l_num() } else { 0 };
    let mut means = vec![0.0; k * q];
    if q > 0 {
        for (i, &j) in partition.assign.iter().enumerate() {
            for (c, v) in dataset.numeric_row(i).iter().enumerate() {
                means[j * q + c] += v;
            }
        }
        for j in 0..k {
            for c in 0..q {
                means[j * q + c] /= sizes[j] as f64;
            }
        }
    }
    Ok(Centers {
        k,
        l,
        q,
        modes,
        num_means: means,
    })
}

fn best_center_value(counts: &[usize], dist: impl Fn(usize, usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for s in 0..counts.len() {
        let cost: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(u, &c)| c as f64 * dist(u, s))
            .sum();
        if cost < best_cost || (cost == best_cost && counts[s] > counts[best]) {
            best = s;
            best_cost = cost;
        }
    }
    best
}

/// Moves a sample into every empty cluster: the one farthest from its own
/// center (ties to the lowest index) among clusters with more than one
/// member. Returns whether anything moved.
fn repair_empty(assign: &mut [usize], own_distance: &[f64], k: usize) -> bool {
    let mut sizes = vec![0usize; k];
    for &j in assign.iter() {
        sizes[j] += 1;
    }
    let mut moved = vec![false; assign.len()];
    let mut changed = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for i in 0..assign.len() {
            if moved[i] || sizes[assign[i]] < 2 {
                continue;
            }
            if pick.is_none_or(|p| own_distance[i] > own_distance[p]) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        sizes[assign[i]] -= 1;
        sizes[empty] += 1;
        assign[i] = empty;
        moved[i] = true;
        changed = true;
    }
    changed
}

fn row_key(data: &Dataset, i: usize, with_numeric: bool) -> (Vec<usize>, Vec<u64>) {
    let num = if with_numeric {
        data.numeric_row(i).iter().map(|v| v.to_bits()).collect()
    } else {
        Vec::new()
    };
    (data.row(i).to_vec(), num)
}

/// k-modes (Hamming) or k-prototypes (Hamming plus weighted squared
/// Euclidean) from `k` distinct rows sampled with `seed`.
pub(crate) fn init_prototypes(
    data: &Dataset,
    k: usize,
    seed: u64,
    gamma: Option<f64>,
) -> Result<(Partition, Centers)> {
    if k == 0 {
        return Err(DiscError::InvalidConfig("k must be at least 1".into()));
    }
    if k > data.n() {
        return Err(DiscError::InvalidConfig(format!(
            "k = {k} exceeds the sample count {}",
            data.n()
        )));
    }
    let with_numeric = gamma.is_some() && data.l_num() > 0;
    // with a zero weight the numeric columns cannot separate rows
    let numeric_key = with_numeric && gamma.is_some_and(|g| g > 0.0);
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut seen = std::collections::HashSet::new();
    let mut chosen = Vec::with_capacity(k);
    for &i in &order {
        if seen.insert(row_key(data, i, numeric_key)) {
            chosen.push(i);
            if chosen.len() == k {
                break;
            }
        }
    }
    if chosen.len() < k {
        return Err(DiscError::NotEnoughDistinctRows {
            k,
            available: chosen.len(),
        });
    }
    let q = if with_numeric { data.l_num() } else { 0 };
    let mut centers = Centers {
        k,
        l: data.l_cat(),
        q,
        modes: chosen.iter().flat_map(|&i| data.row(i).to_vec()).collect(),
        num_means: chosen
            .iter()
            .flat_map(|&i| data.numeric_row(i)[..q].to_vec())
            .collect(),
    };
    let gamma = gamma.filter(|_| with_numeric);
    let mut previous: Option<Vec<usize>> = None;
    for _ in 0..KMODES_MAX_ITER {
        let table = CenterTable::build(data, &centers, Metric::Hamming, gamma);
        let (mut assign, own) = table.assign();
        repair_empty(&mut assign, &own, k);
        let partition = Partition { assign, k };
        centers = compute_centers(data, &partition, Metric::Hamming, with_numeric)?;
        if previous.as_ref() == Some(&partition.assign) {
            break;
        }
        previous = Some(partition.assign);
    }
    let assign = previous.expect("at least one k-modes iteration");
    Ok((Partition { assign, k }, centers))
}

/// Plain k-modes with Hamming distance, used to initialize every fit.
pub fn init_kmodes(dataset: &Dataset, k: usize, seed: u64) -> Result<(Partition, Centers)> {
    init_prototypes(dataset, k, seed, None)
}

/// Fits on the categorical attributes (numeric columns are ignored).
pub fn fit(dataset: &Dataset, config: &FitConfig) -> Result<DiscModel> {
    run(dataset, config, None, None)
}

/// Fits starting from a given partition instead of the k-modes result.
pub fn fit_from_partition(
    dataset: &Dataset,
    config: &FitConfig,
    init: Partition,
) -> Result<DiscModel> {
    run(dataset, config, None, Some(init))
}

/// Assigns samples of `dataset` under the frozen model.
pub fn predict(model: &DiscModel, dataset: &Dataset) -> Result<Partition> {
    model.centers.validate_for(dataset)?;
    let gamma = model.numeric_weight.filter(|_| model.centers.has_numeric());
    if gamma.is_some() && dataset.l_num() != model.centers.q {
        return Err(DiscError::SchemaMismatch(format!(
            "model expects {} numeric attributes, dataset has {}",
            model.centers.q,
            dataset.l_num()
        )));
    }
    let metric = model.metric();
    let k = model.centers.k();
    let assign = (0..dataset.n())
        .into_par_iter()
        .map(|i| {
            let dist = |j: usize| {
                let mut d = categorical_distance(dataset.row(i), j, &model.centers, metric);
                if let Some(g) = gamma {
                    d += g * numeric_distance(dataset.numeric_row(i), model.centers.means(j));
                }
                d
            };
            let mut best = (0, dist(0));
            for j in 1..k {
                let d = dist(j);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect();
    Ok(Partition { assign, k })
}

fn metric_of(rel: &Option<RelationModel>) -> Metric<'_> {
    match rel {
        Some(r) => Metric::Learned(r),
        None => Metric::Hamming,
    }
}

/// Shared engine for categorical (`gamma = None`) and mixed fits.
pub(crate) fn run(
    data: &Dataset,
    cfg: &FitConfig,
    gamma: Option<f64>,
    init: Option<Partition>,
) -> Result<DiscModel> {
    cfg.validate(data)?;
    if let Some(g) = gamma {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(DiscError::InvalidConfig(
                "gamma must be finite and non-negative".into(),
            ));
        }
    }
    let with_numeric = gamma.is_some() && data.l_num() > 0;
    let gamma = gamma.filter(|_| with_numeric);
    let k = cfg.k;

    let (mut partition, mut centers) = match init {
        None => init_prototypes(data, k, cfg.seed, gamma)?,
        Some(p) => {
            if p.k != k || p.len() != data.n() {
                return Err(DiscError::InvalidConfig(
                    "initial partition does not match k or n".into(),
                ));
            }
            let c = compute_centers(data, &p, Metric::Hamming, with_numeric)?;
            (p, c)
        }
    };

    let mut relations = match cfg.variant {
        Variant::Hamming => None,
        Variant::Disc | Variant::NoRelearn => Some(infer_all(data, &partition)?),
    };
    if relations.is_some() {
        centers = compute_centers(data, &partition, metric_of(&relations), with_numeric)?;
    }

    let z0 = CenterTable::build(data, &centers, metric_of(&relations), gamma).objective(&partition);
    let mut trace = vec![TraceRow {
        outer: 0,
        inner: 0,
        z: z0,
        tree_updated: relations.is_some(),
    }];

    let mut outer = 0;
    let mut inner_total = 0;
    let mut tree_partition = partition.clone();
    let converged = loop {
        let metric = metric_of(&relations);
        let mut inner_converged = false;
        for _ in 0..cfg.max_inner {
            inner_total += 1;
            let table = CenterTable::build(data, &centers, metric, gamma);
            let (mut assign, own) = table.assign();
            repair_empty(&mut assign, &own, k);
            let next = Partition { assign, k };
            centers = compute_centers(data, &next, metric, with_numeric)?;
            let z = CenterTable::build(data, &centers, metric, gamma).objective(&next);
            trace.push(TraceRow {
                outer,
                inner: inner_total,
                z,
                tree_updated: false,
            });
            let unchanged = next == partition;
            partition = next;
            if unchanged {
                inner_converged = true;
                break;
            }
        }
        if !inner_converged {
            break false;
        }
        match cfg.variant {
            Variant::Hamming | Variant::NoRelearn => break true,
            Variant::Disc => {}
        }
        if partition == tree_partition {
            break true;
        }
        if outer + 1 > cfg.max_outer {
            break false;
        }
        outer += 1;
        tree_partition = partition.clone();
        relations = Some(infer_all(data, &tree_partition)?);
        centers = compute_centers(data, &partition, metric_of(&relations), with_numeric)?;
        let z =
            CenterTable::build(data, &centers, metric_of(&relations), gamma).objective(&partition);
        trace.push(TraceRow {
            outer,
            inner: inner_total,
            z,
            tree_updated: true,
        });
    };

    let objective = trace.last().map_or(z0, |row| row.z);
    Ok(DiscModel {
        partition,
        centers,
        relations,
        objective,
        trace,
        seed: cfg.seed,
        inner_iterations: inner_total,
        tree_updates: outer,
        converged,
        config: cfg.clone(),
        numeric_weight: gamma,
        cardinalities: data.cardinalities(),
    })
}
