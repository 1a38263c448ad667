//! Relation trees over attribute values, inferred per (cluster, attribute).
//!
//! Within cluster `j`, each value `u` of attribute `r` gets the conditional
//! probability `p(u | C_j)`. Values are nodes of a complete graph whose edge
//! weights are absolute probability differences. The minimum spanning tree of
//! that graph is always the chain of values sorted by probability, so the
//! tree is built in closed form and its path lengths reduce to
//! `|p(u | C_j) - p(s | C_j)|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::data::Dataset;
use crate::error::{DiscError, Result};

/// Conditional distribution of one attribute's values inside one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpd {
    pub probs: Vec<f64>,
    /// Cluster size used as the denominator.
    pub support: usize,
}

impl Cpd {
    /// Returns `None` when every count is zero.
    pub fn from_counts(counts: &[usize]) -> Option<Self> {
        let support: usize = counts.iter().sum();
        if support == 0 {
            return None;
        }
        let denom = support as f64;
        Some(Self {
            probs: counts.iter().map(|&c| c as f64 / denom).collect(),
            support,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Dense symmetric `o × o` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    size: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, u: usize, s: usize) -> f64 {
        self.data[u * self.size + s]
    }

    #[inline]
    pub fn set(&mut self, u: usize, s: usize, v: f64) {
        self.data[u * self.size + s] = v;
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.size..(u + 1) * self.size]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.size).map(|u| self.row(u).to_vec()).collect()
    }
}

/// Complete-graph edge weights `w(u, s) = |p_u - p_s|`.
pub type WeightMatrix = SquareMatrix;

/// Tree path distances between values.
pub type DistanceMatrix = SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTree {
    /// Value codes sorted by ascending probability, ties by ascending code.
    pub order: Vec<usize>,
    pub cpd: Cpd,
    /// Chain edges between consecutive entries of `order`.
    pub edges: Vec<Edge>,
}

/// Counts members of `cluster` per value of `attr` and normalizes.
pub fn conditional_distribution(
    dataset: &Dataset,
    partition: &Partition,
    cluster: usize,
    attr: usize,
) -> Result<Cpd> {
    let mut counts = vec![0usize; dataset.cardinality(attr)];
    for (i, &j) in partition.assign.iter().enumerate() {
        if j == cluster {
            counts[dataset.code(i, attr)] += 1;
        }
    }
    Cpd::from_counts(&counts).ok_or(DiscError::EmptyCluster(cluster))
}

pub fn weight_matrix(cpd: &Cpd) -> WeightMatrix {
    let o = cpd.len();
    let mut w = SquareMatrix::zeros(o);
    for u in 0..o {
        for s in 0..o {
            w.set(u, s, (cpd.probs[u] - cpd.probs[s]).abs());
        }
    }
    w
}

/// Closed-form minimum spanning tree: the probability-sorted chain.
pub fn infer_tree(cpd: &Cpd) -> RelationTree {
    let mut order: Vec<usize> = (0..cpd.len()).collect();
    order.sort_by(|&u, &s| cpd.probs[u].total_cmp(&cpd.probs[s]).then(u.cmp(&s)));
    let edges = order
        .windows(2)
        .map(|pair| Edge {
            a: pair[0],
            b: pair[1],
            weight: cpd.probs[pair[1]] - cpd.probs[pair[0]],
        })
        .collect();
    RelationTree {
        order,
        cpd: cpd.clone(),
        edges,
    }
}

/// Prim's algorithm over the complete graph described by `w`.
///
/// Ties are broken by `(weight, smaller endpoint, larger endpoint)`. The
/// production path never calls this; it exists to check [`infer_tree`].
pub fn mst_generic(w: &WeightMatrix) -> Vec<Edge> {
    let o = w.size();
    if o <= 1 {
        return Vec::new();
    }
    let mut in_tree = vec![false; o];
    in_tree[0] = true;
    let mut edges = Vec::with_capacity(o - 1);
    for _ in 1..o {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in (0..o).filter(|&a| in_tree[a]) {
            for b in (0..o).filter(|&b| !in_tree[b]) {
                let key = (w.get(a, b), a.min(b), a.max(b));
                let better = match best {
                    None => true,
                    Some(cur) => key
                        .0
                        .total_cmp(&cur.0)
                        .then((key.1, key.2).cmp(&(cur.1, cur.2)))
                        .is_lt(),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (weight, a, b) = best.expect("complete graph has a crossing edge");
        let newcomer = if in_tree[a] { b } else { a };
        in_tree[newcomer] = true;
        edges.push(Edge { a, b, weight });
    }
    edges
}

/// Path distances on the chain. The path between two chain positions sums
/// consecutive probability gaps, which telescopes to the gap between the
/// endpoints; that closed form is what gets stored.
pub fn tree_distances(tree: &RelationTree) -> DistanceMatrix {
    let o = tree.order.len();
    let p = &tree.cpd.probs;
    let mut d = SquareMatrix::zeros(o);
    for (pos_a, &u) in tree.order.iter().enumerate() {
        for &s in &tree.order[pos_a + 1..] {
            let dist = p[s] - p[u];
            d.set(u, s, dist);
            d.set(s, u, dist);
        }
    }
    d
}

/// Trees and distance matrices for every (cluster, attribute) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationModel {
    k: usize,
    l: usize,
    trees: Vec<RelationTree>,
    dists: Vec<DistanceMatrix>,
}

impl RelationModel {
    pub fn from_trees(k: usize, l: usize, trees: Vec<RelationTree>) -> Result<Self> {
        if trees.len() != k * l {
            return Err(DiscError::InvalidDataset(format!(
                "expected {} relation trees, got {}",
                k * l,
                trees.len()
            )));
        }
        let dists = trees.iter().map(tree_distances).collect();
        Ok(Self { k, l, trees, dists })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn tree(&self, j: usize, r: usize) -> &RelationTree {
        &self.trees[j * self.l + r]
    }

    pub fn distances(&self, j: usize, r: usize) -> &DistanceMatrix {
        &self.dists[j * self.l + r]
    }

    /// `D_{j,r}(u, s)`. Codes beyond the tree's value range are treated as
    /// zero-probability nodes.
    #[inline]
    pub fn distance(&self, j: usize, r: usize, u: usize, s: usize) -> f64 {
        let d = &self.dists[j * self.l + r];
        if u < d.size() && s < d.size() {
            d.get(u, s)
        } else {
            (self.coordinate(j, r, u) - self.coordinate(j, r, s)).abs()
        }
    }

    /// Position of value `u` on the real line embedding of tree `(j, r)`.
    #[inline]
    pub fn coordinate(&self, j: usize, r: usize, u: usize) -> f64 {
        self.trees[j * self.l + r]
            .cpd
            .probs
            .get(u)
            .copied()
            .unwrap_or(0.0)
    }

    /// Inspection document: one entry per (cluster, attribute).
    pub fn to_document(&self, dataset: &Dataset) -> RelationDocument {
        let cells = (0..self.k)
            .flat_map(|j| (0..self.l).map(move |r| (j, r)))
            .map(|(j, r)| {
                let tree = self.tree(j, r);
                RelationCell {
                    cluster: j,
                    attribute: r,
                    name: dataset.cat_names().get(r).cloned().unwrap_or_default(),
                    vocab: dataset.vocab().get(r).cloned().unwrap_or_default(),
                    probs: tree.cpd.probs.clone(),
                    order: tree.order.clone(),
                    distances: self.distances(j, r).to_rows(),
                }
            })
            .collect();
        RelationDocument {
            k: self.k,
            l: self.l,
            cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCell {
    pub cluster: usize,
    pub attribute: usize,
    pub name: String,
    pub vocab: Vec<String>,
    pub probs: Vec<f64>,
    pub order: Vec<usize>,
    pub distances: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDocument {
    pub k: usize,
    pub l: usize,
    pub cells: Vec<RelationCell>,
}

/// Per-cluster value counts, laid out `[j][r][u]`.
pub(crate) fn cluster_counts(dataset: &Dataset, partition: &Partition) -> Vec<Vec<Vec<usize>>> {
    let card = dataset.cardinalities();
    let mut counts: Vec<Vec<Vec<usize>>> = (0..partition.k)
        .map(|_| card.iter().map(|&o| vec![0; o]).collect())
        .collect();
    for (i, &j) in partition.assign.iter().enumerate() {
        for (r, &u) in dataset.row(i).iter().enumerate() {
            counts[j][r][u] += 1;
        }
    }
    counts
}

/// Infers the relation tree of every (cluster, attribute) cell.
pub fn infer_all(dataset: &Dataset, partition: &Partition) -> Result<RelationModel> {
    if partition.assign.len() != dataset.n() {
        return Err(DiscError::LengthMismatch {
            left: partition.assign.len(),
            right: dataset.n(),
        });
    }
    let counts = cluster_counts(dataset, partition);
    let l = dataset.l_cat();
    let k = partition.k;
    let trees = (0..k * l)
        .into_par_iter()
        .map(|cell| {
            let (j, r) = (cell / l, cell % l);
            Cpd::from_counts(&counts[j][r])
                .map(|cpd| infer_tree(&cpd))
                .ok_or(DiscError::EmptyCluster(j))
        })
        .collect::<Result<Vec<_>>>()?;
    RelationModel::from_trees(k, l, trees)
}
