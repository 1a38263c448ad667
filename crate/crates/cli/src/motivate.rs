//! k-modes driven by randomly drawn value-to-value distance matrices, to
//! compare per-cluster relationships against shared and Hamming ones.

use std::io::Write;

use anyhow::{anyhow, ensure, Result};
use disc_core::{acc, init_kmodes, Dataset, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Independent random matrix per cluster and attribute.
    Customized,
    /// One random matrix per attribute shared by every cluster.
    Uniform,
    /// Hamming scaled by a random weight per cluster and attribute.
    Weighted,
    Hamming,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Customized,
        Strategy::Uniform,
        Strategy::Weighted,
        Strategy::Hamming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Customized => "customized",
            Strategy::Uniform => "uniform",
            Strategy::Weighted => "weighted",
            Strategy::Hamming => "hamming",
        }
    }
}

/// Square `o × o` matrices, one per (cluster, attribute).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMatrices {
    k: usize,
    cards: Vec<usize>,
    mats: Vec<Vec<f64>>,
}

fn random_symmetric(o: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut m = vec![0.0; o * o];
    for u in 0..o {
        for s in u + 1..o {
            let d = rng.gen::<f64>();
            m[u * o + s] = d;
            m[s * o + u] = d;
        }
    }
    m
}

fn scaled_hamming(o: usize, w: f64) -> Vec<f64> {
    (0..o * o)
        .map(|i| if i / o == i % o { 0.0 } else { w })
        .collect()
}

impl StrategyMatrices {
    pub fn generate(strategy: Strategy, k: usize, cards: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let l = cards.len();
        let mats = match strategy {
            Strategy::Customized => (0..k)
                .flat_map(|_| {
                    cards
                        .iter()
                        .map(|&o| random_symmetric(o, rng))
                        .collect::<Vec<_>>()
                })
                .collect(),
            Strategy::Uniform => {
                let shared: Vec<Vec<f64>> =
                    cards.iter().map(|&o| random_symmetric(o, rng)).collect();
                return Self::shared(k, cards, shared);
            }
            Strategy::Weighted => (0..k * l)
                .map(|i| scaled_hamming(cards[i % l], rng.gen()))
                .collect(),
            Strategy::Hamming => (0..k * l)
                .map(|i| scaled_hamming(cards[i % l], 1.0))
                .collect(),
        };
        Self {
            k,
            cards: cards.to_vec(),
            mats,
        }
    }

    /// The same per-attribute matrices for every cluster.
    pub fn shared(k: usize, cards: &[usize], per_attribute: Vec<Vec<f64>>) -> Self {
        assert_eq!(per_attribute.len(), cards.len());
        let mats = (0..k).flat_map(|_| per_attribute.iter().cloned()).collect();
        Self {
            k,
            cards: cards.to_vec(),
            mats,
        }
    }

    pub fn get(&self, j: usize, r: usize, u: usize, s: usize) -> f64 {
        let o = self.cards[r];
        self.mats[j * self.cards.len() + r][u * o + s]
    }
}

fn modes(data: &Dataset, p: &Partition, previous: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let l = data.l_cat();
    let mut counts: Vec<Vec<Vec<usize>>> = (0..p.k)
        .map(|_| (0..l).map(|r| vec![0; data.cardinality(r)]).collect())
        .collect();
    for (i, &j) in p.assign.iter().enumerate() {
        for (r, &u) in data.row(i).iter().enumerate() {
            counts[j][r][u] += 1;
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(j, per_attr)| {
            if per_attr.first().is_some_and(|c| c.iter().all(|&x| x == 0)) {
                // an empty cluster keeps its last center
                return previous[j].clone();
            }
            per_attr
                .iter()
                .map(|c| {
                    let best = *c.iter().max().expect("attribute has values");
                    c.iter().position(|&x| x == best).expect("max is present")
                })
                .collect()
        })
        .collect()
}

/// k-modes style loop with fixed distance matrices: assign to the cheapest
/// center (lowest index on ties), move centers to the modes, until stable.
pub fn cluster_with_matrices(data: &Dataset, init: &Partition, m: &StrategyMatrices) -> Partition {
    assert_eq!(m.k, init.k);
    let mut partition = init.clone();
    let mut centers = modes(data, &partition, &vec![vec![0; data.l_cat()]; init.k]);
    for _ in 0..MAX_ITER {
        let assign: Vec<usize> = (0..data.n())
            .map(|i| {
                let x = data.row(i);
                let cost = |j: usize| -> f64 {
                    x.iter()
                        .enumerate()
                        .map(|(r, &u)| m.get(j, r, u, centers[j][r]))
                        .sum()
                };
                let mut best = (0, cost(0));
                for j in 1..m.k {
                    let c = cost(j);
                    if c < best.1 {
                        best = (j, c);
                    }
                }
                best.0
            })
            .collect();
        if assign == partition.assign {
            break;
        }
        partition = Partition { assign, k: init.k };
        centers = modes(data, &partition, &centers);
    }
    partition
}

/// ACC of `trials` runs; trial `t` draws its matrices from seed `seed + t`,
/// and every trial starts from the same k-modes partition (seed `seed`).
pub fn random_relationship_baseline(
    data: &Dataset,
    k: usize,
    strategy: Strategy,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    ensure!(trials >= 1, "trials must be at least 1");
    let truth = data
        .labels()
        .ok_or_else(|| anyhow!("the dataset has no labels"))?;
    let (init, _) = init_kmodes(data, k, seed)?;
    let cards = data.cardinalities();
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + t);
            let m = StrategyMatrices::generate(strategy, k, &cards, &mut rng);
            Ok(acc(&cluster_with_matrices(data, &init, &m), truth)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: Strategy,
    pub acc: Vec<f64>,
    pub median: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

pub fn motivation_experiment(
    data: &Dataset,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<StrategyResult>> {
    Strategy::ALL
        .iter()
        .map(|&strategy| {
            let acc = random_relationship_baseline(data, k, strategy, trials, seed)?;
            Ok(StrategyResult {
                strategy,
                median: median(&acc),
                acc,
            })
        })
        .collect()
}

/// Long format `strategy,trial,acc`, ready for box plots.
pub fn write_motivation_csv<W: Write>(
    results: &[StrategyResult],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "strategy,trial,acc")?;
    for res in results {
        for (t, a) in res.acc.iter().enumerate() {
            writeln!(out, "{},{t},{a}", res.strategy.name())?;
        }
    }
    Ok(())
}
