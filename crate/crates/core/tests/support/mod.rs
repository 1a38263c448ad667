//! Slow reference implementations used to check the library.
#![allow(dead_code)]

/// Best matching accuracy by trying every permutation of the padded square
/// contingency matrix.
pub fn brute_acc(pred: &[usize], truth: &[usize]) -> f64 {
    let size = pred.iter().chain(truth).max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; size]; size];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let matched: usize = p.iter().enumerate().map(|(i, &j)| counts[i][j]).sum();
        best = best.max(matched);
    });
    best as f64 / pred.len() as f64
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Adjusted Rand index from explicit enumeration of all sample pairs.
pub fn pair_ari(pred: &[usize], truth: &[usize]) -> f64 {
    let (mut a, mut b, mut c, mut d) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    let denom = (a + b) * (b + d) + (a + c) * (c + d);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (a * d - b * c) / denom
}

/// All-pairs path lengths on a tree given as an edge list.
pub fn path_lengths(nodes: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut out = vec![vec![0.0; nodes]; nodes];
    for src in 0..nodes {
        let mut seen = vec![false; nodes];
        let mut stack = vec![(src, 0.0)];
        seen[src] = true;
        while let Some((u, dist)) = stack.pop() {
            out[src][u] = dist;
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, dist + w));
                }
            }
        }
    }
    out
}

/// Single-attribute toy problem solved by enumerating every labeled
/// partition with no empty cluster.
pub struct ToyOracle {
    pub values: Vec<usize>,
    pub k: usize,
    pub cardinality: usize,
}

pub struct ToySolution {
    pub assign: Vec<usize>,
    pub z: f64,
    pub fixed_point: bool,
}

impl ToyOracle {
    pub fn new(values: &[usize], k: usize) -> Self {
        let cardinality = values.iter().max().map_or(0, |m| m + 1);
        Self {
            values: values.to_vec(),
            k,
            cardinality,
        }
    }

    fn probs(&self, assign: &[usize], j: usize) -> Vec<f64> {
        let members: Vec<usize> = (0..assign.len()).filter(|&i| assign[i] == j).collect();
        let mut counts = vec![0usize; self.cardinality];
        for &i in &members {
            counts[self.values[i]] += 1;
        }
        counts
            .iter()
            .map(|&c| c as f64 / members.len() as f64)
            .collect()
    }

    /// Center value minimizing the members' summed distance; ties to the
    /// more frequent value, then the lower code.
    fn center(&self, probs: &[f64]) -> usize {
        let cost = |s: usize| -> f64 {
            probs
                .iter()
                .map(|&pu| {
                    if pu > 0.0 {
                        pu * (pu - probs[s]).abs()
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        let mut best = 0;
        for s in 1..probs.len() {
            let (c, b) = (cost(s), cost(best));
            if c < b || (c == b && probs[s] > probs[best]) {
                best = s;
            }
        }
        best
    }

    pub fn evaluate(&self, assign: &[usize]) -> ToySolution {
        let probs: Vec<Vec<f64>> = (0..self.k).map(|j| self.probs(assign, j)).collect();
        let centers: Vec<usize> = probs.iter().map(|p| self.center(p)).collect();
        let dist = |i: usize, j: usize| (probs[j][self.values[i]] - probs[j][centers[j]]).abs();
        let z = (0..assign.len()).map(|i| dist(i, assign[i])).sum();
        let fixed_point = (0..assign.len()).all(|i| {
            let mut best = 0;
            for j in 1..self.k {
                if dist(i, j) < dist(i, best) {
                    best = j;
                }
            }
            best == assign[i]
        });
        ToySolution {
            assign: assign.to_vec(),
            z,
            fixed_point,
        }
    }

    /// Every labeled partition with all clusters non-empty.
    pub fn enumerate(&self) -> Vec<ToySolution> {
        let n = self.values.len();
        let total = self.k.pow(n as u32);
        (0..total)
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let j = code % self.k;
                        code /= self.k;
                        j
                    })
                    .collect::<Vec<usize>>()
            })
            .filter(|assign| (0..self.k).all(|j| assign.contains(&j)))
            .map(|assign| self.evaluate(&assign))
            .collect()
    }

    pub fn best_fixed_point_z(&self) -> f64 {
        self.enumerate()
            .iter()
            .filter(|s| s.fixed_point)
            .map(|s| s.z)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Two planted clusters that differ only in one numeric column; the
/// categorical columns are drawn independently of the cluster.
pub fn planted_numeric(n: usize, l: usize, values: usize, seed: u64) -> disc_core::Dataset {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let cat: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..l).map(|_| rng.gen_range(0..values)).collect())
        .collect();
    let num: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| vec![0.9 * c as f64 + rng.gen_range(0.0..0.1)])
        .collect();
    disc_core::Dataset::from_codes(&cat, Some(&vec![values; l]))
        .unwrap()
        .with_numeric(&num)
        .unwrap()
        .with_labels(labels)
        .unwrap()
}
