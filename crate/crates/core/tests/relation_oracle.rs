mod support;

use disc_core::{infer_tree, mst_generic, tree_distances, weight_matrix, Cpd, RelationTree};
use proptest::prelude::*;

fn counts_strategy() -> impl Strategy<Value = Vec<usize>> {
    (2usize..=10)
        .prop_flat_map(|o| prop::collection::vec(0usize..40, o))
        .prop_filter("non-empty", |c| c.iter().sum::<usize>() > 0)
}

/// Counts padded so the support is a power of two; every probability and
/// every difference of probabilities is then exact in binary floating point.
fn dyadic_counts() -> impl Strategy<Value = Vec<usize>> {
    counts_strategy().prop_map(|mut c| {
        let total: usize = c.iter().sum();
        let target = total.next_power_of_two();
        c[0] += target - total;
        c
    })
}

fn edge_list(tree_edges: &[disc_core::Edge]) -> Vec<(usize, usize, f64)> {
    tree_edges.iter().map(|e| (e.a, e.b, e.weight)).collect()
}

fn scaled_cpd(counts: &[usize]) -> Cpd {
    // the chain and its distances only need a non-negative vector
    Cpd {
        probs: counts.iter().map(|&c| c as f64).collect(),
        support: 1,
    }
}

fn assert_metric(d: &disc_core::DistanceMatrix) {
    let o = d.size();
    for u in 0..o {
        assert_eq!(d.get(u, u), 0.0);
        for s in 0..o {
            assert!(d.get(u, s) >= 0.0);
            assert_eq!(d.get(u, s), d.get(s, u));
            for g in 0..o {
                assert!(d.get(u, s) <= d.get(u, g) + d.get(g, s) + 1e-15);
            }
        }
    }
}

fn is_chain(tree: &RelationTree) -> bool {
    let mut degree = vec![0; tree.order.len()];
    for e in &tree.edges {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    degree.iter().all(|&d| d <= 2) && tree.edges.len() + 1 == tree.order.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_is_the_probability_gap(counts in counts_strategy()) {
        let cpd = Cpd::from_counts(&counts).unwrap();
        let d = tree_distances(&infer_tree(&cpd));
        for u in 0..cpd.len() {
            for s in 0..cpd.len() {
                prop_assert_eq!(d.get(u, s), (cpd.probs[u] - cpd.probs[s]).abs());
            }
        }
        assert_metric(&d);
    }

    #[test]
    fn closed_form_matches_generic_mst_in_count_units(counts in counts_strategy()) {
        // integer-valued weights keep every sum exact
        let cpd = scaled_cpd(&counts);
        let tree = infer_tree(&cpd);
        prop_assert!(is_chain(&tree));
        let closed = tree_distances(&tree);
        let mst = mst_generic(&weight_matrix(&cpd));
        let paths = support::path_lengths(counts.len(), &edge_list(&mst));
        let total = |edges: &[disc_core::Edge]| edges.iter().map(|e| e.weight).sum::<f64>();
        prop_assert_eq!(total(&tree.edges), total(&mst));
        for u in 0..counts.len() {
            for s in 0..counts.len() {
                prop_assert_eq!(closed.get(u, s), paths[u][s]);
                prop_assert_eq!(closed.get(u, s), (counts[u] as f64 - counts[s] as f64).abs());
            }
        }
    }

    #[test]
    fn closed_form_matches_generic_mst_on_dyadic_supports(counts in dyadic_counts()) {
        let cpd = Cpd::from_counts(&counts).unwrap();
        let closed = tree_distances(&infer_tree(&cpd));
        let paths = support::path_lengths(cpd.len(), &edge_list(&mst_generic(&weight_matrix(&cpd))));
        for u in 0..cpd.len() {
            for s in 0..cpd.len() {
                prop_assert_eq!(closed.get(u, s), paths[u][s]);
            }
        }
    }

    #[test]
    fn closed_form_matches_generic_mst_on_any_support(counts in counts_strategy()) {
        let cpd = Cpd::from_counts(&counts).unwrap();
        let closed = tree_distances(&infer_tree(&cpd));
        let paths = support::path_lengths(cpd.len(), &edge_list(&mst_generic(&weight_matrix(&cpd))));
        for u in 0..cpd.len() {
            for s in 0..cpd.len() {
                // path sums telescope up to rounding of the partial sums
                prop_assert!((closed.get(u, s) - paths[u][s]).abs() <= 1e-15);
            }
        }
        assert_metric(&closed);
    }

    #[test]
    fn relabeling_values_permutes_distances(counts in counts_strategy(), rot in 0usize..10) {
        let o = counts.len();
        let shifted: Vec<usize> = (0..o).map(|u| counts[(u + rot) % o]).collect();
        let a = tree_distances(&infer_tree(&Cpd::from_counts(&counts).unwrap()));
        let b = tree_distances(&infer_tree(&Cpd::from_counts(&shifted).unwrap()));
        for u in 0..o {
            for s in 0..o {
                prop_assert_eq!(b.get(u, s), a.get((u + rot) % o, (s + rot) % o));
            }
        }
    }
}

#[test]
fn toy_cpd_distances() {
    let cpd = Cpd::from_counts(&[2, 1, 1]).unwrap();
    let d = tree_distances(&infer_tree(&cpd));
    assert_eq!(d.get(0, 1), 0.25);
    assert_eq!(d.get(1, 2), 0.0);
    assert_eq!(d.get(0, 2), 0.25);
}
