//! Fast structures against brute-force oracles on random inputs.

mod common;

use downup::WeightedGraph;
use proptest::prelude::*;

/// Connected multigraphs on up to 6 vertices with at most 11 edges: a random
/// spanning path plus extra edges, all with random weights.
fn small_graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..=6).prop_flat_map(|n| {
        let order = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
        let extra = prop::collection::vec((0..n, 0..n), 0..=11 - (n - 1));
        let weights = prop::collection::vec(0.1f64..5.0, 11);
        (Just(n), order, extra, weights).prop_map(|(n, order, extra, weights)| {
            let mut pairs: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
            pairs.extend(extra.into_iter().filter(|(u, v)| u != v));
            let edges = pairs.into_iter().zip(weights).map(|((u, v), w)| (u, v, w));
            WeightedGraph::new(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linkcut_matches_naive_forest(seed in any::<u64>(), vertices in 2usize..40) {
        let outcome = common::compare_with_naive(seed, vertices, 2_000);
        prop_assert!(outcome.is_ok(), "{}", outcome.unwrap_err());
    }

    #[test]
    fn enumeration_agrees_with_matrix_tree(g in small_graph()) {
        let trees = g.enumerate_spanning_trees().unwrap();
        let enumerated: f64 = trees.iter().map(|(_, w)| w).sum();
        let total = g.weighted_tree_total();
        prop_assert!((enumerated - total).abs() <= 1e-9 * total, "{enumerated} vs {total}");
        for (tree, w) in &trees {
            prop_assert!(g.is_spanning_tree(tree.edge_ids()));
            prop_assert_eq!(*w, g.weight_product(tree.edge_ids()));
        }
    }

    #[test]
    fn edge_list_round_trip(g in small_graph()) {
        let text = g.to_edge_list();
        prop_assert_eq!(WeightedGraph::parse(&text).unwrap(), g);
    }
}
