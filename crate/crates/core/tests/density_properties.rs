use downup::densities::{dpp_eval, hessian_at, positive_eigenvalue_count};
use downup::exchange::{dpp_exchange_bound_check, quadratic_exchange_check};
use downup::walk::chain_rng;
use downup::{exchange_alpha, graphic_basis_density, DppDensity, SubsetDensity, TableDensity, WeightedGraph};
use proptest::prelude::*;
use rand::Rng;

fn max_positive_eigs<D: SubsetDensity>(d: &D, points: usize, seed: u64) -> usize {
    let mut rng = chain_rng(seed, 0);
    (0..points)
        .map(|_| {
            let z: Vec<f64> = (0..d.ground_size()).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect();
            positive_eigenvalue_count(&hessian_at(d, &z).unwrap()).unwrap()
        })
        .max()
        .unwrap()
}

#[test]
fn graphic_hessians_have_one_positive_eigenvalue() {
    let weighted = WeightedGraph::new(
        5,
        [(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.5), (3, 4, 1.0), (4, 0, 3.0), (0, 2, 1.5), (1, 3, 0.7)],
    )
    .unwrap();
    for g in [WeightedGraph::complete(4).unwrap(), weighted] {
        assert_eq!(max_positive_eigs(&graphic_basis_density(&g), 20, 1), 1);
    }
}

#[test]
fn dpp_hessians_have_one_positive_eigenvalue() {
    let mut rng = chain_rng(2, 0);
    for seed in 0..10 {
        let k = 2 + seed as usize % 2;
        let vectors = (0..6).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let d = DppDensity::new(k, vectors).unwrap();
        assert!(max_positive_eigs(&d, 20, seed) <= 1);
    }
}

#[test]
fn small_dpp_exchange_constants() {
    let pair_sum = DppDensity::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(exchange_alpha(&pair_sum).unwrap().alpha_min, 1.0);

    let basis_plus_sum = DppDensity::new(
        3,
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]],
    )
    .unwrap();
    assert!(dpp_exchange_bound_check(&basis_plus_sum).unwrap().pass);
}

#[test]
fn quadratic_inequality_witness() {
    let table = TableDensity::new(4, 2, [(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap();
    let check = quadratic_exchange_check(&table, [0, 1], [2, 3]).unwrap();
    assert_eq!((check.a, check.b, check.c), (1.0, 0.0, 0.0));
    assert!(!check.pass);
}

proptest! {
    #[test]
    fn dpp_eval_ignores_selection_order(
        vectors in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 5),
        perm in Just(vec![0usize, 2, 4]).prop_shuffle(),
    ) {
        let d = DppDensity::new(3, vectors).unwrap();
        let sorted = dpp_eval(&d, &[0, 2, 4]);
        let shuffled = dpp_eval(&d, &perm);
        prop_assert!((sorted - shuffled).abs() <= 1e-12 * sorted.max(1.0), "{sorted} vs {shuffled}");
    }
}
