mod common;

use common::{all_trees, dasgupta_direct, min_cost_dp, purity_direct, random_levels, random_tree, rng};
use hcembed::metrics::{
    canonical_tree, cross_weights, dasgupta_cost, dendrogram_purity, level_weights, moseley_wang, mw_opt, mw_ratio,
    LevelWeightMode, WeightFunction,
};
use hcembed::{Error, LevelLabels};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_purity_matches_definition(seed in any::<u64>(), n in 2usize..120, classes in 1i64..6) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, n);
        let labels: Vec<i64> = (0..n).map(|_| r.random_range(0..classes)).collect();
        match purity_direct(&tree, &labels) {
            Some(direct) => {
                let fast = dendrogram_purity(&tree, &labels).unwrap().value;
                prop_assert!((fast - direct).abs() <= 1e-12 * direct);
                prop_assert!((0.0..=1.0 + 1e-15).contains(&fast));
            }
            None => prop_assert!(matches!(dendrogram_purity(&tree, &labels), Err(Error::Undefined(_)))),
        }
    }

    #[test]
    fn pair_attribution_and_duality(seed in any::<u64>(), n in 2usize..60) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, n);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = r.random_range(0..5) as f64;
                data[i * n + j] = w;
                data[j * n + i] = w;
            }
        }
        let w = WeightFunction::explicit(n, data).unwrap();
        let cross: f64 = cross_weights(&tree, &w).unwrap().iter().sum();
        prop_assert_eq!(cross, w.total());
        let cost = dasgupta_cost(&tree, &w).unwrap();
        prop_assert_eq!(cost, dasgupta_direct(&tree, |i, j| w.get(i, j)));
        let mw = moseley_wang(&tree, &w).unwrap();
        prop_assert_eq!(mw + cost, n as f64 * w.total());
    }

    #[test]
    fn level_weights_follow_shared_depth(seed in any::<u64>(), n in 2usize..40) {
        let mut r = rng(seed);
        let levels = random_levels(&mut r, n);
        let summed = level_weights(&levels, LevelWeightMode::Summed);
        let deepest = level_weights(&levels, LevelWeightMode::Deepest);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    prop_assert_eq!(summed.get(i, j), 0.0);
                    continue;
                }
                let mut by_level = 0.0;
                let mut shared = 0;
                for l in 0..levels.depth() {
                    if levels.get(i, l) == levels.get(j, l) {
                        by_level += (2f64).powi(l as i32);
                        shared = l + 1;
                    }
                }
                prop_assert_eq!(summed.get(i, j), by_level);
                prop_assert_eq!(deepest.get(i, j), if shared == 0 { 0.0 } else { (2f64).powi(shared as i32 - 1) });
            }
        }
    }

    #[test]
    fn ratio_never_exceeds_one(seed in any::<u64>(), n in 2usize..50) {
        let mut r = rng(seed);
        let levels = random_levels(&mut r, n);
        let tree = random_tree(&mut r, n);
        if let Ok(s) = mw_ratio(&tree, &levels, LevelWeightMode::Summed) {
            prop_assert!(s.value <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn tree_enumeration_counts() {
    let expected = [1, 1, 3, 15, 105, 945, 10395];
    for (n, &count) in expected.iter().enumerate().skip(1) {
        assert_eq!(all_trees(n + 1).len(), count, "n = {}", n + 1);
    }
}

#[test]
fn unit_weight_cost_is_tree_invariant() {
    for n in 2..=7usize {
        let w = WeightFunction::unit(n);
        let expected = ((n * n * n - n) / 3) as f64;
        for tree in all_trees(n) {
            assert_eq!(dasgupta_cost(&tree, &w).unwrap(), expected, "n = {n}");
        }
    }
}

#[test]
fn subset_dp_agrees_with_enumeration() {
    let mut r = rng(3);
    for n in 2..=6usize {
        let levels = random_levels(&mut r, n);
        let w = level_weights(&levels, LevelWeightMode::Summed);
        let brute = all_trees(n)
            .iter()
            .map(|t| dasgupta_cost(t, &w).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(brute, min_cost_dp(n, |i, j| w.get(i, j)));
    }
}

#[test]
fn aligned_tree_is_optimal_on_small_inputs() {
    let mut r = rng(4);
    for _ in 0..50 {
        let n = r.random_range(2..=8);
        let levels = random_levels(&mut r, n);
        for mode in [LevelWeightMode::Summed, LevelWeightMode::Deepest] {
            let w = level_weights(&levels, mode);
            let best = n as f64 * w.total() - min_cost_dp(n, |i, j| w.get(i, j));
            assert_eq!(mw_opt(&levels, mode).unwrap(), best);
        }
    }
}

#[test]
fn canonical_tree_is_pure() {
    let mut r = rng(6);
    for _ in 0..20 {
        let n = r.random_range(3..40);
        let levels = random_levels(&mut r, n);
        let tree = canonical_tree(&levels).unwrap();
        if let Ok(s) = dendrogram_purity(&tree, &levels.finest()) {
            assert!((s.value - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn purity_is_one_only_for_contiguous_classes() {
    // ((0,1),(2,3)) with classes {0,2} and {1,3}
    let levels = LevelLabels::flat(&[0, 0, 1, 1]);
    let tree = canonical_tree(&levels).unwrap();
    assert_eq!(dendrogram_purity(&tree, &[0, 0, 1, 1]).unwrap().value, 1.0);
    assert!(dendrogram_purity(&tree, &[0, 1, 0, 1]).unwrap().value < 1.0);
}
