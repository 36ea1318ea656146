mod common;

use common::{ess, random_points, rng};
use hcembed::linkage::{cluster, cluster_naive, lance_williams, ward_delta, ClusterStats, LinkageMethod};
use hcembed::Matrix;
use proptest::prelude::*;

fn points_strategy() -> impl Strategy<Value = Matrix> {
    (2usize..40, 1usize..6).prop_flat_map(|(n, d)| {
        prop::collection::vec(-100.0f64..100.0, n * d).prop_map(move |v| Matrix::new(n, d, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_paths_match_the_naive_greedy(points in points_strategy()) {
        for method in LinkageMethod::ALL {
            let fast = cluster(&points, method).unwrap();
            let slow = cluster_naive(&points, method).unwrap();
            if method == LinkageMethod::Average {
                // pair sums are accumulated in a different order
                prop_assert_eq!(fast.merges().len(), slow.merges().len());
                for (a, b) in fast.merges().iter().zip(slow.merges()) {
                    prop_assert_eq!((a.left, a.right, a.size), (b.left, b.right, b.size));
                    prop_assert!((a.height - b.height).abs() <= 1e-9 * b.height.abs().max(1.0));
                }
            } else {
                prop_assert_eq!(&fast, &slow, "{}", method);
            }
        }
    }

    #[test]
    fn cuts_are_nested(points in points_strategy()) {
        let tree = cluster(&points, LinkageMethod::Ward).unwrap();
        let n = points.rows();
        for k in 1..n {
            let coarse = tree.cut(k).unwrap();
            let fine = tree.cut(k + 1).unwrap();
            for i in 0..n {
                for j in 0..n {
                    if fine[i] == fine[j] {
                        prop_assert_eq!(coarse[i], coarse[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn reducible_methods_are_monotone(points in points_strategy()) {
        for method in LinkageMethod::ALL.into_iter().filter(|m| m.is_monotone()) {
            prop_assert!(cluster(&points, method).unwrap().is_monotone(), "{}", method);
        }
    }

    #[test]
    fn relabelling_points_permutes_the_tree(points in points_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = points.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed));
        let shuffled = points.select_rows(&perm);
        for method in [LinkageMethod::Ward, LinkageMethod::Single, LinkageMethod::Complete] {
            let a = cluster(&points, method).unwrap();
            let b = cluster(&shuffled, method).unwrap();
            let ha: Vec<f64> = a.heights().collect();
            let hb: Vec<f64> = b.heights().collect();
            for (x, y) in ha.iter().zip(&hb) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
            for k in 1..=n {
                let ca = a.cut(k).unwrap();
                let cb = b.cut(k).unwrap();
                // shuffled row r is original point perm[r]
                for r in 0..n {
                    for s in 0..n {
                        prop_assert_eq!(cb[r] == cb[s], ca[perm[r]] == ca[perm[s]]);
                    }
                }
            }
        }
    }

    #[test]
    fn ward_recurrence_matches_direct_ess(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pts = random_points(&mut r, 9, 3);
        let rows: Vec<&[f64]> = pts.iter_rows().collect();
        let (a, b, x) = (&rows[0..2], &rows[2..5], &rows[5..9]);
        let delta = |p: &[&[f64]], q: &[&[f64]]| {
            let both: Vec<&[f64]> = p.iter().chain(q).copied().collect();
            ess(&both) - ess(p) - ess(q)
        };
        let ab: Vec<&[f64]> = a.iter().chain(b).copied().collect();
        let direct = delta(&ab, x);
        let recurrence = lance_williams(LinkageMethod::Ward, delta(a, x), delta(b, x), delta(a, b), 2, 3, 4);
        prop_assert!((direct - recurrence).abs() <= 1e-9 * direct.abs());
    }
}

#[test]
fn ward_delta_matches_ess_difference() {
    let mut r = rng(11);
    let pts = random_points(&mut r, 7, 4);
    let rows: Vec<&[f64]> = pts.iter_rows().collect();
    let stats = |s: &[&[f64]]| {
        s[1..].iter().fold(ClusterStats::singleton(s[0]), |acc, p| {
            ClusterStats::merge(&acc, &ClusterStats::singleton(p))
        })
    };
    let (a, b) = (&rows[..3], &rows[3..]);
    let direct = ess(&rows) - ess(a) - ess(b);
    assert!((ward_delta(&stats(a), &stats(b)) - direct).abs() < 1e-9 * direct);
}

#[test]
fn small_line_example() {
    let pts = Matrix::from_rows(&[[0.0], [1.0], [5.0]]).unwrap();
    let tree = cluster(&pts, LinkageMethod::Ward).unwrap();
    let m = tree.merges();
    assert_eq!((m[0].left, m[0].right, m[0].height), (0, 1, 0.5));
    assert_eq!((m[1].left, m[1].right, m[1].height, m[1].size), (2, 3, 13.5, 3));
}

#[test]
fn well_separated_clusters_are_cut_exactly() {
    let mut r = rng(5);
    let centres = [[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]];
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..30 {
            rows.push(vec![
                centre[0] + rand::Rng::random_range(&mut r, -1.0..1.0),
                centre[1] + rand::Rng::random_range(&mut r, -1.0..1.0),
            ]);
            truth.push(c);
        }
    }
    let pts = Matrix::from_rows(&rows).unwrap();
    for method in LinkageMethod::ALL {
        let cut = cluster(&pts, method).unwrap().cut(3).unwrap();
        for i in 0..90 {
            for j in 0..90 {
                assert_eq!(cut[i] == cut[j], truth[i] == truth[j], "{method}");
            }
        }
    }
}
