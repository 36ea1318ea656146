use super::hist::{self, Hist};
use super::{dense_classes, Score};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};

/// Average, over unordered same-class pairs, of the fraction of the pair's
/// class among the leaves of their lowest common ancestor.
///
/// Runs bottom-up with sparse class histograms: at a merge of `a` and `b`
/// into `v`, class `c` gains `count_a(c) * count_b(c)` pairs, each worth
/// `count_v(c) / size(v)`.
pub fn dendrogram_purity(tree: &Dendrogram, labels: &[i64]) -> Result<Score> {
    let n = tree.n_leaves();
    if labels.len() != n {
        return Err(Error::arg(format!(
            "{} labels for a tree with {n} leaves",
            labels.len()
        )));
    }
    let (class, k) = dense_classes(labels);
    let mut counts = vec![0u64; k];
    for &c in &class {
        counts[c] += 1;
    }
    let pairs: u64 = counts.iter().map(|&c| c * c.saturating_sub(1) / 2).sum();
    if pairs == 0 {
        return Err(Error::Undefined(
            "dendrogram purity needs at least one same-class pair".into(),
        ));
    }

    let mut hists: Vec<Hist> = class.iter().map(|&c| vec![(c, 1)]).collect();
    hists.resize(2 * n - 1, Vec::new());
    let mut sum = 0.0;
    for (t, m) in tree.merges().iter().enumerate() {
        let (ha, hb) = (std::mem::take(&mut hists[m.left]), std::mem::take(&mut hists[m.right]));
        let merged = hist::merge(&ha, &hb);
        let size = m.size as f64;
        for (c, na, nb) in hist::common(&ha, &hb) {
            let nv = merged[merged.binary_search_by_key(&c, |e| e.0).expect("class in merge")].1;
            sum += (na * nb) as f64 * nv as f64 / size;
        }
        hists[n + t] = merged;
    }
    Ok(Score {
        value: sum / pairs as f64,
        normalizer: pairs as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dendrogram::Merge;

    fn tree(n: usize, merges: &[(usize, usize)]) -> Dendrogram {
        let mut sizes = vec![1usize; n];
        let ms = merges
            .iter()
            .enumerate()
            .map(|(t, &(l, r))| {
                let size = sizes[l] + sizes[r];
                sizes.push(size);
                Merge {
                    left: l,
                    right: r,
                    height: t as f64,
                    size,
                }
            })
            .collect();
        Dendrogram::new(n, ms).unwrap()
    }

    #[test]
    fn split_pair_has_purity_two_thirds() {
        // ((x1, x3), x2) with labels A, A, B: the A pair meets at the root
        let t = tree(3, &[(0, 2), (1, 3)]);
        let s = dendrogram_purity(&t, &[0, 1, 0]).unwrap();
        assert_eq!(s.normalizer, 1.0);
        assert!((s.value - 1.0).abs() < 1e-15);
        let s = dendrogram_purity(&tree(3, &[(1, 2), (0, 3)]), &[0, 0, 1]).unwrap();
        assert!((s.value - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pure_tree_scores_one() {
        let t = tree(4, &[(0, 1), (2, 3), (4, 5)]);
        assert_eq!(dendrogram_purity(&t, &[7, 7, 3, 3]).unwrap().value, 1.0);
    }

    #[test]
    fn no_pairs_is_undefined() {
        let t = tree(2, &[(0, 1)]);
        assert!(matches!(dendrogram_purity(&t, &[0, 1]), Err(Error::Undefined(_))));
        assert!(matches!(dendrogram_purity(&t, &[0]), Err(Error::Argument(_))));
    }
}
