use super::hist::{self, Hist};
use super::weights::WeightFunction;
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};

fn check_size(tree: &Dendrogram, weights: &WeightFunction) -> Result<()> {
    if tree.n_leaves() != weights.n() {
        return Err(Error::arg(format!(
            "tree has {} leaves but weights cover {} points",
            tree.n_leaves(),
            weights.n()
        )));
    }
    Ok(())
}

/// Sum of weights over the pairs split by each merge, indexed by merge.
/// Every pair is split by exactly one merge, so these add up to the total.
pub fn cross_weights(tree: &Dendrogram, weights: &WeightFunction) -> Result<Vec<f64>> {
    check_size(tree, weights)?;
    let n = tree.n_leaves();
    Ok(match weights {
        WeightFunction::Explicit { .. } => {
            let sets = tree.lca_leaf_sets();
            sets.iter()
                .map(|(_, a, b)| {
                    let mut s = 0.0;
                    for &i in a {
                        for &j in b {
                            s += weights.get(i, j);
                        }
                    }
                    s
                })
                .collect()
        }
        WeightFunction::Classes { class, k, table } => {
            let mut hists: Vec<Hist> = class.iter().map(|&c| vec![(c, 1)]).collect();
            hists.resize(2 * n - 1, Vec::new());
            let mut out = Vec::with_capacity(n - 1);
            for (t, m) in tree.merges().iter().enumerate() {
                let (ha, hb) = (std::mem::take(&mut hists[m.left]), std::mem::take(&mut hists[m.right]));
                let mut s = 0.0;
                for &(ca, na) in &ha {
                    for &(cb, nb) in &hb {
                        s += table[ca * k + cb] * (na * nb) as f64;
                    }
                }
                out.push(s);
                hists[n + t] = hist::merge(&ha, &hb);
            }
            out
        }
    })
}

/// `sum_{i<j} w_ij |leaves(lca(i, j))|`, accumulated per merge as the split
/// weight times the merged size.
pub fn dasgupta_cost(tree: &Dendrogram, weights: &WeightFunction) -> Result<f64> {
    let cross = cross_weights(tree, weights)?;
    Ok(cross.iter().zip(tree.merges()).map(|(c, m)| c * m.size as f64).sum())
}

/// `n * sum_{i<j} w_ij - cost`.
pub fn moseley_wang(tree: &Dendrogram, weights: &WeightFunction) -> Result<f64> {
    let cost = dasgupta_cost(tree, weights)?;
    Ok(tree.n_leaves() as f64 * weights.total() - cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dendrogram::Merge;

    fn chain3() -> Dendrogram {
        Dendrogram::new(
            3,
            vec![
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2,
                },
                Merge {
                    left: 2,
                    right: 3,
                    height: 2.0,
                    size: 3,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_weights_on_three_points() {
        let w = WeightFunction::unit(3);
        assert_eq!(dasgupta_cost(&chain3(), &w).unwrap(), 8.0);
        assert_eq!(moseley_wang(&chain3(), &w).unwrap(), 1.0);
    }

    #[test]
    fn zero_weights() {
        let w = WeightFunction::explicit(3, vec![0.0; 9]).unwrap();
        assert_eq!(dasgupta_cost(&chain3(), &w).unwrap(), 0.0);
        assert_eq!(moseley_wang(&chain3(), &w).unwrap(), 0.0);
    }

    #[test]
    fn explicit_and_class_forms_agree() {
        let w = WeightFunction::same_label(&[1, 2, 1]);
        let dense: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| w.get(i, j))
            .collect();
        let e = WeightFunction::explicit(3, dense).unwrap();
        assert_eq!(
            cross_weights(&chain3(), &w).unwrap(),
            cross_weights(&chain3(), &e).unwrap()
        );
        assert_eq!(dasgupta_cost(&chain3(), &w).unwrap(), 3.0);
    }

    #[test]
    fn size_mismatch() {
        assert!(dasgupta_cost(&chain3(), &WeightFunction::unit(4)).is_err());
    }
}
