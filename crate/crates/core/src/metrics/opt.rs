use super::objectives::moseley_wang;
use super::weights::{level_weights, LevelWeightMode};
use super::{dense_classes, Score};
use crate::dataset::LevelLabels;
use crate::dendrogram::{Dendrogram, Merge};
use crate::error::{Error, Result};

struct Builder {
    n: usize,
    sizes: Vec<usize>,
    merges: Vec<Merge>,
}

impl Builder {
    fn join(&mut self, a: usize, b: usize, height: f64) -> usize {
        let size = self.sizes[a] + self.sizes[b];
        self.merges.push(Merge {
            left: a.min(b),
            right: a.max(b),
            height,
            size,
        });
        self.sizes.push(size);
        self.n + self.merges.len() - 1
    }

    /// Balanced binary tree over `nodes` by recursive halving.
    fn balanced(&mut self, nodes: &[usize], height: f64) -> usize {
        match nodes {
            [only] => *only,
            _ => {
                let (l, r) = nodes.split_at(nodes.len() / 2);
                let a = self.balanced(l, height);
                let b = self.balanced(r, height);
                self.join(a, b, height)
            }
        }
    }
}

/// Ground-truth aligned tree: a balanced tree inside every finest class, then
/// balanced merges of sibling groups level by level up to the root. Merge
/// heights are `0` inside finest classes and `h - l` when joining groups that
/// share level `l` (zero-based, `-1` for the root joins).
pub fn canonical_tree(labels: &LevelLabels) -> Result<Dendrogram> {
    let n = labels.n();
    if n == 0 {
        return Err(Error::arg("cannot build a tree over zero points"));
    }
    let h = labels.depth();
    let (class, k) = dense_classes(&labels.finest());
    let mut members = vec![Vec::new(); k];
    for (i, &c) in class.iter().enumerate() {
        members[c].push(i);
    }
    let mut b = Builder {
        n,
        sizes: vec![1; n],
        merges: Vec::with_capacity(n.saturating_sub(1)),
    };
    // (representative point, subtree root) for every current group
    let mut groups: Vec<(usize, usize)> = members.iter().map(|m| (m[0], b.balanced(m, 0.0))).collect();
    for level in (0..h.saturating_sub(1)).rev() {
        let height = (h - 1 - level) as f64;
        let keys: Vec<i64> = groups.iter().map(|&(p, _)| labels.get(p, level)).collect();
        let (ids, count) = dense_classes(&keys);
        let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); count];
        for (g, &id) in groups.iter().zip(&ids) {
            buckets[id].push(*g);
        }
        groups = buckets
            .into_iter()
            .map(|bucket| {
                let roots: Vec<usize> = bucket.iter().map(|g| g.1).collect();
                (bucket[0].0, b.balanced(&roots, height))
            })
            .collect();
    }
    let roots: Vec<usize> = groups.iter().map(|g| g.1).collect();
    b.balanced(&roots, h as f64);
    Dendrogram::new(n, b.merges)
}

/// Moseley–Wang value of the ground-truth aligned tree under level weights.
pub fn mw_opt(labels: &LevelLabels, mode: LevelWeightMode) -> Result<f64> {
    moseley_wang(&canonical_tree(labels)?, &level_weights(labels, mode))
}

/// Moseley–Wang of `tree` divided by the aligned optimum.
pub fn mw_ratio(tree: &Dendrogram, labels: &LevelLabels, mode: LevelWeightMode) -> Result<Score> {
    let weights = level_weights(labels, mode);
    let value = moseley_wang(tree, &weights)?;
    let opt = moseley_wang(&canonical_tree(labels)?, &weights)?;
    if opt <= 0.0 {
        return Err(Error::Undefined("Moseley-Wang optimum is zero, ratio undefined".into()));
    }
    Ok(Score {
        value: value / opt,
        normalizer: opt,
    })
}
