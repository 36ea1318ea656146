//! Binary merge trees.
//!
//! Node ids `0..n` are leaves and merge `t` creates node `n + t`, the same
//! encoding as the usual `(n-1) x 4` linkage matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDendrogram")]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

#[derive(Deserialize)]
struct RawDendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl TryFrom<RawDendrogram> for Dendrogram {
    type Error = Error;
    fn try_from(raw: RawDendrogram) -> Result<Self> {
        Dendrogram::new(raw.n_leaves, raw.merges)
    }
}

impl Dendrogram {
    /// Validates the merge list: `n - 1` merges, each child created before it is
    /// consumed and consumed exactly once, sizes adding up.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::Structural("dendrogram without leaves".into()));
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::Structural(format!(
                "{} merges for {n_leaves} leaves, expected {}",
                merges.len(),
                n_leaves - 1
            )));
        }
        let total = 2 * n_leaves - 1;
        let mut size = vec![0usize; total];
        size[..n_leaves].fill(1);
        let mut consumed = vec![false; total];
        for (t, m) in merges.iter().enumerate() {
            let node = n_leaves + t;
            for child in [m.left, m.right] {
                if child >= node {
                    return Err(Error::Structural(format!(
                        "merge {t} references node {child} which does not exist yet"
                    )));
                }
                if consumed[child] {
                    return Err(Error::Structural(format!(
                        "node {child} is merged twice (again at merge {t})"
                    )));
                }
                consumed[child] = true;
            }
            if m.left == m.right {
                return Err(Error::Structural(format!(
                    "merge {t} joins node {} with itself",
                    m.left
                )));
            }
            let s = size[m.left] + size[m.right];
            if m.size != s {
                return Err(Error::Structural(format!(
                    "merge {t} records size {} but its children hold {s}",
                    m.size
                )));
            }
            if m.height.is_nan() {
                return Err(Error::Structural(format!("merge {t} has a NaN height")));
            }
            size[node] = s;
        }
        Ok(Self { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves - 2
    }

    pub fn node_size(&self, node: usize) -> usize {
        if node < self.n_leaves {
            1
        } else {
            self.merges[node - self.n_leaves].size
        }
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Heights never decrease along the merge order.
    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Leaf sets of every internal node, laid out contiguously.
    pub fn lca_leaf_sets(&self) -> LeafSets {
        let n = self.n_leaves;
        let total = 2 * n - 1;
        let mut start = vec![0usize; total];
        let mut order = vec![0usize; n];
        // Parents are created after their children, so a reverse sweep visits
        // every parent before its children.
        for t in (0..self.merges.len()).rev() {
            let m = &self.merges[t];
            let s = start[n + t];
            start[m.left] = s;
            start[m.right] = s + self.node_size(m.left);
        }
        for leaf in 0..n {
            order[start[leaf]] = leaf;
        }
        LeafSets {
            n,
            order,
            start,
            merges: self.merges.iter().map(|m| (m.left, m.right, m.size)).collect(),
        }
    }

    /// Flat clustering with exactly `k` clusters obtained by undoing the last
    /// `k - 1` merges. Labels are numbered by smallest member leaf.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves;
        if k == 0 || k > n {
            return Err(Error::arg(format!("cut size k={k} outside 1..={n}")));
        }
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        for (t, m) in self.merges[..n - k].iter().enumerate() {
            parent[m.left] = n + t;
            parent[m.right] = n + t;
        }
        let mut root_label = vec![usize::MAX; 2 * n - 1];
        let mut labels = vec![0usize; n];
        let mut next = 0;
        for (leaf, label) in labels.iter_mut().enumerate() {
            let mut r = leaf;
            while parent[r] != r {
                r = parent[r];
            }
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            *label = root_label[r];
        }
        Ok(labels)
    }
}

/// Leaves of each subtree as a contiguous slice of one leaf ordering.
#[derive(Debug, Clone)]
pub struct LeafSets {
    n: usize,
    order: Vec<usize>,
    start: Vec<usize>,
    merges: Vec<(usize, usize, usize)>,
}

impl LeafSets {
    pub fn leaf_order(&self) -> &[usize] {
        &self.order
    }

    pub fn leaves(&self, node: usize) -> &[usize] {
        let s = self.start[node];
        let len = if node < self.n { 1 } else { self.merges[node - self.n].2 };
        &self.order[s..s + len]
    }

    /// Leaves under the left and right child of merge `t`. Every unordered
    /// leaf pair with one leaf in each is owned by node `n + t`.
    pub fn children(&self, t: usize) -> (&[usize], &[usize]) {
        let (l, r, _) = self.merges[t];
        (self.leaves(l), self.leaves(r))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize], &[usize])> + '_ {
        (0..self.merges.len()).map(move |t| {
            let (a, b) = self.children(t);
            (self.n + t, a, b)
        })
    }
}
