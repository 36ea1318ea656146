//! Reference implementations used only by tests. They favour directness
//! over speed and share no code with the library's fast paths.
#![allow(dead_code)]

use hcembed::{Dendrogram, Matrix, Merge};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Matrix {
    let data = (0..n * d).map(|_| rng.random_range(-10.0..10.0)).collect();
    Matrix::new(n, d, data).unwrap()
}

/// Uniformly random merge order over random active pairs.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Dendrogram {
    let mut active: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        active.shuffle(rng);
        let a = active.pop().unwrap();
        let b = active.pop().unwrap();
        let size = sizes[a] + sizes[b];
        merges.push(Merge {
            left: a.min(b),
            right: a.max(b),
            height: t as f64,
            size,
        });
        sizes.push(size);
        active.push(n + t);
    }
    Dendrogram::new(n, merges).unwrap()
}

/// Parent of every node and the leaf set of every node, by brute force.
pub struct Explicit {
    pub parent: Vec<Option<usize>>,
    pub leaves: Vec<Vec<usize>>,
}

impl Explicit {
    pub fn new(tree: &Dendrogram) -> Self {
        let n = tree.n_leaves();
        let mut parent = vec![None; 2 * n - 1];
        let mut leaves: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (t, m) in tree.merges().iter().enumerate() {
            parent[m.left] = Some(n + t);
            parent[m.right] = Some(n + t);
            let mut set = leaves[m.left].clone();
            set.extend(&leaves[m.right]);
            leaves.push(set);
        }
        Self { parent, leaves }
    }

    pub fn lca(&self, i: usize, j: usize) -> usize {
        let mut ancestors = vec![i];
        let mut v = i;
        while let Some(p) = self.parent[v] {
            ancestors.push(p);
            v = p;
        }
        let mut v = j;
        loop {
            if ancestors.contains(&v) {
                return v;
            }
            v = self.parent[v].unwrap();
        }
    }
}

/// Purity averaged over same-class pairs straight from the definition.
pub fn purity_direct(tree: &Dendrogram, labels: &[i64]) -> Option<f64> {
    let ex = Explicit::new(tree);
    let n = labels.len();
    let (mut sum, mut pairs) = (0.0, 0usize);
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] != labels[j] {
                continue;
            }
            let set = &ex.leaves[ex.lca(i, j)];
            let same = set.iter().filter(|&&x| labels[x] == labels[i]).count();
            sum += same as f64 / set.len() as f64;
            pairs += 1;
        }
    }
    (pairs > 0).then(|| sum / pairs as f64)
}

/// `sum_{i<j} w(i, j) |leaves(lca(i, j))|`.
pub fn dasgupta_direct(tree: &Dendrogram, w: impl Fn(usize, usize) -> f64) -> f64 {
    let ex = Explicit::new(tree);
    let n = tree.n_leaves();
    let mut cost = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            cost += w(i, j) * ex.leaves[ex.lca(i, j)].len() as f64;
        }
    }
    cost
}

#[derive(Clone)]
enum Shape {
    Leaf(usize),
    Node(Box<Shape>, Box<Shape>),
}

fn shapes(set: &[usize]) -> Vec<Shape> {
    if set.len() == 1 {
        return vec![Shape::Leaf(set[0])];
    }
    // the first element always goes left so each unordered split appears once
    let rest = &set[1..];
    let mut out = Vec::new();
    for mask in 0..(1u32 << rest.len()) {
        let mut left = vec![set[0]];
        let mut right = Vec::new();
        for (b, &x) in rest.iter().enumerate() {
            if mask >> b & 1 == 1 {
                left.push(x);
            } else {
                right.push(x);
            }
        }
        if right.is_empty() {
            continue;
        }
        for l in shapes(&left) {
            for r in shapes(&right) {
                out.push(Shape::Node(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn emit(shape: &Shape, n: usize, merges: &mut Vec<Merge>) -> (usize, usize) {
    match shape {
        Shape::Leaf(i) => (*i, 1),
        Shape::Node(l, r) => {
            let (a, sa) = emit(l, n, merges);
            let (b, sb) = emit(r, n, merges);
            merges.push(Merge {
                left: a.min(b),
                right: a.max(b),
                height: merges.len() as f64,
                size: sa + sb,
            });
            (n + merges.len() - 1, sa + sb)
        }
    }
}

/// Every rooted binary tree over `n` labelled leaves, `(2n-3)!!` in total.
pub fn all_trees(n: usize) -> Vec<Dendrogram> {
    let leaves: Vec<usize> = (0..n).collect();
    shapes(&leaves)
        .iter()
        .map(|s| {
            let mut merges = Vec::new();
            emit(s, n, &mut merges);
            Dendrogram::new(n, merges).unwrap()
        })
        .collect()
}

/// Smallest Dasgupta cost over all binary trees, by dynamic programming over
/// leaf subsets.
pub fn min_cost_dp(n: usize, w: impl Fn(usize, usize) -> f64) -> f64 {
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    for i in 0..n {
        best[1 << i] = 0.0;
    }
    let cross = |a: usize, b: usize| {
        let mut s = 0.0;
        for i in 0..n {
            if a >> i & 1 == 0 {
                continue;
            }
            for j in 0..n {
                if b >> j & 1 == 1 {
                    s += w(i, j);
                }
            }
        }
        s
    };
    for set in 1..=full {
        if set.count_ones() < 2 {
            continue;
        }
        let low = set & set.wrapping_neg();
        let size = set.count_ones() as f64;
        let mut sub = (set - 1) & set;
        while sub > 0 {
            if sub & low != 0 {
                let other = set ^ sub;
                let c = best[sub] + best[other] + cross(sub, other) * size;
                if c < best[set] {
                    best[set] = c;
                }
            }
            sub = (sub - 1) & set;
        }
    }
    best[full]
}

/// Direct error sum of squares of a set of rows.
pub fn ess(rows: &[&[f64]]) -> f64 {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j] / n;
        }
    }
    rows.iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum()
}

/// Random two-level labels over `n` points: fine classes grouped into coarse ones.
pub fn random_levels(rng: &mut ChaCha8Rng, n: usize) -> hcembed::LevelLabels {
    let fine_classes = rng.random_range(1..=n.min(4));
    let coarse_of: Vec<i64> = (0..fine_classes).map(|_| rng.random_range(0..2)).collect();
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            let f = rng.random_range(0..fine_classes);
            vec![coarse_of[f], f as i64]
        })
        .collect();
    hcembed::LevelLabels::from_rows(&rows).unwrap()
}
