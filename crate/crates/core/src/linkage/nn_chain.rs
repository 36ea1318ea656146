//! Nearest-neighbour chain for reducible linkages.

use super::{lance_williams, relabel, ward_cost, LinkageMethod};
use crate::dataset::{euclidean, Matrix};
use crate::dendrogram::Dendrogram;
use crate::error::Result;

/// Runs the chain given a cost oracle over active slots and a merge hook that
/// folds slot `drop` into slot `keep`.
fn run_chain(
    n: usize,
    mut cost: impl FnMut(usize, usize) -> f64,
    mut merge: impl FnMut(usize, usize, &[usize]),
) -> Vec<(usize, usize, f64)> {
    let mut active: Vec<usize> = (0..n).collect();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n - 1);
    while steps.len() < n - 1 {
        if chain.is_empty() {
            chain.push(active[0]);
        }
        let a = chain[chain.len() - 1];
        let prev = (chain.len() >= 2).then(|| chain[chain.len() - 2]);
        let (mut best, mut best_cost) = match prev {
            Some(p) => (p, cost(a, p)),
            None => (usize::MAX, f64::INFINITY),
        };
        for &j in &active {
            if j == a || Some(j) == prev {
                continue;
            }
            let c = cost(a, j);
            if c < best_cost {
                best = j;
                best_cost = c;
            }
        }
        if best == usize::MAX {
            // every remaining cost is +inf or NaN; fall back to the smallest other slot
            best = *active.iter().find(|&&j| j != a).expect("two active slots");
            best_cost = cost(a, best);
        }
        if Some(best) == prev {
            chain.truncate(chain.len() - 2);
            let (keep, drop) = (a.min(best), a.max(best));
            active.retain(|&s| s != drop);
            merge(keep, drop, &active);
            steps.push((keep, drop, best_cost));
        } else {
            chain.push(best);
        }
    }
    steps
}

/// Ward's method over centroid/size state; O(n^2 d) time, O(n d) memory.
pub(super) fn ward(points: &Matrix) -> Result<Dendrogram> {
    let (n, d) = (points.rows(), points.cols());
    let centroids = std::cell::RefCell::new(points.as_slice().to_vec());
    let sizes = std::cell::RefCell::new(vec![1usize; n]);
    let steps = run_chain(
        n,
        |a, b| {
            let c = centroids.borrow();
            let s = sizes.borrow();
            ward_cost(s[a], &c[a * d..(a + 1) * d], s[b], &c[b * d..(b + 1) * d])
        },
        |keep, drop, _| {
            let mut c = centroids.borrow_mut();
            let mut s = sizes.borrow_mut();
            let (wa, wb) = (s[keep] as f64, s[drop] as f64);
            let total = (s[keep] + s[drop]) as f64;
            for k in 0..d {
                let merged = (wa * c[keep * d + k] + wb * c[drop * d + k]) / total;
                c[keep * d + k] = merged;
            }
            s[keep] += s[drop];
        },
    );
    relabel(n, steps, true)
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    n * i - i * (i + 1) / 2 + j - i - 1
}

/// Single, complete and average linkage over a condensed Euclidean distance
/// matrix with Lance–Williams updates; O(n^2) memory.
pub(super) fn condensed(points: &Matrix, method: LinkageMethod) -> Result<Dendrogram> {
    let n = points.rows();
    let mut dist = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dist.push(euclidean(points.row(i), points.row(j)));
        }
    }
    let dist = std::cell::RefCell::new(dist);
    let sizes = std::cell::RefCell::new(vec![1usize; n]);
    let steps = run_chain(
        n,
        |a, b| dist.borrow()[condensed_index(n, a, b)],
        |keep, drop, active| {
            let mut dm = dist.borrow_mut();
            let mut s = sizes.borrow_mut();
            let d_ab = dm[condensed_index(n, keep, drop)];
            for &x in active {
                if x == keep {
                    continue;
                }
                let ix = condensed_index(n, keep, x);
                let d_ax = dm[ix];
                let d_bx = dm[condensed_index(n, drop, x)];
                dm[ix] = lance_williams(method, d_ax, d_bx, d_ab, s[keep], s[drop], s[x]);
            }
            s[keep] += s[drop];
        },
    );
    relabel(n, steps, true)
}
