//! Greedy agglomeration with cached nearest neighbours, for centroid linkage.
//!
//! Every step merges the globally cheapest pair, keyed by
//! `(distance, smaller node id, larger node id)`. Distances are recomputed from
//! centroids, so they match the naive oracle bit for bit.

use std::cmp::Ordering;

use super::ClusterStats;
use crate::dataset::{euclidean, Matrix};
use crate::dendrogram::{Dendrogram, Merge};
use crate::error::Result;

#[derive(Clone, Copy)]
struct Key {
    dist: f64,
    lo: usize,
    hi: usize,
}

impl Key {
    fn new(dist: f64, a: usize, b: usize) -> Self {
        Self {
            dist,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    fn cmp(&self, other: &Key) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

pub(super) fn centroid(points: &Matrix) -> Result<Dendrogram> {
    let n = points.rows();
    let mut stats: Vec<ClusterStats> = points.iter_rows().map(ClusterStats::singleton).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut nn: Vec<(Key, usize)> = vec![(Key::new(f64::INFINITY, usize::MAX, usize::MAX), usize::MAX); n];

    let key_of = |stats: &[ClusterStats], ids: &[usize], i: usize, j: usize| {
        Key::new(euclidean(&stats[i].centroid, &stats[j].centroid), ids[i], ids[j])
    };
    let nearest = |stats: &[ClusterStats], ids: &[usize], active: &[usize], i: usize| {
        let mut best = (Key::new(f64::INFINITY, usize::MAX, usize::MAX), usize::MAX);
        for &j in active {
            if j == i {
                continue;
            }
            let k = key_of(stats, ids, i, j);
            if best.1 == usize::MAX || k.cmp(&best.0) == Ordering::Less {
                best = (k, j);
            }
        }
        best
    };

    for &i in &active {
        nn[i] = nearest(&stats, &ids, &active, i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let a = active
            .iter()
            .copied()
            .min_by(|&x, &y| nn[x].0.cmp(&nn[y].0))
            .expect("active clusters remain");
        let (key, b) = nn[a];
        let (keep, drop) = (a.min(b), a.max(b));
        let merged = ClusterStats::merge(&stats[keep], &stats[drop]);
        merges.push(Merge {
            left: key.lo,
            right: key.hi,
            height: key.dist,
            size: merged.size,
        });
        stats[keep] = merged;
        stats[drop].active = false;
        ids[keep] = n + t;
        active.retain(|&s| s != drop);
        if active.len() < 2 {
            break;
        }
        nn[keep] = nearest(&stats, &ids, &active, keep);
        for idx in 0..active.len() {
            let i = active[idx];
            if i == keep {
                continue;
            }
            let partner = nn[i].1;
            if partner == keep || partner == drop {
                nn[i] = nearest(&stats, &ids, &active, i);
            } else {
                let k = key_of(&stats, &ids, i, keep);
                if k.cmp(&nn[i].0) == Ordering::Less {
                    nn[i] = (k, keep);
                }
            }
        }
    }
    Dendrogram::new(n, merges)
}
