//! Cubic-time reference agglomeration.
//!
//! Recomputes every inter-cluster cost from scratch at every step (linkage
//! distances from the point-level distance matrix, Ward and centroid from
//! centroids) and merges the pair with the smallest
//! `(cost, smaller node id, larger node id)`.

use std::cmp::Ordering;

use super::{validate_points, ward_delta, ClusterStats, LinkageMethod};
use crate::dataset::{euclidean, Matrix};
use crate::dendrogram::{Dendrogram, Merge};
use crate::error::{Error, Result};

pub const NAIVE_CAP: usize = 512;

pub fn cluster_naive(points: &Matrix, method: LinkageMethod) -> Result<Dendrogram> {
    cluster_naive_with_cap(points, method, NAIVE_CAP)
}

pub fn cluster_naive_with_cap(points: &Matrix, method: LinkageMethod, cap: usize) -> Result<Dendrogram> {
    validate_points(points)?;
    let n = points.rows();
    if n > cap {
        return Err(Error::arg(format!(
            "naive clustering is capped at {cap} points, got {n}"
        )));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(points.row(i), points.row(j));
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    struct Cluster {
        id: usize,
        members: Vec<usize>,
        stats: ClusterStats,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            id: i,
            members: vec![i],
            stats: ClusterStats::singleton(points.row(i)),
        })
        .collect();

    let dist = &dist;
    let cost = |a: &Cluster, b: &Cluster| -> f64 {
        let pairs = || {
            a.members
                .iter()
                .flat_map(|&i| b.members.iter().map(move |&j| dist[i * n + j]))
        };
        match method {
            LinkageMethod::Ward => ward_delta(&a.stats, &b.stats),
            LinkageMethod::Centroid => euclidean(&a.stats.centroid, &b.stats.centroid),
            LinkageMethod::Single => pairs().fold(f64::INFINITY, f64::min),
            LinkageMethod::Complete => pairs().fold(f64::NEG_INFINITY, f64::max),
            LinkageMethod::Average => pairs().sum::<f64>() / (a.members.len() * b.members.len()) as f64,
        }
    };

    let mut merges = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for p in 0..clusters.len() {
            for q in (p + 1)..clusters.len() {
                let c = cost(&clusters[p], &clusters[q]);
                let (lo, hi) = (clusters[p].id.min(clusters[q].id), clusters[p].id.max(clusters[q].id));
                let better = match best {
                    None => true,
                    Some((bc, blo, bhi, _, _)) => {
                        c.total_cmp(&bc).then(lo.cmp(&blo)).then(hi.cmp(&bhi)) == Ordering::Less
                    }
                };
                if better {
                    best = Some((c, lo, hi, p, q));
                }
            }
        }
        let (height, lo, hi, p, q) = best.expect("at least two clusters");
        let b = clusters.remove(q);
        let a = clusters.remove(p);
        let stats = ClusterStats::merge(&a.stats, &b.stats);
        let mut members = a.members;
        members.extend(b.members);
        merges.push(Merge {
            left: lo,
            right: hi,
            height,
            size: members.len(),
        });
        clusters.push(Cluster {
            id: n + t,
            members,
            stats,
        });
    }
    Dendrogram::new(n, merges)
}
