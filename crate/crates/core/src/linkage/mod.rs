//! Agglomerative clustering.
//!
//! Ward, single, complete and average linkage are reducible and run on the
//! nearest-neighbour chain. Ward works directly on centroid/size state; the
//! other three keep a condensed distance matrix and apply Lance–Williams
//! updates. Centroid linkage is not reducible (its dendrograms can invert), so
//! it runs a greedy scan with cached per-cluster nearest neighbours instead.
//!
//! Merge heights are the raw merge cost: the increase in error sum of squares
//! for Ward (no square root), the inter-cluster Euclidean distance otherwise.
//!
//! Ties between equal costs are broken lexicographically on
//! `(smaller node id, larger node id)` in the greedy paths. The chain breaks
//! ties toward its predecessor and then the smallest slot, which agrees with
//! the greedy order whenever merge costs are distinct.

mod generic;
mod naive;
mod nn_chain;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{squared_distance, Matrix};
use crate::dendrogram::{Dendrogram, Merge};
use crate::error::{Error, Result};

pub use naive::{cluster_naive, cluster_naive_with_cap, NAIVE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageMethod {
    Ward,
    Single,
    Complete,
    Average,
    Centroid,
}

impl LinkageMethod {
    pub const ALL: [LinkageMethod; 5] = [
        LinkageMethod::Ward,
        LinkageMethod::Single,
        LinkageMethod::Complete,
        LinkageMethod::Average,
        LinkageMethod::Centroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkageMethod::Ward => "ward",
            LinkageMethod::Single => "single",
            LinkageMethod::Complete => "complete",
            LinkageMethod::Average => "average",
            LinkageMethod::Centroid => "centroid",
        }
    }

    /// Whether heights are guaranteed non-decreasing.
    pub fn is_monotone(self) -> bool {
        self != LinkageMethod::Centroid
    }
}

impl fmt::Display for LinkageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkageMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LinkageMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::arg(format!("unknown linkage method {s:?}")))
    }
}

/// Size and centroid of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub size: usize,
    pub centroid: Vec<f64>,
    pub active: bool,
}

impl ClusterStats {
    pub fn singleton(point: &[f64]) -> Self {
        Self {
            size: 1,
            centroid: point.to_vec(),
            active: true,
        }
    }

    /// Centroid of the union as the size-weighted average of the two centroids.
    pub fn merge(a: &ClusterStats, b: &ClusterStats) -> ClusterStats {
        let size = a.size + b.size;
        let (wa, wb, total) = (a.size as f64, b.size as f64, size as f64);
        let centroid = a
            .centroid
            .iter()
            .zip(&b.centroid)
            .map(|(x, y)| (wa * x + wb * y) / total)
            .collect();
        ClusterStats {
            size,
            centroid,
            active: true,
        }
    }
}

/// Increase in error sum of squares caused by merging `a` and `b`:
/// `|a||b| / (|a|+|b|) * |mu_a - mu_b|^2`.
pub fn ward_delta(a: &ClusterStats, b: &ClusterStats) -> f64 {
    ward_cost(a.size, &a.centroid, b.size, &b.centroid)
}

#[inline]
pub(crate) fn ward_cost(size_a: usize, mu_a: &[f64], size_b: usize, mu_b: &[f64]) -> f64 {
    let (na, nb) = (size_a as f64, size_b as f64);
    na * nb / (na + nb) * squared_distance(mu_a, mu_b)
}

/// Lance–Williams recurrence: dissimilarity between `a ∪ b` and `x` from the
/// pre-merge values. Ward works in ESS-increase units, centroid in squared
/// Euclidean distances, the rest in plain distances.
pub fn lance_williams(
    method: LinkageMethod,
    d_ax: f64,
    d_bx: f64,
    d_ab: f64,
    size_a: usize,
    size_b: usize,
    size_x: usize,
) -> f64 {
    let (na, nb, nx) = (size_a as f64, size_b as f64, size_x as f64);
    match method {
        LinkageMethod::Single => d_ax.min(d_bx),
        LinkageMethod::Complete => d_ax.max(d_bx),
        LinkageMethod::Average => (na * d_ax + nb * d_bx) / (na + nb),
        LinkageMethod::Ward => ((na + nx) * d_ax + (nb + nx) * d_bx - nx * d_ab) / (na + nb + nx),
        LinkageMethod::Centroid => {
            let nab = na + nb;
            (na * d_ax + nb * d_bx) / nab - na * nb * d_ab / (nab * nab)
        }
    }
}

/// Hierarchical clustering of the rows of `points`.
pub fn cluster(points: &Matrix, method: LinkageMethod) -> Result<Dendrogram> {
    validate_points(points)?;
    let n = points.rows();
    if n == 2 {
        let height = pair_height(method, points.row(0), points.row(1));
        return Dendrogram::new(
            2,
            vec![Merge {
                left: 0,
                right: 1,
                height,
                size: 2,
            }],
        );
    }
    match method {
        LinkageMethod::Ward => nn_chain::ward(points),
        LinkageMethod::Single | LinkageMethod::Complete | LinkageMethod::Average => nn_chain::condensed(points, method),
        LinkageMethod::Centroid => generic::centroid(points),
    }
}

pub(crate) fn validate_points(points: &Matrix) -> Result<()> {
    if points.rows() < 2 {
        return Err(Error::arg(format!(
            "clustering needs at least 2 points, got {}",
            points.rows()
        )));
    }
    if points.cols() == 0 {
        return Err(Error::arg("points have dimension 0"));
    }
    if !points.is_finite() {
        return Err(Error::arg("points contain non-finite coordinates"));
    }
    Ok(())
}

/// Cost of merging two singletons.
pub(crate) fn pair_height(method: LinkageMethod, a: &[f64], b: &[f64]) -> f64 {
    match method {
        LinkageMethod::Ward => 0.5 * squared_distance(a, b),
        _ => squared_distance(a, b).sqrt(),
    }
}

/// Turns merges recorded as `(slot, slot, height)`, where a slot is any leaf
/// inside the cluster, into a dendrogram in ascending height order.
pub(crate) fn relabel(n: usize, mut steps: Vec<(usize, usize, f64)>, sort: bool) -> Result<Dendrogram> {
    if sort {
        // stable: equal heights keep chain order, in which children precede parents
        steps.sort_by(|a, b| a.2.total_cmp(&b.2));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    let mut size = vec![1usize; 2 * n - 1];
    let find = |parent: &mut Vec<usize>, mut x: usize| {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    };
    let mut merges = Vec::with_capacity(n - 1);
    for (t, &(a, b, height)) in steps.iter().enumerate() {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let node = n + t;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge {
            left: ra.min(rb),
            right: ra.max(rb),
            height,
            size: size[node],
        });
    }
    Dendrogram::new(n, merges)
}
