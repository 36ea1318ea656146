//! Aggregation and label-agreement helpers.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix as CostMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::metrics::dense_classes;
use crate::rng::SeedStream;

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl MeanStd {
    /// `None` for an empty input.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let rough = values.iter().sum::<f64>() / n;
        // second pass removes the rounding of the first, so identical values
        // give back exactly that value and a zero spread
        let mean = rough + values.iter().map(|v| v - rough).sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

/// Fraction of points on the diagonal of the best one-to-one matching between
/// predicted clusters and true classes.
pub fn cut_accuracy(predicted: &[usize], truth: &[i64]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "label vectors differ in length");
    if predicted.is_empty() {
        return 1.0;
    }
    let pred: Vec<i64> = predicted.iter().map(|&p| p as i64).collect();
    let (p, kp) = dense_classes(&pred);
    let (t, kt) = dense_classes(truth);
    let size = kp.max(kt);
    let mut table = CostMatrix::new(size, size, 0i64);
    for (&a, &b) in p.iter().zip(&t) {
        table[(a, b)] += 1;
    }
    let (matched, _) = kuhn_munkres(&table);
    matched as f64 / predicted.len() as f64
}

/// True when both labelings induce the same partition.
pub fn same_partition(a: &[usize], b: &[i64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut forward = std::collections::HashMap::new();
    let mut backward = std::collections::HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

/// `size` distinct indices out of `0..n` in ascending order, or all of them
/// when `size >= n`.
pub fn subsample(n: usize, size: usize, stream: &SeedStream) -> Vec<usize> {
    if size >= n {
        return (0..n).collect();
    }
    let mut rng = stream.rng(0);
    let mut picked = index::sample(&mut rng, n, size).into_vec();
    picked.sort_unstable();
    picked
}
