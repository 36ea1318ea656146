//! Tree quality measures: dendrogram purity, Dasgupta cost, Moseley–Wang and
//! its ratio against the ground-truth aligned tree.
//!
//! All pair sums run over unordered pairs `i < j`.

mod hist;
mod objectives;
mod opt;
mod purity;
mod weights;

use serde::{Deserialize, Serialize};

pub use objectives::{cross_weights, dasgupta_cost, moseley_wang};
pub use opt::{canonical_tree, mw_opt, mw_ratio};
pub use purity::dendrogram_purity;
pub use weights::{level_weights, LevelWeightMode, WeightFunction};

/// A normalised score together with its normaliser (`|P*|` for purity, the
/// optimum for the Moseley–Wang ratio).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub normalizer: f64,
}

/// Dense class ids `0..k` in ascending order of the original labels.
pub(crate) fn dense_classes(labels: &[i64]) -> (Vec<usize>, usize) {
    let mut sorted: Vec<i64> = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let ids = labels
        .iter()
        .map(|l| sorted.binary_search(l).expect("label present"))
        .collect();
    (ids, sorted.len())
}
