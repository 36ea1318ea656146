use serde::{Deserialize, Serialize};

use super::dense_classes;
use crate::dataset::LevelLabels;
use crate::error::{Error, Result};

/// How shared hierarchy levels turn into a pair weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelWeightMode {
    /// One indicator per level with weight `2^(l-1)`, summed: `2^l* - 1`.
    #[default]
    Summed,
    /// Only the deepest shared level counts: `2^(l* - 1)`, or 0.
    Deepest,
}

impl LevelWeightMode {
    /// Weight of a pair whose deepest shared level is `shared` (0 = none).
    pub fn weight(self, shared: usize) -> f64 {
        match (self, shared) {
            (_, 0) => 0.0,
            (LevelWeightMode::Summed, l) => (2f64).powi(l as i32) - 1.0,
            (LevelWeightMode::Deepest, l) => (2f64).powi(l as i32 - 1),
        }
    }
}

/// Symmetric pair similarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// Dense `n x n` matrix.
    Explicit { n: usize, data: Vec<f64> },
    /// Weight determined by the classes of the two points through a `k x k`
    /// table. Pairs inside one class use the diagonal entry.
    Classes {
        class: Vec<usize>,
        k: usize,
        table: Vec<f64>,
    },
}

impl WeightFunction {
    pub fn explicit(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::arg(format!(
                "weight matrix has {} entries, expected {n}x{n}",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::arg(format!("weight diagonal at {i} is not zero")));
            }
            for j in (i + 1)..n {
                let w = data[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::arg(format!(
                        "weight ({i},{j}) = {w} is not a finite non-negative number"
                    )));
                }
                if data[j * n + i] != w {
                    return Err(Error::arg(format!("weights ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self::Explicit { n, data })
    }

    /// Every distinct pair has weight 1.
    pub fn unit(n: usize) -> Self {
        Self::Classes {
            class: vec![0; n],
            k: 1,
            table: vec![1.0],
        }
    }

    /// Weight 1 for pairs sharing a label, 0 otherwise.
    pub fn same_label(labels: &[i64]) -> Self {
        let (class, k) = dense_classes(labels);
        let mut table = vec![0.0; k * k];
        for c in 0..k {
            table[c * k + c] = 1.0;
        }
        Self::Classes { class, k, table }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Explicit { n, .. } => *n,
            Self::Classes { class, .. } => class.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match self {
            Self::Explicit { n, data } => data[i * n + j],
            Self::Classes { class, k, table } => table[class[i] * k + class[j]],
        }
    }

    /// `sum_{i<j} w_ij`.
    pub fn total(&self) -> f64 {
        match self {
            Self::Explicit { n, data } => {
                let mut s = 0.0;
                for i in 0..*n {
                    for j in (i + 1)..*n {
                        s += data[i * n + j];
                    }
                }
                s
            }
            Self::Classes { class, k, table } => {
                let mut counts = vec![0u64; *k];
                for &c in class {
                    counts[c] += 1;
                }
                let mut s = 0.0;
                for a in 0..*k {
                    let ca = counts[a] as f64;
                    s += table[a * k + a] * ca * (ca - 1.0) / 2.0;
                    for b in (a + 1)..*k {
                        s += table[a * k + b] * ca * counts[b] as f64;
                    }
                }
                s
            }
        }
    }
}

/// Pair weights from hierarchy labels: the pair weight depends on the deepest
/// level at which both points share a label.
pub fn level_weights(labels: &LevelLabels, mode: LevelWeightMode) -> WeightFunction {
    let h = labels.depth();
    let finest = labels.finest();
    let (class, k) = dense_classes(&finest);
    let mut path = vec![0usize; k];
    for (i, &c) in class.iter().enumerate() {
        path[c] = i;
    }
    let mut table = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            let (ra, rb) = (labels.row(path[a]), labels.row(path[b]));
            let shared = ra.iter().zip(rb).take_while(|(x, y)| x == y).count();
            table[a * k + b] = mode.weight(shared.min(h));
        }
    }
    WeightFunction::Classes { class, k, table }
}
