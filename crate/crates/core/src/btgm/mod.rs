//! Binary-tree Gaussian mixtures: planted hierarchies encoded in the
//! Euclidean geometry of the component means.

mod mixture;
mod separation;

pub use mixture::{sample, sample_counts, Component, Hierarchy, MixtureSpec};
pub use separation::{
    check_corollary, check_theorem1, check_theorem2, Condition, CorollaryConstants, CorollaryReport, LevelPair,
    PairBound, SeparationReport, SetBoundForm, Theorem1Constants, Theorem2Constants,
};

use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtgmSpec {
    /// Tree height; the mixture has `2^height` components.
    pub height: usize,
    pub margin: f64,
    /// Expansion ratio between consecutive tree levels.
    pub alpha: f64,
    pub dim: usize,
}

impl BtgmSpec {
    pub fn new(height: usize, margin: f64, alpha: f64, dim: usize) -> Result<Self> {
        let spec = Self {
            height,
            margin,
            alpha,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.height > 30 {
            return Err(Error::arg(format!("height {} outside 1..=30", self.height)));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(Error::arg(format!("margin must be positive, got {}", self.margin)));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::arg(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.dim < self.height {
            return Err(Error::arg(format!(
                "dimension {} is smaller than height {}",
                self.dim, self.height
            )));
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        1 << self.height
    }

    /// Component means, one row per leaf.
    ///
    /// Leaf `i` is read as an `h`-bit number `b_1 .. b_h` (most significant
    /// first) and gets `(-1)^{b_j} * m * alpha^(h - j)` in coordinate `j`;
    /// coordinates past `h` are zero. Two leaves whose lowest common ancestor
    /// sits `t` levels above them first differ at bit `h - t + 1`, so their
    /// means are at least `2 m alpha^(t-1)` apart.
    pub fn means(&self) -> Result<Matrix> {
        self.validate()?;
        let (h, k) = (self.height, self.components());
        let mut means = Matrix::zeros(k, self.dim);
        for leaf in 0..k {
            let row = means.row_mut(leaf);
            for j in 1..=h {
                let bit = (leaf >> (h - j)) & 1;
                let magnitude = self.margin * self.alpha.powi((h - j) as i32);
                row[j - 1] = if bit == 0 { magnitude } else { -magnitude };
            }
        }
        Ok(means)
    }

    /// Level labels of each component, level 1 (coarsest) first: the leaf's
    /// first `l` bits.
    pub fn component_levels(&self) -> Vec<Vec<i64>> {
        let h = self.height;
        (0..self.components())
            .map(|leaf| (1..=h).map(|l| (leaf >> (h - l)) as i64).collect())
            .collect()
    }

    /// The planted hierarchy, finest level (singletons) first. The root level
    /// holds a single set and is left out since it constrains nothing.
    pub fn hierarchy(&self) -> Hierarchy {
        let k = self.components();
        let levels = (0..self.height)
            .map(|shift| {
                let groups = k >> shift;
                (0..groups)
                    .map(|g| ((g << shift)..((g + 1) << shift)).collect())
                    .collect()
            })
            .collect();
        Hierarchy::new(levels, k).expect("binary tree levels form a hierarchy")
    }

    /// Uniform mixture over the means with a shared standard deviation and the
    /// tree's level labels attached.
    pub fn mixture(&self, sigma: f64) -> Result<MixtureSpec> {
        self.mixture_with_means(self.means()?, sigma)
    }

    /// Same as [`BtgmSpec::mixture`] but over externally modified means (e.g.
    /// after [`shift_means`]).
    pub fn mixture_with_means(&self, means: Matrix, sigma: f64) -> Result<MixtureSpec> {
        let k = self.components();
        if means.rows() != k {
            return Err(Error::arg(format!("{} means for {k} components", means.rows())));
        }
        let w = 1.0 / k as f64;
        let components = means
            .iter_rows()
            .map(|mu| Component {
                weight: w,
                mean: mu.to_vec(),
                std_dev: sigma,
            })
            .collect();
        MixtureSpec::new(components)?.with_levels(self.component_levels())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSettings {
    pub count: usize,
    pub rotation: usize,
}

impl ShiftSettings {
    /// Half of the components rotated by half of the dimension.
    pub fn default_for(k: usize, dim: usize) -> Self {
        Self {
            count: k / 2,
            rotation: dim / 2,
        }
    }
}

/// Cyclically rotates the first `count` mean vectors `rotation` coordinates to
/// the right, e.g. `(4,2,1,0,0,0)` by 3 becomes `(0,0,0,4,2,1)`.
pub fn shift_means(means: &Matrix, count: usize, rotation: usize) -> Result<Matrix> {
    if count > means.rows() {
        return Err(Error::arg(format!("cannot shift {count} of {} means", means.rows())));
    }
    if means.cols() == 0 || rotation >= means.cols() {
        return Err(Error::arg(format!("rotation {rotation} outside 0..{}", means.cols())));
    }
    let mut out = means.clone();
    for i in 0..count {
        out.row_mut(i).rotate_right(rotation);
    }
    Ok(out)
}
