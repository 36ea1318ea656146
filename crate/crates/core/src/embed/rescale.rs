use serde::{Deserialize, Serialize};

use super::gmm::{assign_all, AssignRule, GmmParams};
use crate::dataset::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RescaleConfig {
    pub factor: f64,
    pub rule: AssignRule,
}

impl Default for RescaleConfig {
    fn default() -> Self {
        Self {
            factor: 3.0,
            rule: AssignRule::Likelihood,
        }
    }
}

/// Moves every point by `factor` times the mean of its assigned component.
/// Returns the moved points and the assignments.
pub fn rescale(points: &Matrix, gmm: &GmmParams, config: &RescaleConfig) -> Result<(Matrix, Vec<usize>)> {
    if !(config.factor.is_finite() && config.factor >= 0.0) {
        return Err(Error::arg(format!(
            "rescaling factor {} must be finite and non-negative",
            config.factor
        )));
    }
    let labels = assign_all(gmm, points, config.rule)?;
    let mut out = points.clone();
    if config.factor > 0.0 {
        for (i, &c) in labels.iter().enumerate() {
            let mean = gmm.means().row(c);
            for (x, m) in out.row_mut(i).iter_mut().zip(mean) {
                *x += config.factor * m;
            }
        }
    }
    Ok((out, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::euclidean;

    fn two_component() -> GmmParams {
        GmmParams::new(
            vec![0.5, 0.5],
            Matrix::from_rows(&[[0.0, 0.0], [4.0, 0.0]]).unwrap(),
            Matrix::from_rows(&[[1.0], [1.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_factor_is_identity() {
        let pts = Matrix::from_rows(&[[0.1, 0.3], [3.7, -1.1]]).unwrap();
        let cfg = RescaleConfig {
            factor: 0.0,
            ..RescaleConfig::default()
        };
        assert_eq!(rescale(&pts, &two_component(), &cfg).unwrap().0, pts);
    }

    #[test]
    fn means_scale_by_one_plus_factor() {
        let gmm = two_component();
        let (out, labels) = rescale(gmm.means(), &gmm, &RescaleConfig::default()).unwrap();
        assert_eq!(labels, vec![0, 1]);
        assert_eq!(
            euclidean(out.row(0), out.row(1)),
            4.0 * euclidean(gmm.means().row(0), gmm.means().row(1))
        );
    }

    #[test]
    fn negative_factor_rejected() {
        let cfg = RescaleConfig {
            factor: -1.0,
            ..RescaleConfig::default()
        };
        assert!(rescale(&Matrix::zeros(1, 2), &two_component(), &cfg).is_err());
    }
}
