//! Euclidean embedding utilities: principal components, Gaussian mixtures
//! fitted by EM, and the mean-shift rescaling applied before clustering.

mod gmm;
mod pca;
mod rescale;

pub use gmm::{assign, assign_all, gmm_fit, AssignRule, CovarianceKind, GmmConfig, GmmFit, GmmParams};
pub use pca::{pca_fit, pca_fit_with, pca_transform, PcaConfig, PcaModel};
pub use rescale::{rescale, RescaleConfig};
