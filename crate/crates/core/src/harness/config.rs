use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::btgm::{shift_means, BtgmSpec, MixtureSpec, ShiftSettings};
use crate::dataset::Matrix;
use crate::embed::{CovarianceKind, GmmConfig, PcaConfig, RescaleConfig};
use crate::error::{Error, Result};
use crate::linkage::LinkageMethod;
use crate::metrics::LevelWeightMode;

/// Everything needed to reproduce a run; together with `seed` it determines
/// every output byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub embedding: EmbeddingConfig,
    pub rescale: Option<RescaleStep>,
    pub linkage: LinkageMethod,
    pub eval: EvalConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataConfig::Btgm(GeneratorConfig::default()),
            embedding: EmbeddingConfig::None,
            rescale: None,
            linkage: LinkageMethod::Ward,
            eval: EvalConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DataConfig {
    /// Sample from a binary-tree Gaussian mixture.
    Btgm(GeneratorConfig),
    /// Points from an EMB1 file, labels from the file or a labels CSV.
    File {
        points: PathBuf,
        #[serde(default)]
        labels: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub height: usize,
    /// Base separation; zero places every mean at the origin.
    pub margin: f64,
    pub alpha: f64,
    pub dim: usize,
    pub sigma: f64,
    /// Points drawn from each component, used unless `counts` or `total` is set.
    pub per_cluster: usize,
    /// Exact per-component counts.
    pub counts: Option<Vec<usize>>,
    /// Draw this many points i.i.d. by `weights` instead of fixed counts.
    pub total: Option<usize>,
    pub weights: Option<Vec<f64>>,
    /// Rotate half of the means into the other half of the coordinates.
    pub shifted: bool,
    /// Overrides the default shift (half the components, half the dimension).
    pub shift: Option<ShiftSettings>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            height: 3,
            margin: 8.0,
            alpha: 2.0,
            dim: 100,
            sigma: 1.0,
            per_cluster: 250,
            counts: None,
            total: None,
            weights: None,
            shifted: true,
            shift: None,
        }
    }
}

impl GeneratorConfig {
    /// Tree shape with the margin replaced by 1 when it is zero, so that
    /// `means` can scale it down.
    fn tree(&self) -> Result<BtgmSpec> {
        let margin = if self.margin == 0.0 { 1.0 } else { self.margin };
        BtgmSpec::new(self.height, margin, self.alpha, self.dim).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn spec(&self) -> Result<BtgmSpec> {
        if self.margin == 0.0 {
            return Err(Error::Config("a zero margin has no tree specification".into()));
        }
        self.tree()
    }

    pub fn k(&self) -> usize {
        1usize << self.height.min(30)
    }

    pub fn shift_settings(&self) -> Option<ShiftSettings> {
        match (self.shifted, self.shift) {
            (_, Some(s)) => Some(s),
            (true, None) => Some(ShiftSettings::default_for(self.k(), self.dim)),
            (false, None) => None,
        }
    }

    /// Component means after optional shifting.
    pub fn means(&self) -> Result<Matrix> {
        let tree = self.tree()?;
        let mut means = tree.means()?;
        if self.margin == 0.0 {
            means = Matrix::zeros(means.rows(), means.cols());
        }
        if let Some(s) = self.shift_settings() {
            means = shift_means(&means, s.count, s.rotation).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(means)
    }

    pub fn mixture(&self) -> Result<MixtureSpec> {
        let mut mixture = self.tree()?.mixture_with_means(self.means()?, self.sigma)?;
        if let Some(w) = &self.weights {
            if w.len() != self.k() {
                return Err(Error::Config(format!(
                    "{} weights for {} components",
                    w.len(),
                    self.k()
                )));
            }
            let mut comps = mixture.components().to_vec();
            for (c, &wc) in comps.iter_mut().zip(w) {
                c.weight = wc;
            }
            let levels = mixture.levels().map(<[Vec<i64>]>::to_vec);
            mixture = MixtureSpec::new(comps).map_err(|e| Error::Config(e.to_string()))?;
            if let Some(levels) = levels {
                mixture = mixture.with_levels(levels)?;
            }
        }
        Ok(mixture)
    }

    /// Per-component counts, or `None` when points are drawn i.i.d.
    pub fn fixed_counts(&self) -> Option<Vec<usize>> {
        if self.total.is_some() {
            return None;
        }
        Some(self.counts.clone().unwrap_or_else(|| vec![self.per_cluster; self.k()]))
    }

    pub fn n(&self) -> usize {
        match self.fixed_counts() {
            Some(c) => c.iter().sum(),
            None => self.total.unwrap_or(0),
        }
    }

    fn validate(&self) -> Result<()> {
        self.tree()?;
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::Config(format!(
                "margin {} must be finite and non-negative",
                self.margin
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma {} must be positive", self.sigma)));
        }
        if self.total.is_some() && self.counts.is_some() {
            return Err(Error::Config("set either counts or total, not both".into()));
        }
        if self.weights.is_some() && self.total.is_none() {
            return Err(Error::Config("weights only apply when total is set".into()));
        }
        if let Some(c) = &self.counts {
            if c.len() != self.k() {
                return Err(Error::Config(format!("{} counts for {} components", c.len(), self.k())));
            }
        }
        if self.n() == 0 {
            return Err(Error::Config("generator produces no points".into()));
        }
        self.mixture().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EmbeddingConfig {
    /// Cluster the raw points.
    None,
    /// Project onto the leading principal directions of the full pool.
    Pca {
        dim: usize,
        #[serde(default)]
        pca: PcaConfig,
    },
    /// Replace the points by rows of an EMB1 file (same order, same count).
    External { path: PathBuf },
}

/// Mean-shift rescaling by a mixture that is either read from disk or fitted
/// once on the full embedded pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RescaleStep {
    pub gmm: Option<PathBuf>,
    /// Components to fit; defaults to the number of ground-truth classes.
    pub components: Option<usize>,
    pub fit: GmmConfig,
    #[serde(flatten)]
    pub rescale: RescaleConfig,
}

impl Default for RescaleStep {
    fn default() -> Self {
        Self {
            gmm: None,
            components: None,
            fit: GmmConfig {
                covariance: CovarianceKind::Spherical,
                ..GmmConfig::default()
            },
            rescale: RescaleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Purity,
    MoseleyWang,
    MwRatio,
    Dasgupta,
    CutAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Points per evaluation repeat; the whole pool when zero or too large.
    pub sample_size: usize,
    pub repeats: usize,
    pub level_weights: LevelWeightMode,
    pub metrics: Vec<MetricKind>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sample_size: 1000,
            repeats: 100,
            level_weights: LevelWeightMode::Summed,
            metrics: vec![
                MetricKind::Purity,
                MetricKind::MoseleyWang,
                MetricKind::MwRatio,
                MetricKind::Dasgupta,
                MetricKind::CutAccuracy,
            ],
        }
    }
}

impl EvalConfig {
    pub fn wants(&self, m: MetricKind) -> bool {
        self.metrics.contains(&m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Margin values of the generator to sweep over.
    pub margins: Vec<f64>,
    pub trials: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            margins: vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0],
            trials: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write the dendrogram of every repeat.
    pub dendrograms: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            dendrograms: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads JSON (`.json`) or TOML (anything else).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let DataConfig::Btgm(g) = &self.data {
            g.validate()?;
        }
        if let EmbeddingConfig::Pca { dim, .. } = &self.embedding {
            if *dim == 0 {
                return Err(Error::Config("PCA dimension must be positive".into()));
            }
        }
        if let Some(r) = &self.rescale {
            if !(r.rescale.factor >= 0.0 && r.rescale.factor.is_finite()) {
                return Err(Error::Config(format!(
                    "rescaling factor {} must be non-negative",
                    r.rescale.factor
                )));
            }
            if r.components == Some(0) {
                return Err(Error::Config("rescaling needs at least one component".into()));
            }
        }
        if self.eval.repeats == 0 {
            return Err(Error::Config("at least one evaluation repeat is required".into()));
        }
        if self.eval.metrics.is_empty() {
            return Err(Error::Config("no metrics selected".into()));
        }
        if self.sweep.trials == 0 {
            return Err(Error::Config("sweep needs at least one trial".into()));
        }
        if self.sweep.margins.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::Config("sweep margins must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
seed = 7
linkage = "average"

[data]
source = "btgm"
height = 2
margin = 4.0
dim = 10
per_cluster = 20

[embedding]
kind = "pca"
dim = 3

[rescale]
factor = 1.5

[eval]
sample_size = 50
repeats = 3
"#;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, toml_text).unwrap();
        let a = ExperimentConfig::load(&p).unwrap();
        assert_eq!(a.seed, 7);
        assert_eq!(a.linkage, LinkageMethod::Average);
        assert_eq!(a.rescale.as_ref().unwrap().rescale.factor, 1.5);
        let q = dir.path().join("c.json");
        std::fs::write(&q, a.to_json()).unwrap();
        assert_eq!(ExperimentConfig::load(&q).unwrap(), a);
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::default();
        c.eval.repeats = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ExperimentConfig::default();
        if let DataConfig::Btgm(g) = &mut c.data {
            g.dim = 2;
        }
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.toml");
        std::fs::write(&p, "nonsense = 1\n").unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
        assert!(matches!(
            ExperimentConfig::load(&dir.path().join("missing.toml")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn zero_margin_means_are_at_origin() {
        let g = GeneratorConfig {
            margin: 0.0,
            ..GeneratorConfig::default()
        };
        assert!(g.means().unwrap().as_slice().iter().all(|v| *v == 0.0));
        assert!(g.validate().is_ok());
    }
}
