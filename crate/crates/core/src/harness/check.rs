use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{DataConfig, ExperimentConfig};
use super::pipeline::{to_json, write_text};
use crate::btgm::{
    check_corollary, check_theorem1, check_theorem2, CorollaryConstants, CorollaryReport, SeparationReport,
    Theorem1Constants, Theorem2Constants,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub n: usize,
    pub flat: SeparationReport,
    pub hierarchical: SeparationReport,
    /// Only for unshifted, uniformly weighted trees with a positive margin.
    pub closed_form: Option<CorollaryReport>,
}

/// Evaluates the sufficient separation conditions for the configured
/// generator with default constants.
pub fn run_checks(config: &ExperimentConfig) -> Result<CheckReport> {
    config.validate()?;
    let DataConfig::Btgm(g) = &config.data else {
        return Err(Error::Config("separation checks need generated data".into()));
    };
    let mixture = g.mixture()?;
    let n = g.n();
    let flat = check_theorem1(&mixture, n, Theorem1Constants::default())?;
    let hierarchy = g.spec().map_or_else(
        |_| crate::btgm::BtgmSpec::new(g.height, 1.0, g.alpha, g.dim).map(|s| s.hierarchy()),
        |s| Ok(s.hierarchy()),
    )?;
    let hierarchical = check_theorem2(&mixture, &hierarchy, n, Theorem2Constants::default())?;
    let closed_form = if g.margin > 0.0 && g.shift_settings().is_none() && g.weights.is_none() {
        Some(check_corollary(&g.spec()?, n, CorollaryConstants::default())?)
    } else {
        None
    };
    Ok(CheckReport {
        n,
        flat,
        hierarchical,
        closed_form,
    })
}

pub fn write_checks(report: &CheckReport, dir: &Path) -> Result<()> {
    write_text(dir, "checks.json", &to_json(report))
}
