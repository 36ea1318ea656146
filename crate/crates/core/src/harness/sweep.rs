use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataConfig, ExperimentConfig, GeneratorConfig};
use super::pipeline::write_text;
use super::stats::{same_partition, MeanStd};
use crate::btgm::{check_theorem1, sample, sample_counts, Theorem1Constants};
use crate::dataset::euclidean;
use crate::error::{Error, Result};
use crate::linkage::cluster;
use crate::metrics::dendrogram_purity;
use crate::rng::{domain, SeedStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub margin: f64,
    pub min_mean_distance: f64,
    pub purity: MeanStd,
    /// Fraction of trials whose cut at `k` equals the true partition.
    pub recovery_rate: f64,
    pub theorem1_pass: bool,
}

/// Outcome of one generated sample: purity and exact recovery at `k`.
pub fn recovery_trial(generator: &GeneratorConfig, config: &ExperimentConfig, trial: usize) -> Result<(f64, bool)> {
    let mixture = generator.mixture()?;
    let stream = SeedStream::new(config.seed).derive_indexed(domain::TRIAL, trial as u64);
    let ds = match generator.fixed_counts() {
        Some(counts) => sample_counts(&mixture, &counts, stream)?,
        None => sample(&mixture, generator.n(), stream)?,
    };
    let truth = ds.ground_truth().expect("generated data carries labels");
    let tree = cluster(ds.points(), config.linkage)?;
    let dp = dendrogram_purity(&tree, &truth)?.value;
    let cut = tree.cut(mixture.k().min(ds.n()))?;
    Ok((dp, same_partition(&cut, &truth)))
}

/// For every margin in the grid, `trials` fresh samples are clustered and cut
/// at the number of components. Trial `t` uses the same random stream at every
/// margin.
pub fn run_recovery_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let DataConfig::Btgm(base) = &config.data else {
        return Err(Error::Config("the recovery sweep needs generated data".into()));
    };
    if config.sweep.margins.is_empty() {
        return Err(Error::Config("the margin grid is empty".into()));
    }
    config
        .sweep
        .margins
        .iter()
        .map(|&margin| {
            let g = GeneratorConfig { margin, ..base.clone() };
            let mixture = g.mixture()?;
            let means: Vec<&[f64]> = mixture.components().iter().map(|c| c.mean.as_slice()).collect();
            let mut min_dist = f64::INFINITY;
            for i in 0..means.len() {
                for j in (i + 1)..means.len() {
                    min_dist = min_dist.min(euclidean(means[i], means[j]));
                }
            }
            let theorem1 = check_theorem1(&mixture, g.n(), Theorem1Constants::default())?;
            let outcomes: Vec<(f64, bool)> = (0..config.sweep.trials)
                .into_par_iter()
                .map(|t| recovery_trial(&g, config, t))
                .collect::<Result<_>>()?;
            let dps: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            let recovered = outcomes.iter().filter(|o| o.1).count();
            Ok(SweepRow {
                margin,
                min_mean_distance: min_dist,
                purity: MeanStd::of(&dps).expect("at least one trial"),
                recovery_rate: recovered as f64 / outcomes.len() as f64,
                theorem1_pass: theorem1.pass,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("separation,min_mean_distance,mean_dp,std_dp,recovery_rate,theorem1_pass\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.margin, r.min_mean_distance, r.purity.mean, r.purity.std, r.recovery_rate, r.theorem1_pass
        )
        .expect("string write");
    }
    out
}

pub fn write_sweep(rows: &[SweepRow], config: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_text(dir, "sweep.csv", &sweep_csv(rows))?;
    write_text(dir, "config.json", &config.to_json())
}
