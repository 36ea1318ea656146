use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EvalConfig, ExperimentConfig, MetricKind};
use super::pipeline::{evaluate_tree, prepare, truth_of, write_text};
use super::stats::{subsample, MeanStd};
use crate::error::Result;
use crate::linkage::{cluster, LinkageMethod};
use crate::rng::{domain, SeedStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageRow {
    pub method: LinkageMethod,
    pub purity: Option<MeanStd>,
    pub mw_ratio: Option<MeanStd>,
}

/// Purity and MW ratio of one tree.
type Scores = (Option<f64>, Option<f64>);

/// Scores every linkage method on the same subsamples.
pub fn run_linkage_comparison(config: &ExperimentConfig) -> Result<Vec<LinkageRow>> {
    let prepared = prepare(config)?;
    let ds = &prepared.dataset;
    let (flat, levels) = truth_of(ds)?;
    let n = ds.n();
    let size = if config.eval.sample_size == 0 {
        n
    } else {
        config.eval.sample_size.min(n)
    };
    let master = SeedStream::new(config.seed);
    let eval = EvalConfig {
        metrics: vec![MetricKind::Purity, MetricKind::MwRatio],
        ..config.eval.clone()
    };
    let per_trial: Vec<Vec<Scores>> = (0..config.eval.repeats)
        .into_par_iter()
        .map(|trial| {
            let idx = subsample(n, size, &master.derive_indexed(domain::SUBSAMPLE, trial as u64));
            let points = ds.points().select_rows(&idx);
            let sub_flat: Vec<i64> = idx.iter().map(|&i| flat[i]).collect();
            let sub_levels = levels.select(&idx);
            LinkageMethod::ALL
                .iter()
                .map(|&m| {
                    let rec = evaluate_tree(&cluster(&points, m)?, &sub_flat, &sub_levels, &eval)?;
                    Ok((rec.purity, rec.mw_ratio))
                })
                .collect::<Result<Vec<Scores>>>()
        })
        .collect::<Result<_>>()?;
    Ok(LinkageMethod::ALL
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let dp: Vec<f64> = per_trial.iter().filter_map(|t| t[k].0).collect();
            let mw: Vec<f64> = per_trial.iter().filter_map(|t| t[k].1).collect();
            LinkageRow {
                method,
                purity: MeanStd::of(&dp),
                mw_ratio: MeanStd::of(&mw),
            }
        })
        .collect())
}

pub fn linkage_csv(rows: &[LinkageRow]) -> String {
    let mut out = String::from("method,purity_mean,purity_std,mw_ratio_mean,mw_ratio_std\n");
    let pair = |s: &Option<MeanStd>| s.map_or_else(|| ",".to_string(), |s| format!("{},{}", s.mean, s.std));
    for r in rows {
        writeln!(out, "{},{},{}", r.method, pair(&r.purity), pair(&r.mw_ratio)).expect("string write");
    }
    out
}

pub fn write_linkage_comparison(rows: &[LinkageRow], config: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_text(dir, "linkage.csv", &linkage_csv(rows))?;
    write_text(dir, "config.json", &config.to_json())
}
