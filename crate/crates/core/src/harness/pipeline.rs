use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataConfig, EmbeddingConfig, EvalConfig, ExperimentConfig, MetricKind, RescaleStep};
use super::formats::{read_embedding, read_gmm, read_labels, write_dendrogram, write_gmm};
use super::stats::{cut_accuracy, subsample, MeanStd};
use crate::btgm::{sample, sample_counts};
use crate::dataset::{Dataset, LevelLabels};
use crate::dendrogram::Dendrogram;
use crate::embed::{gmm_fit, pca_fit_with, pca_transform, rescale, GmmParams};
use crate::error::{Error, Result};
use crate::linkage::cluster;
use crate::metrics::{dasgupta_cost, dendrogram_purity, level_weights, moseley_wang, mw_opt};
use crate::rng::{domain, SeedStream};

/// Generates or reads the raw points with their ground truth.
pub fn load_data(config: &ExperimentConfig) -> Result<Dataset> {
    let master = SeedStream::new(config.seed);
    match &config.data {
        DataConfig::Btgm(g) => {
            let mixture = g.mixture()?;
            let stream = master.derive(domain::SAMPLE);
            match g.fixed_counts() {
                Some(counts) => sample_counts(&mixture, &counts, stream),
                None => sample(&mixture, g.n(), stream),
            }
        }
        DataConfig::File { points, labels } => {
            let emb = read_embedding(points)?;
            let mut ds = Dataset::new(emb.points)?;
            if let Some(path) = labels {
                let table = read_labels(path)?;
                if table.labels.len() != ds.n() {
                    return Err(Error::Validation(format!(
                        "{} labels for {} points",
                        table.labels.len(),
                        ds.n()
                    )));
                }
                ds = ds.with_flat_labels(table.labels)?;
                if let Some(levels) = table.levels {
                    ds = ds.with_level_labels(levels)?;
                }
            } else if let Some(l) = emb.labels {
                ds = ds.with_flat_labels(l.into_iter().map(i64::from).collect())?;
            }
            Ok(ds)
        }
    }
}

/// Points ready for clustering, plus the mixture used for rescaling.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub gmm: Option<GmmParams>,
    pub assignments: Option<Vec<usize>>,
}

/// Runs data loading, embedding and rescaling once on the full pool.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let raw = load_data(config)?;
    let embedded = match &config.embedding {
        EmbeddingConfig::None => raw,
        EmbeddingConfig::Pca { dim, pca } => {
            let model = pca_fit_with(raw.points(), *dim, pca).map_err(|e| Error::Config(e.to_string()))?;
            let projected = pca_transform(&model, raw.points())?;
            raw.with_points(projected)?
        }
        EmbeddingConfig::External { path } => {
            let emb = read_embedding(path)?;
            if emb.points.rows() != raw.n() {
                return Err(Error::Validation(format!(
                    "embedding has {} rows for {} points",
                    emb.points.rows(),
                    raw.n()
                )));
            }
            raw.with_points(emb.points)?
        }
    };
    match &config.rescale {
        None => Ok(Prepared {
            dataset: embedded,
            gmm: None,
            assignments: None,
        }),
        Some(step) => {
            let gmm = mixture_for(step, &embedded, config.seed)?;
            let (points, labels) = rescale(embedded.points(), &gmm, &step.rescale)?;
            Ok(Prepared {
                dataset: embedded.with_points(points)?,
                gmm: Some(gmm),
                assignments: Some(labels),
            })
        }
    }
}

fn mixture_for(step: &RescaleStep, data: &Dataset, seed: u64) -> Result<GmmParams> {
    if let Some(path) = &step.gmm {
        let gmm = read_gmm(path)?;
        if gmm.dim() != data.dim() {
            return Err(Error::Validation(format!(
                "mixture has dimension {}, embedding has {}",
                gmm.dim(),
                data.dim()
            )));
        }
        return Ok(gmm);
    }
    let k = match step.components {
        Some(k) => k,
        None => {
            let truth = data
                .ground_truth()
                .ok_or_else(|| Error::Config("rescaling needs `components` when there are no labels".into()))?;
            let mut t = truth.clone();
            t.sort_unstable();
            t.dedup();
            t.len()
        }
    };
    Ok(gmm_fit(data.points(), k, &SeedStream::new(seed), &step.fit)?.params)
}

/// Scores of one tree; `None` where a metric was not requested or is
/// undefined on this sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: usize,
    pub n: usize,
    pub purity: Option<f64>,
    pub moseley_wang: Option<f64>,
    pub mw_opt: Option<f64>,
    pub mw_ratio: Option<f64>,
    pub dasgupta: Option<f64>,
    pub cut_accuracy: Option<f64>,
}

impl RunRecord {
    pub const COLUMNS: [&'static str; 6] = [
        "purity",
        "moseley_wang",
        "mw_opt",
        "mw_ratio",
        "dasgupta",
        "cut_accuracy",
    ];

    fn values(&self) -> [Option<f64>; 6] {
        [
            self.purity,
            self.moseley_wang,
            self.mw_opt,
            self.mw_ratio,
            self.dasgupta,
            self.cut_accuracy,
        ]
    }
}

/// Evaluates `tree` against flat and level labels.
pub fn evaluate_tree(tree: &Dendrogram, flat: &[i64], levels: &LevelLabels, eval: &EvalConfig) -> Result<RunRecord> {
    let mut rec = RunRecord {
        n: tree.n_leaves(),
        ..RunRecord::default()
    };
    if eval.wants(MetricKind::Purity) {
        rec.purity = match dendrogram_purity(tree, flat) {
            Ok(s) => Some(s.value),
            Err(Error::Undefined(_)) => None,
            Err(e) => return Err(e),
        };
    }
    let needs_mw = [MetricKind::MoseleyWang, MetricKind::MwRatio, MetricKind::Dasgupta]
        .iter()
        .any(|m| eval.wants(*m));
    if needs_mw {
        let weights = level_weights(levels, eval.level_weights);
        let cost = dasgupta_cost(tree, &weights)?;
        let mw = moseley_wang(tree, &weights)?;
        if eval.wants(MetricKind::Dasgupta) {
            rec.dasgupta = Some(cost);
        }
        if eval.wants(MetricKind::MoseleyWang) {
            rec.moseley_wang = Some(mw);
        }
        if eval.wants(MetricKind::MwRatio) {
            let opt = mw_opt(levels, eval.level_weights)?;
            rec.mw_opt = Some(opt);
            rec.mw_ratio = (opt > 0.0).then(|| mw / opt);
        }
    }
    if eval.wants(MetricKind::CutAccuracy) {
        let mut classes = flat.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let predicted = tree.cut(classes.len())?;
        rec.cut_accuracy = Some(cut_accuracy(&predicted, flat));
    }
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pool_size: usize,
    pub dim: usize,
    pub sample_size: usize,
    pub repeats: usize,
    pub linkage: String,
    pub classes: usize,
    pub metrics: BTreeMap<String, MeanStd>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub runs: Vec<RunRecord>,
    pub summary: Summary,
    pub gmm: Option<GmmParams>,
    /// Dendrograms by trial, kept only when the config asks for them.
    pub trees: Vec<Dendrogram>,
}

pub(crate) fn truth_of(ds: &Dataset) -> Result<(Vec<i64>, LevelLabels)> {
    let flat = ds
        .ground_truth()
        .ok_or_else(|| Error::Validation("evaluation needs ground-truth labels".into()))?;
    let levels = ds.level_labels().cloned().unwrap_or_else(|| LevelLabels::flat(&flat));
    Ok((flat, levels))
}

pub(crate) fn summarise(runs: &[RunRecord]) -> BTreeMap<String, MeanStd> {
    let mut out = BTreeMap::new();
    for (c, name) in RunRecord::COLUMNS.iter().enumerate() {
        let values: Vec<f64> = runs.iter().filter_map(|r| r.values()[c]).collect();
        if let Some(s) = MeanStd::of(&values) {
            out.insert(name.to_string(), s);
        }
    }
    out
}

/// Clusters `repeats` subsamples of the prepared pool and scores each tree.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
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
    let keep = config.output.dendrograms;

    let results: Vec<Result<(RunRecord, Option<Dendrogram>)>> = (0..config.eval.repeats)
        .into_par_iter()
        .map(|trial| {
            let idx = subsample(n, size, &master.derive_indexed(domain::SUBSAMPLE, trial as u64));
            let points = ds.points().select_rows(&idx);
            let sub_flat: Vec<i64> = idx.iter().map(|&i| flat[i]).collect();
            let tree = cluster(&points, config.linkage)?;
            let mut rec = evaluate_tree(&tree, &sub_flat, &levels.select(&idx), &config.eval)?;
            rec.trial = trial;
            Ok((rec, keep.then_some(tree)))
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut trees = Vec::new();
    for r in results {
        let (rec, tree) = r?;
        runs.push(rec);
        trees.extend(tree);
    }
    runs.sort_by_key(|r| r.trial);
    let mut classes = flat.clone();
    classes.sort_unstable();
    classes.dedup();
    let summary = Summary {
        pool_size: n,
        dim: ds.dim(),
        sample_size: size,
        repeats: config.eval.repeats,
        linkage: config.linkage.name().to_string(),
        classes: classes.len(),
        metrics: summarise(&runs),
    };
    Ok(PipelineReport {
        runs,
        summary,
        gmm: prepared.gmm,
        trees,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn runs_csv(runs: &[RunRecord]) -> String {
    let mut out = format!("trial,n,{}\n", RunRecord::COLUMNS.join(","));
    for r in runs {
        let cells: Vec<String> = r.values().iter().map(|v| cell(*v)).collect();
        writeln!(out, "{},{},{}", r.trial, r.n, cells.join(",")).expect("string write");
    }
    out
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

/// Writes `runs.csv`, `summary.json`, `config.json` and, when present,
/// `gmm.json` and per-trial dendrograms.
pub fn write_pipeline(report: &PipelineReport, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_text(dir, "runs.csv", &runs_csv(&report.runs))?;
    write_text(dir, "summary.json", &to_json(&report.summary))?;
    write_text(dir, "config.json", &config.to_json())?;
    if let Some(gmm) = &report.gmm {
        write_gmm(&dir.join("gmm.json"), gmm)?;
    }
    for (t, tree) in report.trees.iter().enumerate() {
        write_dendrogram(&dir.join("dendrograms").join(format!("trial_{t:04}.csv")), tree)?;
    }
    Ok(())
}
