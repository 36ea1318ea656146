use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcembed::embed::{gmm_fit, pca_fit, pca_transform, rescale, AssignRule, GmmConfig, RescaleConfig};
use hcembed::harness::formats::{
    read_dendrogram, read_embedding, read_gmm, read_labels, write_dendrogram, write_embedding, write_gmm, write_labels,
};
use hcembed::harness::{
    evaluate_tree, load_data, run_checks, run_linkage_comparison, run_pipeline, run_recovery_sweep, write_checks,
    write_linkage_comparison, write_pipeline, write_sweep, EvalConfig, ExperimentConfig,
};
use hcembed::linkage::{cluster, LinkageMethod};
use hcembed::metrics::LevelWeightMode;
use hcembed::{Error, LevelLabels, Result, SeedStream};

#[derive(Parser)]
#[command(name = "hcembed", version, about = "Hierarchical clustering of embedded data")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured mixture and write points.emb and labels.csv.
    Generate,
    /// Project or rescale an EMB1 file.
    Embed(EmbedArgs),
    /// Cluster an EMB1 file and write dendrogram.csv.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "ward")]
        linkage: LinkageMethod,
    },
    /// Score a dendrogram against labels.
    Eval {
        #[arg(long)]
        dendrogram: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value = "summed")]
        level_weights: WeightArg,
    },
    /// Generate or load, embed, rescale, cluster and evaluate.
    Pipeline,
    /// Report the separation conditions for the configured mixture.
    Check,
    /// Recovery rate and purity over a grid of margins.
    Sweep,
    /// Score all linkage methods on the same subsamples.
    CompareLinkage,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: EmbedMethod,
    /// Output dimension for PCA.
    #[arg(long)]
    dim: Option<usize>,
    /// Mixture file used for rescaling; fitted by EM when absent.
    #[arg(long)]
    gmm: Option<PathBuf>,
    /// Components to fit for rescaling.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, default_value_t = 3.0)]
    factor: f64,
    /// Use posterior rather than likelihood assignment.
    #[arg(long)]
    posterior: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedMethod {
    Pca,
    Rescale,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    Summed,
    Deepest,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn to_i32_labels(labels: &[i64]) -> Result<Vec<i32>> {
    labels
        .iter()
        .map(|&l| i32::try_from(l).map_err(|_| Error::Validation(format!("label {l} does not fit in 32 bits"))))
        .collect()
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

fn embed(args: &EmbedArgs, seed: u64, dir: &Path) -> Result<()> {
    let input = read_embedding(&args.input)?;
    let points = match args.method {
        EmbedMethod::Pca => {
            let dim = args
                .dim
                .ok_or_else(|| Error::Config("--dim is required for PCA".into()))?;
            let model = pca_fit(&input.points, dim)?;
            pca_transform(&model, &input.points)?
        }
        EmbedMethod::Rescale => {
            let gmm = match (&args.gmm, args.components) {
                (Some(path), _) => read_gmm(path)?,
                (None, Some(k)) => gmm_fit(&input.points, k, &SeedStream::new(seed), &GmmConfig::default())?.params,
                (None, None) => return Err(Error::Config("rescaling needs --gmm or --components".into())),
            };
            let config = RescaleConfig {
                factor: args.factor,
                rule: if args.posterior {
                    AssignRule::Posterior
                } else {
                    AssignRule::Likelihood
                },
            };
            let (points, _) = rescale(&input.points, &gmm, &config)?;
            if args.gmm.is_none() {
                write_gmm(&dir.join("gmm.json"), &gmm)?;
            }
            points
        }
    };
    write_embedding(&dir.join("embedding.emb"), &points, input.labels.as_deref())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Generate => {
            let config = load_config(cli)?;
            let ds = load_data(&config)?;
            let dir = &config.output.dir;
            let truth = ds.ground_truth().unwrap_or_default();
            let labels = to_i32_labels(&truth)?;
            write_embedding(&dir.join("points.emb"), ds.points(), Some(&labels))?;
            write_labels(&dir.join("labels.csv"), &truth, ds.level_labels())?;
        }
        Command::Embed(args) => {
            let seed = match &cli.config {
                Some(_) => load_config(cli)?.seed,
                None => cli.seed.unwrap_or(0),
            };
            embed(args, seed, &out_dir(cli))?;
        }
        Command::Cluster { input, linkage } => {
            let emb = read_embedding(input)?;
            let tree = cluster(&emb.points, *linkage)?;
            write_dendrogram(&out_dir(cli).join("dendrogram.csv"), &tree)?;
        }
        Command::Eval {
            dendrogram,
            labels,
            level_weights,
        } => {
            let tree = read_dendrogram(dendrogram)?;
            let table = read_labels(labels)?;
            if table.labels.len() != tree.n_leaves() {
                return Err(Error::Validation(format!(
                    "{} labels for {} leaves",
                    table.labels.len(),
                    tree.n_leaves()
                )));
            }
            let levels = table.levels.clone().unwrap_or_else(|| LevelLabels::flat(&table.labels));
            let eval = EvalConfig {
                level_weights: match level_weights {
                    WeightArg::Summed => LevelWeightMode::Summed,
                    WeightArg::Deepest => LevelWeightMode::Deepest,
                },
                ..EvalConfig::default()
            };
            let rec = evaluate_tree(&tree, &table.labels, &levels, &eval)?;
            let value = serde_json::to_value(&rec).expect("record serialises");
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                })?;
                let path = dir.join("eval.json");
                let text = serde_json::to_string_pretty(&value).expect("json value") + "\n";
                std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
            }
            print_json(&value);
        }
        Command::Pipeline => {
            let config = load_config(cli)?;
            let report = run_pipeline(&config)?;
            write_pipeline(&report, &config, &config.output.dir)?;
            print_json(&serde_json::to_value(&report.summary).expect("summary serialises"));
        }
        Command::Check => {
            let config = load_config(cli)?;
            let report = run_checks(&config)?;
            write_checks(&report, &config.output.dir)?;
            println!(
                "flat recovery conditions: {}",
                if report.flat.pass { "pass" } else { "fail" }
            );
            if let Some(b) = &report.flat.binding {
                println!("  binding: {b}");
            }
            println!(
                "hierarchical recovery conditions: {}",
                if report.hierarchical.pass { "pass" } else { "fail" }
            );
            if let Some(c) = &report.closed_form {
                println!("closed-form tree conditions: {}", if c.pass { "pass" } else { "fail" });
            }
        }
        Command::Sweep => {
            let config = load_config(cli)?;
            let rows = run_recovery_sweep(&config)?;
            write_sweep(&rows, &config, &config.output.dir)?;
            print!("{}", hcembed::harness::sweep_csv(&rows));
        }
        Command::CompareLinkage => {
            let config = load_config(cli)?;
            let rows = run_linkage_comparison(&config)?;
            write_linkage_comparison(&rows, &config, &config.output.dir)?;
            print!("{}", hcembed::harness::linkage_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
