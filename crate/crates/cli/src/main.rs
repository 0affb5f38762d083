//! `coalition`: synthesize datasets, decompose records, rank features and
//! compare selectors from a JSON run config.

mod config;
mod output;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use coalition_core::classifier::ClassifierKind;
use coalition_core::dataset::{generate_synthetic, load_records, write_records, Record};
use coalition_core::features::{build_feature_matrix, Catalog, FeatureMatrix};
use coalition_core::pipeline::{appearance_counts, evaluate_columns, evaluate_report, run_selector, Selector};
use coalition_core::report::RankingReport;
use coalition_core::wavelet::{dwt_multilevel, BoundaryMode, Channel};

use config::RunConfig;
use output::RunDir;

#[derive(Parser)]
#[command(name = "coalition", version, about = "Coalition-game feature selection for multi-channel signals")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset into the output directory.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Number of records.
        #[arg(long)]
        samples: Option<usize>,
        /// Generator seed.
        #[arg(long)]
        data_seed: Option<u64>,
    },
    /// Dump the wavelet coefficients of one record as CSV.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Record id.
        #[arg(long)]
        record: String,
        /// Channel to decompose; all channels when absent.
        #[arg(long)]
        channel: Option<Channel>,
        /// Destination file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rank features with every configured selector.
    Rank {
        #[command(flatten)]
        common: Common,
    },
    /// Rank, then compare the top-k features of each selector by CV accuracy.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Load existing reports from the output directory instead of ranking.
        #[arg(long)]
        reuse_reports: bool,
    },
}

/// Config file plus per-field overrides.
#[derive(Args)]
struct Common {
    /// JSON run config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    catalog: Option<Catalog>,
    #[arg(long)]
    boundary: Option<BoundaryMode>,
    /// Comma-separated selector names.
    #[arg(long, value_delimiter = ',')]
    selectors: Option<Vec<Selector>>,
    /// MPE group size.
    #[arg(short = 'L', long)]
    group_size: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long, value_parser = parse_classifier)]
    classifier: Option<ClassifierKind>,
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown classifier {s:?}; expected naive-bayes or gaussian-full"))
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            c.dataset = Some(v.clone());
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.depth {
            c.depth = v;
        }
        if let Some(v) = self.catalog {
            c.catalog = v;
        }
        if let Some(v) = self.boundary {
            c.boundary = v;
        }
        if let Some(v) = &self.selectors {
            c.selectors = v.clone();
        }
        if let Some(v) = self.group_size {
            c.params.group_size = v;
        }
        if let Some(v) = self.rounds {
            c.params.rounds = v;
        }
        if let Some(v) = self.seed {
            c.params.seed = v;
        }
        if let Some(v) = self.folds {
            c.params.folds = v;
        }
        if let Some(v) = self.top_k {
            c.params.top_k = v;
        }
        if let Some(v) = self.classifier {
            c.params.classifier.kind = v;
        }
        c.validate()?;
        Ok(c)
    }
}

struct Loaded {
    channels: Vec<Channel>,
    records: Vec<Record>,
}

fn load_data(config: &RunConfig) -> Result<Loaded> {
    if let Some(root) = &config.dataset {
        let dataset = load_records(root).with_context(|| format!("loading dataset {}", root.display()))?;
        if dataset.excluded_unknown > 0 {
            eprintln!("note: {} records labelled unknown were excluded", dataset.excluded_unknown);
        }
        return Ok(Loaded {
            channels: dataset.channels,
            records: dataset.records,
        });
    }
    if let Some(source) = &config.synthetic {
        let records = generate_synthetic(&source.spec, source.seed)?;
        return Ok(Loaded {
            channels: source.spec.channels.clone(),
            records,
        });
    }
    bail!("no data: set `dataset` or `synthetic` in the config, or pass --dataset")
}

fn feature_matrix(config: &RunConfig, data: &Loaded) -> Result<FeatureMatrix> {
    if data.records.is_empty() {
        bail!("dataset has no labelled records");
    }
    let extraction = config.extraction(&data.channels)?;
    Ok(build_feature_matrix(&data.records, &extraction)?)
}

fn cmd_synth(config: &RunConfig, samples: Option<usize>, data_seed: Option<u64>) -> Result<()> {
    let mut config = config.clone();
    let source = config
        .synthetic
        .as_mut()
        .ok_or_else(|| anyhow!("synth needs a `synthetic` section in the config"))?;
    if let Some(n) = samples {
        source.spec.samples = n;
    }
    if let Some(s) = data_seed {
        source.seed = s;
    }
    let records = generate_synthetic(&source.spec, source.seed)?;
    let staging = output::staging_dir(&config.output_dir)?;
    write_records(&staging, &source.spec.channels, source.spec.sample_rate, &records)?;
    std::fs::write(staging.join("config.json"), config.to_json())?;
    output::publish(&staging, &config.output_dir)?;
    eprintln!("wrote {} records to {}", records.len(), config.output_dir.display());
    Ok(())
}

fn cmd_decompose(config: &RunConfig, record: &str, channel: Option<&Channel>, dest: Option<&Path>) -> Result<()> {
    let data = load_data(config)?;
    let rec = data
        .records
        .iter()
        .find(|r| r.id == record)
        .ok_or_else(|| anyhow!("record {record:?} not found"))?;
    let extraction = config.extraction(&data.channels)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["channel", "band", "index", "value"])?;
    for (ch, signal) in &rec.channels {
        if channel.is_some_and(|c| c != ch) {
            continue;
        }
        let filter = &extraction.filters[ch];
        let decomp = dwt_multilevel(signal, filter, config.depth, config.boundary)
            .with_context(|| format!("record {record}, channel {ch}"))?;
        let approx = format!("A{}", decomp.depth());
        let bands = decomp
            .details
            .iter()
            .enumerate()
            .map(|(j, d)| (format!("D{}", j + 1), d.as_slice()))
            .chain(std::iter::once((approx, decomp.approximation.as_slice())));
        for (name, coeffs) in bands {
            for (i, v) in coeffs.iter().enumerate() {
                wtr.write_record([ch.to_string(), name.clone(), i.to_string(), v.to_string()])?;
            }
        }
    }
    if let Some(c) = channel {
        if !rec.channels.contains_key(c) {
            bail!("record {record:?} has no channel {c}");
        }
    }
    let bytes = wtr.into_inner().map_err(|e| anyhow!("{e}"))?;
    match dest {
        Some(path) => output::write_atomic(path, &bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

/// Reports in configured selector order, with the seconds spent producing each.
fn produce_reports(
    config: &RunConfig,
    matrix: &FeatureMatrix,
    run: &mut RunDir,
    reuse: bool,
) -> Result<Vec<(Selector, RankingReport, f64)>> {
    let mut out = Vec::with_capacity(config.selectors.len());
    for &selector in &config.selectors {
        let path = run.path(&format!("{}.json", selector.name()));
        if reuse {
            let report = RankingReport::load(&path)?;
            if report.scores.len() != matrix.n_features() {
                bail!("{} ranks {} features but the matrix has {}", path.display(), report.scores.len(), matrix.n_features());
            }
            out.push((selector, report, 0.0));
            continue;
        }
        let start = Instant::now();
        let report = run_selector(matrix, selector, &config.params).with_context(|| format!("selector {selector}"))?;
        let secs = start.elapsed().as_secs_f64();
        run.record_duration(selector.name(), secs);
        run.write(&format!("{}.json", selector.name()), report.to_json().as_bytes())?;
        log::info!("{selector}: {:.2}s, {} evaluations", secs, report.evaluations);
        out.push((selector, report, secs));
    }
    Ok(out)
}

fn write_appearance(
    config: &RunConfig,
    channels: &[Channel],
    reports: &[(Selector, RankingReport, f64)],
    run: &mut RunDir,
) -> Result<()> {
    let refs: Vec<&RankingReport> = reports.iter().map(|(_, r, _)| r).collect();
    let table = appearance_counts(&refs, config.params.top_k, channels, config.depth)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["channel".to_string(), "level".to_string()];
    header.extend(reports.iter().map(|(s, _, _)| s.name().to_string()));
    wtr.write_record(&header)?;
    for (channel, level, counts) in table {
        let mut row = vec![channel.to_string(), level.to_string()];
        row.extend(counts.iter().map(|c| c.to_string()));
        wtr.write_record(&row)?;
    }
    run.write("appearance.csv", &wtr.into_inner().map_err(|e| anyhow!("{e}"))?)
}

fn cmd_rank(config: &RunConfig, evaluate: bool, reuse: bool) -> Result<()> {
    // Nothing is written until the inputs have loaded.
    let start = Instant::now();
    let data = load_data(config)?;
    let load_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let matrix = feature_matrix(config, &data)?;
    let feature_secs = start.elapsed().as_secs_f64();
    let mut run = RunDir::create(config)?;
    run.record_duration("load", load_secs);
    run.record_duration("features", feature_secs);
    let reports = produce_reports(config, &matrix, &mut run, reuse)?;
    write_appearance(config, &data.channels, &reports, &mut run)?;

    if evaluate {
        let top_k = config.params.top_k.min(matrix.n_features());
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record([
            "selector",
            "top_k",
            "cv_accuracy",
            "recall_false",
            "recall_true",
            "evaluations",
            "wall_seconds",
        ])?;
        let eval_start = Instant::now();
        for (selector, report, rank_secs) in &reports {
            let start = Instant::now();
            let result = evaluate_report(&matrix, report, &config.params)?;
            let secs = rank_secs + start.elapsed().as_secs_f64();
            wtr.write_record([
                selector.name().to_string(),
                top_k.to_string(),
                result.accuracy.to_string(),
                result.recall[0].to_string(),
                result.recall[1].to_string(),
                report.evaluations.to_string(),
                format!("{secs:.6}"),
            ])?;
        }
        let start = Instant::now();
        let all: Vec<usize> = (0..matrix.n_features()).collect();
        let result = evaluate_columns(&matrix, &all, &config.params)?;
        wtr.write_record([
            "none".to_string(),
            matrix.n_features().to_string(),
            result.accuracy.to_string(),
            result.recall[0].to_string(),
            result.recall[1].to_string(),
            "0".to_string(),
            format!("{:.6}", start.elapsed().as_secs_f64()),
        ])?;
        run.record_duration("evaluate", eval_start.elapsed().as_secs_f64());
        run.write("comparison.csv", &wtr.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    }
    run.finish()?;
    eprintln!("wrote results to {}", config.output_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Synth {
            common,
            samples,
            data_seed,
        } => cmd_synth(&common.resolve()?, samples, data_seed),
        Command::Decompose {
            common,
            record,
            channel,
            output,
        } => cmd_decompose(&common.resolve()?, &record, channel.as_ref(), output.as_deref()),
        Command::Rank { common } => cmd_rank(&common.resolve()?, false, false),
        Command::Evaluate { common, reuse_reports } => cmd_rank(&common.resolve()?, true, reuse_reports),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
