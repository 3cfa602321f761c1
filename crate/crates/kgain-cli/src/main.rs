//! `kgain`: batch pipeline turning recorded Web-search learning sessions into
//! feature vectors, knowledge-gain labels, and a cross-validated random
//! forest. Subcommands mirror the pipeline stages and share one config file;
//! every run is a pure function of its inputs and the seed.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kgain_core::corpus::{load_corpus, SessionRecord};
use kgain_core::eval::{cross_validate, cross_validate_with, EvalOptions, EvalReport, ReportRow};
use kgain_core::features::{FeatureMatrix, FeatureSet};
use kgain_core::forest::{fit_forest, grid_search, Classifier, ForestModel};
use kgain_core::labeling::{gains_from_sessions, read_labels_csv, sigma_classify, write_labels_csv};
use kgain_core::mmfeat::MM_FEATURE_NAMES;
use kgain_core::pipeline::{extract_features, Aggregation, PipelineConfig};
use kgain_core::synthgen::{generate_corpus, SynthSpec};
use kgain_core::textfeat::{Lexicon, RuleTagger};

#[derive(Parser)]
#[command(
    name = "kgain",
    version,
    about = "Knowledge-gain classification over recorded Web-search learning sessions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-participant feature vectors into features.csv
    Extract(CommonArgs),
    /// Compute knowledge-gain labels into labels.csv
    Label(CommonArgs),
    /// Grid-search hyperparameters and fit a forest on the full data
    Train(CommonArgs),
    /// Repeated cross-validation; writes report.txt and report.json
    Evaluate(CommonArgs),
    /// Rank model features by MDI into importance.csv
    Importance(CommonArgs),
    /// Generate a synthetic corpus from a spec file
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Feature set: mi, ti, or miti
    #[arg(long)]
    features: Option<FeatureSet>,
    /// Weight per-page text features by focus dwell time
    #[arg(long)]
    dwell_weighted: bool,
    /// Re-run the grid search inside every cross-validation training fold
    #[arg(long)]
    nested: bool,
    /// Directory for pipeline artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Synthesis spec (JSON mirroring the SynthSpec fields)
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Extract(args) => cmd_extract(&args),
        Command::Label(args) => cmd_label(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Importance(args) => cmd_importance(&args),
        Command::Synth(args) => cmd_synth(&args),
    }
}

fn resolve_config(args: &CommonArgs) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            toml::from_str::<PipelineConfig>(&text)
                .with_context(|| format!("cannot parse config {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(features) = args.features {
        config.features = features;
    }
    if args.dwell_weighted {
        config.aggregation = Aggregation::DwellWeighted;
    }
    if args.nested {
        config.nested = true;
    }
    Ok(config)
}

/// Relative lexicon paths are also tried under the corpus root, where
/// generated corpora keep their lexicon.txt.
fn resolve_lexicon_path(config: &PipelineConfig) -> Result<PathBuf> {
    let direct = &config.lexicon_path;
    if direct.exists() {
        return Ok(direct.clone());
    }
    if direct.is_relative() {
        let under_corpus = config.corpus_root.join(direct);
        if under_corpus.exists() {
            return Ok(under_corpus);
        }
    }
    bail!(
        "lexicon not found at {} (also tried {})",
        direct.display(),
        config.corpus_root.join(direct).display()
    )
}

fn load_sessions(config: &PipelineConfig) -> Result<Vec<SessionRecord>> {
    let corpus = load_corpus(&config.corpus_root)
        .with_context(|| format!("cannot load corpus {}", config.corpus_root.display()))?;
    for warning in &corpus.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(corpus.sessions)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config: &'a PipelineConfig,
    outputs: Vec<String>,
}

fn write_manifest(
    out: &Path,
    command: &str,
    config: &PipelineConfig,
    outputs: &[&str],
) -> Result<()> {
    let manifest = RunManifest {
        command,
        config,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = out.join(format!("run-manifest-{command}.json"));
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn ensure_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
}

fn cmd_extract(args: &CommonArgs) -> Result<()> {
    let config = resolve_config(args)?;
    ensure_out(&args.out)?;
    let sessions = load_sessions(&config)?;
    let lexicon = match config.features {
        FeatureSet::Mi => Lexicon::parse("")?,
        _ => Lexicon::from_file(&resolve_lexicon_path(&config)?)?,
    };
    let output = extract_features(&sessions, &config, &RuleTagger, &lexicon)?;
    let features_path = args.out.join("features.csv");
    output.matrix.write_csv(&features_path)?;
    write_manifest(&args.out, "extract", &config, &["features.csv"])?;
    println!(
        "extracted {} features for {} of {} sessions -> {}",
        output.matrix.n_features(),
        output.matrix.n_rows(),
        sessions.len(),
        features_path.display()
    );
    if !output.failures.is_empty() {
        for (pid, message) in &output.failures {
            eprintln!("error: participant {pid}: {message}");
        }
        bail!("{} of {} sessions failed extraction", output.failures.len(), sessions.len());
    }
    Ok(())
}

fn cmd_label(args: &CommonArgs) -> Result<()> {
    let config = resolve_config(args)?;
    ensure_out(&args.out)?;
    let sessions = load_sessions(&config)?;
    let gains = gains_from_sessions(&sessions);
    let (labeled, summary) = sigma_classify(&gains)?;
    let labels_path = args.out.join("labels.csv");
    write_labels_csv(&labels_path, &labeled)?;
    write_manifest(&args.out, "label", &config, &["labels.csv"])?;
    println!(
        "labeled {} sessions -> {} (mean {:.4}, sigma {:.4}, thresholds {:.4}/{:.4}, low/moderate/high {}/{}/{})",
        labeled.len(),
        labels_path.display(),
        summary.mean,
        summary.sigma,
        summary.low_threshold,
        summary.high_threshold,
        summary.counts[0],
        summary.counts[1],
        summary.counts[2],
    );
    Ok(())
}

fn load_dataset(args: &CommonArgs) -> Result<FeatureMatrix> {
    let features_path = args.out.join("features.csv");
    FeatureMatrix::read_csv(&features_path)
        .with_context(|| format!("cannot read {} (run `kgain extract` first)", features_path.display()))
}

fn load_labels(args: &CommonArgs) -> Result<Vec<kgain_core::labeling::LabeledGain>> {
    let labels_path = args.out.join("labels.csv");
    read_labels_csv(&labels_path)
        .with_context(|| format!("cannot read {} (run `kgain label` first)", labels_path.display()))
}

fn cmd_train(args: &CommonArgs) -> Result<()> {
    let config = resolve_config(args)?;
    ensure_out(&args.out)?;
    let matrix = load_dataset(args)?;
    let labels = load_labels(args)?;
    let data = kgain_core::pipeline::assemble_dataset(&matrix, &labels)?;
    let grid = config.grid.to_grid()?;
    let outcome = grid_search(&data, &grid, config.grid_folds, config.seed)?;
    let model = fit_forest(&data, &outcome.best, config.seed)?;
    let model_path = args.out.join("model.json");
    model.save(&model_path)?;
    let mut grid_text = serde_json::to_string_pretty(&outcome)?;
    grid_text.push('\n');
    std::fs::write(args.out.join("grid-search.json"), grid_text)
        .with_context(|| "cannot write grid-search.json")?;
    write_manifest(&args.out, "train", &config, &["model.json", "grid-search.json"])?;
    println!(
        "trained forest on {} rows x {} features -> {}",
        data.n_rows(),
        data.feature_names.len(),
        model_path.display()
    );
    println!(
        "best params: n_trees={} max_depth={} min_samples_split={} max_features={} (grid accuracy {:.4})",
        outcome.best.n_trees,
        outcome.best.max_depth.map_or("unbounded".to_string(), |d| d.to_string()),
        outcome.best.min_samples_split,
        outcome.best.max_features,
        outcome.best_accuracy,
    );
    Ok(())
}

/// The feature-set rows evaluated from one matrix: the full selector plus,
/// for MI&TI, the TI-only and MI-only column subsets.
fn evaluation_rows(
    matrix: &FeatureMatrix,
    set: FeatureSet,
) -> Result<Vec<(String, FeatureMatrix)>> {
    let mi_names: Vec<String> = MM_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    match set {
        FeatureSet::Mi => Ok(vec![("MI".into(), matrix.subset(&mi_names)?)]),
        FeatureSet::Ti => Ok(vec![("TI".into(), matrix.clone())]),
        FeatureSet::MiTi => {
            let ti_names: Vec<String> = matrix
                .feature_names
                .iter()
                .filter(|n| !mi_names.contains(n))
                .cloned()
                .collect();
            if ti_names.is_empty() || ti_names.len() == matrix.feature_names.len() {
                bail!("features.csv does not hold both MI and TI columns; re-run extract with --features miti");
            }
            Ok(vec![
                ("MI&TI".into(), matrix.clone()),
                ("TI".into(), matrix.subset(&ti_names)?),
                ("MI".into(), matrix.subset(&mi_names)?),
            ])
        }
    }
}

fn cmd_evaluate(args: &CommonArgs) -> Result<()> {
    let config = resolve_config(args)?;
    ensure_out(&args.out)?;
    let matrix = load_dataset(args)?;
    let labels = load_labels(args)?;
    let grid = config.grid.to_grid()?;
    let options = EvalOptions { stratified: config.stratified, averaged: config.averaged };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (tag, sub_matrix) in evaluation_rows(&matrix, config.features)? {
        let data = kgain_core::pipeline::assemble_dataset(&sub_matrix, &labels)?;
        let (outcome, params) = if config.nested {
            // tune inside every training fold; the reported params are the
            // full-data choice, echoed for reference only
            let full = grid_search(&data, &grid, config.grid_folds, config.seed)?;
            let grid = grid.clone();
            let grid_folds = config.grid_folds;
            let outcome = cross_validate_with(
                &data,
                config.repetitions,
                config.folds,
                config.seed,
                options,
                &move |train, fit_seed| {
                    let inner = grid_search(train, &grid, grid_folds, fit_seed)?;
                    fit_forest(train, &inner.best, fit_seed)
                        .map(|m| Box::new(m) as Box<dyn Classifier>)
                },
            )?;
            (outcome, full.best)
        } else {
            let full = grid_search(&data, &grid, config.grid_folds, config.seed)?;
            let outcome = cross_validate(
                &data,
                &full.best,
                config.repetitions,
                config.folds,
                config.seed,
                options,
            )?;
            (outcome, full.best)
        };
        let report = EvalReport::new(&tag, config.seed, &params, options, &outcome, data.n_rows());
        println!(
            "{tag}: pooled accuracy {:.4} over {} repetitions x {} folds",
            report.metrics.accuracy, report.repetitions, report.folds
        );
        for warning in &report.warnings {
            eprintln!("warning: {tag}: {warning}");
        }
        rows.push(ReportRow { label: tag, metrics: report.metrics.clone() });
        reports.push(report);
    }
    let text = kgain_core::eval::render_report(&rows, None)?;
    std::fs::write(args.out.join("report.txt"), &text)
        .with_context(|| "cannot write report.txt")?;
    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    std::fs::write(args.out.join("report.json"), json)
        .with_context(|| "cannot write report.json")?;
    write_manifest(&args.out, "evaluate", &config, &["report.txt", "report.json"])?;
    print!("{text}");
    Ok(())
}

fn cmd_importance(args: &CommonArgs) -> Result<()> {
    let config = resolve_config(args)?;
    ensure_out(&args.out)?;
    let model_path = args.out.join("model.json");
    let model = ForestModel::load(&model_path)
        .with_context(|| format!("cannot read {} (run `kgain train` first)", model_path.display()))?;
    let importance = kgain_core::forest::mdi_importance(&model);
    kgain_core::eval::write_importance_csv(&importance, &args.out.join("importance.csv"))?;
    write_manifest(&args.out, "importance", &config, &["importance.csv"])?;
    print!("{}", kgain_core::eval::render_importance_table(&importance));
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("cannot read spec {}", args.spec.display()))?;
    let spec = SynthSpec::from_json(&text)?;
    generate_corpus(&spec, &args.common.out)?;
    println!(
        "generated {} sessions ({} learning frames each) -> {}",
        spec.n_sessions,
        spec.frames_per_session,
        args.common.out.display()
    );
    Ok(())
}
