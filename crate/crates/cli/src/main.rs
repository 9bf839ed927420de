//! `semdecode`: command-line front end for the decoding pipeline.
//!
//! Exit status is 0 on success, 1 on a usage error and 2 when the data or a
//! file is at fault.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use semdecode::dataio::{load_events, preprocess_runs};
use semdecode::latent_index::Metric;
use semdecode::pipeline::{
    self, emit_prompts, emit_report_chart, load_runs, load_taxonomy, AdaptTarget, Baseline, EvaluationReport,
    ExperimentConfig, Split, SynthParams, SyntheticWorld, TaxonomyFormat,
};
use semdecode::taxonomy::{Taxonomy, WupFormula};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "semdecode", version, about = "Decode semantic categories from fMRI trials", propagate_version = true)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Z-score runs and average HRF-shifted event windows into trials.
    Preprocess(PreprocessArgs),
    /// Generate a synthetic world with a planted voxel map.
    Synth(SynthArgs),
    /// Fit the ridge brain-to-feature map with a λ grid search.
    Train(TrainArgs),
    /// Validate the retrieval index and record its metric and k.
    BuildIndex(BuildIndexArgs),
    /// Predict, adapt, retrieve and score a split.
    Decode(DecodeArgs),
    /// Wu-Palmer similarity between two synsets.
    Wup(WupArgs),
    /// Write class-name prompts from a report.
    Prompts(PromptsArgs),
    /// Draw an SVG bar chart of mean similarity per report.
    Chart(ChartArgs),
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    /// Experiment config; preprocesses the configured splits.
    #[arg(long, conflicts_with_all = ["events", "runs", "out"])]
    config: Option<PathBuf>,
    /// Only this split (with --config).
    #[arg(long, requires = "config")]
    split: Option<Split>,
    /// Events table (without --config).
    #[arg(long, requires_all = ["runs", "out"])]
    events: Option<PathBuf>,
    /// Directory of FMX1 runs (without --config).
    #[arg(long, requires = "events")]
    runs: Option<PathBuf>,
    /// Output trial matrix (without --config).
    #[arg(long, requires = "events")]
    out: Option<PathBuf>,
    /// Volumes between onset and window start (without --config).
    #[arg(long, default_value_t = 1, conflicts_with = "config")]
    hrf_shift: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_classes: Option<usize>,
    /// Held-out classes (one per top-level group).
    #[arg(long)]
    test_classes: Option<usize>,
    #[arg(long)]
    items_per_class: Option<usize>,
    #[arg(long)]
    test_items_per_class: Option<usize>,
    #[arg(long)]
    index_items_per_class: Option<usize>,
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    voxels: Option<usize>,
    #[arg(long)]
    feature_noise: Option<f64>,
    /// Voxel noise std.
    #[arg(long, conflicts_with = "snr")]
    voxel_noise: Option<f64>,
    /// Voxel noise as signal-to-noise ratio of the planted responses.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long)]
    test_repetitions: Option<usize>,
    /// Per-feature gain/offset distortion of the test items.
    #[arg(long)]
    test_shift: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Candidate λ values, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    lambda_grid: Option<Vec<f64>>,
    /// Seed of the train/validation shuffle.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct BuildIndexArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    metric: Option<Metric>,
    /// Default number of neighbours.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = Split::Test)]
    split: Split,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    metric: Option<Metric>,
    /// Skip moment matching of the predicted features.
    #[arg(long)]
    no_adapt: bool,
    #[arg(long)]
    adapt_target: Option<AdaptTarget>,
    #[arg(long)]
    wup_formula: Option<WupFormula>,
    /// `random` replaces retrieval with uniform guesses over index classes.
    #[arg(long)]
    baseline: Option<Baseline>,
    /// Seed of the random baseline.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").multiple(false))]
struct WupArgs {
    /// Synset id (n01443537) or sense name (goldfish.n.01).
    id1: String,
    id2: String,
    /// WordNet dict directory or data.noun file.
    #[arg(long, group = "source")]
    wordnet: Option<PathBuf>,
    /// Tab-separated child/parent edge list.
    #[arg(long, group = "source")]
    taxonomy: Option<PathBuf>,
    /// Lemma table for --taxonomy.
    #[arg(long, requires = "taxonomy")]
    lemmas: Option<PathBuf>,
    /// Use the taxonomy of an experiment config.
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = WupFormula::Standard)]
    wup_formula: WupFormula,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).multiple(false))]
struct PromptsArgs {
    /// Evaluation report (JSON).
    #[arg(long, group = "input", requires = "out")]
    report: Option<PathBuf>,
    /// Use the report of this config's split.
    #[arg(long, group = "input")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = Split::Test, requires = "config")]
    split: Split,
    /// Output TSV (default: prompts_<split>.tsv next to the report).
    #[arg(long)]
    out: Option<PathBuf>,
    /// One line per retrieved neighbour instead of the predicted class.
    #[arg(long)]
    all_candidates: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).multiple(false))]
struct ChartArgs {
    /// Evaluation reports (JSON), one bar each.
    #[arg(long, group = "input", num_args = 1.., requires = "out")]
    reports: Vec<PathBuf>,
    /// Chart the train and test reports of this config.
    #[arg(long, group = "input")]
    config: Option<PathBuf>,
    /// Output SVG (default: wup_chart.svg in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A usage problem detected after argument parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

struct Output {
    text: String,
    json: Value,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?)
}

fn shown(p: &Path) -> String {
    p.display().to_string()
}

fn preprocess(args: PreprocessArgs) -> Result<Output> {
    let mut text = String::new();
    let mut outputs = Vec::new();
    let mut record = |split: Option<Split>, trials: &semdecode::dataio::TrialMatrix, out: &Path| {
        let _ = writeln!(
            text,
            "{}{} trials x {} voxels -> {}",
            split.map(|s| format!("{s}: ")).unwrap_or_default(),
            trials.rows(),
            trials.voxels(),
            out.display()
        );
        outputs.push(json!({
            "split": split.map(|s| s.to_string()),
            "trials": trials.rows(),
            "voxels": trials.voxels(),
            "out": shown(out),
        }));
    };
    if let Some(path) = &args.config {
        let config = load_config(path)?;
        let splits = match args.split {
            Some(s) => vec![s],
            None => [Split::Train, Split::Test]
                .into_iter()
                .filter(|&s| config.raw_inputs(s).is_ok())
                .collect(),
        };
        if splits.is_empty() {
            return Err(UsageError(format!("{} configures no raw runs to preprocess", path.display())).into());
        }
        for split in splits {
            let trials = pipeline::run_preprocess(&config, split)?;
            record(Some(split), &trials, config.trials(split));
        }
    } else {
        let (Some(events), Some(runs), Some(out)) = (&args.events, &args.runs, &args.out) else {
            return Err(UsageError("give --config, or --events with --runs and --out".into()).into());
        };
        let trials = preprocess_runs(&load_runs(runs)?, &load_events(events)?, args.hrf_shift)?;
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
        }
        trials.save(out)?;
        record(None, &trials, out);
    }
    Ok(Output {
        text,
        json: Value::Array(outputs),
    })
}

fn synth(args: SynthArgs) -> Result<Output> {
    let d = SynthParams::default();
    let mut params = SynthParams {
        seed: args.seed,
        train_classes: args.train_classes.unwrap_or(d.train_classes),
        test_classes: args.test_classes.unwrap_or(d.test_classes),
        items_per_class: args.items_per_class.unwrap_or(d.items_per_class),
        test_items_per_class: args.test_items_per_class.unwrap_or(d.test_items_per_class),
        index_items_per_class: args.index_items_per_class.unwrap_or(d.index_items_per_class),
        features: args.features.unwrap_or(d.features),
        voxels: args.voxels.unwrap_or(d.voxels),
        feature_noise: args.feature_noise.unwrap_or(d.feature_noise),
        voxel_noise: args.voxel_noise.unwrap_or(d.voxel_noise),
        test_repetitions: args.test_repetitions.unwrap_or(d.test_repetitions),
        test_shift: args.test_shift.unwrap_or(d.test_shift),
        ..d
    };
    if let Some(snr) = args.snr {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(UsageError(format!("--snr must be positive, got {snr}")).into());
        }
        let signal = SyntheticWorld::generate(&SynthParams {
            voxel_noise: 0.0,
            ..params.clone()
        })?
        .voxel_signal_std();
        params.voxel_noise = signal / snr;
    }
    let world = SyntheticWorld::generate(&params)?;
    world.write_to_dir(&args.out)?;
    let summary = world.summary()?;
    let mut text = String::new();
    let _ = writeln!(text, "wrote synthetic world to {}", args.out.display());
    let _ = writeln!(
        text,
        "classes: {} train, {} test; items: {} train, {} test, {} index",
        params.train_classes,
        params.test_classes,
        world.train_features.rows(),
        world.test_features.rows(),
        world.index_features.rows()
    );
    let _ = writeln!(text, "features: {}, voxels: {}", params.features, params.voxels);
    let _ = writeln!(
        text,
        "voxel signal std: {:.6}, noise std: {:.6}",
        summary.voxel_signal_std, params.voxel_noise
    );
    let _ = writeln!(
        text,
        "chance wup: {:.6} ± {:.6}",
        summary.chance_wup.mean, summary.chance_wup.std
    );
    Ok(Output {
        text,
        json: serde_json::to_value(&summary)?,
    })
}

fn train(args: TrainArgs) -> Result<Output> {
    let mut config = load_config(&args.config)?;
    if let Some(grid) = args.lambda_grid {
        config.lambda_grid = grid;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let (model, report) = pipeline::run_train(&config)?;
    let mut text = String::from("lambda\tvalidation_mse\n");
    for (i, (l, loss)) in report.lambdas.iter().zip(&report.validation_losses).enumerate() {
        let mark = if i == report.chosen_index { "\t*" } else { "" };
        let _ = writeln!(text, "{l:e}\t{loss:.6e}{mark}");
    }
    let _ = writeln!(
        text,
        "chosen lambda {:e} ({} train / {} validation rows); model {} x {} -> {}",
        report.chosen_lambda,
        report.train_rows,
        report.validation_rows,
        model.features(),
        model.voxels(),
        config.model.display()
    );
    Ok(Output {
        text,
        json: serde_json::to_value(&report)?,
    })
}

fn build_index(args: BuildIndexArgs) -> Result<Output> {
    let mut config = load_config(&args.config)?;
    if args.metric.is_some() {
        config.metric = args.metric;
    }
    if args.k.is_some() {
        config.k = args.k;
    }
    config.validate()?;
    let (index, sidecar) = pipeline::run_build_index(&config)?;
    let classes = index.labels().iter().collect::<std::collections::BTreeSet<_>>().len();
    let text = format!(
        "index: {} items, {} classes, {} features; metric {}, k {}\n",
        index.len(),
        classes,
        index.dim(),
        sidecar.metric,
        sidecar.k_default
    );
    Ok(Output {
        text,
        json: json!({
            "items": index.len(),
            "classes": classes,
            "features": index.dim(),
            "metric": sidecar.metric,
            "k": sidecar.k_default,
        }),
    })
}

fn decode(args: DecodeArgs) -> Result<Output> {
    let mut config = load_config(&args.config)?;
    if args.k.is_some() {
        config.k = args.k;
    }
    if args.metric.is_some() {
        config.metric = args.metric;
    }
    if args.no_adapt {
        config.adapt = false;
    }
    if let Some(t) = args.adapt_target {
        config.adapt_target = t;
    }
    if let Some(f) = args.wup_formula {
        config.wup_formula = f;
    }
    if let Some(b) = args.baseline {
        config.baseline = b;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let report = pipeline::run_decode(&config, args.split)?;
    let path = pipeline::report_path(&config, args.split, config.baseline, "json");
    let a = &report.aggregates;
    let text = format!(
        "{} {}: {} items ({} skipped)\nmean wup {:.6} ± {:.6}\ntop-1 accuracy {:.6}\ntop-5 label hit rate {:.6}\nreport {}\n",
        report.subject,
        report.split,
        a.n_items,
        a.n_skipped,
        a.mean_wup,
        a.std_wup,
        a.top1_accuracy,
        a.top5_label_hit_rate,
        path.display()
    );
    Ok(Output {
        text,
        json: json!({ "aggregates": a, "report": shown(&path) }),
    })
}

/// `data.noun` → `index.noun` in the same directory, if present.
fn sibling_index(data: &Path) -> Option<PathBuf> {
    let name = data.file_name()?.to_str()?;
    let candidate = data.with_file_name(name.replace("data.noun", "index.noun"));
    (candidate != data && candidate.is_file()).then_some(candidate)
}

fn wup_taxonomy(args: &WupArgs) -> Result<Taxonomy> {
    if let Some(path) = &args.wordnet {
        if path.is_dir() {
            return Ok(load_taxonomy(path, TaxonomyFormat::Wordnet, None)?);
        }
        return Ok(load_taxonomy(path, TaxonomyFormat::Wordnet, sibling_index(path).as_deref())?);
    }
    if let Some(path) = &args.taxonomy {
        return Ok(load_taxonomy(path, TaxonomyFormat::Edges, args.lemmas.as_deref())?);
    }
    if let Some(path) = &args.config {
        return Ok(load_config(path)?.load_taxonomy()?);
    }
    match std::env::var_os("WNSEARCHDIR") {
        Some(dir) => Ok(load_taxonomy(Path::new(&dir), TaxonomyFormat::Wordnet, None)?),
        None => Err(UsageError("no taxonomy: give --wordnet, --taxonomy or --config, or set WNSEARCHDIR".into()).into()),
    }
}

fn wup(args: WupArgs) -> Result<Output> {
    let taxonomy = wup_taxonomy(&args)?;
    let a = taxonomy.resolve(&args.id1)?;
    let b = taxonomy.resolve(&args.id2)?;
    let value = taxonomy.wup_similarity(&a, &b, args.wup_formula)?;
    let lcs = taxonomy.lcs(&a, &b)?;
    Ok(Output {
        text: format!("{value:.6}\n"),
        json: json!({
            "synset1": a,
            "synset2": b,
            "lcs": lcs,
            "formula": args.wup_formula,
            "wup": value,
        }),
    })
}

fn prompts(args: PromptsArgs) -> Result<Output> {
    let (report_path, default_out) = match (&args.report, &args.config) {
        (Some(r), _) => (r.clone(), None),
        (None, Some(c)) => {
            let config = load_config(c)?;
            let path = pipeline::report_path(&config, args.split, config.baseline, "json");
            (path, Some(config.out_dir.join(format!("prompts_{}.tsv", args.split))))
        }
        (None, None) => unreachable!("clap requires an input"),
    };
    let out = args
        .out
        .clone()
        .or(default_out)
        .ok_or_else(|| UsageError("--out is required with --report".into()))?;
    let report = EvaluationReport::load(&report_path)?;
    emit_prompts(&report, &out, args.all_candidates)?;
    let lines = semdecode::pipeline::render_prompts(&report, args.all_candidates).lines().count() - 1;
    Ok(Output {
        text: format!("{lines} prompts -> {}\n", out.display()),
        json: json!({ "prompts": lines, "out": shown(&out) }),
    })
}

fn chart(args: ChartArgs) -> Result<Output> {
    let (paths, out) = if let Some(c) = &args.config {
        let config = load_config(c)?;
        let paths: Vec<PathBuf> = [Split::Train, Split::Test]
            .into_iter()
            .map(|s| pipeline::report_path(&config, s, config.baseline, "json"))
            .filter(|p| p.is_file())
            .collect();
        if paths.is_empty() {
            return Err(UsageError(format!(
                "no reports in {}; run decode first",
                config.out_dir.display()
            ))
            .into());
        }
        let out = args.out.clone().unwrap_or_else(|| config.out_dir.join("wup_chart.svg"));
        (paths, out)
    } else {
        let out = args.out.clone().ok_or_else(|| UsageError("--out is required with --reports".into()))?;
        (args.reports.clone(), out)
    };
    let reports = paths
        .iter()
        .map(|p| EvaluationReport::load(p))
        .collect::<semdecode::Result<Vec<_>>>()?;
    emit_report_chart(&reports, &out)?;
    Ok(Output {
        text: format!("{} bars -> {}\n", reports.len(), out.display()),
        json: json!({ "bars": reports.len(), "out": shown(&out) }),
    })
}

fn run(cli: Cli) -> Result<Output> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Preprocess(a) => preprocess(a),
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::BuildIndex(a) => build_index(a),
        Command::Decode(a) => decode(a),
        Command::Wup(a) => wup(a),
        Command::Prompts(a) => prompts(a),
        Command::Chart(a) => chart(a),
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !text.contains(&c) {
            text = format!("{text}: {c}");
        }
    }
    text
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serialisable"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
