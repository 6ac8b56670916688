//! Subcommand implementations.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use pcgbench_core::dataset::{
    build_dataset as core_build_dataset, gen_surrogate_at_rate, load_physionet,
    paper_surrogate_bases, surrogate_bases, DatasetError, DatasetManifest, DatasetRecipe,
    HeartClass, Split, DEFAULT_SNR_LADDER, PAPER_TEST_IDS, PAPER_TRAIN_IDS,
};
use pcgbench_core::experiment::{
    evaluate_model, prepare, prepare_filtered, run_prepared, Aggregation, ClassifierKind,
    ExperimentConfig, FeatureBase, TrainedModel,
};
use pcgbench_core::features::{extract, save_matrix, FeatureKind};
use pcgbench_core::models::{load_cnn, load_linear, peek_model_kind, ModelKind};
use pcgbench_core::noise::{catalog_load, NoiseCatalog};
use pcgbench_core::report::{
    emit_report, facet_breakdown, repeat_experiment, Facet, FacetReport, Prediction,
    ReportFormat,
};
use pcgbench_core::signal::{normalize_amplitude, read_wav, resample, segment, write_wav};

use crate::{CliError, CliResult, Globals};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn guard_overwrite(path: &Path, force: bool) -> CliResult {
    if path.exists() && !force {
        return Err(CliError::Overwrite(format!("{} already exists", path.display())));
    }
    Ok(())
}

fn require_file(path: &Path, what: &str) -> CliResult {
    if !path.is_file() {
        return Err(usage(format!("{what} not found: {}", path.display())));
    }
    Ok(())
}

/// Fold dataset validation problems into usage errors (exit 2); real
/// failures stay runtime errors (exit 4).
fn map_dataset_err(e: DatasetError) -> CliError {
    match e {
        DatasetError::Recipe(_) | DatasetError::Schema(_) | DatasetError::Leakage(_) => {
            usage(e.to_string())
        }
        other => CliError::Runtime(other.into()),
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FeatureArg {
    Log,
    Mel,
}

impl From<FeatureArg> for FeatureBase {
    fn from(v: FeatureArg) -> Self {
        match v {
            FeatureArg::Log => FeatureBase::Log,
            FeatureArg::Mel => FeatureBase::Mel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Svm,
    Cnn,
}

impl From<ModelArg> for ClassifierKind {
    fn from(v: ModelArg) -> Self {
        match v {
            ModelArg::Svm => ClassifierKind::Svm,
            ModelArg::Cnn => ClassifierKind::Cnn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ClassArg {
    Normal,
    Abnormal,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AggregateArg {
    Segment,
    Recording,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

// ---------------------------------------------------------------------------
// gen-noise

#[derive(Args)]
pub struct GenNoiseArgs {
    /// Catalog noise type, e.g. pink or coughing.
    pub noise_type: String,
    pub seconds: f64,
    pub rate: u32,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn gen_noise(globals: &Globals, args: GenNoiseArgs) -> CliResult {
    let catalog = NoiseCatalog::builtin();
    if catalog.get(&args.noise_type).is_none() {
        let names: Vec<&str> =
            catalog.entries().iter().map(|s| s.name.as_str()).collect();
        return Err(usage(format!(
            "unknown noise type {:?}; catalog types: {}",
            args.noise_type,
            names.join(", ")
        )));
    }
    if args.seconds.is_nan() || args.seconds <= 0.0 {
        return Err(usage("seconds must be positive"));
    }
    if args.rate == 0 {
        return Err(usage("rate must be positive"));
    }
    let n = (args.seconds * args.rate as f64).round() as usize;
    if n == 0 {
        return Err(usage("duration rounds to zero samples"));
    }
    guard_overwrite(&args.out, globals.force)?;
    let w = catalog
        .render(&args.noise_type, args.rate, n, args.seed)
        .context("noise synthesis failed")?;
    write_wav(&w, &args.out).context("writing wav")?;
    println!(
        "wrote {} type={} samples={} rate={} seed={}",
        args.out.display(),
        args.noise_type,
        n,
        args.rate,
        args.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-surrogate

#[derive(Args)]
pub struct GenSurrogateArgs {
    #[arg(value_enum)]
    pub class: ClassArg,
    pub seconds: f64,
    pub bpm: f64,
    pub seed: u64,
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub rate: u32,
}

pub fn gen_surrogate(globals: &Globals, args: GenSurrogateArgs) -> CliResult {
    guard_overwrite(&args.out, globals.force)?;
    let class = match args.class {
        ClassArg::Normal => HeartClass::Normal,
        ClassArg::Abnormal => HeartClass::Abnormal,
    };
    let w = gen_surrogate_at_rate(class, args.seconds, args.bpm, args.rate, args.seed)
        .map_err(map_dataset_err)?;
    write_wav(&w, &args.out).context("writing wav")?;
    println!(
        "wrote {} class={} samples={} bpm={} seed={}",
        args.out.display(),
        class,
        w.len(),
        args.bpm,
        args.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// build-dataset

/// JSON recipe schema. `bases` selects surrogate generation or a directory
/// of labeled recordings; `catalog` defaults to the 21 builtin types.
#[derive(Deserialize, Serialize)]
struct RecipeFile {
    bases: BasesSpec,
    #[serde(default)]
    catalog: Option<CatalogSpec>,
    #[serde(default)]
    snr_levels_db: Option<Vec<f64>>,
    #[serde(default)]
    train_base_ids: Option<Vec<u32>>,
    #[serde(default)]
    test_base_ids: Option<Vec<u32>>,
    #[serde(default)]
    master_seed: Option<u64>,
    #[serde(default)]
    sample_rate: Option<u32>,
}

#[derive(Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BasesSpec {
    /// 16 surrogate recordings mirroring the standard layout.
    PaperSurrogate {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// `count` alternating-class surrogates of equal duration.
    Surrogate {
        count: usize,
        duration_s: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Directory of WAVs plus a reference CSV (PhysioNet layout).
    Dir { path: PathBuf },
}

#[derive(Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CatalogSpec {
    Builtin,
    File { dir: PathBuf, manifest: PathBuf },
}

#[derive(Args)]
pub struct BuildDatasetArgs {
    pub recipe: PathBuf,
    pub out_dir: PathBuf,
}

pub fn build_dataset(globals: &Globals, args: BuildDatasetArgs) -> CliResult {
    require_file(&args.recipe, "recipe")?;
    let text = std::fs::read_to_string(&args.recipe).context("reading recipe")?;
    let recipe_file: RecipeFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("recipe schema: {e}")))?;

    guard_overwrite(&args.out_dir.join("manifest.csv"), globals.force)?;

    let sample_rate = recipe_file.sample_rate.unwrap_or(2000);
    let master_seed = recipe_file.master_seed.unwrap_or(globals.seed);

    let (bases, default_split) = match &recipe_file.bases {
        BasesSpec::PaperSurrogate { seed } => (
            paper_surrogate_bases(sample_rate, seed.unwrap_or(globals.seed)),
            Some((PAPER_TRAIN_IDS.to_vec(), PAPER_TEST_IDS.to_vec())),
        ),
        BasesSpec::Surrogate { count, duration_s, seed } => (
            surrogate_bases(*count, *duration_s, sample_rate, seed.unwrap_or(globals.seed)),
            None,
        ),
        BasesSpec::Dir { path } => {
            if !path.is_dir() {
                return Err(usage(format!("bases directory not found: {}", path.display())));
            }
            (load_physionet(path).map_err(map_dataset_err)?, None)
        }
    };

    let (train_ids, test_ids) = match (
        recipe_file.train_base_ids.clone(),
        recipe_file.test_base_ids.clone(),
        default_split,
    ) {
        (Some(tr), Some(te), _) => (tr, te),
        (None, None, Some((tr, te))) => (tr, te),
        (None, None, None) => {
            return Err(usage(
                "recipe must provide train_base_ids and test_base_ids \
                 (only paper_surrogate bases have a default split)",
            ))
        }
        _ => {
            return Err(usage(
                "train_base_ids and test_base_ids must be given together",
            ))
        }
    };

    let catalog = match recipe_file.catalog.as_ref().unwrap_or(&CatalogSpec::Builtin) {
        CatalogSpec::Builtin => NoiseCatalog::builtin(),
        CatalogSpec::File { dir, manifest } => {
            catalog_load(dir, manifest).map_err(|e| usage(e.to_string()))?
        }
    };

    let recipe = DatasetRecipe {
        bases,
        catalog,
        snr_levels_db: recipe_file
            .snr_levels_db
            .unwrap_or_else(|| DEFAULT_SNR_LADDER.to_vec()),
        train_base_ids: train_ids.into_iter().collect::<BTreeSet<u32>>(),
        test_base_ids: test_ids.into_iter().collect::<BTreeSet<u32>>(),
        master_seed,
        sample_rate,
    };

    let manifest = core_build_dataset(&recipe, &args.out_dir).map_err(map_dataset_err)?;
    let train = manifest.filter_split(Split::Train).rows().len();
    let test = manifest.filter_split(Split::Test).rows().len();
    println!("{} rows ({train} train / {test} test)", manifest.rows().len());
    println!(
        "manifest={} master_seed={master_seed} sample_rate={sample_rate}",
        args.out_dir.join("manifest.csv").display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// extract-features

#[derive(Args)]
pub struct ExtractFeaturesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FeatureArg::Mel)]
    pub feature: FeatureArg,
    /// Average across the time axis (vector features for SVMs).
    #[arg(long)]
    pub average: bool,
    #[arg(long, default_value_t = 10.0)]
    pub segment_seconds: f64,
    #[arg(long, default_value_t = 2.0)]
    pub min_keep_seconds: f64,
    #[arg(long, default_value_t = 64)]
    pub n_mels: usize,
    #[arg(long, default_value_t = 2000)]
    pub sample_rate: u32,
    /// Restrict to one split.
    #[arg(long)]
    pub split: Option<String>,
}

pub fn extract_features(globals: &Globals, args: ExtractFeaturesArgs) -> CliResult {
    require_file(&args.manifest, "manifest")?;
    let sidecar_path = args.out.join("features.json");
    guard_overwrite(&sidecar_path, globals.force)?;

    let split = match args.split.as_deref() {
        None | Some("all") => None,
        Some(s) => Some(Split::from_str(s).map_err(usage)?),
    };
    let manifest = DatasetManifest::load_csv(&args.manifest)?;
    let base_dir = args.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    std::fs::create_dir_all(&args.out)?;

    let base: FeatureBase = args.feature.into();
    let kind = match (base, args.average) {
        (FeatureBase::Log, false) => FeatureKind::LogSpec,
        (FeatureBase::Log, true) => FeatureKind::LogSpecAvg,
        (FeatureBase::Mel, false) => FeatureKind::MelSpec,
        (FeatureBase::Mel, true) => FeatureKind::MelSpecAvg,
    };
    let feature_cfg = pcgbench_core::features::FeatureConfig {
        n_mels: args.n_mels,
        ..Default::default()
    };

    let mut files = 0usize;
    let mut rows = 0usize;
    for row in manifest.rows() {
        if split.is_some_and(|s| row.split != s) {
            continue;
        }
        rows += 1;
        let wav = read_wav(base_dir.join(&row.path))?;
        let wav = resample(&wav, args.sample_rate)?;
        for (k, seg) in segment(&wav, args.segment_seconds, args.min_keep_seconds)?
            .iter()
            .enumerate()
        {
            let normalized = normalize_amplitude(seg)?;
            let features = extract(&normalized, kind, &feature_cfg)?;
            let path = args.out.join(format!("rec{:05}_seg{k}.fmx", row.recording_id));
            save_matrix(&path, &features.values)?;
            files += 1;
        }
    }

    let sidecar = serde_json::json!({
        "kind": kind.to_string(),
        "stft": { "window_len": 256, "hop": 128 },
        "n_mels": args.n_mels,
        "sample_rate": args.sample_rate,
        "segment_seconds": args.segment_seconds,
        "min_keep_seconds": args.min_keep_seconds,
        "manifest": args.manifest.display().to_string(),
        "rows": rows,
        "files": files,
    });
    std::fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    println!("extracted files={files} rows={rows} out={}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub feature: Option<FeatureArg>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Output model container.
    #[arg(long, default_value = "model.pcgm")]
    pub out: PathBuf,
    /// PhysioNet-format directory for the CNN pre-training phase.
    #[arg(long)]
    pub pretrain: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_epochs: Option<usize>,
    #[arg(long)]
    pub segment_seconds: Option<f64>,
    #[arg(long)]
    pub n_mels: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
}

/// Precedence: flag > config file > default.
fn resolve_config(globals: &Globals, args: &TrainArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &globals.config {
        Some(path) => {
            require_file(path, "config")?;
            ExperimentConfig::load(path).map_err(|e| usage(format!("config: {e}")))?
        }
        None => {
            let manifest = args
                .manifest
                .clone()
                .ok_or_else(|| usage("--manifest is required (or provide --config)"))?;
            let feature = args
                .feature
                .ok_or_else(|| usage("--feature is required (or provide --config)"))?;
            let model = args
                .model
                .ok_or_else(|| usage("--model is required (or provide --config)"))?;
            ExperimentConfig::new(manifest, feature.into(), model.into())
        }
    };
    if let Some(m) = &args.manifest {
        cfg.manifest = m.clone();
    }
    if let Some(f) = args.feature {
        cfg.feature = f.into();
    }
    if let Some(m) = args.model {
        cfg.model = m.into();
    }
    if args.segment_seconds.is_some() {
        cfg.segment_seconds = args.segment_seconds;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.pretrain_epochs {
        cfg.pretrain_epochs = v;
    }
    if let Some(v) = args.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.svm_c {
        cfg.svm_c = v;
    }
    if let Some(v) = args.svm_epochs {
        cfg.svm_epochs = v;
    }
    if let Some(v) = args.n_mels {
        cfg.n_mels = v;
    }
    if let Some(v) = args.sample_rate {
        cfg.sample_rate = v;
    }
    if let Some(dir) = &args.pretrain {
        cfg.pretrain_dir = Some(dir.clone());
    }
    require_file(&cfg.manifest, "manifest")?;
    if let Some(dir) = &cfg.pretrain_dir {
        if !dir.is_dir() {
            return Err(usage(format!("pretrain directory not found: {}", dir.display())));
        }
    }
    Ok(cfg)
}

pub fn train(globals: &Globals, args: TrainArgs) -> CliResult {
    let cfg = resolve_config(globals, &args)?;
    guard_overwrite(&args.out, globals.force)?;

    let prepared = prepare(&cfg).context("feature extraction")?;
    let outcome = pcgbench_core::experiment::train_model(&prepared, &cfg, globals.seed)
        .context("training")?;

    let mut log = String::new();
    writeln!(
        log,
        "model={} feature={} train_segments={} seed={}",
        match cfg.model {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Cnn => "cnn",
        },
        cfg.feature_kind(),
        prepared.train.len(),
        globals.seed
    )
    .unwrap();
    for (i, loss) in outcome.pretrain_losses.iter().enumerate() {
        writeln!(log, "phase=pretrain epoch={} loss={loss:.6}", i + 1).unwrap();
    }
    if !outcome.frozen.is_empty() {
        let conv_blocks: Vec<&str> = outcome
            .frozen
            .iter()
            .filter(|n| n.ends_with(".w"))
            .map(|n| n.trim_end_matches(".w"))
            .collect();
        writeln!(log, "frozen: {}", conv_blocks.join(",")).unwrap();
    }
    for (i, loss) in outcome.train_losses.iter().enumerate() {
        writeln!(log, "phase=train epoch={} loss={loss:.6}", i + 1).unwrap();
    }
    match &outcome.model {
        TrainedModel::Svm(m) => {
            writeln!(log, "feature_dim={}", m.dim()).unwrap();
            m.save(&args.out)?;
        }
        TrainedModel::Cnn(m) => {
            let (h, w) = m.input_shape();
            writeln!(log, "input_shape={h}x{w} flatten={}", m.flatten_dim()).unwrap();
            m.save(&args.out)?;
        }
    }
    writeln!(log, "saved model={}", args.out.display()).unwrap();
    print!("{log}");

    let log_path = PathBuf::from(format!("{}.log", args.out.display()));
    std::fs::write(&log_path, log).context("writing training log")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Args)]
pub struct EvaluateArgs {
    /// Saved model container (single evaluation).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Comma-separated facets, or `all`.
    #[arg(long, default_value = "overall")]
    pub facets: String,
    /// With a --config experiment: retrain this many times with derived
    /// seeds and report mean and standard deviation.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long, value_enum)]
    pub aggregate: Option<AggregateArg>,
    #[arg(long)]
    pub segment_seconds: Option<f64>,
    #[arg(long)]
    pub n_mels: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
}

fn parse_facets(spec: &str) -> Result<Vec<Facet>, CliError> {
    if spec == "all" {
        return Ok(Facet::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| Facet::from_str(s.trim()).map_err(usage))
        .collect()
}

fn write_reports(
    reports: &[FacetReport],
    out: &Path,
    format: FormatArg,
    force: bool,
) -> CliResult {
    std::fs::create_dir_all(out)?;
    for report in reports {
        let ext = match format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        };
        let path = out.join(format!("report_{}.{ext}", report.facet));
        guard_overwrite(&path, force)?;
        let fmt = match format {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        };
        emit_report(report, fmt, &path)?;
        println!("report facet={} groups={} path={}", report.facet, report.groups.len(), path.display());
    }
    Ok(())
}

fn print_overall(reports: &[FacetReport]) {
    if let Some(overall) = reports.iter().find(|r| r.facet == Facet::Overall) {
        if let Some(g) = overall.groups.first() {
            println!(
                "overall accuracy={:.6} std={:.6} n={} repeats={}",
                g.accuracy, g.accuracy_std, g.n, overall.repeats
            );
        }
    }
}

fn save_predictions(path: &Path, predictions: &[Prediction]) -> CliResult {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["recording_id", "predicted", "truth", "duration_s"])?;
    for p in predictions {
        w.write_record([
            p.recording_id.to_string(),
            p.predicted.to_string(),
            p.truth.to_string(),
            p.duration_s.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.into()))?;
    Ok(())
}

pub fn evaluate(globals: &Globals, args: EvaluateArgs) -> CliResult {
    let mut facets = parse_facets(&args.facets)?;
    if !facets.contains(&Facet::Overall) {
        facets.push(Facet::Overall); // needed for the accuracy line
    }
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| {
            globals
                .config
                .as_ref()
                .and_then(|p| ExperimentConfig::load(p).ok().map(|c| c.manifest))
        })
        .ok_or_else(|| usage("--manifest is required (or provide --config)"))?;
    require_file(&manifest_path, "manifest")?;

    let requested: Vec<Facet> = parse_facets(&args.facets)?;
    match (&args.model, &globals.config) {
        (Some(model_path), _) => {
            if args.repeats != 1 {
                return Err(usage(
                    "--repeats > 1 retrains per repeat and needs --config, not --model",
                ));
            }
            require_file(model_path, "model")?;
            let kind = peek_model_kind(model_path).map_err(|e| usage(e.to_string()))?;
            let (trained, feature_kind) = match kind {
                ModelKind::SvmLinear => {
                    let m = load_linear(model_path)?;
                    let k = m.feature_kind;
                    (TrainedModel::Svm(m), k)
                }
                ModelKind::Cnn => {
                    let m = load_cnn(model_path)?;
                    let k = m.feature_kind();
                    (TrainedModel::Cnn(m), k)
                }
            };
            let feature_kind = feature_kind
                .ok_or_else(|| usage("model container does not record its feature kind"))?;
            let base = match feature_kind {
                FeatureKind::LogSpec | FeatureKind::LogSpecAvg => FeatureBase::Log,
                FeatureKind::MelSpec | FeatureKind::MelSpecAvg => FeatureBase::Mel,
            };
            let classifier = match kind {
                ModelKind::SvmLinear => ClassifierKind::Svm,
                ModelKind::Cnn => ClassifierKind::Cnn,
            };
            let mut cfg = ExperimentConfig::new(manifest_path, base, classifier);
            if args.segment_seconds.is_some() {
                cfg.segment_seconds = args.segment_seconds;
            }
            if let Some(v) = args.n_mels {
                cfg.n_mels = v;
            }
            if let Some(v) = args.sample_rate {
                cfg.sample_rate = v;
            }
            if let Some(a) = args.aggregate {
                cfg.aggregation = match a {
                    AggregateArg::Segment => Aggregation::Segment,
                    AggregateArg::Recording => Aggregation::Recording,
                };
            }
            let prepared =
                prepare_filtered(&cfg, Some(Split::Test)).context("feature extraction")?;
            let predictions = evaluate_model(&trained, &prepared, &cfg)?;
            let reports: Vec<FacetReport> = facets
                .iter()
                .map(|&f| facet_breakdown(&predictions, &prepared.manifest, f))
                .collect::<Result<_, _>>()?;
            std::fs::create_dir_all(&args.out)?;
            let pred_path = args.out.join("predictions.csv");
            guard_overwrite(&pred_path, globals.force)?;
            save_predictions(&pred_path, &predictions)?;
            let to_write: Vec<FacetReport> = reports
                .iter()
                .filter(|r| requested.contains(&r.facet))
                .cloned()
                .collect();
            write_reports(&to_write, &args.out, args.format, globals.force)?;
            print_overall(&reports);
        }
        (None, Some(config_path)) => {
            require_file(config_path, "config")?;
            let mut cfg = ExperimentConfig::load(config_path)
                .map_err(|e| usage(format!("config: {e}")))?;
            cfg.manifest = manifest_path;
            if args.segment_seconds.is_some() {
                cfg.segment_seconds = args.segment_seconds;
            }
            if let Some(v) = args.n_mels {
                cfg.n_mels = v;
            }
            if let Some(v) = args.sample_rate {
                cfg.sample_rate = v;
            }
            if let Some(a) = args.aggregate {
                cfg.aggregation = match a {
                    AggregateArg::Segment => Aggregation::Segment,
                    AggregateArg::Recording => Aggregation::Recording,
                };
            }
            let prepared = prepare(&cfg).context("feature extraction")?;
            let reports = repeat_experiment(
                args.repeats,
                globals.seed,
                |seed| run_prepared(&prepared, &cfg, seed),
                &prepared.manifest,
                &facets,
            )?;
            std::fs::create_dir_all(&args.out)?;
            let to_write: Vec<FacetReport> = reports
                .iter()
                .filter(|r| requested.contains(&r.facet))
                .cloned()
                .collect();
            write_reports(&to_write, &args.out, args.format, globals.force)?;
            print_overall(&reports);
        }
        (None, None) => {
            return Err(usage("evaluate needs either --model or --config"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report

#[derive(Args)]
pub struct ReportArgs {
    /// Predictions CSV (`recording_id,predicted,truth,duration_s`).
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "overall")]
    pub facets: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

fn load_predictions(path: &Path) -> Result<Vec<Prediction>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage(e.to_string()))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| usage(e.to_string()))?;
        if record.len() < 3 {
            return Err(usage("predictions rows need recording_id,predicted,truth"));
        }
        let parse_i8 = |s: &str| {
            s.parse::<i8>()
                .map_err(|_| usage(format!("bad label {s:?} in predictions")))
        };
        out.push(Prediction {
            recording_id: record[0]
                .parse()
                .map_err(|_| usage(format!("bad recording_id {:?}", &record[0])))?,
            predicted: parse_i8(&record[1])?,
            truth: parse_i8(&record[2])?,
            duration_s: record
                .get(3)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| usage(format!("bad duration {s:?}")))
                })
                .transpose()?,
        });
    }
    Ok(out)
}

pub fn report(globals: &Globals, args: ReportArgs) -> CliResult {
    require_file(&args.predictions, "predictions")?;
    require_file(&args.manifest, "manifest")?;
    let facets = parse_facets(&args.facets)?;
    let predictions = load_predictions(&args.predictions)?;
    let manifest = DatasetManifest::load_csv(&args.manifest)?;
    let reports: Vec<FacetReport> = facets
        .iter()
        .map(|&f| facet_breakdown(&predictions, &manifest, f))
        .collect::<Result<_, _>>()?;
    write_reports(&reports, &args.out, args.format, globals.force)?;
    print_overall(&reports);
    Ok(())
}
