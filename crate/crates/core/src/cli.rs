//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O
//! error, 3 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig};
use crate::dataio::{
    build_corpus, extract_seasons, prepare_season, read_weather_dir, read_weather_file,
    write_weather_csv, Corpus, DataError, DayRecord, IngestLog,
};
use crate::ferguson::{
    format_tuned, grid_search, rmse as ferguson_rmse, FergusonError, FergusonGrid, SeasonSeries,
};
use crate::harness::experiments::fit_model;
use crate::harness::gradcheck::check_variant;
use crate::harness::report::predictions_csv;
use crate::harness::{
    evaluate, predict_season, run_dataset_size_ablation, run_main_comparison,
    run_task_subset_ablation, run_transfer_experiment, HarnessError, ModelConfig, Precision,
    PredictionRow, Report, SizeSpec, Suite,
};
use crate::models::{load_checkpoint, save_checkpoint, Checkpoint, ModelError, Variant};
use crate::ndiff::{GradCheckOptions, Real};
use crate::synthgen::{generate_records, truths_to_toml, SynthError, SynthSpec};

#[derive(Debug, Parser)]
#[command(
    name = "coldhardiness",
    version,
    about = "Grapevine cold-hardiness models and experiments"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Flags override the config file,
/// which overrides the built-in defaults.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for trials and grid points (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Parent directory of run directories.
    #[arg(long, global = true, value_name = "DIR", default_value = "runs")]
    out_root: PathBuf,
    /// Weather CSV file or directory (overrides data.input).
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Base seed (train.seed; for `synth` the generator seed; for `gradcheck` the check seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training epochs (overrides train.epochs).
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Number of trials (overrides experiment.trials).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Arithmetic precision: f64 or f32.
    #[arg(long, global = true, value_parser = parse_precision)]
    precision: Option<Precision>,
    /// Use the full-size layer dimensions instead of the desk-scale ones.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus: one CSV per cultivar plus the hidden truth.
    Synth {
        /// Generator spec (TOML); defaults are used when omitted.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        /// Output directory (default: a new run directory).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Ingest weather files and report retained and rejected seasons.
    Ingest,
    /// Train one model and save a checkpoint.
    Train {
        /// Model variant (overrides model.variant).
        #[arg(long)]
        variant: Option<Variant>,
        /// Restrict to these cultivars (repeatable); a single-task model needs exactly one.
        #[arg(long = "cultivar", value_name = "NAME")]
        cultivars: Vec<String>,
        /// Train on this trial's split and report test RMSE; default trains on every season.
        #[arg(long)]
        trial: Option<usize>,
    },
    /// Tune the thermal-time baseline per cultivar by grid search.
    TuneFerguson {
        /// Grid file (overrides the ferguson_grid section).
        #[arg(long, value_name = "FILE")]
        grid: Option<PathBuf>,
        /// Restrict to these cultivars (repeatable).
        #[arg(long = "cultivar", value_name = "NAME")]
        cultivars: Vec<String>,
        /// Tune on this trial's training seasons and report test RMSE.
        #[arg(long)]
        trial: Option<usize>,
    },
    /// Every model variant and the baseline on every cultivar.
    Compare,
    /// Multi-task versus single-task as the target's training set shrinks.
    AblateSize {
        /// Target cultivar (repeatable; overrides experiment.size_targets).
        #[arg(long = "target", value_name = "NAME")]
        targets: Vec<String>,
        /// Comma-separated sizes, e.g. 2,5,10,all.
        #[arg(long, value_delimiter = ',', value_parser = parse_size)]
        sizes: Option<Vec<SizeSpec>>,
    },
    /// Multi-task models trained on subsets of the cultivars.
    AblateTasks {
        /// Cultivars per subset (overrides experiment.subset_size).
        #[arg(long)]
        subset_size: Option<usize>,
    },
    /// Finetuning on a held-out cultivar against multi-task training.
    Transfer {
        /// Held-out cultivar (repeatable; overrides experiment.transfer_targets).
        #[arg(long = "target", value_name = "NAME")]
        targets: Vec<String>,
        /// Finetuning epochs (overrides experiment.finetune_epochs).
        #[arg(long)]
        finetune_epochs: Option<usize>,
    },
    /// Per-day LTE predictions from a checkpoint.
    Predict {
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Weather CSV.
        #[arg(long, value_name = "FILE")]
        weather: PathBuf,
        /// Task to predict with, by index or name.
        #[arg(long)]
        cultivar: String,
        /// Output CSV (default: predictions.csv in a new run directory).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compare analytic gradients of every variant with finite differences.
    Gradcheck {
        /// Sequence length of the random batch.
        #[arg(long, default_value_t = 20)]
        days: usize,
        #[arg(long, default_value_t = 4)]
        tasks: usize,
        /// Coordinates checked per parameter block.
        #[arg(long, default_value_t = 16)]
        coords: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Ingest => "ingest",
            Command::Train { .. } => "train",
            Command::TuneFerguson { .. } => "tune-ferguson",
            Command::Compare => "compare",
            Command::AblateSize { .. } => "ablate-size",
            Command::AblateTasks { .. } => "ablate-tasks",
            Command::Transfer { .. } => "transfer",
            Command::Predict { .. } => "predict",
            Command::Gradcheck { .. } => "gradcheck",
        }
    }
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    match s.to_ascii_lowercase().as_str() {
        "f64" | "double" => Ok(Precision::F64),
        "f32" | "single" => Ok(Precision::F32),
        _ => Err(format!("expected f64 or f32, got `{s}`")),
    }
}

fn parse_size(s: &str) -> Result<SizeSpec, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(SizeSpec::All);
    }
    s.parse()
        .map(SizeSpec::Count)
        .map_err(|_| format!("expected a count or `all`, got `{s}`"))
}

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl ToString) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => Failure::data(e),
            ConfigError::Parse(_) => Failure::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::data(e)
    }
}

impl From<FergusonError> for Failure {
    fn from(e: FergusonError) -> Self {
        match e {
            FergusonError::GridFile(_) | FergusonError::InvalidParams(_) => {
                Failure::usage(e.to_string())
            }
            _ => Failure::data(e),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidSpec(_)
            | ModelError::Unsupported(..)
            | ModelError::TaskOutOfRange { .. } => Failure::usage(e.to_string()),
            ModelError::Shape(_) => Failure::numeric(e.to_string()),
            _ => Failure::data(e),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::NonFiniteLoss { .. } => Failure::numeric(e.to_string()),
            HarnessError::Config(_) => Failure::usage(e.to_string()),
            HarnessError::Model(m) => m.into(),
            HarnessError::Data(d) => d.into(),
            HarnessError::Ferguson(f) => f.into(),
            _ => Failure::data(e),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) => Failure::usage(e.to_string()),
            SynthError::Ferguson(f) => f.into(),
            SynthError::Data(d) => d.into(),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    init_logging(cli.global.verbose);
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.global.jobs {
            if n == 0 {
                return Err(Failure::usage("--jobs must be at least 1"));
            }
            builder = builder.num_threads(n);
        }
        builder.build().map_err(|e| Failure::usage(e.to_string()))?
    };
    pool.install(|| execute(cli))
}

fn resolve_config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(input) = &global.input {
        config.data.input = Some(input.clone());
    }
    if let Some(seed) = global.seed {
        config.train.seed = seed;
    }
    if let Some(epochs) = global.epochs {
        config.train.epochs = epochs;
    }
    if let Some(trials) = global.trials {
        config.experiment.trials = trials;
    }
    if let Some(precision) = global.precision {
        config.train.precision = precision;
    }
    if global.paper_scale {
        config.model.set_dims(&ModelConfig::paper());
    }
    Ok(config)
}

/// Creates `<out_root>/<timestamp>_<command>_<hash>` with the resolved
/// config inside.
fn create_run_dir(
    out_root: &Path,
    command: &str,
    hash: &str,
    config_text: &str,
) -> Result<PathBuf, Failure> {
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let base = format!("{stamp}_{command}_{hash}");
    let mut dir = out_root.join(&base);
    let mut k = 1;
    while dir.exists() {
        k += 1;
        dir = out_root.join(format!("{base}-{k}"));
    }
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), config_text)?;
    Ok(dir)
}

fn load_corpus(config: &RunConfig) -> Result<(Corpus, IngestLog), Failure> {
    let input = config
        .data
        .input
        .as_ref()
        .ok_or_else(|| Failure::usage("no input data: pass --input or set data.input"))?;
    let records = read_weather_dir(input)?;
    Ok(build_corpus(records, &config.data.corpus_options())?)
}

fn select_cultivars(corpus: &Corpus, names: &[String]) -> Result<Vec<usize>, Failure> {
    if names.is_empty() {
        return Ok((0..corpus.len()).collect());
    }
    names.iter().map(|n| Ok(corpus.id_of(n)?)).collect()
}

/// Training and test season indices of a cultivar: every season, or the
/// given trial's split.
fn season_split(
    corpus: &Corpus,
    config: &RunConfig,
    trial: Option<usize>,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>, Failure> {
    match trial {
        None => Ok(corpus
            .cultivars
            .iter()
            .map(|c| ((0..c.seasons.len()).collect(), Vec::new()))
            .collect()),
        Some(k) => {
            let splits =
                crate::dataio::make_trial_splits(corpus, k + 1, config.experiment.split_seed)?;
            Ok(splits[k]
                .cultivars
                .iter()
                .map(|c| (c.train.clone(), c.test.clone()))
                .collect())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let global = &cli.global;
    let name = cli.command.name();
    match cli.command {
        Command::Synth { spec, out } => synth(global, spec.as_deref(), out),
        Command::Predict {
            checkpoint,
            weather,
            cultivar,
            out,
        } => {
            let config = resolve_config(global)?;
            predict(global, &config, &checkpoint, &weather, &cultivar, out)
        }
        Command::Gradcheck {
            days,
            tasks,
            coords,
        } => {
            let config = resolve_config(global)?;
            gradcheck(global, &config, days, tasks, coords)
        }
        command => {
            let mut config = resolve_config(global)?;
            let mut grid_override = None;
            match &command {
                Command::Train {
                    variant: Some(v), ..
                } => config.model.variant = *v,
                Command::TuneFerguson {
                    grid: Some(path), ..
                } => {
                    let text = fs::read_to_string(path)?;
                    grid_override = Some(FergusonGrid::from_toml(&text)?);
                }
                Command::AblateSize { targets, sizes } => {
                    if !targets.is_empty() {
                        config.experiment.size_targets = targets.clone();
                    }
                    if let Some(sizes) = sizes {
                        config.experiment.sizes = sizes.clone();
                    }
                }
                Command::AblateTasks {
                    subset_size: Some(k),
                } => config.experiment.subset_size = Some(*k),
                Command::Transfer {
                    targets,
                    finetune_epochs,
                } => {
                    if !targets.is_empty() {
                        config.experiment.transfer_targets = targets.clone();
                    }
                    if finetune_epochs.is_some() {
                        config.experiment.finetune_epochs = *finetune_epochs;
                    }
                }
                _ => {}
            }
            if let Some(grid) = grid_override {
                config.ferguson_grid = grid;
            }
            config.train.validate()?;
            let (corpus, log) = load_corpus(&config)?;
            let hash = config.hash();
            let dir = create_run_dir(&global.out_root, name, &hash, &config.to_toml())?;
            match command {
                Command::Ingest => ingest(&corpus, &log, &dir),
                Command::Train {
                    cultivars, trial, ..
                } => train_command(&config, &corpus, &cultivars, trial, &dir),
                Command::TuneFerguson {
                    cultivars, trial, ..
                } => tune(&config, &corpus, &cultivars, trial, &dir),
                experiment => {
                    let dims = config.model.dims();
                    let suite = Suite {
                        corpus: &corpus,
                        model: &dims,
                        train: &config.train,
                        grid: &config.ferguson_grid,
                        experiment: &config.experiment,
                        config_hash: hash,
                    };
                    let report = match experiment {
                        Command::Compare => run_main_comparison(&suite)?,
                        Command::AblateSize { .. } => run_dataset_size_ablation(&suite)?,
                        Command::AblateTasks { .. } => run_task_subset_ablation(&suite)?,
                        _ => run_transfer_experiment(&suite)?,
                    };
                    finish_report(&report, &dir)
                }
            }
        }
    }
}

fn finish_report(report: &Report, dir: &Path) -> Result<(), Failure> {
    report.write_to(dir)?;
    print!("{}", report.table.to_text());
    println!("results written to {}", dir.display());
    Ok(())
}

fn synth(
    global: &GlobalArgs,
    spec_path: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut spec = match spec_path {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            toml::from_str::<SynthSpec>(&text)
                .map_err(|e| Failure::usage(format!("synthetic spec: {e}")))?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    let spec_text = toml::to_string(&spec).expect("synthetic spec serializes");
    let dir = match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            dir
        }
        None => {
            let hash = hex::encode(&Sha256::digest(spec_text.as_bytes())[..8]);
            create_run_dir(&global.out_root, "synth", &hash, &spec_text)?
        }
    };
    let generated = generate_records(&spec)?;
    for truth in &generated.truths {
        let rows: Vec<(&str, &DayRecord)> = generated
            .records
            .iter()
            .filter(|(n, _)| *n == truth.name)
            .map(|(n, r)| (n.as_str(), r))
            .collect();
        fs::write(
            dir.join(format!("{}.csv", truth.name)),
            write_weather_csv(rows)?,
        )?;
    }
    fs::write(dir.join("truth.toml"), truths_to_toml(&generated.truths))?;
    fs::write(dir.join("synth_spec.toml"), &spec_text)?;
    println!(
        "wrote {} cultivars to {}",
        generated.truths.len(),
        dir.display()
    );
    Ok(())
}

fn ingest(corpus: &Corpus, log: &IngestLog, dir: &Path) -> Result<(), Failure> {
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary
        .write_record(["cultivar", "seasons", "labelled_days"])
        .map_err(DataError::from)?;
    for c in &corpus.cultivars {
        let labels: usize = c.seasons.iter().map(|s| s.n_labels()).sum();
        summary
            .write_record([
                c.name.clone(),
                c.seasons.len().to_string(),
                labels.to_string(),
            ])
            .map_err(DataError::from)?;
        println!(
            "{}: {} seasons, {} labelled days",
            c.name,
            c.seasons.len(),
            labels
        );
    }
    fs::write(
        dir.join("corpus.csv"),
        summary
            .into_inner()
            .map_err(|e| Failure::data(e.to_string()))?,
    )?;

    let mut rejected = csv::Writer::from_writer(Vec::new());
    for r in &log.rejected_seasons {
        rejected.serialize(r).map_err(DataError::from)?;
    }
    fs::write(
        dir.join("rejected_seasons.csv"),
        rejected
            .into_inner()
            .map_err(|e| Failure::data(e.to_string()))?,
    )?;
    for (name, n) in &log.dropped_cultivars {
        println!("dropped {name}: {n} retained seasons");
    }
    println!(
        "{} seasons rejected; summary written to {}",
        log.rejected_seasons.len(),
        dir.display()
    );
    Ok(())
}

fn train_command(
    config: &RunConfig,
    corpus: &Corpus,
    names: &[String],
    trial: Option<usize>,
    dir: &Path,
) -> Result<(), Failure> {
    let cultivars = select_cultivars(corpus, names)?;
    if config.model.variant == Variant::Stl && cultivars.len() != 1 {
        return Err(Failure::usage(
            "a single-task model needs exactly one --cultivar",
        ));
    }
    match config.train.precision {
        Precision::F64 => train_as::<f64>(config, corpus, &cultivars, trial, dir),
        Precision::F32 => train_as::<f32>(config, corpus, &cultivars, trial, dir),
    }
}

fn train_as<S: Real>(
    config: &RunConfig,
    corpus: &Corpus,
    cultivars: &[usize],
    trial: Option<usize>,
    dir: &Path,
) -> Result<(), Failure> {
    let split = season_split(corpus, config, trial)?;
    let train: Vec<Vec<usize>> = cultivars.iter().map(|&c| split[c].0.clone()).collect();
    let dims = config.model.dims();
    let trained = fit_model::<S>(
        corpus,
        config.model.variant,
        cultivars,
        &train,
        &dims,
        &config.train,
    )?;

    let mut curve = String::from("epoch,loss\n");
    for (e, l) in trained.loss_curve.iter().enumerate() {
        writeln!(curve, "{},{l:?}", e + 1).unwrap();
    }
    fs::write(dir.join("loss_curve.csv"), curve)?;
    let ckpt = Checkpoint {
        network: trained.network,
        task_names: cultivars
            .iter()
            .map(|&c| corpus.cultivars[c].name.clone())
            .collect(),
        normalizer: Some(trained.normalizer),
    };
    let path = dir.join("model.ckpt");
    save_checkpoint(&path, &ckpt)?;
    if let Some(last) = trained.loss_curve.last() {
        println!("final training loss {last:.6}");
    }

    if trial.is_some() {
        let mut out = String::from("cultivar,rmse_lte50,n_test_labels\n");
        let normalizer = ckpt.normalizer.as_ref().expect("set above");
        for (task, &c) in cultivars.iter().enumerate() {
            let test: Vec<_> = split[c]
                .1
                .iter()
                .map(|&i| &corpus.cultivars[c].seasons[i])
                .collect();
            let errors = evaluate(&ckpt.network, normalizer, &test, task)?;
            let rmse = errors.rmse()?;
            println!("{}: test RMSE {rmse:.4}", corpus.cultivars[c].name);
            writeln!(
                out,
                "{},{rmse:?},{}",
                corpus.cultivars[c].name, errors.count
            )
            .unwrap();
        }
        fs::write(dir.join("test_rmse.csv"), out)?;
    }
    println!("checkpoint written to {}", path.display());
    Ok(())
}

fn tune(
    config: &RunConfig,
    corpus: &Corpus,
    names: &[String],
    trial: Option<usize>,
    dir: &Path,
) -> Result<(), Failure> {
    let cultivars = select_cultivars(corpus, names)?;
    let split = season_split(corpus, config, trial)?;
    let out_dir = dir.join("ferguson");
    fs::create_dir_all(&out_dir)?;
    let mut summary = String::from("cultivar,train_rmse,test_rmse\n");
    for c in cultivars {
        let cultivar = &corpus.cultivars[c];
        let series = |idx: &[usize]| -> Vec<SeasonSeries> {
            idx.iter()
                .map(|&i| SeasonSeries::from(&cultivar.seasons[i]))
                .collect()
        };
        let best = grid_search(&series(&split[c].0), &config.ferguson_grid)?;
        fs::write(
            out_dir.join(format!("{}.txt", cultivar.name)),
            format_tuned(&best.params, best.rmse),
        )?;
        let test = if split[c].1.is_empty() {
            None
        } else {
            Some(ferguson_rmse(&series(&split[c].1), &best.params)?)
        };
        let test_text = test.map(|t| format!("{t:?}")).unwrap_or_default();
        writeln!(summary, "{},{:?},{test_text}", cultivar.name, best.rmse).unwrap();
        println!(
            "{}: train RMSE {:.4}{} ({} points, {} skipped)",
            cultivar.name,
            best.rmse,
            test.map(|t| format!(", test RMSE {t:.4}"))
                .unwrap_or_default(),
            best.evaluated,
            best.skipped
        );
    }
    fs::write(dir.join("ferguson_summary.csv"), summary)?;
    println!("tuned parameters written to {}", out_dir.display());
    Ok(())
}

fn predict(
    global: &GlobalArgs,
    config: &RunConfig,
    checkpoint: &Path,
    weather: &Path,
    cultivar: &str,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let ckpt: Checkpoint<f64> = load_checkpoint(checkpoint, None)?;
    let normalizer = ckpt
        .normalizer
        .as_ref()
        .ok_or_else(|| Failure::data("checkpoint has no input normalizer"))?;
    let n_tasks = ckpt.network.spec().n_tasks;
    let task = match cultivar.parse::<usize>() {
        Ok(i) => i,
        Err(_) => ckpt
            .task_names
            .iter()
            .position(|n| n == cultivar)
            .ok_or_else(|| Failure::usage(format!("checkpoint has no task named {cultivar}")))?,
    };
    if task >= n_tasks {
        return Err(Failure::usage(format!(
            "task {task} out of range: the model has {n_tasks} tasks"
        )));
    }

    let mut groups: Vec<(String, Vec<DayRecord>)> = Vec::new();
    for (name, rec) in read_weather_file(weather)? {
        match groups.iter_mut().find(|(n, _)| *n == name) {
            Some((_, recs)) => recs.push(rec),
            None => groups.push((name, vec![rec])),
        }
    }
    let mut rows = Vec::new();
    for (name, mut recs) in groups {
        recs.sort_by_key(|r| r.date);
        for season in extract_seasons(0, &recs) {
            let prepared = prepare_season(&season, &name, &normalizer.features)?;
            let out = predict_season(&ckpt.network, normalizer, &prepared, task)?;
            for (i, label) in prepared.lte50().enumerate() {
                rows.push(PredictionRow {
                    cultivar: name.clone(),
                    season: prepared.start_year,
                    date: prepared.dates[i],
                    pred_lte10: Some(out.get(i, 0)),
                    pred_lte50: out.get(i, 1),
                    pred_lte90: Some(out.get(i, 2)),
                    label_lte50: label,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Failure::data("the weather file covers no season"));
    }
    let path = match out {
        Some(path) => path,
        None => create_run_dir(
            &global.out_root,
            "predict",
            &config.hash(),
            &config.to_toml(),
        )?
        .join("predictions.csv"),
    };
    fs::write(&path, predictions_csv(&rows)?)?;
    println!(
        "{} daily predictions written to {}",
        rows.len(),
        path.display()
    );
    Ok(())
}

fn gradcheck(
    global: &GlobalArgs,
    config: &RunConfig,
    days: usize,
    tasks: usize,
    coords: usize,
) -> Result<(), Failure> {
    if days < 4 || tasks == 0 || coords == 0 {
        return Err(Failure::usage(
            "gradcheck needs --days >= 4 and positive --tasks and --coords",
        ));
    }
    let seed = global.seed.unwrap_or(1);
    let options = GradCheckOptions {
        coords_per_block: coords,
        seed,
        ..GradCheckOptions::default()
    };
    let dims = config.model.dims();
    let input_dim = config.data.features.len();
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for variant in Variant::ALL {
        let report = check_variant(variant, &dims, input_dim, tasks, days, seed, options)?;
        let max = report.max_rel_error();
        worst = worst.max(max);
        let block = report.worst().map(|b| b.block.as_str()).unwrap_or("-");
        println!("{variant}: max relative error {max:.3e} (worst block {block})");
        if !report.passed() {
            failed.push(variant.label());
        }
    }
    println!("max relative error {worst:.3e}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numeric(format!(
            "gradient check failed for {} (tolerance {:e})",
            failed.join(", "),
            options.tolerance
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one_and_help_exits_zero() {
        assert_eq!(run(["coldhardiness", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            run(["coldhardiness", "compare", "--no-such-flag"]),
            EXIT_USAGE
        );
        assert_eq!(run(["coldhardiness", "--help"]), 0);
        for sub in [
            "synth",
            "ingest",
            "train",
            "tune-ferguson",
            "compare",
            "ablate-size",
            "ablate-tasks",
            "transfer",
            "predict",
            "gradcheck",
        ] {
            assert_eq!(run(["coldhardiness", sub, "--help"]), 0, "{sub}");
        }
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_size("ALL"), Ok(SizeSpec::All));
        assert_eq!(parse_size("5"), Ok(SizeSpec::Count(5)));
        assert!(parse_size("x").is_err());
    }
}
