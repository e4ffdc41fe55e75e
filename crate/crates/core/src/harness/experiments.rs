//! The four experiment suites: main comparison, dataset-size ablation,
//! task-subset ablation and transfer by finetuning.
//!
//! Every training run draws its seed from `(base seed, trial, tag)`, where
//! the tag names the model and, for single-task runs, the cultivar. Runs
//! that are conceptually the same in two suites (the "All" columns of the
//! ablations and the main comparison) therefore produce identical numbers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataio::{
    make_example, make_trial_splits, Corpus, DataError, Normalizer, PreparedSeason, TrialSplit,
};
use crate::ferguson::{ferguson_predict, grid_search, FergusonGrid, SeasonSeries};
use crate::models::finetune::finetune;
use crate::models::{AlphaInit, Example, FinetuneScope, ModelSpec, Network, Variant};
use crate::ndiff::Real;

use super::evaluate::{predict_season, ErrorSum};
use super::report::{PredictionDump, PredictionRow, Report, ResultRow, Table};
use super::train::{train, Precision, TrainConfig};
use super::HarnessError;

pub const FERGUSON: &str = "Ferguson";

/// Layer sizes shared by every model of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub fc_dims: [usize; 3],
    pub gru_hidden: usize,
    /// ConcatE embedding width; defaults to the input width.
    pub embed_dim: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            fc_dims: crate::models::spec::DESK_FC_DIMS,
            gru_hidden: crate::models::spec::DESK_GRU_HIDDEN,
            embed_dim: None,
        }
    }
}

impl ModelConfig {
    pub fn paper() -> Self {
        Self {
            fc_dims: crate::models::spec::PAPER_FC_DIMS,
            gru_hidden: crate::models::spec::PAPER_GRU_HIDDEN,
            embed_dim: None,
        }
    }

    pub fn spec(&self, variant: Variant, input_dim: usize, n_tasks: usize) -> ModelSpec {
        let spec = ModelSpec::new(variant, input_dim, n_tasks, self.fc_dims, self.gru_hidden);
        match (variant, self.embed_dim) {
            (Variant::ConcatE, Some(e)) => spec.with_embed_dim(e),
            _ => spec,
        }
    }
}

/// A training-set size in the dataset-size ablation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Count(usize),
    #[serde(with = "all_keyword")]
    All,
}

mod all_keyword {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("all")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s.eq_ignore_ascii_case("all") {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!(
                "expected a count or \"all\", got `{s}`"
            )))
        }
    }
}

impl SizeSpec {
    pub fn label(&self) -> String {
        match self {
            SizeSpec::Count(n) => n.to_string(),
            SizeSpec::All => "All".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub split_seed: u64,
    /// Dataset-size ablation targets; empty picks the cultivar with the
    /// most seasons.
    pub size_targets: Vec<String>,
    pub sizes: Vec<SizeSpec>,
    /// Cultivars per task subset; unset means half the corpus, rounded up.
    pub subset_size: Option<usize>,
    /// Held-out cultivars for transfer; empty means every cultivar.
    pub transfer_targets: Vec<String>,
    /// Finetuning epochs; unset reuses the training epochs.
    pub finetune_epochs: Option<usize>,
    pub finetune_scope: FinetuneScope,
    pub alpha_init: AlphaInit,
    pub dump_predictions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 3,
            split_seed: 0,
            size_targets: Vec::new(),
            sizes: vec![
                SizeSpec::Count(2),
                SizeSpec::Count(5),
                SizeSpec::Count(10),
                SizeSpec::Count(20),
                SizeSpec::All,
            ],
            subset_size: None,
            transfer_targets: Vec::new(),
            finetune_epochs: None,
            finetune_scope: FinetuneScope::NewTaskOnly,
            alpha_init: AlphaInit::Zeros,
            dump_predictions: true,
        }
    }
}

/// Inputs shared by every suite.
#[derive(Clone, Debug)]
pub struct Suite<'a> {
    pub corpus: &'a Corpus,
    pub model: &'a ModelConfig,
    pub train: &'a TrainConfig,
    pub grid: &'a FergusonGrid,
    pub experiment: &'a ExperimentConfig,
    pub config_hash: String,
}

/// Seed of one training run.
pub fn derive_seed(base: u64, trial: usize, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.update(tag.as_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

fn stl_tag(name: &str) -> String {
    format!("{}:{name}", Variant::Stl.label())
}

/// One model to train: the cultivars it sees (task id = position) and
/// the seasons of each it trains on.
#[derive(Clone, Debug)]
struct Job {
    variant: Variant,
    cultivars: Vec<usize>,
    train: Vec<Vec<usize>>,
    seed: u64,
}

/// Cultivar (corpus id) and its test seasons, evaluated under a task id.
#[derive(Clone, Debug)]
struct EvalTarget {
    cultivar: usize,
    task: usize,
    test: Vec<usize>,
}

#[derive(Clone, Debug)]
struct EvalOut {
    cultivar: usize,
    errors: ErrorSum,
    predictions: Vec<PredictionRow>,
}

/// A trained network with the scaling it was trained under.
#[derive(Clone, Debug)]
pub struct TrainedModel<S> {
    pub network: Network<S>,
    pub normalizer: Normalizer,
    pub loss_curve: Vec<f64>,
}

fn seasons_of<'c>(corpus: &'c Corpus, cultivar: usize, idx: &[usize]) -> Vec<&'c PreparedSeason> {
    idx.iter()
        .map(|&i| &corpus.cultivars[cultivar].seasons[i])
        .collect()
}

/// Trains `variant` on the given seasons of the given cultivars.
///
/// The normalizer is fitted on exactly those seasons. Task `k` of the
/// network is `cultivars[k]`.
pub fn fit_model<S: Real>(
    corpus: &Corpus,
    variant: Variant,
    cultivars: &[usize],
    train_seasons: &[Vec<usize>],
    model: &ModelConfig,
    config: &TrainConfig,
) -> Result<TrainedModel<S>, HarnessError> {
    let seasons: Vec<(usize, &PreparedSeason)> = cultivars
        .iter()
        .zip(train_seasons)
        .enumerate()
        .flat_map(|(task, (&c, idx))| {
            seasons_of(corpus, c, idx)
                .into_iter()
                .map(move |s| (task, s))
        })
        .collect();
    if seasons.is_empty() {
        return Err(HarnessError::NoTrainingData);
    }
    let refs: Vec<&PreparedSeason> = seasons.iter().map(|(_, s)| *s).collect();
    let normalizer = Normalizer::fit(&corpus.features, &refs)?;
    let data: Vec<Example<S>> = seasons
        .iter()
        .map(|(t, s)| make_example(s, &normalizer, *t))
        .collect();
    let spec = model.spec(variant, corpus.features.len(), cultivars.len());
    let mut network = Network::<S>::new(spec, config.seed)?;
    let loss_curve = train(
        &mut network,
        &data,
        &config.with_seed(config.seed.wrapping_add(1)),
    )?;
    Ok(TrainedModel {
        network,
        normalizer,
        loss_curve,
    })
}

fn evaluate_targets<S: Real>(
    corpus: &Corpus,
    trained: &TrainedModel<S>,
    targets: &[EvalTarget],
    dump: bool,
) -> Result<Vec<EvalOut>, HarnessError> {
    targets
        .iter()
        .map(|t| {
            let name = &corpus.cultivars[t.cultivar].name;
            let mut errors = ErrorSum::default();
            let mut predictions = Vec::new();
            for s in seasons_of(corpus, t.cultivar, &t.test) {
                let out = predict_season(&trained.network, &trained.normalizer, s, t.task)?;
                for (i, y) in s.lte50().enumerate() {
                    errors.add(out.get(i, 1), y);
                    if dump {
                        predictions.push(PredictionRow {
                            cultivar: name.clone(),
                            season: s.start_year,
                            date: s.dates[i],
                            pred_lte10: Some(out.get(i, 0)),
                            pred_lte50: out.get(i, 1),
                            pred_lte90: Some(out.get(i, 2)),
                            label_lte50: y,
                        });
                    }
                }
            }
            Ok(EvalOut {
                cultivar: t.cultivar,
                errors,
                predictions,
            })
        })
        .collect()
}

fn run_job_as<S: Real>(
    suite: &Suite,
    job: &Job,
    targets: &[EvalTarget],
) -> Result<Vec<EvalOut>, HarnessError> {
    let config = suite.train.with_seed(job.seed);
    let trained = fit_model::<S>(
        suite.corpus,
        job.variant,
        &job.cultivars,
        &job.train,
        suite.model,
        &config,
    )?;
    evaluate_targets(
        suite.corpus,
        &trained,
        targets,
        suite.experiment.dump_predictions,
    )
}

fn run_job(suite: &Suite, job: &Job, targets: &[EvalTarget]) -> Result<Vec<EvalOut>, HarnessError> {
    match suite.train.precision {
        Precision::F64 => run_job_as::<f64>(suite, job, targets),
        Precision::F32 => run_job_as::<f32>(suite, job, targets),
    }
}

fn run_ferguson(
    suite: &Suite,
    cultivar: usize,
    train: &[usize],
    test: &[usize],
) -> Result<EvalOut, HarnessError> {
    let corpus = suite.corpus;
    let series: Vec<SeasonSeries> = seasons_of(corpus, cultivar, train)
        .into_iter()
        .map(SeasonSeries::from)
        .collect();
    let best = grid_search(&series, suite.grid)?;
    let name = &corpus.cultivars[cultivar].name;
    let mut errors = ErrorSum::default();
    let mut predictions = Vec::new();
    for s in seasons_of(corpus, cultivar, test) {
        let pred = ferguson_predict(&s.mean_at, &best.params)?;
        for (i, y) in s.lte50().enumerate() {
            errors.add(pred[i], y);
            if suite.experiment.dump_predictions {
                predictions.push(PredictionRow {
                    cultivar: name.clone(),
                    season: s.start_year,
                    date: s.dates[i],
                    pred_lte10: None,
                    pred_lte50: pred[i],
                    pred_lte90: None,
                    label_lte50: y,
                });
            }
        }
    }
    Ok(EvalOut {
        cultivar,
        errors,
        predictions,
    })
}

/// A unit of parallel work inside one suite.
#[derive(Clone, Debug)]
enum Work {
    Model {
        trial: usize,
        label: String,
        job: Job,
        targets: Vec<EvalTarget>,
    },
    Ferguson {
        trial: usize,
        cultivar: usize,
        train: Vec<usize>,
        test: Vec<usize>,
    },
}

/// Results of one unit, keyed for deterministic assembly.
#[derive(Clone, Debug)]
struct Outcome {
    trial: usize,
    label: String,
    seed: u64,
    evals: Vec<EvalOut>,
}

fn execute(suite: &Suite, work: Vec<Work>) -> Result<Vec<Outcome>, HarnessError> {
    work.into_par_iter()
        .map(|w| match w {
            Work::Model {
                trial,
                label,
                job,
                targets,
            } => {
                log::info!("trial {trial}: training {label}");
                Ok(Outcome {
                    trial,
                    label,
                    seed: job.seed,
                    evals: run_job(suite, &job, &targets)?,
                })
            }
            Work::Ferguson {
                trial,
                cultivar,
                train,
                test,
            } => Ok(Outcome {
                trial,
                label: FERGUSON.into(),
                seed: 0,
                evals: vec![run_ferguson(suite, cultivar, &train, &test)?],
            }),
        })
        .collect()
}

/// Per-(label, cultivar) RMSE of each trial, plus long-form rows and dumps.
struct Collected {
    results: Vec<ResultRow>,
    predictions: Vec<PredictionDump>,
}

impl Collected {
    fn new(suite: &Suite, experiment: &str, outcomes: &[Outcome]) -> Result<Self, HarnessError> {
        let mut results = Vec::new();
        let mut predictions = Vec::new();
        for o in outcomes {
            let mut rows = Vec::new();
            for e in &o.evals {
                results.push(ResultRow {
                    experiment: experiment.into(),
                    trial: o.trial,
                    cultivar: suite.corpus.cultivars[e.cultivar].name.clone(),
                    model: o.label.clone(),
                    rmse_lte50: e.errors.rmse()?,
                    n_test_labels: e.errors.count,
                    seed: o.seed,
                    config_hash: suite.config_hash.clone(),
                });
                rows.extend(e.predictions.iter().cloned());
            }
            if suite.experiment.dump_predictions {
                // Per-cultivar jobs (Single, Ferguson) share a label.
                let name = dump_name(o.trial, &o.label);
                match predictions
                    .iter_mut()
                    .find(|d: &&mut PredictionDump| d.name == name)
                {
                    Some(d) => d.rows.extend(rows),
                    None => predictions.push(PredictionDump { name, rows }),
                }
            }
        }
        Ok(Self {
            results,
            predictions,
        })
    }

    /// Mean over trials of the RMSE of `model` on `cultivar`.
    fn mean(&self, model: &str, cultivar: &str) -> Option<f64> {
        let v: Vec<f64> = self
            .results
            .iter()
            .filter(|r| r.model == model && r.cultivar == cultivar)
            .map(|r| r.rmse_lte50)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    fn trial_value(&self, model: &str, cultivar: &str, trial: usize) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.model == model && r.cultivar == cultivar && r.trial == trial)
            .map(|r| r.rmse_lte50)
    }

    fn into_report(self, experiment: &str, table: Table) -> Report {
        Report {
            experiment: experiment.into(),
            table,
            results: self.results,
            predictions: self.predictions,
        }
    }
}

fn dump_name(trial: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("trial{trial}_{clean}")
}

fn splits(suite: &Suite) -> Result<Vec<TrialSplit>, HarnessError> {
    if suite.experiment.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    Ok(make_trial_splits(
        suite.corpus,
        suite.experiment.trials,
        suite.experiment.split_seed,
    )?)
}

fn multi_task_work(suite: &Suite, split: &TrialSplit, variant: Variant) -> Work {
    let all: Vec<usize> = (0..suite.corpus.len()).collect();
    Work::Model {
        trial: split.trial_index,
        label: variant.label().into(),
        job: Job {
            variant,
            cultivars: all.clone(),
            train: split.cultivars.iter().map(|c| c.train.clone()).collect(),
            seed: derive_seed(suite.train.seed, split.trial_index, variant.label()),
        },
        targets: all
            .iter()
            .map(|&c| EvalTarget {
                cultivar: c,
                task: c,
                test: split.cultivars[c].test.clone(),
            })
            .collect(),
    }
}

fn single_task_work(suite: &Suite, split: &TrialSplit, cultivar: usize) -> Work {
    let name = &suite.corpus.cultivars[cultivar].name;
    Work::Model {
        trial: split.trial_index,
        label: Variant::Stl.label().into(),
        job: Job {
            variant: Variant::Stl,
            cultivars: vec![cultivar],
            train: vec![split.cultivars[cultivar].train.clone()],
            seed: derive_seed(suite.train.seed, split.trial_index, &stl_tag(name)),
        },
        targets: vec![EvalTarget {
            cultivar,
            task: 0,
            test: split.cultivars[cultivar].test.clone(),
        }],
    }
}

/// Every model variant and the baseline, per cultivar, averaged over trials.
pub fn run_main_comparison(suite: &Suite) -> Result<Report, HarnessError> {
    const NAME: &str = "compare";
    if suite.corpus.len() < 2 {
        return Err(HarnessError::Config(
            "the comparison needs at least 2 cultivars".into(),
        ));
    }
    let mut work = Vec::new();
    for split in splits(suite)? {
        for v in Variant::MULTI_TASK {
            work.push(multi_task_work(suite, &split, v));
        }
        for c in 0..suite.corpus.len() {
            work.push(single_task_work(suite, &split, c));
            work.push(Work::Ferguson {
                trial: split.trial_index,
                cultivar: c,
                train: split.cultivars[c].train.clone(),
                test: split.cultivars[c].test.clone(),
            });
        }
    }
    let collected = Collected::new(suite, NAME, &execute(suite, work)?)?;
    let mut columns: Vec<String> = Variant::ALL.iter().map(|v| v.label().to_string()).collect();
    columns.push(FERGUSON.into());
    let mut table = Table::new(columns.clone());
    for c in &suite.corpus.cultivars {
        table.push(
            c.name.clone(),
            columns.iter().map(|m| collected.mean(m, &c.name)).collect(),
        );
    }
    Ok(collected.into_report(NAME, table))
}

fn size_targets(suite: &Suite) -> Result<Vec<usize>, HarnessError> {
    let corpus = suite.corpus;
    let max_count = suite
        .experiment
        .sizes
        .iter()
        .filter_map(|s| match s {
            SizeSpec::Count(n) => Some(*n),
            SizeSpec::All => None,
        })
        .max()
        .unwrap_or(0);
    let targets = if suite.experiment.size_targets.is_empty() {
        let best = (0..corpus.len())
            .max_by(|&a, &b| {
                corpus.cultivars[a]
                    .seasons
                    .len()
                    .cmp(&corpus.cultivars[b].seasons.len())
                    .then(b.cmp(&a))
            })
            .ok_or_else(|| HarnessError::Config("empty corpus".into()))?;
        vec![best]
    } else {
        suite
            .experiment
            .size_targets
            .iter()
            .map(|n| corpus.id_of(n))
            .collect::<Result<_, _>>()?
    };
    for &t in &targets {
        let c = &corpus.cultivars[t];
        if c.seasons.len() < max_count + 2 {
            return Err(DataError::InsufficientSeasons {
                cultivar: c.name.clone(),
                found: c.seasons.len(),
                needed: max_count + 2,
            }
            .into());
        }
    }
    Ok(targets)
}

/// Training seasons for each size: a seeded prefix of one shuffle of the
/// trial's train list, so smaller sets are contained in larger ones.
/// "All" is the train list itself.
pub fn nested_subsets(train: &[usize], sizes: &[SizeSpec], seed: u64) -> Vec<Vec<usize>> {
    let mut perm = train.to_vec();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    sizes
        .iter()
        .map(|s| match s {
            SizeSpec::All => train.to_vec(),
            SizeSpec::Count(n) => {
                let mut v = perm[..(*n).min(perm.len())].to_vec();
                v.sort_unstable();
                v
            }
        })
        .collect()
}

/// MultiH and STL trained on growing slices of one cultivar's seasons.
pub fn run_dataset_size_ablation(suite: &Suite) -> Result<Report, HarnessError> {
    const NAME: &str = "ablate-size";
    let targets = size_targets(suite)?;
    let sizes = &suite.experiment.sizes;
    if sizes.is_empty() {
        return Err(HarnessError::Config("no dataset sizes given".into()));
    }
    let corpus = suite.corpus;
    let mut work = Vec::new();
    for split in splits(suite)? {
        let k = split.trial_index;
        for &t in &targets {
            let name = &corpus.cultivars[t].name;
            let subsets = nested_subsets(
                &split.cultivars[t].train,
                sizes,
                derive_seed(suite.experiment.split_seed, k, &format!("sizes:{name}")),
            );
            for (size, subset) in sizes.iter().zip(subsets) {
                let target = EvalTarget {
                    cultivar: t,
                    task: t,
                    test: split.cultivars[t].test.clone(),
                };
                let mut train: Vec<Vec<usize>> =
                    split.cultivars.iter().map(|c| c.train.clone()).collect();
                train[t] = subset.clone();
                work.push(Work::Model {
                    trial: k,
                    label: format!("{name} (MTL)@{}", size.label()),
                    job: Job {
                        variant: Variant::MultiH,
                        cultivars: (0..corpus.len()).collect(),
                        train,
                        seed: derive_seed(suite.train.seed, k, Variant::MultiH.label()),
                    },
                    targets: vec![target.clone()],
                });
                work.push(Work::Model {
                    trial: k,
                    label: format!("{name} (STL)@{}", size.label()),
                    job: Job {
                        variant: Variant::Stl,
                        cultivars: vec![t],
                        train: vec![subset],
                        seed: derive_seed(suite.train.seed, k, &stl_tag(name)),
                    },
                    targets: vec![EvalTarget { task: 0, ..target }],
                });
            }
        }
    }
    let collected = Collected::new(suite, NAME, &execute(suite, work)?)?;
    let columns: Vec<String> = sizes.iter().map(SizeSpec::label).collect();
    let mut table = Table::new(columns.clone());
    for &t in &targets {
        let name = &corpus.cultivars[t].name;
        for kind in ["MTL", "STL"] {
            let row = format!("{name} ({kind})");
            let cells = columns
                .iter()
                .map(|c| collected.mean(&format!("{row}@{c}"), name))
                .collect();
            table.push(row, cells);
        }
    }
    Ok(collected.into_report(NAME, table))
}

/// The High, Low and Mix subsets of `k` cultivars, each in id order.
///
/// Cultivars are ranked by season count (most first, ties by id); Mix
/// takes the top `⌈k/2⌉` and the bottom `⌊k/2⌋`.
pub fn task_subsets(corpus: &Corpus, k: usize) -> Result<[Vec<usize>; 3], HarnessError> {
    let c = corpus.len();
    if k == 0 || k > c {
        return Err(HarnessError::Config(format!(
            "subset size {k} is not in 1..={c}"
        )));
    }
    let ranked = ranked_by_seasons(corpus);
    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    let high = sorted(ranked[..k].to_vec());
    let low = sorted(ranked[c - k..].to_vec());
    let top = k.div_ceil(2);
    let mix = sorted(
        ranked[..top]
            .iter()
            .chain(&ranked[c - (k - top)..])
            .copied()
            .collect(),
    );
    Ok([high, low, mix])
}

fn ranked_by_seasons(corpus: &Corpus) -> Vec<usize> {
    let mut ranked: Vec<usize> = (0..corpus.len()).collect();
    ranked.sort_by(|&a, &b| {
        corpus.cultivars[b]
            .seasons
            .len()
            .cmp(&corpus.cultivars[a].seasons.len())
            .then(a.cmp(&b))
    });
    ranked
}

pub const SUBSET_COLUMNS: [&str; 5] = ["High", "Low", "Mix", "All", "Single"];

/// MultiH trained on subsets of the cultivars.
pub fn run_task_subset_ablation(suite: &Suite) -> Result<Report, HarnessError> {
    const NAME: &str = "ablate-tasks";
    let corpus = suite.corpus;
    let k = suite
        .experiment
        .subset_size
        .unwrap_or(corpus.len().div_ceil(2));
    let [high, low, mix] = task_subsets(corpus, k)?;
    let subsets = [
        ("High", high),
        ("Low", low),
        ("Mix", mix),
        ("All", (0..corpus.len()).collect()),
    ];
    let mut work = Vec::new();
    for split in splits(suite)? {
        let t = split.trial_index;
        for (label, ids) in &subsets {
            work.push(Work::Model {
                trial: t,
                label: (*label).into(),
                job: Job {
                    variant: Variant::MultiH,
                    cultivars: ids.clone(),
                    train: ids
                        .iter()
                        .map(|&c| split.cultivars[c].train.clone())
                        .collect(),
                    seed: derive_seed(suite.train.seed, t, Variant::MultiH.label()),
                },
                targets: ids
                    .iter()
                    .enumerate()
                    .map(|(task, &c)| EvalTarget {
                        cultivar: c,
                        task,
                        test: split.cultivars[c].test.clone(),
                    })
                    .collect(),
            });
        }
        for c in 0..corpus.len() {
            work.push(single_task_work(suite, &split, c));
        }
    }
    let collected = Collected::new(suite, NAME, &execute(suite, work)?)?;
    let columns: Vec<String> = SUBSET_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut table = Table::new(columns.clone());
    for c in ranked_by_seasons(corpus) {
        let name = &corpus.cultivars[c].name;
        let cells = columns
            .iter()
            .map(|col| match col.as_str() {
                "Single" => collected.mean(Variant::Stl.label(), name),
                _ => collected.mean(col, name),
            })
            .collect();
        table.push(name.clone(), cells);
    }
    Ok(collected.into_report(NAME, table))
}

/// Variants in transfer-table column order.
pub const TRANSFER_VARIANTS: [Variant; 4] = [
    Variant::ConcatE,
    Variant::MultE,
    Variant::AddE,
    Variant::MultiH,
];

pub fn ft_label(v: Variant) -> String {
    format!("{} FT", v.label())
}

fn transfer_as<S: Real>(
    suite: &Suite,
    split: &TrialSplit,
    variant: Variant,
    target: usize,
) -> Result<(u64, EvalOut), HarnessError> {
    let corpus = suite.corpus;
    let trial = split.trial_index;
    let name = &corpus.cultivars[target].name;
    let others: Vec<usize> = (0..corpus.len()).filter(|&c| c != target).collect();
    let seed = derive_seed(
        suite.train.seed,
        trial,
        &format!("{}-without:{name}", variant.label()),
    );
    let trained = fit_model::<S>(
        corpus,
        variant,
        &others,
        &others
            .iter()
            .map(|&c| split.cultivars[c].train.clone())
            .collect::<Vec<_>>(),
        suite.model,
        &suite.train.with_seed(seed),
    )?;
    let data: Vec<Example<S>> = seasons_of(corpus, target, &split.cultivars[target].train)
        .into_iter()
        .map(|s| make_example(s, &trained.normalizer, 0))
        .collect();
    let ft_config = TrainConfig {
        epochs: suite
            .experiment
            .finetune_epochs
            .unwrap_or(suite.train.epochs),
        seed: derive_seed(
            suite.train.seed,
            trial,
            &format!("{}-finetune:{name}", variant.label()),
        ),
        ..suite.train.clone()
    };
    let tuned = finetune(
        &trained.network,
        &data,
        &ft_config,
        suite.experiment.finetune_scope,
        suite.experiment.alpha_init,
    )?;
    let model = TrainedModel {
        network: tuned.network,
        normalizer: trained.normalizer,
        loss_curve: tuned.loss_curve,
    };
    let eval = EvalTarget {
        cultivar: target,
        task: tuned.task,
        test: split.cultivars[target].test.clone(),
    };
    let out = evaluate_targets(corpus, &model, &[eval], suite.experiment.dump_predictions)?;
    Ok((seed, out.into_iter().next().expect("one target")))
}

/// Held-out cultivars learned by finetuning, compared with multi-task
/// training that saw them. Cells are `MTL RMSE − finetuned RMSE`, so a
/// positive value means finetuning did better.
pub fn run_transfer_experiment(suite: &Suite) -> Result<Report, HarnessError> {
    const NAME: &str = "transfer";
    let corpus = suite.corpus;
    if corpus.len() < 3 {
        return Err(HarnessError::Config(
            "transfer needs at least 3 cultivars".into(),
        ));
    }
    let targets: Vec<usize> = if suite.experiment.transfer_targets.is_empty() {
        (0..corpus.len()).collect()
    } else {
        suite
            .experiment
            .transfer_targets
            .iter()
            .map(|n| corpus.id_of(n))
            .collect::<Result<_, _>>()?
    };
    let all_splits = splits(suite)?;

    let reference: Vec<Work> = all_splits
        .iter()
        .flat_map(|s| TRANSFER_VARIANTS.iter().map(move |&v| (s, v)))
        .map(|(s, v)| multi_task_work(suite, s, v))
        .collect();
    let mut outcomes = execute(suite, reference)?;

    let mut ft_jobs: Vec<(&TrialSplit, Variant, usize)> = Vec::new();
    for s in &all_splits {
        for v in TRANSFER_VARIANTS {
            ft_jobs.extend(targets.iter().map(|&t| (s, v, t)));
        }
    }
    let tuned: Vec<Outcome> = ft_jobs
        .into_par_iter()
        .map(|(split, v, t)| {
            log::info!(
                "trial {}: finetuning {} on {}",
                split.trial_index,
                v,
                corpus.cultivars[t].name
            );
            let (seed, eval) = match suite.train.precision {
                Precision::F64 => transfer_as::<f64>(suite, split, v, t)?,
                Precision::F32 => transfer_as::<f32>(suite, split, v, t)?,
            };
            Ok(Outcome {
                trial: split.trial_index,
                label: ft_label(v),
                seed,
                evals: vec![eval],
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    outcomes.extend(tuned);

    let collected = Collected::new(suite, NAME, &outcomes)?;
    let columns: Vec<String> = TRANSFER_VARIANTS.iter().map(|&v| ft_label(v)).collect();
    let mut table = Table::new(columns.clone());
    let mut per_column: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for &t in &targets {
        let name = &corpus.cultivars[t].name;
        let cells: Vec<Option<f64>> = TRANSFER_VARIANTS
            .iter()
            .map(|&v| {
                let deltas: Vec<f64> = (0..all_splits.len())
                    .filter_map(|k| {
                        Some(
                            collected.trial_value(v.label(), name, k)?
                                - collected.trial_value(&ft_label(v), name, k)?,
                        )
                    })
                    .collect();
                (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64)
            })
            .collect();
        for (acc, c) in per_column.iter_mut().zip(&cells) {
            acc.extend(c.iter());
        }
        table.push(name.clone(), cells);
    }
    table.push("Median", per_column.iter().map(|v| median(v)).collect());
    table.push("Mean", per_column.iter().map(|v| mean(v)).collect());
    Ok(collected.into_report(NAME, table))
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    })
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}
