//! Python bindings: corpora, trained models, the thermal-time baseline and
//! the command-line entry point.

use std::collections::HashMap;
use std::path::PathBuf;

use chcore::dataio::{
    build_corpus, read_weather_dir, Corpus, CorpusOptions, Normalizer, PreparedSeason,
};
use chcore::ferguson::{self, FergusonGrid, FergusonParams, SeasonSeries};
use chcore::harness::experiments::fit_model;
use chcore::harness::gradcheck::check_variant;
use chcore::harness::{evaluate, predict_season, ModelConfig, TrainConfig};
use chcore::models::{load_checkpoint, save_checkpoint, Checkpoint, Network, Variant};
use chcore::ndiff::GradCheckOptions;
use chcore::synthgen::{default_truth, generate_corpus, SynthSpec};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params_to_dict(p: &FergusonParams) -> HashMap<String, f64> {
    FergusonParams::KEYS
        .iter()
        .zip(p.to_array())
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn params_from_dict(d: &HashMap<String, f64>) -> PyResult<FergusonParams> {
    if let Some(k) = d
        .keys()
        .find(|k| !FergusonParams::KEYS.contains(&k.as_str()))
    {
        return Err(PyKeyError::new_err(format!("unknown parameter {k}")));
    }
    let mut v = default_truth().to_array();
    for (slot, key) in v.iter_mut().zip(FergusonParams::KEYS) {
        if let Some(x) = d.get(key) {
            *slot = *x;
        }
    }
    let p = FergusonParams::from_array(v);
    p.validate().map_err(value_err)?;
    Ok(p)
}

/// Cultivars and their prepared seasons.
#[pyclass(name = "Corpus", module = "coldhardiness", frozen)]
struct PyCorpus {
    inner: Corpus,
}

impl PyCorpus {
    fn season(&self, cultivar: &str, season: usize) -> PyResult<&PreparedSeason> {
        let id = self
            .inner
            .id_of(cultivar)
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        let seasons = &self.inner.cultivars[id].seasons;
        seasons
            .get(season)
            .ok_or_else(|| PyKeyError::new_err(format!("{cultivar} has {} seasons", seasons.len())))
    }
}

#[pymethods]
impl PyCorpus {
    /// Reads one weather CSV or a directory of them.
    #[staticmethod]
    #[pyo3(signature = (path, min_seasons = None))]
    fn load(path: PathBuf, min_seasons: Option<usize>) -> PyResult<Self> {
        let mut options = CorpusOptions::default();
        if let Some(n) = min_seasons {
            options.min_seasons = n;
        }
        let records = read_weather_dir(&path).map_err(value_err)?;
        let (inner, _) = build_corpus(records, &options).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n_cultivars = 6, seasons = vec![8], seed = 1, label_noise_sd = 0.3, perturbation = 0.15))]
    fn synthetic(
        n_cultivars: usize,
        seasons: Vec<usize>,
        seed: u64,
        label_noise_sd: f64,
        perturbation: f64,
    ) -> PyResult<Self> {
        let spec = SynthSpec {
            n_cultivars,
            seasons_per_cultivar: seasons,
            seed,
            label_noise_sd,
            perturbation,
            ..SynthSpec::default()
        };
        let generated = generate_corpus(&spec).map_err(value_err)?;
        Ok(Self {
            inner: generated.corpus,
        })
    }

    fn names(&self) -> Vec<String> {
        self.inner.names()
    }

    fn n_seasons(&self, cultivar: &str) -> PyResult<usize> {
        let id = self
            .inner
            .id_of(cultivar)
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        Ok(self.inner.cultivars[id].seasons.len())
    }

    fn mean_at(&self, cultivar: &str, season: usize) -> PyResult<Vec<f64>> {
        Ok(self.season(cultivar, season)?.mean_at.clone())
    }

    /// LTE50 labels, `None` on unobserved days.
    fn lte50(&self, cultivar: &str, season: usize) -> PyResult<Vec<Option<f64>>> {
        Ok(self.season(cultivar, season)?.lte50().collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let seasons: usize = self.inner.cultivars.iter().map(|c| c.seasons.len()).sum();
        format!("Corpus({} cultivars, {seasons} seasons)", self.inner.len())
    }
}

/// A trained network with the normalizer fitted on its training data.
#[pyclass(name = "Model", module = "coldhardiness", frozen)]
struct PyModel {
    network: Network<f64>,
    normalizer: Normalizer,
    tasks: Vec<String>,
    loss_curve: Vec<f64>,
}

impl PyModel {
    fn task_of(&self, cultivar: &str) -> PyResult<usize> {
        self.tasks
            .iter()
            .position(|t| t == cultivar)
            .ok_or_else(|| PyKeyError::new_err(format!("model was not trained on {cultivar}")))
    }
}

#[pymethods]
impl PyModel {
    /// Trains on every season of the chosen cultivars (all by default).
    #[staticmethod]
    #[pyo3(signature = (corpus, variant = "MultiH", cultivars = None, epochs = 200, seed = 0, lr = 0.001,
                        batch_size = 12, fc_dims = None, gru_hidden = None))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        corpus: &PyCorpus,
        variant: &str,
        cultivars: Option<Vec<String>>,
        epochs: usize,
        seed: u64,
        lr: f64,
        batch_size: usize,
        fc_dims: Option<[usize; 3]>,
        gru_hidden: Option<usize>,
    ) -> PyResult<Self> {
        let variant: Variant = variant.parse().map_err(value_err)?;
        let corpus = &corpus.inner;
        let names = cultivars.unwrap_or_else(|| corpus.names());
        let ids = names
            .iter()
            .map(|n| corpus.id_of(n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        if variant == Variant::Stl && ids.len() != 1 {
            return Err(PyValueError::new_err(
                "Single trains on exactly one cultivar",
            ));
        }
        let seasons: Vec<Vec<usize>> = ids
            .iter()
            .map(|&c| (0..corpus.cultivars[c].seasons.len()).collect())
            .collect();
        let mut model = ModelConfig::default();
        if let Some(d) = fc_dims {
            model.fc_dims = d;
        }
        if let Some(h) = gru_hidden {
            model.gru_hidden = h;
        }
        let config = TrainConfig {
            lr,
            batch_size,
            epochs,
            seed,
            ..TrainConfig::default()
        };
        let trained = fit_model::<f64>(corpus, variant, &ids, &seasons, &model, &config)
            .map_err(value_err)?;
        Ok(Self {
            network: trained.network,
            normalizer: trained.normalizer,
            tasks: names,
            loss_curve: trained.loss_curve,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let ckpt = load_checkpoint::<f64>(&path, None).map_err(value_err)?;
        let normalizer = ckpt
            .normalizer
            .ok_or_else(|| PyValueError::new_err("checkpoint has no normalizer"))?;
        Ok(Self {
            network: ckpt.network,
            normalizer,
            tasks: ckpt.task_names,
            loss_curve: Vec::new(),
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let ckpt = Checkpoint {
            network: self.network.clone(),
            task_names: self.tasks.clone(),
            normalizer: Some(self.normalizer.clone()),
        };
        save_checkpoint(&path, &ckpt).map_err(value_err)
    }

    /// Daily `[LTE10, LTE50, LTE90]` for one corpus season, in °C.
    fn predict(&self, corpus: &PyCorpus, cultivar: &str, season: usize) -> PyResult<Vec<[f64; 3]>> {
        let task = self.task_of(cultivar)?;
        let out = predict_season(
            &self.network,
            &self.normalizer,
            corpus.season(cultivar, season)?,
            task,
        )
        .map_err(value_err)?;
        Ok((0..out.rows())
            .map(|r| [out.get(r, 0), out.get(r, 1), out.get(r, 2)])
            .collect())
    }

    /// LTE50 RMSE over all seasons of a cultivar.
    fn rmse(&self, corpus: &PyCorpus, cultivar: &str) -> PyResult<f64> {
        let task = self.task_of(cultivar)?;
        let id = corpus
            .inner
            .id_of(cultivar)
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        let seasons: Vec<&PreparedSeason> = corpus.inner.cultivars[id].seasons.iter().collect();
        evaluate(&self.network, &self.normalizer, &seasons, task)
            .and_then(|s| s.rmse())
            .map_err(value_err)
    }

    #[getter]
    fn variant(&self) -> String {
        self.network.variant().to_string()
    }

    #[getter]
    fn tasks(&self) -> Vec<String> {
        self.tasks.clone()
    }

    #[getter]
    fn loss_curve(&self) -> Vec<f64> {
        self.loss_curve.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({}, {} tasks)",
            self.network.variant(),
            self.tasks.len()
        )
    }
}

/// Parameters used to generate synthetic corpora.
#[pyfunction]
fn truth() -> HashMap<String, f64> {
    params_to_dict(&default_truth())
}

/// Daily LTE50 of the thermal-time model; missing keys take the synthetic truth.
#[pyfunction]
fn ferguson_predict(mean_at: Vec<f64>, params: HashMap<String, f64>) -> PyResult<Vec<f64>> {
    ferguson::ferguson_predict(&mean_at, &params_from_dict(&params)?).map_err(value_err)
}

/// Grid search on every season of one cultivar. `grid` is TOML with one
/// array per parameter; omitted axes use the default grid.
#[pyfunction]
#[pyo3(signature = (corpus, cultivar, grid = None))]
fn tune_ferguson(
    corpus: &PyCorpus,
    cultivar: &str,
    grid: Option<&str>,
) -> PyResult<(HashMap<String, f64>, f64)> {
    let grid = match grid {
        Some(text) => FergusonGrid::from_toml(text).map_err(value_err)?,
        None => FergusonGrid::default(),
    };
    let id = corpus
        .inner
        .id_of(cultivar)
        .map_err(|e| PyKeyError::new_err(e.to_string()))?;
    let series: Vec<SeasonSeries> = corpus.inner.cultivars[id]
        .seasons
        .iter()
        .map(SeasonSeries::from)
        .collect();
    let best = ferguson::grid_search(&series, &grid).map_err(value_err)?;
    Ok((params_to_dict(&best.params), best.rmse))
}

/// Largest relative gradient error for a variant with the desk dimensions.
#[pyfunction]
#[pyo3(signature = (variant, seed = 1, days = 20, tasks = 4))]
fn gradcheck(variant: &str, seed: u64, days: usize, tasks: usize) -> PyResult<f64> {
    let variant: Variant = variant.parse().map_err(value_err)?;
    let report = check_variant(
        variant,
        &ModelConfig::default(),
        12,
        tasks,
        days,
        seed,
        GradCheckOptions::default(),
    )
    .map_err(value_err)?;
    Ok(report.max_rel_error())
}

/// Runs the command-line interface and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    let argv = std::iter::once("coldhardiness".to_string()).chain(args);
    chcore::cli::run(argv)
}

#[pymodule]
pub fn coldhardiness(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(truth, m)?)?;
    m.add_function(wrap_pyfunction!(ferguson_predict, m)?)?;
    m.add_function(wrap_pyfunction!(tune_ferguson, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add(
        "VARIANTS",
        Variant::ALL
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}
