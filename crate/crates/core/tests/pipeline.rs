use std::collections::BTreeMap;
use std::fs;

use coldhardiness::cli;
use coldhardiness::dataio::{build_corpus, parse_weather_csv, write_weather_csv, CorpusOptions};
use coldhardiness::ferguson::FergusonGrid;
use coldhardiness::harness::{
    run_main_comparison, run_task_subset_ablation, ExperimentConfig, ModelConfig, Report, Suite,
    TrainConfig,
};
use coldhardiness::synthgen::{default_truth, generate_corpus, SynthSpec};

fn tiny_spec() -> SynthSpec {
    SynthSpec {
        n_cultivars: 4,
        seasons_per_cultivar: vec![4, 3, 3, 5],
        seed: 12,
        ..SynthSpec::default()
    }
}

fn tiny_dims() -> ModelConfig {
    ModelConfig {
        fc_dims: [6, 6, 6],
        gru_hidden: 5,
        embed_dim: None,
    }
}

fn run_suite(
    jobs: usize,
    f: fn(&Suite) -> Result<Report, coldhardiness::harness::HarnessError>,
) -> Report {
    let corpus = generate_corpus(&tiny_spec()).unwrap().corpus;
    let model = tiny_dims();
    let train = TrainConfig {
        epochs: 2,
        ..TrainConfig::desk()
    };
    let grid = FergusonGrid {
        t_th: vec![6.0, 7.0],
        ..FergusonGrid::single(&default_truth())
    };
    let experiment = ExperimentConfig {
        trials: 2,
        ..ExperimentConfig::default()
    };
    let suite = Suite {
        corpus: &corpus,
        model: &model,
        train: &train,
        grid: &grid,
        experiment: &experiment,
        config_hash: "test".into(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .unwrap();
    pool.install(|| f(&suite)).unwrap()
}

#[test]
fn weather_csv_round_trip() {
    let generated = generate_corpus(&tiny_spec()).unwrap();
    let records: Vec<_> = generated
        .records
        .iter()
        .map(|(c, d)| (c.as_str(), d))
        .collect();
    let bytes = write_weather_csv(records).unwrap();
    let parsed = parse_weather_csv(&bytes, "unused").unwrap();
    assert_eq!(parsed, generated.records);

    let (corpus, log) = build_corpus(parsed, &CorpusOptions::default()).unwrap();
    assert_eq!(corpus, generated.corpus);
    assert_eq!(log, generated.log);
}

#[test]
fn reported_rmse_matches_prediction_dumps() {
    let report = run_suite(2, run_main_comparison);
    assert!(!report.predictions.is_empty());
    let dumps: BTreeMap<&str, _> = report
        .predictions
        .iter()
        .map(|d| (d.name.as_str(), &d.rows))
        .collect();
    for r in &report.results {
        let label: String = r
            .model
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let rows = dumps[format!("trial{}_{label}", r.trial).as_str()];
        let (mut sum, mut n) = (0.0, 0);
        for row in rows.iter().filter(|row| row.cultivar == r.cultivar) {
            if let Some(y) = row.label_lte50 {
                sum += (row.pred_lte50 - y).powi(2);
                n += 1;
            }
        }
        assert_eq!(n, r.n_test_labels, "{} {}", r.model, r.cultivar);
        let recomputed = (sum / n as f64).sqrt();
        assert!(
            (recomputed - r.rmse_lte50).abs() < 1e-9,
            "{} {}: {recomputed} vs {}",
            r.model,
            r.cultivar,
            r.rmse_lte50
        );
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    for f in [run_main_comparison, run_task_subset_ablation] {
        let one = run_suite(1, f);
        let three = run_suite(3, f);
        assert_eq!(one, three);
        assert_eq!(one.table.to_csv().unwrap(), three.table.to_csv().unwrap());
    }
}

#[test]
fn trial_seeds_differ_but_splits_are_shared() {
    let report = run_suite(1, run_main_comparison);
    for r in &report.results {
        let first = report
            .results
            .iter()
            .find(|o| o.trial == r.trial && o.cultivar == r.cultivar)
            .unwrap();
        assert_eq!(
            first.n_test_labels, r.n_test_labels,
            "variants see the same test seasons"
        );
    }
    let seeds: std::collections::BTreeSet<u64> = report
        .results
        .iter()
        .filter(|r| r.model == "MultiH")
        .map(|r| r.seed)
        .collect();
    assert_eq!(seeds.len(), 2);
}

fn cli(args: &[&str]) -> i32 {
    cli::run(std::iter::once("coldhardiness").chain(args.iter().copied()))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(cli(&["train", "--bogus-flag"]), 1);
    assert_eq!(cli(&["train", "--out-root", root]), 1, "no input given");
    assert_eq!(
        cli(&[
            "ingest",
            "--input",
            &format!("{root}/missing"),
            "--out-root",
            root
        ]),
        2
    );

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "DATE,MIN_AT\nnot-a-date,1\n").unwrap();
    assert_eq!(
        cli(&[
            "ingest",
            "--input",
            bad.to_str().unwrap(),
            "--out-root",
            root
        ]),
        2
    );

    let config = dir.path().join("bad.toml");
    fs::write(&config, "[train]\nepochz = 3\n").unwrap();
    assert_eq!(
        cli(&[
            "ingest",
            "--config",
            config.to_str().unwrap(),
            "--out-root",
            root
        ]),
        1
    );
}

#[test]
fn cli_run_directory_holds_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "n_cultivars = 2\nseasons_per_cultivar = [3]\n").unwrap();
    assert_eq!(
        cli(&[
            "synth",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            data.to_str().unwrap()
        ]),
        0
    );
    let out = dir.path().join("runs");
    let args = [
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--out-root",
        out.to_str().unwrap(),
        "--epochs",
        "7",
    ];
    assert_eq!(cli(&args), 0);
    assert_eq!(cli(&args), 0);
    let mut runs: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    runs.sort();
    assert_eq!(runs.len(), 2, "second run gets its own directory");
    let text = fs::read_to_string(runs[0].join("config.toml")).unwrap();
    let config = coldhardiness::config::RunConfig::from_toml(&text).unwrap();
    assert_eq!(config.train.epochs, 7);
    assert!(runs[0].join("corpus.csv").exists());
    assert!(runs[0].join("rejected_seasons.csv").exists());
}
