//! Acceptance criteria, one result line each.
//!
//! Runs without the libtest harness so that every criterion reports even
//! when an earlier one fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 6 7`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use coldhardiness::cli;
use coldhardiness::dataio::{
    extract_seasons, filter_seasons, make_example, make_trial_splits, season_length, DayRecord,
    Normalizer, PreparedSeason, Season, SeasonRatios, WeatherColumn,
};
use coldhardiness::ferguson::{
    evaluate_grid, grid_search, rmse, FergusonGrid, FergusonParams, SeasonSeries,
};
use coldhardiness::harness::experiments::{derive_seed, fit_model};
use coldhardiness::harness::gradcheck::check_variant;
use coldhardiness::harness::{evaluate, train, ModelConfig, TrainConfig};
use coldhardiness::models::{batch_loss_and_grad, Example, ModelSpec, Network, Variant};
use coldhardiness::ndiff::{GradCheckOptions, Matrix, Parameters};
use coldhardiness::synthgen::{default_truth, generate_corpus, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn desk(variant: Variant, n_tasks: usize) -> ModelSpec {
    ModelSpec::desk(variant, 12, n_tasks)
}

fn random_inputs(rows: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    Matrix::from_fn(rows, 12, |_, _| rng.gen_range(-2.0..2.0))
}

fn gradient_correctness() -> Outcome {
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for variant in Variant::ALL {
        let report = check_variant(
            variant,
            &ModelConfig::default(),
            12,
            4,
            20,
            1,
            GradCheckOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(report.max_rel_error());
        if !report.passed() {
            lines.push(format!("{variant} failed in {:?}", report.failing_blocks()));
        }
    }
    ensure(
        lines.is_empty() && worst < 1e-4,
        format!(
            "max relative error {worst:.2e} over 5 variants{}",
            lines.iter().map(|l| format!("; {l}")).collect::<String>()
        ),
    )
}

fn mask_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for variant in Variant::ALL {
        let net = Network::<f64>::new(desk(variant, 3), 11).map_err(|e| e.to_string())?;
        let n_tasks = net.spec().n_tasks;
        let batch: Vec<Example<f64>> = (0..3)
            .map(|b| {
                let t = 40 - 5 * b;
                Example {
                    features: random_inputs(t, &mut rng),
                    targets: Matrix::from_fn(t, 3, |_, _| rng.gen_range(-25.0..-3.0)),
                    mask: (0..t * 3).map(|_| rng.gen_bool(0.3)).collect(),
                    task: b % n_tasks,
                }
            })
            .collect();
        let refs: Vec<&Example<f64>> = batch.iter().collect();
        let (loss, grad) = batch_loss_and_grad(&net, &refs, false).map_err(|e| e.to_string())?;

        let mut perturbed = batch.clone();
        for ex in &mut perturbed {
            for (i, v) in ex.targets.as_mut_slice().iter_mut().enumerate() {
                if !ex.mask[i] {
                    *v = if i % 2 == 0 { 1e6 } else { f64::NAN };
                }
            }
        }
        let refs: Vec<&Example<f64>> = perturbed.iter().collect();
        let (loss2, grad2) = batch_loss_and_grad(&net, &refs, false).map_err(|e| e.to_string())?;
        if loss.to_bits() != loss2.to_bits() {
            return Err(format!("{variant}: loss changed"));
        }
        for ((name, a), (_, b)) in grad.blocks().into_iter().zip(grad2.blocks()) {
            let same = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            if !same {
                return Err(format!("{variant}: gradient of {name} changed"));
            }
        }
    }
    Ok("loss and every gradient block bitwise unchanged for 5 variants".into())
}

fn causality() -> Outcome {
    let days = 60;
    for variant in Variant::ALL {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let net = Network::<f64>::new(desk(variant, 3), seed).map_err(|e| e.to_string())?;
            let task = (seed as usize) % net.spec().n_tasks;
            let x = random_inputs(days, &mut rng);
            let t = rng.gen_range(0..days - 1);
            let mut y = x.clone();
            for r in t + 1..days {
                for v in y.row_mut(r) {
                    *v = rng.gen_range(-5.0..5.0);
                }
            }
            let a = net.predict(&x, task).map_err(|e| e.to_string())?;
            let b = net.predict(&y, task).map_err(|e| e.to_string())?;
            let prefix = |m: &Matrix<f64>| {
                m.as_slice()[..(t + 1) * 3]
                    .iter()
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>()
            };
            if prefix(&a) != prefix(&b) {
                return Err(format!(
                    "{variant} seed {seed}: day {t} prediction depends on later days"
                ));
            }
            if a.as_slice()[(t + 1) * 3..] == b.as_slice()[(t + 1) * 3..] {
                return Err(format!(
                    "{variant} seed {seed}: later days ignored the perturbation"
                ));
            }
        }
    }
    Ok("prefix predictions bitwise invariant for 5 variants x 10 seeds".into())
}

fn architectural_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_inputs(80, &mut rng);
    let data: Vec<Example<f64>> = (0..3)
        .map(|k| Example {
            features: random_inputs(50 + 5 * k, &mut rng),
            targets: Matrix::from_fn(50 + 5 * k, 3, |_, _| rng.gen_range(-20.0..-5.0)),
            mask: (0..(50 + 5 * k) * 3).map(|i| i % 5 == 0).collect(),
            task: 0,
        })
        .collect();
    let config = TrainConfig {
        epochs: 4,
        batch_size: 2,
        seed: 9,
        ..TrainConfig::default()
    };
    let e = |err: coldhardiness::models::ModelError| err.to_string();

    let mut stl = Network::<f64>::new(desk(Variant::Stl, 1), 21).map_err(e)?;
    let mut multi = Network::<f64>::new(desk(Variant::MultiH, 1), 21).map_err(e)?;
    if stl.predict(&x, 0).map_err(e)? != multi.predict(&x, 0).map_err(e)? {
        return Err("STL and MultiH(C=1) differ at initialization".into());
    }
    let la = train(&mut stl, &data, &config).map_err(|e| e.to_string())?;
    let lb = train(&mut multi, &data, &config).map_err(|e| e.to_string())?;
    let trained_same = la == lb
        && stl
            .blocks()
            .iter()
            .zip(multi.blocks())
            .all(|((_, a), (_, b))| *a == b)
        && stl.predict(&x, 0).map_err(e)? == multi.predict(&x, 0).map_err(e)?;
    if !trained_same {
        return Err("STL and MultiH(C=1) diverge during training".into());
    }

    let reference = Network::<f64>::new(desk(Variant::Stl, 1), 33)
        .map_err(e)?
        .predict(&x, 0)
        .map_err(e)?;
    for (variant, fill) in [(Variant::AddE, 0.0), (Variant::MultE, 1.0)] {
        let mut net = Network::<f64>::new(desk(variant, 4), 33).map_err(e)?;
        net.embedding
            .as_mut()
            .expect("embedding")
            .row_mut(2)
            .fill(fill);
        if net.predict(&x, 2).map_err(e)? != reference {
            return Err(format!("{variant} with identity row differs from STL"));
        }
    }
    Ok("STL = MultiH(C=1) before and after training; AddE(0 row) = MultE(1 row) = STL".into())
}

fn synth(spec: SynthSpec) -> Result<coldhardiness::synthgen::SynthCorpus, String> {
    generate_corpus(&spec).map_err(|e| e.to_string())
}

fn overfit_oracle() -> Outcome {
    let generated = synth(SynthSpec {
        n_cultivars: 1,
        seasons_per_cultivar: vec![3],
        perturbation: 0.0,
        label_noise_sd: 0.0,
        ..SynthSpec::default()
    })?;
    let season = &generated.corpus.cultivars[0].seasons[0];
    let normalizer =
        Normalizer::fit(&generated.corpus.features, &[season]).map_err(|e| e.to_string())?;
    let data = vec![make_example::<f64>(season, &normalizer, 0)];
    let mut net = Network::<f64>::new(desk(Variant::Stl, 1), 5).map_err(|e| e.to_string())?;
    let config = TrainConfig {
        epochs: 2000,
        batch_size: 1,
        seed: 5,
        ..TrainConfig::default()
    };
    train(&mut net, &data, &config).map_err(|e| e.to_string())?;
    let err = evaluate(&net, &normalizer, &[season], 0)
        .and_then(|s| s.rmse())
        .map_err(|e| e.to_string())?;
    ensure(
        err < 0.2,
        format!("train lte50 RMSE {err:.4} after 2000 steps (< 0.2)"),
    )
}

/// Three values per axis centred on the planted value.
fn grid_around(p: &FergusonParams) -> FergusonGrid {
    let around = |v: f64, step: f64| vec![v - step, v, v + step];
    let scaled = |v: f64, f: f64| vec![v / f, v, v * f];
    FergusonGrid {
        t_th: around(p.t_th, 1.5),
        k_a_endo: scaled(p.k_a_endo, 1.5),
        k_a_eco: scaled(p.k_a_eco, 1.5),
        k_d_endo: scaled(p.k_d_endo, 1.5),
        k_d_eco: scaled(p.k_d_eco, 1.5),
        h_min: around(p.h_min, 2.0),
        h_max: around(p.h_max, 0.5),
        c_star: around(p.c_star, 100.0),
        theta: around(p.theta, 0.5),
        h_init: None,
    }
}

fn ferguson_recovery() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let truth = default_truth();
        let series = |noise: f64, seasons: usize| -> Result<Vec<SeasonSeries>, String> {
            let g = synth(SynthSpec {
                n_cultivars: 1,
                seasons_per_cultivar: vec![seasons],
                perturbation: 0.0,
                label_noise_sd: noise,
                seed: 3,
                ..SynthSpec::default()
            })?;
            Ok(g.corpus.cultivars[0].seasons.iter().map(SeasonSeries::from).collect())
        };

        let clean = series(0.0, 4)?;
        let grid = FergusonGrid::default();
        let best = grid_search(&clean, &grid).map_err(|e| e.to_string())?;
        if best.params != truth || best.rmse != 0.0 {
            return Err(format!("noise-free search returned {:?} with RMSE {}", best.params, best.rmse));
        }

        let noisy = series(0.5, 3)?;
        let grid = grid_around(&truth);
        let best = grid_search(&noisy, &grid).map_err(|e| e.to_string())?;
        let offsets: Vec<i64> = grid.index_vector(best.index).iter().map(|&i| i as i64 - 1).collect();
        let scores = evaluate_grid(&noisy, &grid).map_err(|e| e.to_string())?;
        let beaten = scores.iter().flatten().any(|&s| s < best.rmse);
        let recheck = rmse(&noisy, &best.params).map_err(|e| e.to_string())?;
        ensure(
            offsets.iter().all(|o| o.abs() <= 1) && !beaten && recheck == best.rmse,
            format!(
                "planted optimum exact on {} points; noisy search offsets {offsets:?} over {} points, RMSE {:.3}",
                FergusonGrid::default().len(),
                grid.len(),
                best.rmse
            ),
        )
    })
}

fn mtl_benefit() -> Outcome {
    let generated = synth(SynthSpec {
        n_cultivars: 6,
        seasons_per_cultivar: vec![10, 10, 10, 10, 10, 4],
        seed: 7,
        ..SynthSpec::default()
    })?;
    let corpus = &generated.corpus;
    let target = corpus.len() - 1;
    let model = ModelConfig::default();
    let base = TrainConfig::desk();
    let splits = make_trial_splits(corpus, 3, 0).map_err(|e| e.to_string())?;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for split in &splits {
        let train_sets: Vec<Vec<usize>> = split.cultivars.iter().map(|c| c.train.clone()).collect();
        let test: Vec<&PreparedSeason> = split.cultivars[target]
            .test
            .iter()
            .map(|&i| &corpus.cultivars[target].seasons[i])
            .collect();
        let all: Vec<usize> = (0..corpus.len()).collect();
        let config = base.with_seed(derive_seed(base.seed, split.trial_index, "MultiH"));
        let mtl = fit_model::<f64>(corpus, Variant::MultiH, &all, &train_sets, &model, &config)
            .map_err(|e| e.to_string())?;
        let mtl_rmse = evaluate(&mtl.network, &mtl.normalizer, &test, target)
            .and_then(|s| s.rmse())
            .map_err(|e| e.to_string())?;
        let config = base.with_seed(derive_seed(base.seed, split.trial_index, "Single:target"));
        let stl = fit_model::<f64>(
            corpus,
            Variant::Stl,
            &[target],
            &train_sets[target..],
            &model,
            &config,
        )
        .map_err(|e| e.to_string())?;
        let stl_rmse = evaluate(&stl.network, &stl.normalizer, &test, 0)
            .and_then(|s| s.rmse())
            .map_err(|e| e.to_string())?;
        if mtl_rmse < stl_rmse {
            wins += 1;
        }
        pairs.push(format!("{mtl_rmse:.2}/{stl_rmse:.2}"));
    }
    ensure(
        wins >= 2,
        format!(
            "MultiH beat STL on the 2-season target in {wins}/3 trials (MTL/STL: {})",
            pairs.join(", ")
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut argv = vec!["coldhardiness"];
    argv.extend_from_slice(args);
    match cli::run(argv.clone()) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", argv.join(" "))),
    }
}

fn only_run_dir(root: &Path) -> Result<PathBuf, String> {
    let dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    match dirs.as_slice() {
        [d] => Ok(d.clone()),
        _ => Err(format!(
            "expected one run directory in {}, found {}",
            root.display(),
            dirs.len()
        )),
    }
}

/// Relative path and contents of every file below `dir`.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable run directory") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .expect("below dir")
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, fs::read(&path).expect("readable file")));
            }
        }
    }
    out.sort();
    out
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let header = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(String::from)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| e.to_string())?;
    Ok((header, rows))
}

const SUITE_CONFIG: &str = r#"
[model]
fc_dims = [8, 8, 8]
gru_hidden = 8
[train]
epochs = 2
[ferguson_grid]
t_th = [5.0, 7.0]
k_a_endo = [0.1]
k_a_eco = [0.05]
k_d_endo = [0.02, 0.1]
k_d_eco = [0.1]
h_min = [-25.0]
h_max = [-3.0]
c_star = [-500.0]
theta = [2.0]
"#;

fn suite_shapes() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = work.path();
    let spec = root.join("spec.toml");
    fs::write(
        &spec,
        "n_cultivars = 6\nseasons_per_cultivar = [22, 4, 5, 3, 4, 3]\nseed = 4\n",
    )
    .map_err(|e| e.to_string())?;
    let config = root.join("run.toml");
    fs::write(&config, SUITE_CONFIG).map_err(|e| e.to_string())?;
    let data = root.join("data");
    run_cli(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        data.to_str().unwrap(),
    ])?;
    let names: Vec<String> = (0..6).map(|i| format!("cultivar_{i:02}")).collect();

    let mut checked = Vec::new();
    for command in ["compare", "ablate-size", "ablate-tasks", "transfer"] {
        let mut snapshots = Vec::new();
        for (k, jobs) in ["2", "1"].into_iter().enumerate() {
            let out = root.join(format!("{command}-{k}"));
            run_cli(&[
                command,
                "--config",
                config.to_str().unwrap(),
                "--input",
                data.to_str().unwrap(),
                "--out-root",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ])?;
            snapshots.push(snapshot(&only_run_dir(&out)?));
        }
        if snapshots[0] != snapshots[1] {
            return Err(format!(
                "{command}: rerun did not reproduce the outputs bitwise"
            ));
        }
        let dir = only_run_dir(&root.join(format!("{command}-0")))?;
        let (header, rows) = read_table(&dir.join(format!("{command}_table.csv")))?;
        let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
        let filled = |r: &Vec<String>| r[1..].iter().filter(|c| !c.is_empty()).count();
        let ok = match command {
            "compare" => {
                header
                    == [
                        "cultivar", "MultE", "ConcatE", "AddE", "MultiH", "Single", "Ferguson",
                    ]
                    && labels == names
                    && rows.iter().all(|r| filled(r) == 6)
            }
            "ablate-size" => {
                header == ["cultivar", "2", "5", "10", "20", "All"]
                    && labels == ["cultivar_00 (MTL)", "cultivar_00 (STL)"]
                    && rows.iter().all(|r| filled(r) == 5)
            }
            "ablate-tasks" => {
                // Three of six cultivars per subset: every row has a blank
                // in at least one of High, Low, Mix.
                header == ["cultivar", "High", "Low", "Mix", "All", "Single"]
                    && labels.len() == 6
                    && rows
                        .iter()
                        .all(|r| (!r[4].is_empty() && !r[5].is_empty()) && filled(r) < 5)
                    && (1..4).all(|c| rows.iter().filter(|r| !r[c].is_empty()).count() == 3)
            }
            _ => {
                let mut expected: Vec<&str> = names.iter().map(String::as_str).collect();
                expected.extend(["Median", "Mean"]);
                header == ["cultivar", "ConcatE FT", "MultE FT", "AddE FT", "MultiH FT"]
                    && labels == expected
                    && rows.iter().all(|r| filled(r) == 4)
            }
        };
        if !ok {
            return Err(format!(
                "{command}: unexpected table layout {header:?} / {labels:?}"
            ));
        }
        checked.push(command);
    }
    Ok(format!(
        "{} tables match their layouts and reproduce bitwise across reruns and --jobs",
        checked.join(", ")
    ))
}

fn filled_season(labels: usize, complete: usize) -> Season {
    let (first, _) = coldhardiness::dataio::season_window(2009);
    let days = (0..251)
        .map(|i| {
            let mut d = DayRecord::empty(first + chrono::Days::new(i as u64));
            if i < complete {
                d.set(WeatherColumn::MinAt, Some(-1.0));
                d.set(WeatherColumn::AvgAt, Some(0.0));
                d.set(WeatherColumn::MaxAt, Some(1.0));
            } else {
                d.set(WeatherColumn::MinAt, Some(-1.0));
            }
            if i < labels {
                d.lte[1] = Some(-10.0);
            }
            d
        })
        .collect();
    Season {
        cultivar_id: 0,
        start_year: 2009,
        days,
    }
}

fn data_pipeline() -> Outcome {
    let lengths = (season_length(2009), season_length(2011));
    if lengths != (251, 252) {
        return Err(format!("season lengths {lengths:?}"));
    }
    let records: Vec<DayRecord> = (0..300)
        .map(|i| {
            DayRecord::empty(NaiveDate::from_ymd_opt(2011, 9, 1).unwrap() + chrono::Days::new(i))
        })
        .collect();
    if extract_seasons(0, &records)
        .iter()
        .map(Season::len)
        .collect::<Vec<_>>()
        != [252]
    {
        return Err("leap season not extracted with 252 days".into());
    }
    let cases = [(25, 251, false), (26, 240, true), (100, 200, false)];
    for (labels, complete, keep) in cases {
        let (kept, _) = filter_seasons(vec![filled_season(labels, complete)]);
        if kept.len() == 1 && !keep || kept.is_empty() && keep {
            return Err(format!(
                "filter wrong for {labels} labels, {complete} complete days"
            ));
        }
    }
    let sharp = SeasonRatios {
        label_ratio: 0.10,
        temperature_ratio: 0.90,
    };
    if !sharp.passes() {
        return Err("ratios exactly at the thresholds rejected".into());
    }

    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = work.path();
    let data = root.join("data");
    let spec = root.join("spec.toml");
    fs::write(&spec, "n_cultivars = 2\nseasons_per_cultivar = [4, 3]\n")
        .map_err(|e| e.to_string())?;
    let config = root.join("run.toml");
    fs::write(&config, SUITE_CONFIG).map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_string();
    run_cli(&["synth", "--spec", &s(&spec), "--out", &s(&data)])?;
    run_cli(&[
        "ingest",
        "--input",
        &s(&data),
        "--out-root",
        &s(&root.join("ingest")),
    ])?;
    let train_root = root.join("train");
    run_cli(&[
        "train",
        "--config",
        &s(&config),
        "--input",
        &s(&data),
        "--out-root",
        &s(&train_root),
        "--trial",
        "0",
    ])?;
    let checkpoint = only_run_dir(&train_root)?.join("model.ckpt");
    let predictions = root.join("pred.csv");
    run_cli(&[
        "predict",
        "--checkpoint",
        &s(&checkpoint),
        "--weather",
        &s(&data.join("cultivar_01.csv")),
        "--cultivar",
        "cultivar_01",
        "--out",
        &s(&predictions),
    ])?;
    let (header, rows) = read_table(&predictions)?;
    ensure(
        header == ["cultivar", "season", "date", "pred_lte10", "pred_lte50", "pred_lte90", "label_lte50"]
            && rows.len() == (2000..2003).map(season_length).sum::<usize>(),
        format!("lengths 251/252, filter boundaries hold, synth -> ingest -> train -> predict gave {} rows", rows.len()),
    )
}

type Criterion = (usize, &'static str, Duration, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    (
        1,
        "gradient correctness",
        Duration::from_secs(120),
        gradient_correctness,
    ),
    (
        2,
        "mask correctness",
        Duration::from_secs(60),
        mask_correctness,
    ),
    (3, "causality", Duration::from_secs(120), causality),
    (
        4,
        "architectural equivalences",
        Duration::from_secs(120),
        architectural_equivalences,
    ),
    (
        5,
        "overfit oracle",
        Duration::from_secs(300),
        overfit_oracle,
    ),
    (
        6,
        "baseline parameter recovery",
        Duration::from_secs(300),
        ferguson_recovery,
    ),
    (
        7,
        "multi-task benefit",
        Duration::from_secs(900),
        mtl_benefit,
    ),
    (
        8,
        "experiment suite layouts",
        Duration::from_secs(1800),
        suite_shapes,
    ),
    (9, "data pipeline", Duration::from_secs(120), data_pipeline),
];

fn main() {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (n, name, budget, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => {
                Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail} [{elapsed:.1?}]"),
            Err(detail) => {
                failures += 1;
                println!("criterion {n} FAIL {name}: {detail} [{elapsed:.1?}]");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
