//! Adapting a trained multi-task model to a task it has not seen.
//!
//! MultiH gets a freshly initialized head; embedding variants get a new
//! task vector expressed as a learned linear combination of the existing
//! embedding rows. By default only the new task's parameters train.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::harness::train::{fit, TrainConfig};
use crate::harness::HarnessError;
use crate::ndiff::{DenseParams, Matrix, Real};

use super::network::Network;
use super::objective::Example;
use super::spec::Variant;
use super::ModelError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinetuneScope {
    /// Backbone and existing tasks frozen.
    #[default]
    NewTaskOnly,
    /// The backbone trains together with the new task's parameters.
    Full,
}

/// Starting coefficients of a derived task embedding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaInit {
    #[default]
    Zeros,
    /// `1 / C` for each of the `C` existing rows.
    Mean,
    /// Copy of an existing task's embedding.
    OneHot(usize),
}

/// Appends a new head to a MultiH model and returns the new task id.
pub fn add_task_head<S: Real>(net: &mut Network<S>, seed: u64) -> Result<usize, ModelError> {
    if net.variant() != Variant::MultiH {
        return Err(ModelError::Unsupported("adding a task head", net.variant()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d3 = net.spec().feature_dim();
    let out = net.spec().output_dim;
    net.heads.push(DenseParams::init(d3, out, &mut rng));
    let spec = net.spec_mut();
    spec.n_tasks += 1;
    Ok(spec.n_tasks - 1)
}

/// Appends a derived task to an embedding model and returns its id.
pub fn add_derived_task<S: Real>(
    net: &mut Network<S>,
    init: AlphaInit,
) -> Result<usize, ModelError> {
    if !net.variant().uses_embedding() {
        return Err(ModelError::Unsupported(
            "adding a derived task",
            net.variant(),
        ));
    }
    let base = net.spec().base_tasks();
    let alpha = match init {
        AlphaInit::Zeros => Matrix::zeros(1, base),
        AlphaInit::Mean => Matrix::filled(1, base, S::one() / S::of(base as f64)),
        AlphaInit::OneHot(j) if j < base => {
            let mut a = Matrix::zeros(1, base);
            a.set(0, j, S::one());
            a
        }
        AlphaInit::OneHot(j) => {
            return Err(ModelError::TaskOutOfRange {
                task: j,
                n_tasks: base,
            })
        }
    };
    net.derived.push(alpha);
    let spec = net.spec_mut();
    spec.n_tasks += 1;
    spec.derived_tasks += 1;
    Ok(spec.n_tasks - 1)
}

/// Which parameter blocks update while finetuning task `task`.
pub fn finetune_trainable(
    net_variant: Variant,
    base_tasks: usize,
    task: usize,
    scope: FinetuneScope,
) -> impl Fn(&str) -> bool {
    let own = match net_variant {
        Variant::MultiH => format!("head.{task}."),
        _ => format!("derived.{}", task - base_tasks),
    };
    move |name: &str| {
        let mine = if own.ends_with('.') {
            name.starts_with(&own)
        } else {
            name == own
        };
        mine || (scope == FinetuneScope::Full && name.starts_with("backbone."))
    }
}

/// Result of a finetuning run.
#[derive(Clone, Debug)]
pub struct Finetuned<S> {
    pub network: Network<S>,
    pub task: usize,
    pub loss_curve: Vec<f64>,
}

fn retarget<S: Real>(data: &[Example<S>], task: usize) -> Vec<Example<S>> {
    data.iter()
        .cloned()
        .map(|mut e| {
            e.task = task;
            e
        })
        .collect()
}

/// Adds a head for a new task and trains it on `data`.
///
/// Task ids inside `data` are replaced by the new id.
pub fn finetune_multihead<S: Real>(
    trained: &Network<S>,
    data: &[Example<S>],
    config: &TrainConfig,
    scope: FinetuneScope,
) -> Result<Finetuned<S>, HarnessError> {
    let mut net = trained.clone();
    let task = add_task_head(&mut net, config.seed)?;
    let data = retarget(data, task);
    let trainable = finetune_trainable(Variant::MultiH, 0, task, scope);
    let heads_only = scope == FinetuneScope::NewTaskOnly;
    let loss_curve = fit(&mut net, &data, config, &trainable, heads_only)?;
    Ok(Finetuned {
        network: net,
        task,
        loss_curve,
    })
}

/// Adds a derived task embedding and trains its coefficients on `data`.
pub fn finetune_embedding<S: Real>(
    trained: &Network<S>,
    data: &[Example<S>],
    config: &TrainConfig,
    scope: FinetuneScope,
    init: AlphaInit,
) -> Result<Finetuned<S>, HarnessError> {
    let mut net = trained.clone();
    let task = add_derived_task(&mut net, init)?;
    let data = retarget(data, task);
    let trainable = finetune_trainable(net.variant(), net.spec().base_tasks(), task, scope);
    let loss_curve = fit(&mut net, &data, config, &trainable, false)?;
    Ok(Finetuned {
        network: net,
        task,
        loss_curve,
    })
}

/// Dispatches to the adapter that matches the model's variant.
pub fn finetune<S: Real>(
    trained: &Network<S>,
    data: &[Example<S>],
    config: &TrainConfig,
    scope: FinetuneScope,
    init: AlphaInit,
) -> Result<Finetuned<S>, HarnessError> {
    match trained.variant() {
        Variant::MultiH => finetune_multihead(trained, data, config, scope),
        v if v.uses_embedding() => finetune_embedding(trained, data, config, scope, init),
        v => Err(ModelError::Unsupported("finetuning", v).into()),
    }
}
