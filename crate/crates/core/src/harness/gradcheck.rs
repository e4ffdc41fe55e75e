use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::{batch_forward, batch_loss_and_grad, Example, Network, Variant};
use crate::ndiff::{grad_check_piecewise, GradCheckOptions, GradCheckReport, Matrix};

use super::experiments::ModelConfig;
use super::HarnessError;

/// Random normalized-looking seasons of `days` (and `days - 3`) days with
/// roughly half the labels masked out, spread over the model's tasks.
pub fn random_batch(input_dim: usize, n_tasks: usize, days: usize, seed: u64) -> Vec<Example<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [days, days.saturating_sub(3).max(1)]
        .into_iter()
        .enumerate()
        .map(|(b, t)| {
            let features = Matrix::from_fn(t, input_dim, |_, _| rng.gen_range(-2.0..2.0));
            let targets = Matrix::from_fn(t, 3, |_, _| rng.gen_range(-3.0..3.0));
            let mask = (0..t * 3).map(|_| rng.gen_bool(0.5)).collect();
            Example {
                features,
                targets,
                mask,
                task: b % n_tasks,
            }
        })
        .collect()
}

/// Central-difference check of every parameter block of one variant.
pub fn check_variant(
    variant: Variant,
    model: &ModelConfig,
    input_dim: usize,
    n_tasks: usize,
    days: usize,
    seed: u64,
    options: GradCheckOptions,
) -> Result<GradCheckReport, HarnessError> {
    let spec = model.spec(variant, input_dim, n_tasks);
    let n_tasks = spec.n_tasks;
    let mut net = Network::<f64>::new(spec, seed)?;
    check_network(&mut net, n_tasks, days, seed, options)
}

/// Checks an existing network (for instance one with a derived task).
pub fn check_network(
    net: &mut Network<f64>,
    n_tasks: usize,
    days: usize,
    seed: u64,
    options: GradCheckOptions,
) -> Result<GradCheckReport, HarnessError> {
    let mut data = random_batch(net.spec().input_dim, n_tasks, days, seed ^ 0xdada);
    if n_tasks > 2 {
        data[1].task = n_tasks - 1;
    }
    let batch: Vec<&Example<f64>> = data.iter().collect();
    let (_, grads) = batch_loss_and_grad(net, &batch, false)?;
    let pattern = batch_forward(net, &batch)?.1.relu_pattern();
    Ok(grad_check_piecewise(
        net,
        &grads,
        |p| {
            let (loss, cache) = batch_forward(p, &batch).expect("shapes were checked");
            (cache.relu_pattern() == pattern).then_some(loss)
        },
        GradCheckOptions { seed, ..options },
    ))
}
