use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Parameters;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckOptions {
    /// Central-difference half step.
    pub eps: f64,
    /// Coordinates sampled per block; smaller blocks are checked exhaustively.
    pub coords_per_block: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Denominator floor of the relative error, so coordinates whose true
    /// gradient is zero are compared in absolute terms.
    pub abs_floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            coords_per_block: 16,
            seed: 0,
            tolerance: 1e-4,
            abs_floor: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCheck {
    pub block: String,
    pub checked: usize,
    /// Coordinates whose perturbation crossed a kink.
    pub skipped: usize,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub blocks: Vec<BlockCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.max_rel_error)
            .fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&BlockCheck> {
        self.blocks
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }

    /// Every block had at least one usable coordinate and none exceeded
    /// the tolerance.
    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance && self.blocks.iter().all(|b| b.checked > 0)
    }

    /// Names of blocks whose worst coordinate exceeds the tolerance.
    pub fn failing_blocks(&self) -> Vec<&str> {
        self.blocks
            .iter()
            .filter(|b| b.max_rel_error >= self.tolerance)
            .map(|b| b.block.as_str())
            .collect()
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares `analytic` gradients against central differences of `loss`.
///
/// `params` is perturbed one coordinate at a time and restored exactly
/// after each evaluation.
pub fn grad_check<P: Parameters<f64>>(
    params: &mut P,
    analytic: &P,
    mut loss: impl FnMut(&P) -> f64,
    options: GradCheckOptions,
) -> GradCheckReport {
    grad_check_piecewise(params, analytic, |p| Some(loss(p)), options)
}

/// Like [`grad_check`] for piecewise-smooth losses.
///
/// `loss` returns `None` when the perturbed parameters left the smooth
/// piece of the unperturbed ones (for ReLU networks: some unit changed
/// sign). Such a coordinate has no meaningful finite difference; it is
/// counted as skipped and another coordinate of the block is drawn.
pub fn grad_check_piecewise<P: Parameters<f64>>(
    params: &mut P,
    analytic: &P,
    mut loss: impl FnMut(&P) -> Option<f64>,
    options: GradCheckOptions,
) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let analytic_blocks: Vec<(String, Vec<f64>)> = analytic
        .blocks()
        .into_iter()
        .map(|(n, m)| (n, m.as_slice().to_vec()))
        .collect();

    let mut blocks = Vec::new();
    for (block_idx, (name, grad)) in analytic_blocks.iter().enumerate() {
        let len = grad.len();
        // Candidates in random order; spares replace skipped coordinates.
        let candidates = sample(&mut rng, len, len.min(options.coords_per_block * 8)).into_vec();

        let mut check = BlockCheck {
            block: name.clone(),
            checked: 0,
            skipped: 0,
            max_rel_error: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for i in candidates {
            if check.checked == options.coords_per_block {
                break;
            }
            let original = params.blocks()[block_idx].1.as_slice()[i];
            set_coord(params, block_idx, i, original + options.eps);
            let plus = loss(params);
            set_coord(params, block_idx, i, original - options.eps);
            let minus = loss(params);
            set_coord(params, block_idx, i, original);

            let (Some(plus), Some(minus)) = (plus, minus) else {
                check.skipped += 1;
                continue;
            };
            let numeric = (plus - minus) / (2.0 * options.eps);
            let rel = relative_error(grad[i], numeric, options.abs_floor);
            if rel > check.max_rel_error || check.checked == 0 {
                check.max_rel_error = rel;
                check.worst_index = i;
                check.analytic = grad[i];
                check.numeric = numeric;
            }
            check.checked += 1;
        }
        blocks.push(check);
    }
    GradCheckReport {
        tolerance: options.tolerance,
        blocks,
    }
}

fn set_coord<P: Parameters<f64>>(params: &mut P, block: usize, index: usize, value: f64) {
    let mut blocks = params.blocks_mut();
    blocks[block].1.as_mut_slice()[index] = value;
}
