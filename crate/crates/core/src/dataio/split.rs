use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::corpus::Corpus;
use super::DataError;

pub const TEST_SEASONS: usize = 2;
pub const MIN_SEASONS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CultivarSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialSplit {
    pub trial_index: usize,
    pub seed: u64,
    /// Indexed by cultivar id; entries index that cultivar's seasons.
    pub cultivars: Vec<CultivarSplit>,
}

/// Seed for one cultivar's shuffle. Keyed by name so that a cultivar
/// keeps its split when the corpus is subset or reordered.
pub fn cultivar_seed(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Holds out two seasons per cultivar per trial.
///
/// Each cultivar's season indices are shuffled once; trial `k` tests
/// positions `2k` and `2k + 1` of that permutation (modulo the count), so
/// trials use disjoint test pairs whenever there are enough seasons.
pub fn make_trial_splits(
    corpus: &Corpus,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<TrialSplit>, DataError> {
    let mut perms = Vec::with_capacity(corpus.len());
    for c in &corpus.cultivars {
        let n = c.seasons.len();
        if n < MIN_SEASONS {
            return Err(DataError::InsufficientSeasons {
                cultivar: c.name.clone(),
                found: n,
                needed: MIN_SEASONS,
            });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(cultivar_seed(seed, &c.name)));
        perms.push(perm);
    }
    Ok((0..n_trials)
        .map(|k| TrialSplit {
            trial_index: k,
            seed,
            cultivars: perms
                .iter()
                .map(|perm| {
                    let n = perm.len();
                    let mut test: Vec<usize> = (0..TEST_SEASONS)
                        .map(|j| perm[(TEST_SEASONS * k + j) % n])
                        .collect();
                    test.sort_unstable();
                    let train = (0..n).filter(|i| !test.contains(i)).collect();
                    CultivarSplit { train, test }
                })
                .collect(),
        })
        .collect())
}
