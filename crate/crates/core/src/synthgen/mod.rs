//! Synthetic cultivars whose LTE curves follow the baseline dynamics,
//! driven by seeded weather. Used as ground truth throughout the tests.

mod weather;

pub use weather::generate_weather;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{build_corpus, Corpus, CorpusOptions, DataError, DayRecord, IngestLog};
use crate::ferguson::{ferguson_predict, FergusonError, FergusonParams};

/// Fixed gaps between the LTE50 curve and the LTE10 / LTE90 curves, °C.
pub const LTE10_SPREAD: f64 = 1.5;
pub const LTE90_SPREAD: f64 = 1.5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Ferguson(#[from] FergusonError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_cultivars: usize,
    /// One count per cultivar, or a single count shared by all.
    pub seasons_per_cultivar: Vec<usize>,
    pub base: FergusonParams,
    /// Relative size of the per-cultivar parameter offsets.
    pub perturbation: f64,
    /// Days between observations, starting on the first season day.
    pub label_period: usize,
    pub label_noise_sd: f64,
    pub seed: u64,
    pub first_year: i32,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_cultivars: 6,
            seasons_per_cultivar: vec![8],
            base: default_truth(),
            perturbation: 0.15,
            label_period: 7,
            label_noise_sd: 0.3,
            seed: 1,
            first_year: 2000,
        }
    }
}

/// Parameters that give a plausible winter curve under the generated weather.
pub fn default_truth() -> FergusonParams {
    FergusonParams {
        t_th: 7.0,
        k_a_endo: 0.1,
        k_a_eco: 0.05,
        k_d_endo: 0.02,
        k_d_eco: 0.1,
        h_min: -25.0,
        h_max: -3.0,
        c_star: -500.0,
        theta: 2.0,
        h_init: -3.0,
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.n_cultivars == 0 {
            return bad("n_cultivars must be at least 1".into());
        }
        let counts = self.seasons_per_cultivar.len();
        if counts != 1 && counts != self.n_cultivars {
            return bad(format!(
                "seasons_per_cultivar has {counts} entries for {} cultivars",
                self.n_cultivars
            ));
        }
        if self.label_period == 0 {
            return bad("label_period must be at least 1".into());
        }
        if !(self.label_noise_sd >= 0.0 && self.label_noise_sd.is_finite()) {
            return bad("label_noise_sd must be non-negative".into());
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return bad("perturbation must be non-negative".into());
        }
        self.base.validate()?;
        Ok(())
    }

    pub fn seasons_of(&self, cultivar: usize) -> usize {
        match self.seasons_per_cultivar.as_slice() {
            [n] => *n,
            all => all[cultivar],
        }
    }

    pub fn cultivar_name(&self, cultivar: usize) -> String {
        format!("cultivar_{cultivar:02}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CultivarTruth {
    pub name: String,
    pub params: FergusonParams,
}

/// A generated data set together with its hidden truth.
#[derive(Clone, Debug)]
pub struct SynthCorpus {
    /// Raw daily rows, as they would appear in CSV files.
    pub records: Vec<(String, DayRecord)>,
    pub corpus: Corpus,
    pub log: IngestLog,
    pub truths: Vec<CultivarTruth>,
    /// Noise-free LTE50 per cultivar, per season.
    pub curves: Vec<Vec<Vec<f64>>>,
}

/// Per-cultivar parameters: the base shifted by seeded offsets.
pub fn perturb(base: &FergusonParams, scale: f64, seed: u64, cultivar: usize) -> FergusonParams {
    if scale == 0.0 {
        return *base;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000 ^ ((cultivar as u64) << 20));
    let normal = Normal::new(0.0, scale).expect("finite scale");
    let mut z = || normal.sample(&mut rng);
    let mut p = *base;
    p.t_th += 4.0 * z();
    p.k_a_endo *= z().exp();
    p.k_a_eco *= z().exp();
    p.k_d_endo *= z().exp();
    p.k_d_eco *= z().exp();
    p.h_min += 10.0 * z();
    p.c_star *= z().exp();
    p.h_min = p.h_min.min(p.h_max - 5.0);
    p.h_init = p.h_max;
    p
}

/// Raw rows plus truth, before ingestion.
#[derive(Clone, Debug)]
pub struct SynthRecords {
    pub records: Vec<(String, DayRecord)>,
    pub truths: Vec<CultivarTruth>,
    pub curves: Vec<Vec<Vec<f64>>>,
}

/// Builds the cultivars, their labels and the ingested corpus.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    let SynthRecords {
        records,
        truths,
        curves,
    } = generate_records(spec)?;
    let (corpus, log) = build_corpus(records.clone(), &CorpusOptions::default())?;
    Ok(SynthCorpus {
        records,
        corpus,
        log,
        truths,
        curves,
    })
}

/// Daily rows with labels for every cultivar and season of the spec.
pub fn generate_records(spec: &SynthSpec) -> Result<SynthRecords, SynthError> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.label_noise_sd).expect("validated sd");
    let mut records = Vec::new();
    let mut truths = Vec::new();
    let mut curves = Vec::new();
    for c in 0..spec.n_cultivars {
        let name = spec.cultivar_name(c);
        let params = perturb(&spec.base, spec.perturbation, spec.seed, c);
        params.validate()?;
        let mut label_rng = ChaCha8Rng::seed_from_u64(
            spec.seed
                .wrapping_mul(0x9e37_79b9)
                .wrapping_add(c as u64 + 1),
        );
        let mut cultivar_curves = Vec::new();
        for k in 0..spec.seasons_of(c) {
            let year = spec.first_year + k as i32;
            let mut days = generate_weather(spec.seed, year);
            let mean_at: Vec<f64> = days
                .iter()
                .map(|d| d.mean_at().expect("generated"))
                .collect();
            let curve = ferguson_predict(&mean_at, &params)?;
            for (i, (day, &h)) in days.iter_mut().zip(&curve).enumerate() {
                if i % spec.label_period == 0 {
                    let mut draw = |shift: f64| {
                        let e = if spec.label_noise_sd > 0.0 {
                            noise.sample(&mut label_rng)
                        } else {
                            0.0
                        };
                        Some(h + shift + e)
                    };
                    day.lte = [draw(LTE10_SPREAD), draw(0.0), draw(-LTE90_SPREAD)];
                }
            }
            records.extend(days.into_iter().map(|d| (name.clone(), d)));
            cultivar_curves.push(curve);
        }
        truths.push(CultivarTruth { name, params });
        curves.push(cultivar_curves);
    }
    Ok(SynthRecords {
        records,
        truths,
        curves,
    })
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    cultivar: Vec<CultivarTruth>,
}

pub fn truths_to_toml(truths: &[CultivarTruth]) -> String {
    toml::to_string(&TruthFile {
        cultivar: truths.to_vec(),
    })
    .expect("truths serialize")
}

pub fn truths_from_toml(text: &str) -> Result<Vec<CultivarTruth>, SynthError> {
    let f: TruthFile = toml::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(f.cultivar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{extract_seasons, filter_seasons, LteChannel};

    fn small(period: usize, noise: f64, perturbation: f64) -> SynthSpec {
        SynthSpec {
            n_cultivars: 2,
            seasons_per_cultivar: vec![3],
            label_period: period,
            label_noise_sd: noise,
            perturbation,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn zero_noise_daily_labels_equal_the_curve() {
        let s = generate_corpus(&small(1, 0.0, 0.15)).unwrap();
        let season = &s.corpus.cultivars[1].seasons[2];
        let labels: Vec<f64> = season.lte50().map(Option::unwrap).collect();
        assert_eq!(labels, s.curves[1][2]);
    }

    #[test]
    fn period_fourteen_gives_eighteen_labels() {
        let s = generate_records(&small(14, 0.3, 0.15)).unwrap();
        let days: Vec<&DayRecord> = s
            .records
            .iter()
            .filter(|(n, _)| n == "cultivar_00")
            .map(|(_, d)| d)
            .take(251)
            .collect();
        assert_eq!(
            days.iter()
                .filter(|d| d.label_present(LteChannel::Lte50))
                .count(),
            18
        );
    }

    #[test]
    fn no_perturbation_means_identical_curves() {
        let s = generate_corpus(&small(7, 0.5, 0.0)).unwrap();
        assert_eq!(s.truths[0].params, s.truths[1].params);
        assert_eq!(s.curves[0], s.curves[1]);
    }

    #[test]
    fn curves_are_ordered_and_bounded() {
        let s = generate_corpus(&small(1, 0.0, 0.3)).unwrap();
        for (c, truth) in s.truths.iter().enumerate() {
            let p = truth.params;
            for curve in &s.curves[c] {
                assert!(curve.iter().all(|&h| p.h_min <= h && h <= p.h_max));
                // Acclimation actually happens.
                assert!(curve.iter().cloned().fold(f64::INFINITY, f64::min) < p.h_max - 5.0);
            }
            for season in &s.corpus.cultivars[c].seasons {
                for l in &season.lte {
                    let [a, b, d] = l.map(Option::unwrap);
                    assert!(a > b && b > d);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&small(7, 0.5, 0.2)).unwrap();
        let b = generate_corpus(&small(7, 0.5, 0.2)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.truths, b.truths);
    }

    #[test]
    fn periods_up_to_ten_pass_the_filter() {
        for period in [1, 7, 10] {
            let s = generate_corpus(&small(period, 0.3, 0.15)).unwrap();
            assert!(s.log.rejected_seasons.is_empty(), "period {period}");
        }
        let recs: Vec<DayRecord> = generate_records(&small(11, 0.3, 0.15))
            .unwrap()
            .records
            .into_iter()
            .filter(|(n, _)| n == "cultivar_00")
            .map(|(_, d)| d)
            .collect();
        let (kept, _) = filter_seasons(extract_seasons(0, &recs));
        assert!(kept.is_empty());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SynthSpec {
            label_period: 0,
            ..SynthSpec::default()
        }
        .validate()
        .is_err());
        assert!(SynthSpec {
            label_noise_sd: -1.0,
            ..SynthSpec::default()
        }
        .validate()
        .is_err());
        assert!(SynthSpec {
            seasons_per_cultivar: vec![3, 4],
            ..SynthSpec::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn spec_and_truths_round_trip() {
        let spec = SynthSpec::default();
        let text = toml::to_string(&spec).unwrap();
        assert_eq!(toml::from_str::<SynthSpec>(&text).unwrap(), spec);
        let s = generate_corpus(&small(7, 0.0, 0.2)).unwrap();
        assert_eq!(
            truths_from_toml(&truths_to_toml(&s.truths)).unwrap(),
            s.truths
        );
    }
}
