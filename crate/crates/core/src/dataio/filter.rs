use serde::Serialize;

use super::record::LteChannel;
use super::season::Season;

/// Minimum share of season days carrying an LTE50 label.
pub const MIN_LABEL_RATIO: f64 = 0.10;
/// Minimum share of season days with MIN/AVG/MAX air temperature all present.
pub const MIN_TEMPERATURE_RATIO: f64 = 0.90;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeasonRatios {
    pub label_ratio: f64,
    pub temperature_ratio: f64,
}

impl SeasonRatios {
    pub fn of(season: &Season) -> Self {
        let len = season.len().max(1) as f64;
        let labelled = season
            .days
            .iter()
            .filter(|d| d.label_present(LteChannel::Lte50))
            .count();
        let complete = season
            .days
            .iter()
            .filter(|d| d.temperature_complete())
            .count();
        Self {
            label_ratio: labelled as f64 / len,
            temperature_ratio: complete as f64 / len,
        }
    }

    pub fn passes(&self) -> bool {
        self.label_ratio >= MIN_LABEL_RATIO && self.temperature_ratio >= MIN_TEMPERATURE_RATIO
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub cultivar_id: usize,
    pub start_year: i32,
    #[serde(flatten)]
    pub ratios: SeasonRatios,
}

/// Keeps seasons with enough labels and enough raw temperature data.
///
/// Ratios are measured before any interpolation, over the full season
/// length. Both thresholds are inclusive.
pub fn filter_seasons(seasons: Vec<Season>) -> (Vec<Season>, Vec<Rejection>) {
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for season in seasons {
        let ratios = SeasonRatios::of(&season);
        if ratios.passes() {
            kept.push(season);
        } else {
            rejected.push(Rejection {
                cultivar_id: season.cultivar_id,
                start_year: season.start_year,
                ratios,
            });
        }
    }
    (kept, rejected)
}
