use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Numeric weather columns, in file order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeatherColumn {
    MinAt,
    AvgAt,
    MaxAt,
    MeanAt,
    MinRh,
    AvgRh,
    MaxRh,
    MinDewpt,
    AvgDewpt,
    MaxDewpt,
    PInches,
    WsMph,
    MaxWsMph,
}

pub const N_WEATHER: usize = 13;

impl WeatherColumn {
    pub const ALL: [WeatherColumn; N_WEATHER] = [
        WeatherColumn::MinAt,
        WeatherColumn::AvgAt,
        WeatherColumn::MaxAt,
        WeatherColumn::MeanAt,
        WeatherColumn::MinRh,
        WeatherColumn::AvgRh,
        WeatherColumn::MaxRh,
        WeatherColumn::MinDewpt,
        WeatherColumn::AvgDewpt,
        WeatherColumn::MaxDewpt,
        WeatherColumn::PInches,
        WeatherColumn::WsMph,
        WeatherColumn::MaxWsMph,
    ];

    /// The twelve model inputs: every column except MEAN_AT, which only
    /// restates MIN_AT and MAX_AT.
    pub const DEFAULT_FEATURES: [WeatherColumn; 12] = [
        WeatherColumn::MinAt,
        WeatherColumn::AvgAt,
        WeatherColumn::MaxAt,
        WeatherColumn::MinRh,
        WeatherColumn::AvgRh,
        WeatherColumn::MaxRh,
        WeatherColumn::MinDewpt,
        WeatherColumn::AvgDewpt,
        WeatherColumn::MaxDewpt,
        WeatherColumn::PInches,
        WeatherColumn::WsMph,
        WeatherColumn::MaxWsMph,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn header(self) -> &'static str {
        match self {
            WeatherColumn::MinAt => "MIN_AT",
            WeatherColumn::AvgAt => "AVG_AT",
            WeatherColumn::MaxAt => "MAX_AT",
            WeatherColumn::MeanAt => "MEAN_AT",
            WeatherColumn::MinRh => "MIN_RH",
            WeatherColumn::AvgRh => "AVG_RH",
            WeatherColumn::MaxRh => "MAX_RH",
            WeatherColumn::MinDewpt => "MIN_DEWPT",
            WeatherColumn::AvgDewpt => "AVG_DEWPT",
            WeatherColumn::MaxDewpt => "MAX_DEWPT",
            WeatherColumn::PInches => "P_INCHES",
            WeatherColumn::WsMph => "WS_MPH",
            WeatherColumn::MaxWsMph => "MAX_WS_MPH",
        }
    }
}

impl fmt::Display for WeatherColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.header())
    }
}

impl FromStr for WeatherColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeatherColumn::ALL
            .into_iter()
            .find(|c| c.header().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown weather column `{s}`"))
    }
}

/// LTE label channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LteChannel {
    Lte10,
    Lte50,
    Lte90,
}

impl LteChannel {
    pub const ALL: [LteChannel; 3] = [LteChannel::Lte10, LteChannel::Lte50, LteChannel::Lte90];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn header(self) -> &'static str {
        match self {
            LteChannel::Lte10 => "LTE10",
            LteChannel::Lte50 => "LTE50",
            LteChannel::Lte90 => "LTE90",
        }
    }
}

/// One day of weather observations and optional LTE labels.
///
/// A label channel is present exactly when its value is `Some`.
#[derive(Clone, Debug, PartialEq)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub station: Option<String>,
    pub weather: [Option<f64>; N_WEATHER],
    pub lte: [Option<f64>; 3],
}

impl DayRecord {
    /// A day with every value absent.
    pub fn empty(date: NaiveDate) -> Self {
        Self {
            date,
            station: None,
            weather: [None; N_WEATHER],
            lte: [None; 3],
        }
    }

    pub fn get(&self, column: WeatherColumn) -> Option<f64> {
        self.weather[column.index()]
    }

    pub fn set(&mut self, column: WeatherColumn, value: Option<f64>) {
        self.weather[column.index()] = value;
    }

    pub fn min_at(&self) -> Option<f64> {
        self.get(WeatherColumn::MinAt)
    }

    pub fn avg_at(&self) -> Option<f64> {
        self.get(WeatherColumn::AvgAt)
    }

    pub fn max_at(&self) -> Option<f64> {
        self.get(WeatherColumn::MaxAt)
    }

    /// MEAN_AT as recorded, or derived from MIN_AT and MAX_AT.
    pub fn mean_at(&self) -> Option<f64> {
        self.get(WeatherColumn::MeanAt)
            .or_else(|| Some(derive_mean_at(self.min_at()?, self.max_at()?)))
    }

    pub fn lte(&self, channel: LteChannel) -> Option<f64> {
        self.lte[channel.index()]
    }

    pub fn label_present(&self, channel: LteChannel) -> bool {
        self.lte[channel.index()].is_some()
    }

    /// All three air-temperature readings present.
    pub fn temperature_complete(&self) -> bool {
        self.min_at().is_some() && self.avg_at().is_some() && self.max_at().is_some()
    }
}

/// Daily mean air temperature from the extremes.
pub fn derive_mean_at(min_at: f64, max_at: f64) -> f64 {
    (min_at + max_at) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_extremes() {
        assert_eq!(derive_mean_at(0.0, 10.0), 5.0);
        assert_eq!(derive_mean_at(-7.0, -7.0), -7.0);
        assert!((derive_mean_at(-12.4, 3.2) - -4.6).abs() < 1e-12);
    }

    #[test]
    fn mean_at_falls_back_to_derivation() {
        let mut r = DayRecord::empty(NaiveDate::from_ymd_opt(2010, 1, 5).unwrap());
        assert_eq!(r.mean_at(), None);
        r.set(WeatherColumn::MinAt, Some(-2.0));
        r.set(WeatherColumn::MaxAt, Some(4.0));
        assert_eq!(r.mean_at(), Some(1.0));
    }

    #[test]
    fn default_features_exclude_mean() {
        assert_eq!(WeatherColumn::DEFAULT_FEATURES.len(), 12);
        assert!(!WeatherColumn::DEFAULT_FEATURES.contains(&WeatherColumn::MeanAt));
    }
}
