use std::collections::HashMap;

use chrono::NaiveDate;
use serde::Serialize;

use crate::ndiff::Matrix;

use super::filter::{filter_seasons, Rejection};
use super::interpolate::interpolate_missing;
use super::record::{DayRecord, LteChannel, WeatherColumn};
use super::season::{extract_seasons, Season};
use super::DataError;

/// A retained season with gaps filled, ready for the models.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedSeason {
    pub cultivar_id: usize,
    pub start_year: i32,
    pub dates: Vec<NaiveDate>,
    /// `T × F` raw (unscaled) inputs in corpus feature order.
    pub features: Matrix<f64>,
    /// Daily mean air temperature, for the scientific baseline.
    pub mean_at: Vec<f64>,
    /// Per-day LTE10, LTE50, LTE90 labels; never interpolated.
    pub lte: Vec<[Option<f64>; 3]>,
}

impl PreparedSeason {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn lte50(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.lte.iter().map(|l| l[LteChannel::Lte50.index()])
    }

    pub fn n_labels(&self) -> usize {
        self.lte50().filter(Option::is_some).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cultivar {
    pub id: usize,
    pub name: String,
    pub seasons: Vec<PreparedSeason>,
}

/// All cultivars; ids are dense and equal to list position.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub features: Vec<WeatherColumn>,
    pub cultivars: Vec<Cultivar>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.cultivars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cultivars.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.cultivars.iter().map(|c| c.name.clone()).collect()
    }

    pub fn id_of(&self, name: &str) -> Result<usize, DataError> {
        self.cultivars
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| DataError::UnknownCultivar(name.to_string()))
    }

    /// The chosen cultivars, renumbered densely in the given order.
    pub fn subset(&self, ids: &[usize]) -> Corpus {
        let cultivars = ids
            .iter()
            .enumerate()
            .map(|(new_id, &old)| {
                let mut c = self.cultivars[old].clone();
                c.id = new_id;
                for s in &mut c.seasons {
                    s.cultivar_id = new_id;
                }
                c
            })
            .collect();
        Corpus {
            features: self.features.clone(),
            cultivars,
        }
    }

    pub fn check_invariants(&self) -> bool {
        self.cultivars
            .iter()
            .enumerate()
            .all(|(i, c)| c.id == i && c.seasons.iter().all(|s| s.cultivar_id == i))
    }
}

#[derive(Clone, Debug)]
pub struct CorpusOptions {
    pub features: Vec<WeatherColumn>,
    /// Cultivars with fewer retained seasons are dropped (and logged).
    pub min_seasons: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            features: WeatherColumn::DEFAULT_FEATURES.to_vec(),
            min_seasons: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NamedRejection {
    pub cultivar: String,
    pub start_year: i32,
    pub label_ratio: f64,
    pub temperature_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IngestLog {
    pub rejected_seasons: Vec<NamedRejection>,
    /// `(cultivar, retained season count)` for cultivars left out.
    pub dropped_cultivars: Vec<(String, usize)>,
}

/// Groups records by cultivar (first-appearance order), windows,
/// filters and fills them.
pub fn build_corpus(
    records: Vec<(String, DayRecord)>,
    options: &CorpusOptions,
) -> Result<(Corpus, IngestLog), DataError> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<DayRecord>> = HashMap::new();
    for (name, rec) in records {
        groups
            .entry(name.clone())
            .or_insert_with(|| {
                order.push(name);
                Vec::new()
            })
            .push(rec);
    }

    let mut log = IngestLog::default();
    let mut cultivars = Vec::new();
    for name in order {
        let mut recs = groups.remove(&name).unwrap_or_default();
        recs.sort_by_key(|r| r.date);
        let id = cultivars.len();
        let (kept, rejected) = filter_seasons(extract_seasons(id, &recs));
        log.rejected_seasons
            .extend(rejected.into_iter().map(|r: Rejection| NamedRejection {
                cultivar: name.clone(),
                start_year: r.start_year,
                label_ratio: r.ratios.label_ratio,
                temperature_ratio: r.ratios.temperature_ratio,
            }));
        if kept.len() < options.min_seasons {
            log::warn!("dropping cultivar {name}: {} retained seasons", kept.len());
            log.dropped_cultivars.push((name, kept.len()));
            continue;
        }
        let seasons = kept
            .iter()
            .map(|s| prepare_season(s, &name, &options.features))
            .collect::<Result<Vec<_>, _>>()?;
        cultivars.push(Cultivar { id, name, seasons });
    }
    if cultivars.is_empty() {
        return Err(DataError::Empty(
            "no cultivar has enough retained seasons".into(),
        ));
    }
    Ok((
        Corpus {
            features: options.features.clone(),
            cultivars,
        },
        log,
    ))
}

/// Fills every feature column and the mean temperature of one season.
pub fn prepare_season(
    season: &Season,
    cultivar: &str,
    features: &[WeatherColumn],
) -> Result<PreparedSeason, DataError> {
    let t = season.len();
    let fill = |column: WeatherColumn, values: Vec<Option<f64>>| {
        interpolate_missing(&values).ok_or_else(|| DataError::AllAbsent {
            feature: column.header().to_string(),
            cultivar: cultivar.to_string(),
            start_year: season.start_year,
        })
    };
    let mut matrix = Matrix::zeros(t, features.len());
    for (j, &column) in features.iter().enumerate() {
        let series = fill(column, season.days.iter().map(|d| d.get(column)).collect())?;
        for (i, v) in series.into_iter().enumerate() {
            matrix.set(i, j, v);
        }
    }
    let mean_at = fill(
        WeatherColumn::MeanAt,
        season.days.iter().map(DayRecord::mean_at).collect(),
    )?;
    Ok(PreparedSeason {
        cultivar_id: season.cultivar_id,
        start_year: season.start_year,
        dates: season.days.iter().map(|d| d.date).collect(),
        features: matrix,
        mean_at,
        lte: season.days.iter().map(|d| d.lte).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::season::season_window;

    fn season_records(year: i32, labelled: bool) -> Vec<DayRecord> {
        let (first, last) = season_window(year);
        first
            .iter_days()
            .take_while(|d| *d <= last)
            .enumerate()
            .map(|(i, d)| {
                let mut r = DayRecord::empty(d);
                for (k, c) in WeatherColumn::ALL.iter().enumerate() {
                    r.set(*c, Some((i + k) as f64 % 17.0));
                }
                r.set(WeatherColumn::MinAt, Some(-1.0));
                r.set(WeatherColumn::AvgAt, Some(i as f64 % 5.0));
                r.set(WeatherColumn::MaxAt, Some(5.0));
                r.set(WeatherColumn::MeanAt, None);
                if labelled && i % 7 == 0 {
                    r.lte[1] = Some(-10.0);
                }
                if i % 11 == 3 {
                    r.set(WeatherColumn::AvgRh, None);
                }
                r
            })
            .collect()
    }

    #[test]
    fn groups_filters_and_drops() {
        let mut records = Vec::new();
        for y in 2000..2004 {
            records.extend(
                season_records(y, true)
                    .into_iter()
                    .map(|r| ("A".to_string(), r)),
            );
        }
        for y in 2000..2004 {
            records.extend(
                season_records(y, y < 2002)
                    .into_iter()
                    .map(|r| ("B".to_string(), r)),
            );
        }
        records.extend(
            season_records(2010, true)
                .into_iter()
                .map(|r| ("C".to_string(), r)),
        );
        let (corpus, log) = build_corpus(records, &CorpusOptions::default()).unwrap();
        assert_eq!(corpus.names(), vec!["A"]);
        assert!(corpus.check_invariants());
        assert_eq!(corpus.cultivars[0].seasons.len(), 4);
        assert_eq!(log.rejected_seasons.len(), 2);
        assert_eq!(
            log.dropped_cultivars,
            vec![("B".to_string(), 2), ("C".to_string(), 1)]
        );

        let s = &corpus.cultivars[0].seasons[0];
        assert_eq!(s.features.shape(), (251, 12));
        assert!(s.features.is_finite());
        assert!(s.mean_at.iter().all(|&m| m == 2.0));
        assert_eq!(s.n_labels(), 36);
    }

    #[test]
    fn subset_renumbers() {
        let mut records = Vec::new();
        for name in ["A", "B"] {
            for y in 2000..2003 {
                records.extend(
                    season_records(y, true)
                        .into_iter()
                        .map(|r| (name.to_string(), r)),
                );
            }
        }
        let (corpus, _) = build_corpus(records, &CorpusOptions::default()).unwrap();
        let sub = corpus.subset(&[1]);
        assert_eq!(sub.names(), vec!["B"]);
        assert!(sub.check_invariants());
        assert_eq!(corpus.id_of("B").unwrap(), 1);
        assert!(corpus.id_of("Z").is_err());
    }

    #[test]
    fn all_absent_feature_is_named() {
        let mut recs = season_records(2000, true);
        for r in &mut recs {
            r.set(WeatherColumn::WsMph, None);
        }
        let seasons = extract_seasons(0, &recs);
        match prepare_season(&seasons[0], "A", &WeatherColumn::DEFAULT_FEATURES).unwrap_err() {
            DataError::AllAbsent {
                feature,
                start_year,
                ..
            } => {
                assert_eq!(feature, "WS_MPH");
                assert_eq!(start_year, 2000);
            }
            e => panic!("{e:?}"),
        }
    }
}
