use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};

use super::record::DayRecord;

/// One cultivar's dormant season, September 7 through May 15.
#[derive(Clone, Debug, PartialEq)]
pub struct Season {
    pub cultivar_id: usize,
    pub start_year: i32,
    pub days: Vec<DayRecord>,
}

impl Season {
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// First and last day of the season starting in `start_year`.
pub fn season_window(start_year: i32) -> (NaiveDate, NaiveDate) {
    (
        NaiveDate::from_ymd_opt(start_year, 9, 7).expect("valid date"),
        NaiveDate::from_ymd_opt(start_year + 1, 5, 15).expect("valid date"),
    )
}

/// Number of days in the season starting in `start_year` (251 or 252).
pub fn season_length(start_year: i32) -> usize {
    let (first, last) = season_window(start_year);
    (last - first).num_days() as usize + 1
}

/// The season a date belongs to, if any.
pub fn season_of(date: NaiveDate) -> Option<i32> {
    let year = date.year();
    if date >= season_window(year).0 {
        Some(year)
    } else if date <= season_window(year - 1).1 {
        Some(year - 1)
    } else {
        None
    }
}

/// Cuts one cultivar's records into full-calendar seasons.
///
/// A season is emitted for every window holding at least one record.
/// Days without a record become all-absent days; records outside every
/// window are dropped. If a date repeats, its first record wins.
pub fn extract_seasons(cultivar_id: usize, records: &[DayRecord]) -> Vec<Season> {
    let mut by_date: BTreeMap<NaiveDate, &DayRecord> = BTreeMap::new();
    let mut years = BTreeSet::new();
    for r in records {
        if let Some(year) = season_of(r.date) {
            years.insert(year);
            by_date.entry(r.date).or_insert(r);
        }
    }
    years
        .into_iter()
        .map(|year| {
            let (first, last) = season_window(year);
            let days = first
                .iter_days()
                .take_while(|d| *d <= last)
                .map(|d| {
                    by_date
                        .get(&d)
                        .map_or_else(|| DayRecord::empty(d), |r| (*r).clone())
                })
                .collect();
            Season {
                cultivar_id,
                start_year: year,
                days,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_coverage(first: NaiveDate, last: NaiveDate) -> Vec<DayRecord> {
        first
            .iter_days()
            .take_while(|d| *d <= last)
            .map(DayRecord::empty)
            .collect()
    }

    #[test]
    fn non_leap_season_has_251_days() {
        let (first, last) = season_window(2009);
        let seasons = extract_seasons(0, &full_coverage(first, last));
        assert_eq!(seasons.len(), 1);
        assert_eq!(seasons[0].len(), 251);
        assert_eq!(seasons[0].days[0].date, first);
        assert_eq!(seasons[0].days[250].date, last);
    }

    #[test]
    fn leap_february_adds_a_day() {
        assert_eq!(season_length(2011), 252);
        assert_eq!(season_length(2012), 251);
        let (first, last) = season_window(2011);
        assert_eq!(
            extract_seasons(0, &full_coverage(first, last))[0].len(),
            252
        );
    }

    #[test]
    fn summer_only_records_emit_nothing() {
        let june = full_coverage(
            NaiveDate::from_ymd_opt(2010, 6, 1).unwrap(),
            NaiveDate::from_ymd_opt(2010, 6, 30).unwrap(),
        );
        assert!(extract_seasons(0, &june).is_empty());
    }

    #[test]
    fn sparse_window_is_padded_with_empty_days() {
        let mut r = DayRecord::empty(NaiveDate::from_ymd_opt(2015, 1, 10).unwrap());
        r.lte[1] = Some(-20.0);
        let seasons = extract_seasons(3, &[r.clone()]);
        assert_eq!(seasons.len(), 1);
        let s = &seasons[0];
        assert_eq!((s.cultivar_id, s.start_year, s.len()), (3, 2014, 251));
        let labelled: Vec<_> = s.days.iter().filter(|d| d.lte[1].is_some()).collect();
        assert_eq!(labelled, vec![&r]);
    }

    #[test]
    fn consecutive_seasons_partition_dates() {
        let records = full_coverage(
            NaiveDate::from_ymd_opt(2009, 9, 1).unwrap(),
            NaiveDate::from_ymd_opt(2011, 6, 1).unwrap(),
        );
        let seasons = extract_seasons(0, &records);
        assert_eq!(seasons.len(), 2);
        let mut seen = BTreeSet::new();
        for s in &seasons {
            for w in s.days.windows(2) {
                assert_eq!((w[1].date - w[0].date).num_days(), 1);
            }
            for d in &s.days {
                assert!(seen.insert(d.date));
            }
        }
    }
}
