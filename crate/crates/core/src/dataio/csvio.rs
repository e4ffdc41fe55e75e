//! Daily weather + LTE CSV files.
//!
//! Header names are matched exactly; empty cells are absent values.
//! Numeric columns missing from the header are treated as all-absent.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::record::{DayRecord, LteChannel, WeatherColumn};
use super::DataError;

pub const DATE: &str = "DATE";
pub const CULTIVAR: &str = "CULTIVAR";
pub const STATION: &str = "AWN_STATION";

/// Full header in canonical order.
pub fn header() -> Vec<&'static str> {
    let mut h = vec![DATE, CULTIVAR, STATION];
    h.extend(WeatherColumn::ALL.iter().map(|c| c.header()));
    h.extend(LteChannel::ALL.iter().map(|c| c.header()));
    h
}

/// Parses a CSV document into `(cultivar name, record)` pairs.
///
/// Rows without a CULTIVAR column (or with an empty cell) are attributed
/// to `default_cultivar`. Errors cite the file line and column name.
pub fn parse_weather_csv(
    bytes: &[u8],
    default_cultivar: &str,
) -> Result<Vec<(String, DayRecord)>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| DataError::parse(1, "", e.to_string()))?
        .clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let date_idx = *index
        .get(DATE)
        .ok_or_else(|| DataError::parse(1, DATE, "missing mandatory DATE column"))?;
    let cultivar_idx = index.get(CULTIVAR).copied();
    let station_idx = index.get(STATION).copied();
    let weather_idx: Vec<Option<usize>> = WeatherColumn::ALL
        .iter()
        .map(|c| index.get(c.header()).copied())
        .collect();
    let lte_idx: Vec<Option<usize>> = LteChannel::ALL
        .iter()
        .map(|c| index.get(c.header()).copied())
        .collect();

    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DataError::parse(line, "", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: Option<usize>| i.and_then(|i| record.get(i)).unwrap_or("");

        let date_text = cell(Some(date_idx));
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|e| {
            DataError::parse(line, DATE, format!("invalid date `{date_text}`: {e}"))
        })?;
        let cultivar = match cell(cultivar_idx) {
            "" => default_cultivar.to_string(),
            name => name.to_string(),
        };
        let station = match cell(station_idx) {
            "" => None,
            s => Some(s.to_string()),
        };

        let mut day = DayRecord::empty(date);
        day.station = station;
        for (column, idx) in WeatherColumn::ALL.iter().zip(&weather_idx) {
            day.set(*column, parse_number(cell(*idx), line, column.header())?);
        }
        for (channel, idx) in LteChannel::ALL.iter().zip(&lte_idx) {
            day.lte[channel.index()] = parse_number(cell(*idx), line, channel.header())?;
        }
        if let (Some(lo), Some(avg), Some(hi)) = (day.min_at(), day.avg_at(), day.max_at()) {
            if !(lo <= avg && avg <= hi) {
                return Err(DataError::parse(
                    line,
                    WeatherColumn::AvgAt.header(),
                    format!("AVG_AT {avg} outside [MIN_AT {lo}, MAX_AT {hi}]"),
                ));
            }
        }
        out.push((cultivar, day));
    }
    Ok(out)
}

/// Reads one CSV file; rows without a cultivar take the file stem.
pub fn read_weather_file(path: &Path) -> Result<Vec<(String, DayRecord)>, DataError> {
    let bytes = fs::read(path).map_err(|e| DataError::file(path, e))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unknown");
    parse_weather_csv(&bytes, stem)
}

/// Reads a single file, or every `*.csv` file of a directory in name order.
pub fn read_weather_dir(path: &Path) -> Result<Vec<(String, DayRecord)>, DataError> {
    if path.is_file() {
        return read_weather_file(path);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| DataError::file(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_weather_file(&f)?);
    }
    Ok(out)
}

fn parse_number(text: &str, line: u64, column: &str) -> Result<Option<f64>, DataError> {
    if text.is_empty() {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(DataError::parse(
            line,
            column,
            format!("non-numeric value `{text}`"),
        )),
    }
}

/// Writes records with the canonical header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_weather_csv<'a>(
    records: impl IntoIterator<Item = (&'a str, &'a DayRecord)>,
) -> Result<Vec<u8>, DataError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header())?;
    for (cultivar, day) in records {
        let mut row: Vec<String> = Vec::with_capacity(3 + 13 + 3);
        row.push(day.date.format("%Y-%m-%d").to_string());
        row.push(cultivar.to_string());
        row.push(day.station.clone().unwrap_or_default());
        row.extend(day.weather.iter().map(|v| fmt_opt(*v)));
        row.extend(day.lte.iter().map(|v| fmt_opt(*v)));
        writer.write_record(&row)?;
    }
    writer
        .into_inner()
        .map_err(|e| DataError::Io(e.into_error()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(rows: &[&str]) -> Vec<u8> {
        let mut s = header().join(",");
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s.into_bytes()
    }

    #[test]
    fn empty_mean_and_single_label() {
        let bytes = doc(&[
            "2010-01-05,Merlot,Prosser,-2.0,1.0,4.0,,80,85,90,-5,-4,-3,0.01,3.2,10.5,,-24.1,",
        ]);
        let rows = parse_weather_csv(&bytes, "x").unwrap();
        assert_eq!(rows.len(), 1);
        let (name, r) = &rows[0];
        assert_eq!(name, "Merlot");
        assert_eq!(r.get(WeatherColumn::MeanAt), None);
        assert_eq!(r.lte(LteChannel::Lte50), Some(-24.1));
        assert!(r.label_present(LteChannel::Lte50));
        assert!(!r.label_present(LteChannel::Lte10));
        assert!(!r.label_present(LteChannel::Lte90));
    }

    #[test]
    fn all_labels_empty() {
        let bytes = doc(&["2010-01-05,Merlot,,-2.0,1.0,4.0,1.0,80,85,90,-5,-4,-3,0,3,10,,,"]);
        let (_, r) = &parse_weather_csv(&bytes, "x").unwrap()[0];
        assert!(LteChannel::ALL.iter().all(|&c| !r.label_present(c)));
    }

    #[test]
    fn invalid_calendar_date_cites_row_and_column() {
        let bytes = doc(&[
            "2010-01-05,Merlot,,-2.0,1.0,4.0,1.0,80,85,90,-5,-4,-3,0,3,10,,,",
            "2010-13-40,Merlot,,-2.0,1.0,4.0,1.0,80,85,90,-5,-4,-3,0,3,10,,,",
        ]);
        match parse_weather_csv(&bytes, "x").unwrap_err() {
            DataError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "DATE");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_rejected() {
        let bytes = doc(&["2010-01-05,Merlot,,-2.0,warm,4.0,1.0,80,85,90,-5,-4,-3,0,3,10,,,"]);
        match parse_weather_csv(&bytes, "x").unwrap_err() {
            DataError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "AVG_AT");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_date_column_is_rejected() {
        let bytes = b"CULTIVAR,MIN_AT\nMerlot,1.0\n";
        assert!(matches!(
            parse_weather_csv(bytes, "x"),
            Err(DataError::Parse { ref column, .. }) if column == "DATE"
        ));
    }

    #[test]
    fn missing_cultivar_column_uses_default() {
        let bytes = b"DATE,MIN_AT,MAX_AT\n2011-02-01,-3,5\n";
        let rows = parse_weather_csv(bytes, "Riesling").unwrap();
        assert_eq!(rows[0].0, "Riesling");
        assert_eq!(rows[0].1.mean_at(), Some(1.0));
    }

    fn cell() -> impl Strategy<Value = Option<f64>> {
        prop_oneof![Just(None), (-1e4f64..1e4).prop_map(Some)]
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            weather in proptest::collection::vec(cell(), 13),
            lte in proptest::collection::vec(cell(), 3),
            day in 0i64..3000,
        ) {
            let mut r = DayRecord::empty(NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Duration::days(day));
            for (c, v) in WeatherColumn::ALL.iter().zip(&weather) {
                r.set(*c, *v);
            }
            // Keep the temperature ordering invariant.
            if let (Some(a), Some(b), Some(c)) = (r.min_at(), r.avg_at(), r.max_at()) {
                let mut t = [a, b, c];
                t.sort_by(f64::total_cmp);
                r.set(WeatherColumn::MinAt, Some(t[0]));
                r.set(WeatherColumn::AvgAt, Some(t[1]));
                r.set(WeatherColumn::MaxAt, Some(t[2]));
            }
            r.lte = [lte[0], lte[1], lte[2]];
            let bytes = write_weather_csv([("Syrah", &r)]).unwrap();
            let back = parse_weather_csv(&bytes, "x").unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(&back[0].0, "Syrah");
            prop_assert_eq!(&back[0].1, &r);
        }
    }
}
