use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use super::HarnessError;

/// One line of the long-form results file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub trial: usize,
    pub cultivar: String,
    pub model: String,
    pub rmse_lte50: f64,
    pub n_test_labels: usize,
    pub seed: u64,
    pub config_hash: String,
}

/// One day of a prediction dump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionRow {
    pub cultivar: String,
    pub season: i32,
    pub date: NaiveDate,
    pub pred_lte10: Option<f64>,
    pub pred_lte50: f64,
    pub pred_lte90: Option<f64>,
    pub label_lte50: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionDump {
    pub name: String,
    pub rows: Vec<PredictionRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<Option<f64>>,
}

/// A summary table; empty cells are written as blanks.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, cells: Vec<Option<f64>>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(TableRow {
            label: label.into(),
            cells,
        });
    }

    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn cell(&self, label: &str, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.row(label)?.cells[j]
    }

    pub fn row_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["cultivar".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.label.clone()];
            rec.extend(
                r.cells
                    .iter()
                    .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec).map_err(csv_err)?;
        }
        finish(w)
    }

    /// Plain-text rendering with two decimals.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = format!("{:width$}", "Cultivar");
        for c in &self.columns {
            out.push_str(&format!(" | {c:>10}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{:width$}", r.label));
            for c in &r.cells {
                match c {
                    Some(v) => out.push_str(&format!(" | {v:>10.2}")),
                    None => out.push_str(&format!(" | {:>10}", "")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Everything an experiment produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub table: Table,
    pub results: Vec<ResultRow>,
    pub predictions: Vec<PredictionDump>,
}

impl Report {
    /// Writes `<experiment>_table.csv`, `<experiment>_results.csv` and one
    /// file per prediction dump under `predictions/<experiment>/`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join(format!("{}_table.csv", self.experiment)),
            self.table.to_csv()?,
        )?;
        fs::write(
            dir.join(format!("{}_results.csv", self.experiment)),
            results_csv(&self.results)?,
        )?;
        if !self.predictions.is_empty() {
            let pdir = dir.join("predictions").join(&self.experiment);
            fs::create_dir_all(&pdir)?;
            for d in &self.predictions {
                fs::write(
                    pdir.join(format!("{}.csv", d.name)),
                    predictions_csv(&d.rows)?,
                )?;
            }
        }
        Ok(())
    }
}

pub fn results_csv(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    finish(w)
}

pub fn predictions_csv(rows: &[PredictionRow]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record([
        "cultivar",
        "season",
        "date",
        "pred_lte10",
        "pred_lte50",
        "pred_lte90",
        "label_lte50",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    finish(w)
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e.to_string()))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, HarnessError> {
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_cells_and_header() {
        let mut t = Table::new(vec!["High".into(), "Low".into()]);
        t.push("Merlot", vec![Some(1.5), None]);
        assert_eq!(t.to_csv().unwrap(), "cultivar,High,Low\nMerlot,1.5,\n");
        assert_eq!(t.cell("Merlot", "High"), Some(1.5));
        assert_eq!(t.cell("Merlot", "Low"), None);
    }

    #[test]
    fn prediction_header_is_written_once() {
        let row = PredictionRow {
            cultivar: "A".into(),
            season: 2001,
            date: NaiveDate::from_ymd_opt(2001, 9, 7).unwrap(),
            pred_lte10: None,
            pred_lte50: -3.25,
            pred_lte90: None,
            label_lte50: Some(-3.0),
        };
        let text = predictions_csv(&[row.clone(), row]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "cultivar,season,date,pred_lte10,pred_lte50,pred_lte90,label_lte50"
        );
        assert_eq!(lines[1], "A,2001,2001-09-07,,-3.25,,-3.0");
        assert_eq!(lines.len(), 3);
    }
}
