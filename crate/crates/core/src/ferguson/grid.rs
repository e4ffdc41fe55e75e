use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::PreparedSeason;

use super::model::{ferguson_predict, FergusonParams};
use super::FergusonError;

/// Candidate values per parameter. Without `h_init` every point starts
/// at its own `h_max`. Axes left out of a grid file take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FergusonGrid {
    pub t_th: Vec<f64>,
    pub k_a_endo: Vec<f64>,
    pub k_a_eco: Vec<f64>,
    pub k_d_endo: Vec<f64>,
    pub k_d_eco: Vec<f64>,
    pub h_min: Vec<f64>,
    pub h_max: Vec<f64>,
    pub c_star: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_init: Option<Vec<f64>>,
}

impl Default for FergusonGrid {
    fn default() -> Self {
        let rates = vec![0.02, 0.05, 0.1, 0.2];
        Self {
            t_th: vec![0.0, 3.0, 5.0, 7.0, 10.0],
            k_a_endo: rates.clone(),
            k_a_eco: rates.clone(),
            k_d_endo: rates.clone(),
            k_d_eco: rates,
            h_min: vec![-30.0, -25.0, -20.0],
            h_max: vec![-3.0, -5.0],
            c_star: vec![-300.0, -500.0, -700.0],
            theta: vec![1.0, 2.0],
            h_init: None,
        }
    }
}

impl FergusonGrid {
    /// A one-point grid.
    pub fn single(p: &FergusonParams) -> Self {
        let a = p.to_array();
        Self {
            t_th: vec![a[0]],
            k_a_endo: vec![a[1]],
            k_a_eco: vec![a[2]],
            k_d_endo: vec![a[3]],
            k_d_eco: vec![a[4]],
            h_min: vec![a[5]],
            h_max: vec![a[6]],
            c_star: vec![a[7]],
            theta: vec![a[8]],
            h_init: Some(vec![a[9]]),
        }
    }

    /// Axes in key order, first key most significant.
    pub fn axes(&self) -> Vec<&[f64]> {
        let mut a: Vec<&[f64]> = vec![
            &self.t_th,
            &self.k_a_endo,
            &self.k_a_eco,
            &self.k_d_endo,
            &self.k_d_eco,
            &self.h_min,
            &self.h_max,
            &self.c_star,
            &self.theta,
        ];
        if let Some(h) = &self.h_init {
            a.push(h);
        }
        a
    }

    pub fn len(&self) -> usize {
        self.axes().iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis positions of a linear index.
    pub fn index_vector(&self, mut index: usize) -> Vec<usize> {
        let axes = self.axes();
        let mut v = vec![0; axes.len()];
        for (slot, axis) in v.iter_mut().zip(&axes).rev() {
            *slot = index % axis.len();
            index /= axis.len();
        }
        v
    }

    pub fn point(&self, index: usize) -> FergusonParams {
        let axes = self.axes();
        let iv = self.index_vector(index);
        let mut a = [0.0; 10];
        for (k, (&i, axis)) in iv.iter().zip(&axes).enumerate() {
            a[k] = axis[i];
        }
        if self.h_init.is_none() {
            a[9] = a[6];
        }
        FergusonParams::from_array(a)
    }

    pub fn from_toml(text: &str) -> Result<Self, FergusonError> {
        toml::from_str(text).map_err(|e| FergusonError::GridFile(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grid serializes")
    }
}

/// A season reduced to what the baseline needs.
#[derive(Clone, Debug)]
pub struct SeasonSeries {
    pub mean_at: Vec<f64>,
    pub lte50: Vec<Option<f64>>,
}

impl From<&PreparedSeason> for SeasonSeries {
    fn from(s: &PreparedSeason) -> Self {
        Self {
            mean_at: s.mean_at.clone(),
            lte50: s.lte50().collect(),
        }
    }
}

/// Pooled LTE50 squared error of one parameter setting.
pub fn squared_error(
    seasons: &[SeasonSeries],
    p: &FergusonParams,
) -> Result<(f64, usize), FergusonError> {
    let mut sum = 0.0;
    let mut n = 0;
    for s in seasons {
        let pred = ferguson_predict(&s.mean_at, p)?;
        for (h, y) in pred.iter().zip(&s.lte50) {
            if let Some(y) = y {
                sum += (h - y) * (h - y);
                n += 1;
            }
        }
    }
    Ok((sum, n))
}

pub fn rmse(seasons: &[SeasonSeries], p: &FergusonParams) -> Result<f64, FergusonError> {
    match squared_error(seasons, p)? {
        (_, 0) => Err(FergusonError::NoLabels),
        (s, n) => Ok((s / n as f64).sqrt()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub params: FergusonParams,
    pub rmse: f64,
    pub index: usize,
    pub evaluated: usize,
    pub skipped: usize,
}

/// RMSE of every grid point, `None` for invalid points.
pub fn evaluate_grid(
    seasons: &[SeasonSeries],
    grid: &FergusonGrid,
) -> Result<Vec<Option<f64>>, FergusonError> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            match p.validate() {
                Ok(()) => rmse(seasons, &p).map(Some),
                Err(_) => Ok(None),
            }
        })
        .collect()
}

/// Exhaustive search for the lowest pooled RMSE.
///
/// Ties go to the smallest linear index, which is the lexicographically
/// smallest index vector, so the result does not depend on scheduling.
pub fn grid_search(
    seasons: &[SeasonSeries],
    grid: &FergusonGrid,
) -> Result<GridResult, FergusonError> {
    if seasons.iter().all(|s| s.lte50.iter().all(Option::is_none)) {
        return Err(FergusonError::NoLabels);
    }
    let scores = evaluate_grid(seasons, grid)?;
    let skipped = scores.iter().filter(|s| s.is_none()).count();
    if skipped > 0 {
        log::info!("grid search skipped {skipped} invalid points");
    }
    let (index, best) = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(FergusonError::EmptyGrid)?;
    Ok(GridResult {
        params: grid.point(index),
        rmse: best,
        index,
        evaluated: scores.len() - skipped,
        skipped,
    })
}

/// `key = value` lines for the tuned parameters and their RMSE.
pub fn format_tuned(p: &FergusonParams, rmse: f64) -> String {
    let mut out = String::new();
    for (k, v) in FergusonParams::KEYS.iter().zip(p.to_array()) {
        writeln!(out, "{k} = {v:?}").unwrap();
    }
    writeln!(out, "rmse = {rmse:?}").unwrap();
    out
}

/// Reads the output of [`format_tuned`].
pub fn parse_tuned(text: &str) -> Result<(FergusonParams, f64), FergusonError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Tuned {
        #[serde(flatten)]
        params: FergusonParams,
        rmse: f64,
    }
    let t: Tuned = toml::from_str(text).map_err(|e| FergusonError::GridFile(e.to_string()))?;
    Ok((t.params, t.rmse))
}
