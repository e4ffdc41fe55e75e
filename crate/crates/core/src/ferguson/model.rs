use serde::{Deserialize, Serialize};

use super::FergusonError;

/// Parameters of the reconstructed thermal-time hardiness model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FergusonParams {
    pub t_th: f64,
    pub k_a_endo: f64,
    pub k_a_eco: f64,
    pub k_d_endo: f64,
    pub k_d_eco: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub c_star: f64,
    pub theta: f64,
    pub h_init: f64,
}

impl FergusonParams {
    pub const KEYS: [&'static str; 10] = [
        "t_th", "k_a_endo", "k_a_eco", "k_d_endo", "k_d_eco", "h_min", "h_max", "c_star", "theta",
        "h_init",
    ];

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.t_th,
            self.k_a_endo,
            self.k_a_eco,
            self.k_d_endo,
            self.k_d_eco,
            self.h_min,
            self.h_max,
            self.c_star,
            self.theta,
            self.h_init,
        ]
    }

    pub fn from_array(v: [f64; 10]) -> Self {
        Self {
            t_th: v[0],
            k_a_endo: v[1],
            k_a_eco: v[2],
            k_d_endo: v[3],
            k_d_eco: v[4],
            h_min: v[5],
            h_max: v[6],
            c_star: v[7],
            theta: v[8],
            h_init: v[9],
        }
    }

    pub fn validate(&self) -> Result<(), FergusonError> {
        let fail = |m: &str| Err(FergusonError::InvalidParams(m.to_string()));
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return fail("non-finite value");
        }
        if !(self.h_min < self.h_max && self.h_max < 0.0) {
            return fail("need h_min < h_max < 0");
        }
        if !(self.c_star < 0.0) {
            return fail("need c_star < 0");
        }
        if [self.k_a_endo, self.k_a_eco, self.k_d_endo, self.k_d_eco]
            .iter()
            .any(|&k| k < 0.0)
        {
            return fail("rates must be non-negative");
        }
        if !(self.theta > 0.0) {
            return fail("need theta > 0");
        }
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return fail("need h_init in [h_min, h_max]");
        }
        Ok(())
    }

    fn rates(&self, stage: Stage) -> (f64, f64) {
        match stage {
            Stage::Endo => (self.k_a_endo, self.k_d_endo),
            Stage::Eco => (self.k_a_eco, self.k_d_eco),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Endo,
    Eco,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FergusonState {
    /// Hardiness, °C.
    pub h: f64,
    /// Accumulated chilling degree-days (≤ 0).
    pub c: f64,
    pub stage: Stage,
}

impl FergusonState {
    pub fn initial(p: &FergusonParams) -> Self {
        Self {
            h: p.h_init,
            c: 0.0,
            stage: Stage::Endo,
        }
    }
}

/// Heating and chilling degree-days of one day.
pub fn thermal_time(t_mean: f64, t_th: f64) -> (f64, f64) {
    let d = t_mean - t_th;
    (d.max(0.0), d.min(0.0))
}

/// Advances the model by one day.
pub fn ferguson_step(state: FergusonState, t_mean: f64, p: &FergusonParams) -> FergusonState {
    let (dd_h, dd_c) = thermal_time(t_mean, p.t_th);
    let c = state.c + dd_c;
    let stage = if c <= p.c_star {
        Stage::Eco
    } else {
        state.stage
    };
    let dp = (c.abs() / p.c_star.abs()).min(1.0).powf(p.theta);
    let span = p.h_max - p.h_min;
    let f_a = (state.h - p.h_min) / span;
    let f_d = (p.h_max - state.h) / span;
    let (k_a, k_d) = p.rates(stage);
    let dh = k_a * dd_c * f_a + k_d * dd_h * dp * f_d;
    FergusonState {
        h: (state.h + dh).clamp(p.h_min, p.h_max),
        c,
        stage,
    }
}

/// Predicted LTE50 for each day: the hardiness after that day's update.
pub fn ferguson_predict(mean_at: &[f64], p: &FergusonParams) -> Result<Vec<f64>, FergusonError> {
    let mut state = FergusonState::initial(p);
    mean_at
        .iter()
        .enumerate()
        .map(|(day, &t)| {
            if !t.is_finite() {
                return Err(FergusonError::MissingTemperature { day });
            }
            state = ferguson_step(state, t, p);
            Ok(state.h)
        })
        .collect()
}
