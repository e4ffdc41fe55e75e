use std::f64::consts::PI;

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::dataio::{derive_mean_at, season_window, DayRecord, WeatherColumn};

const ANNUAL_MEAN: f64 = 11.0;
const ANNUAL_AMPLITUDE: f64 = 12.5;
/// Day of year of the warmest point of the annual cycle.
const WARMEST_DAY: f64 = 200.0;
const AR_COEF: f64 = 0.7;
const NOISE_SD: f64 = 3.0;

/// One season of daily weather, with no labels.
///
/// The same `(seed, start_year)` always gives the same days, so cultivars
/// sharing a year also share its weather.
pub fn generate_weather(seed: u64, start_year: i32) -> Vec<DayRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(1_000_003) ^ (start_year as u64).wrapping_mul(0x2545_f491),
    );
    let shock = Normal::new(0.0, NOISE_SD * (1.0 - AR_COEF * AR_COEF).sqrt()).expect("valid");
    let unit: Normal<f64> = Normal::new(0.0, 1.0).expect("valid");
    let rain = Exp::new(10.0).expect("valid");
    let (first, last) = season_window(start_year);
    let mut anomaly = Normal::new(0.0, NOISE_SD).expect("valid").sample(&mut rng);
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .map(|date| {
            anomaly = AR_COEF * anomaly + shock.sample(&mut rng);
            let doy = date.ordinal0() as f64;
            let trend =
                ANNUAL_MEAN + ANNUAL_AMPLITUDE * (2.0 * PI * (doy - WARMEST_DAY) / 365.25).cos();
            let centre = trend + anomaly;
            let range = (10.0 + 3.0 * unit.sample(&mut rng)).clamp(2.0, 20.0);
            let min_at = centre - range / 2.0;
            let max_at = centre + range / 2.0;
            let avg_at = (centre + 0.15 * range * unit.sample(&mut rng)).clamp(min_at, max_at);

            let avg_rh =
                (72.0 - 1.4 * (centre - 8.0) + 8.0 * unit.sample(&mut rng)).clamp(5.0, 100.0);
            let rh_spread = rng.gen_range(8.0..25.0);
            let min_rh = (avg_rh - rh_spread).clamp(0.0, 100.0);
            let max_rh = (avg_rh + rh_spread).clamp(0.0, 100.0);
            let dew = |t: f64, rh: f64| dewpoint(t, rh.max(1.0));
            let p_inches = if rng.gen_bool(0.3) {
                rain.sample(&mut rng)
            } else {
                0.0
            };
            let ws = (4.0 + 2.5 * unit.sample(&mut rng)).abs();
            let max_ws = ws * rng.gen_range(1.3..2.5);

            let mut r = DayRecord::empty(date);
            let values = [
                (WeatherColumn::MinAt, min_at),
                (WeatherColumn::AvgAt, avg_at),
                (WeatherColumn::MaxAt, max_at),
                (WeatherColumn::MeanAt, derive_mean_at(min_at, max_at)),
                (WeatherColumn::MinRh, min_rh),
                (WeatherColumn::AvgRh, avg_rh),
                (WeatherColumn::MaxRh, max_rh),
                (
                    WeatherColumn::MinDewpt,
                    dew(min_at, max_rh.min(100.0)).min(dew(avg_at, avg_rh)),
                ),
                (WeatherColumn::AvgDewpt, dew(avg_at, avg_rh)),
                (
                    WeatherColumn::MaxDewpt,
                    dew(max_at, min_rh).max(dew(avg_at, avg_rh)),
                ),
                (WeatherColumn::PInches, p_inches),
                (WeatherColumn::WsMph, ws),
                (WeatherColumn::MaxWsMph, max_ws),
            ];
            for (c, v) in values {
                r.set(c, Some(v));
            }
            r
        })
        .collect()
}

/// Magnus approximation, °C.
fn dewpoint(t: f64, rh: f64) -> f64 {
    let (a, b) = (17.625, 243.04);
    let g = (rh / 100.0).ln() + a * t / (b + t);
    b * g / (a - g)
}
