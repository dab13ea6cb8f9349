use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;
use crate::telemetry::DailyStats;

use super::MileageError;

/// Two weeks: one to warm up the weekly lag, one to train on.
pub const MIN_SERIES_DAYS: usize = 14;

/// Dense daily km starting at `start`, with optional per-day trip statistics
/// aligned to `km` (`None` for a day means no driving was recorded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub start: NaiveDate,
    pub km: Vec<f64>,
    pub stats: Option<Vec<Option<DailyStats>>>,
}

impl DailySeries {
    pub fn new(start: NaiveDate, km: Vec<f64>) -> Self {
        Self { start, km, stats: None }
    }

    pub fn with_stats(mut self, stats: Vec<Option<DailyStats>>) -> Self {
        self.stats = Some(stats);
        self
    }

    pub fn len(&self) -> usize {
        self.km.len()
    }

    pub fn is_empty(&self) -> bool {
        self.km.is_empty()
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.start + Days::new(i as u64)
    }

    /// First `n` days.
    pub fn prefix(&self, n: usize) -> DailySeries {
        DailySeries {
            start: self.start,
            km: self.km[..n].to_vec(),
            stats: self.stats.as_ref().map(|s| s[..n].to_vec()),
        }
    }
}

/// Trip statistics of the same weekday one week earlier. Same-day values
/// would leak the target, so only the lagged ones are features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaggedStats {
    pub n_trips: f64,
    pub avg_speed: Option<f64>,
    pub max_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyFeatureRow {
    pub date: NaiveDate,
    pub day_of_week: u32,
    pub month: u32,
    pub lag_1: f64,
    pub lag_7: f64,
    pub roll_7_mean: f64,
    pub stats: Option<LaggedStats>,
    pub target: Option<f64>,
}

const BASE_FEATURES: [&str; 5] = ["day_of_week", "month", "lag_1", "lag_7", "roll_7_mean"];
const STAT_FEATURES: [&str; 4] = ["n_trips_lag7", "avg_speed_lag7", "max_speed_lag7", "speed_known_lag7"];

pub fn feature_names(with_stats: bool) -> Vec<String> {
    let stats: &[&str] = if with_stats { &STAT_FEATURES } else { &[] };
    BASE_FEATURES.iter().chain(stats).map(|s| s.to_string()).collect()
}

impl DailyFeatureRow {
    pub fn has_stats(&self) -> bool {
        self.stats.is_some()
    }

    pub fn schema(&self) -> Vec<String> {
        feature_names(self.has_stats())
    }

    /// Raw feature vector in schema order; absent speeds are NaN.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            f64::from(self.day_of_week),
            f64::from(self.month),
            self.lag_1,
            self.lag_7,
            self.roll_7_mean,
        ];
        if let Some(s) = &self.stats {
            let known = s.avg_speed.is_some() && s.max_speed.is_some();
            v.extend([
                s.n_trips,
                s.avg_speed.unwrap_or(f64::NAN),
                s.max_speed.unwrap_or(f64::NAN),
                if known { 1.0 } else { 0.0 },
            ]);
        }
        v
    }
}

/// Features for day `i` from `km[..i]` only; the target is `km[i]` if known.
pub(super) fn row_at(series: &DailySeries, i: usize) -> DailyFeatureRow {
    debug_assert!(i >= 7 && i <= series.km.len());
    let km = &series.km;
    let date = series.date(i);
    let stats = series.stats.as_ref().map(|s| match s.get(i - 7).copied().flatten() {
        Some(d) => LaggedStats {
            n_trips: f64::from(d.n_trips),
            avg_speed: (d.n_trips > 0).then_some(d.avg_speed_kmh),
            max_speed: (d.n_trips > 0).then_some(d.max_speed_kmh),
        },
        None => LaggedStats {
            n_trips: 0.0,
            avg_speed: None,
            max_speed: None,
        },
    });
    DailyFeatureRow {
        date,
        day_of_week: Weekday::of(date).number(),
        month: date.month(),
        lag_1: km[i - 1],
        lag_7: km[i - 7],
        roll_7_mean: km[i - 7..i].iter().sum::<f64>() / 7.0,
        stats,
        target: km.get(i).copied(),
    }
}

/// One row per day from the eighth onward.
pub fn build_features(series: &DailySeries) -> Result<Vec<DailyFeatureRow>, MileageError> {
    if series.len() < MIN_SERIES_DAYS {
        return Err(MileageError::SeriesTooShort {
            days: series.len(),
            needed: MIN_SERIES_DAYS,
        });
    }
    if let Some(s) = &series.stats {
        if s.len() != series.len() {
            return Err(MileageError::LengthMismatch {
                expected: series.len(),
                found: s.len(),
            });
        }
    }
    if let Some(i) = series.km.iter().position(|k| !k.is_finite()) {
        return Err(MileageError::NonFiniteTarget { date: series.date(i) });
    }
    Ok((7..series.len()).map(|i| row_at(series, i)).collect())
}
