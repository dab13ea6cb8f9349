use std::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::scalar::{mean, std_dev};

use super::features::{build_features, row_at, DailySeries};
use super::forest::{fit_forest, ForestModel, ForestParams};
use super::metrics::{evaluate_metrics, gate, GateThresholds, PredictionMetrics};
use super::MileageError;

/// Forecasts the `days` (≤ 7) days following `history`. Within the horizon
/// the previous-day lag and rolling mean use earlier forecasts, since the
/// actual distances are not yet known; the weekly lag is always observed.
pub fn forecast_recursive(
    model: &ForestModel<f64>,
    history: &DailySeries,
    days: usize,
) -> Result<Vec<f64>, MileageError> {
    if days > 7 {
        return Err(MileageError::LengthMismatch {
            expected: 7,
            found: days,
        });
    }
    if history.len() < 7 {
        return Err(MileageError::SeriesTooShort {
            days: history.len(),
            needed: 7,
        });
    }
    let mut work = history.clone();
    let mut out = Vec::with_capacity(days);
    for _ in 0..days {
        let row = row_at(&work, work.len());
        let y = model.predict_row(&row)?;
        out.push(y);
        work.km.push(y);
        if let Some(s) = work.stats.as_mut() {
            s.push(None);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    /// Feature-row indices used for training.
    pub train_rows: Range<usize>,
    /// Feature-row indices of the forecast week.
    pub test_rows: Range<usize>,
    pub test_start: NaiveDate,
    pub actual: Vec<f64>,
    pub forecast: Vec<f64>,
    pub metrics: PredictionMetrics<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub window_weeks: usize,
    pub folds: Vec<Fold>,
    pub mean: PredictionMetrics<f64>,
    /// Population standard deviation across folds.
    pub std: PredictionMetrics<f64>,
}

impl CvReport {
    pub fn metrics(&self) -> Vec<PredictionMetrics<f64>> {
        self.folds.iter().map(|f| f.metrics).collect()
    }
}

/// Every fold the data allows: train on `window_weeks` consecutive weeks of
/// feature rows, forecast the following week, slide by one week.
pub fn sliding_cv(
    series: &DailySeries,
    window_weeks: usize,
    params: ForestParams,
    seed: u64,
) -> Result<CvReport, MileageError> {
    let weeks = build_features(series)?.len() / 7;
    if weeks <= window_weeks {
        return Err(MileageError::InsufficientHistory {
            weeks,
            window: window_weeks,
        });
    }
    sliding_cv_on_weeks(series, window_weeks, params, seed, window_weeks..weeks)
}

/// Like [`sliding_cv`] but only for the given test weeks (feature-row week
/// indices), so different window sizes can be scored on the same weeks.
pub fn sliding_cv_on_weeks(
    series: &DailySeries,
    window_weeks: usize,
    params: ForestParams,
    seed: u64,
    test_weeks: Range<usize>,
) -> Result<CvReport, MileageError> {
    if window_weeks < 2 {
        return Err(MileageError::InvalidWindow(window_weeks));
    }
    let rows = build_features(series)?;
    let weeks = rows.len() / 7;
    if test_weeks.is_empty() || test_weeks.start < window_weeks || test_weeks.end > weeks {
        return Err(MileageError::InsufficientHistory {
            weeks,
            window: window_weeks,
        });
    }
    let mut folds = Vec::new();
    for (index, w) in test_weeks.enumerate() {
        let train_rows = 7 * (w - window_weeks)..7 * w;
        let test_rows = 7 * w..7 * (w + 1);
        let model = fit_forest::<f64>(&rows[train_rows.clone()], params, seed)?;
        // row r describes day r + 7 of the series
        let forecast = forecast_recursive(&model, &series.prefix(test_rows.start + 7), 7)?;
        let actual: Vec<f64> = rows[test_rows.clone()]
            .iter()
            .map(|r| r.target.expect("built from observed days"))
            .collect();
        let metrics = evaluate_metrics(&actual, &forecast)?;
        folds.push(Fold {
            index,
            test_start: rows[test_rows.start].date,
            train_rows,
            test_rows,
            actual,
            forecast,
            metrics,
        });
    }
    let (mean, std) = aggregate(&folds);
    Ok(CvReport {
        window_weeks,
        folds,
        mean,
        std,
    })
}

fn aggregate(folds: &[Fold]) -> (PredictionMetrics<f64>, PredictionMetrics<f64>) {
    let col = |f: fn(&PredictionMetrics<f64>) -> f64| -> Vec<f64> { folds.iter().map(|x| f(&x.metrics)).collect() };
    let (a, b, c) = (col(|m| m.mae), col(|m| m.e_week), col(|m| m.e_week_pct));
    let m = |v: &[f64]| mean(v).unwrap_or(f64::NAN);
    let s = |v: &[f64]| std_dev(v).unwrap_or(f64::NAN);
    (
        PredictionMetrics {
            mae: m(&a),
            e_week: m(&b),
            e_week_pct: m(&c),
        },
        PredictionMetrics {
            mae: s(&a),
            e_week: s(&b),
            e_week_pct: s(&c),
        },
    )
}

/// Result of validating on the most recent week and then forecasting the
/// week after the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub accepted: bool,
    pub metrics: PredictionMetrics<f64>,
    /// Dates and forecasts of the seven days after the series.
    pub next_week: Vec<(NaiveDate, f64)>,
}

/// Scores the latest full week with a model trained on the preceding
/// `window_weeks`, gates it, then refits on the latest `window_weeks` and
/// forecasts the next seven days.
pub fn validate_forecast(
    series: &DailySeries,
    window_weeks: usize,
    params: ForestParams,
    seed: u64,
    thresholds: &GateThresholds<f64>,
) -> Result<Validation, MileageError> {
    let rows = build_features(series)?;
    let weeks = rows.len() / 7;
    if weeks <= window_weeks {
        return Err(MileageError::InsufficientHistory {
            weeks,
            window: window_weeks,
        });
    }
    let cv = sliding_cv_on_weeks(series, window_weeks, params, seed, weeks - 1..weeks)?;
    let metrics = cv.folds[0].metrics;

    let train = &rows[rows.len() - 7 * window_weeks..];
    let model = fit_forest::<f64>(train, params, seed)?;
    let forecast = forecast_recursive(&model, series, 7)?;
    let next_week = (0..7).map(|j| series.date(series.len() + j)).zip(forecast).collect();
    Ok(Validation {
        accepted: gate(&metrics, thresholds),
        metrics,
        next_week,
    })
}
