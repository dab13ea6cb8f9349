use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csvio::{fmt_f64, write_rows, CsvError};
use crate::scalar::Scalar;

use super::MileageError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics<T> {
    /// Mean absolute daily error, km.
    pub mae: T,
    /// Absolute error of the summed distance, km.
    pub e_week: T,
    /// `e_week` as a percentage of the actual total.
    pub e_week_pct: T,
}

/// `mae = Σ|y−ŷ|/N`, `e_week = |Σy − Σŷ|`, `e_week_pct = 100·e_week/Σy`.
pub fn evaluate_metrics<T: Scalar>(y: &[T], y_hat: &[T]) -> Result<PredictionMetrics<T>, MileageError> {
    if y.len() != y_hat.len() || y.is_empty() {
        return Err(MileageError::LengthMismatch {
            expected: y.len().max(1),
            found: y_hat.len(),
        });
    }
    let n = T::count(y.len());
    let mae = y.iter().zip(y_hat).map(|(&a, &b)| (a - b).abs()).sum::<T>() / n;
    let total: T = y.iter().copied().sum();
    let total_hat: T = y_hat.iter().copied().sum();
    if total == T::zero() {
        return Err(MileageError::ZeroWeekTotal);
    }
    let e_week = (total - total_hat).abs();
    Ok(PredictionMetrics {
        mae,
        e_week,
        e_week_pct: e_week / total * T::lit(100.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateThresholds<T> {
    pub mae_max: T,
    pub e_week_max: T,
    pub e_week_pct_max: T,
}

impl<T: Scalar> Default for GateThresholds<T> {
    fn default() -> Self {
        Self {
            mae_max: T::lit(2.5),
            e_week_max: T::lit(5.7),
            e_week_pct_max: T::lit(21.3),
        }
    }
}

/// All three errors within their thresholds, boundaries included.
pub fn gate<T: Scalar>(m: &PredictionMetrics<T>, t: &GateThresholds<T>) -> bool {
    m.mae <= t.mae_max && m.e_week <= t.e_week_max && m.e_week_pct <= t.e_week_pct_max
}

/// `max(ŷ − d, 0)`: forecast distance not explained by the habitual route.
pub fn extra_mileage_delta<T: Scalar>(forecast_km: T, routed_km: T) -> T {
    (forecast_km - routed_km).max(T::zero())
}

pub fn write_metrics_csv(path: &Path, folds: &[PredictionMetrics<f64>]) -> Result<(), CsvError> {
    write_rows(
        path,
        &["fold", "mae", "e_week", "e_week_pct"],
        folds.iter().enumerate().map(|(i, m)| {
            [
                (i + 1).to_string(),
                fmt_f64(m.mae),
                fmt_f64(m.e_week),
                fmt_f64(m.e_week_pct),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_cancellation() {
        let m = evaluate_metrics(&[10.0; 7], &[10.0; 7]).unwrap();
        assert_eq!((m.mae, m.e_week, m.e_week_pct), (0.0, 0.0, 0.0));
        let m = evaluate_metrics(&[10.0, 10.0], &[12.0, 8.0]).unwrap();
        assert_eq!((m.mae, m.e_week, m.e_week_pct), (2.0, 0.0, 0.0));
    }

    #[test]
    fn three_day_example() {
        let m = evaluate_metrics::<f64>(&[10.0, 20.0, 30.0], &[12.0, 18.0, 36.0]).unwrap();
        assert!((m.mae - 10.0 / 3.0).abs() < 1e-12);
        assert!((m.e_week - 6.0).abs() < 1e-12);
        assert!((m.e_week_pct - 10.0).abs() < 1e-12);
        let m32 = evaluate_metrics(&[10.0f32, 20.0, 30.0], &[12.0, 18.0, 36.0]).unwrap();
        assert!((m32.e_week_pct - 10.0).abs() < 1e-5);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            evaluate_metrics(&[1.0, 2.0], &[1.0]),
            Err(MileageError::LengthMismatch { .. })
        ));
        assert!(matches!(
            evaluate_metrics(&[0.0, 0.0], &[1.0, 1.0]),
            Err(MileageError::ZeroWeekTotal)
        ));
    }

    #[test]
    fn gate_examples() {
        let t = GateThresholds::default();
        let m = |a, b, c| PredictionMetrics {
            mae: a,
            e_week: b,
            e_week_pct: c,
        };
        assert!(gate(&m(2.0, 5.0, 20.0), &t));
        assert!(!gate(&m(3.0, 5.0, 20.0), &t));
        assert!(gate(&m(2.5, 5.7, 21.3), &t));
    }

    #[test]
    fn delta_clamps() {
        assert_eq!(extra_mileage_delta(30.0, 25.0), 5.0);
        assert_eq!(extra_mileage_delta(25.0, 25.0), 0.0);
        assert_eq!(extra_mileage_delta(20.0, 25.0), 0.0);
    }
}
