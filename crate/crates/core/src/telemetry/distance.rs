use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::date_of;
use crate::routing::geo::haversine;

use super::{TelemetryError, TripSample};

/// Sample pairs further apart than this are treated as sensor dropout and
/// contribute no distance.
pub const DROPOUT_CUTOFF_S: i64 = 60;

/// Daily km as the left-rectangle sum of speed × Δt, with the default
/// dropout cutoff.
pub fn integrate_daily_distance(samples: &[TripSample]) -> Result<BTreeMap<NaiveDate, f64>, TelemetryError> {
    integrate_daily_distance_with(samples, DROPOUT_CUTOFF_S)
}

/// Each consecutive pair contributes `speed_i × (t_{i+1} − t_i)` to the day
/// of sample `i`, unless the interval exceeds `cutoff_s`. Every day holding a
/// sample appears in the output, possibly with 0 km.
pub fn integrate_daily_distance_with(
    samples: &[TripSample],
    cutoff_s: i64,
) -> Result<BTreeMap<NaiveDate, f64>, TelemetryError> {
    let mut days = BTreeMap::new();
    if let Some(last) = samples.last() {
        days.insert(date_of(last.timestamp), 0.0);
    }
    for (i, w) in samples.windows(2).enumerate() {
        let dt = w[1].timestamp - w[0].timestamp;
        if dt < 0 {
            return Err(TelemetryError::NegativeInterval {
                index: i + 1,
                from: w[0].timestamp,
                to: w[1].timestamp,
            });
        }
        let km = if dt <= cutoff_s {
            w[0].speed_kmh * dt as f64 / 3600.0
        } else {
            0.0
        };
        *days.entry(date_of(w[0].timestamp)).or_insert(0.0) += km;
    }
    Ok(days)
}

/// Daily km as the sum of great-circle steps between consecutive GPS fixes
/// that are at most `cutoff_s` apart. Independent cross-check of
/// [`integrate_daily_distance`].
pub fn geodesic_daily_distance(
    samples: &[TripSample],
    cutoff_s: i64,
) -> Result<BTreeMap<NaiveDate, f64>, TelemetryError> {
    let fixes: Vec<_> = samples
        .iter()
        .filter_map(|s| s.position.map(|p| (s.timestamp, p)))
        .collect();
    let mut days = BTreeMap::new();
    if let Some(last) = fixes.last() {
        days.insert(date_of(last.0), 0.0);
    }
    for (i, w) in fixes.windows(2).enumerate() {
        let dt = w[1].0 - w[0].0;
        if dt < 0 {
            return Err(TelemetryError::NegativeInterval {
                index: i + 1,
                from: w[0].0,
                to: w[1].0,
            });
        }
        let km = if dt <= cutoff_s {
            haversine(w[0].1, w[1].1) / 1000.0
        } else {
            0.0
        };
        *days.entry(date_of(w[0].0)).or_insert(0.0) += km;
    }
    Ok(days)
}

/// Per-day driving statistics used as optional forecasting features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyStats {
    pub n_trips: u32,
    pub avg_speed_kmh: f64,
    pub max_speed_kmh: f64,
}

/// A trip is a maximal run of samples without dropout that contains motion.
/// Speed statistics use moving samples only.
pub fn daily_trip_stats(samples: &[TripSample], cutoff_s: i64) -> BTreeMap<NaiveDate, DailyStats> {
    let mut acc: BTreeMap<NaiveDate, (u32, f64, usize, f64)> = BTreeMap::new();
    let mut in_trip = false;
    for (i, s) in samples.iter().enumerate() {
        let day = date_of(s.timestamp);
        let entry = acc.entry(day).or_insert((0, 0.0, 0, 0.0));
        let broken = i == 0 || s.timestamp - samples[i - 1].timestamp > cutoff_s;
        if broken {
            in_trip = false;
        }
        if s.speed_kmh > 0.0 {
            if !in_trip {
                entry.0 += 1;
                in_trip = true;
            }
            entry.1 += s.speed_kmh;
            entry.2 += 1;
            entry.3 = entry.3.max(s.speed_kmh);
        }
    }
    acc.into_iter()
        .map(|(d, (n, sum, count, max))| {
            let avg = if count > 0 { sum / count as f64 } else { 0.0 };
            (
                d,
                DailyStats {
                    n_trips: n,
                    avg_speed_kmh: avg,
                    max_speed_kmh: max,
                },
            )
        })
        .collect()
}

/// Dense `[first, last]` series; days without data are 0 km.
pub fn daily_series(km: &BTreeMap<NaiveDate, f64>, first: NaiveDate, last: NaiveDate) -> Vec<(NaiveDate, f64)> {
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .map(|d| (d, km.get(&d).copied().unwrap_or(0.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::midnight;

    fn t0() -> i64 {
        midnight(NaiveDate::from_ymd_opt(2024, 3, 4).unwrap()) + 8 * 3600
    }

    fn constant(speed: f64, secs: i64) -> Vec<TripSample> {
        (0..=secs)
            .map(|i| TripSample {
                timestamp: t0() + i,
                speed_kmh: speed,
                position: None,
                fuel_l: None,
            })
            .collect()
    }

    #[test]
    fn constant_speed_hour() {
        let d = integrate_daily_distance(&constant(60.0, 3600)).unwrap();
        assert_eq!(d.len(), 1);
        let km = *d.values().next().unwrap();
        assert!((km - 60.0).abs() <= 60.0 * 1e-9, "{km}");
    }

    #[test]
    fn zero_speed() {
        let d = integrate_daily_distance(&constant(0.0, 100)).unwrap();
        assert_eq!(d.values().copied().collect::<Vec<_>>(), vec![0.0]);
    }

    #[test]
    fn piecewise_matches_rectangle_sum() {
        let mut s = Vec::new();
        for i in 0..=1800 {
            let v = if i < 600 { 30.0 } else { 90.0 };
            s.push(TripSample {
                timestamp: t0() + i,
                speed_kmh: v,
                position: None,
                fuel_l: None,
            });
        }
        // oracle: independent rectangle rule
        let mut oracle = 0.0;
        for x in &s[..1800] {
            oracle += x.speed_kmh * 1.0 / 3600.0;
        }
        assert!((oracle - 35.0f64).abs() < 1e-9);
        let km = *integrate_daily_distance(&s).unwrap().values().next().unwrap();
        assert!((km - 35.0).abs() < 1e-9, "{km}");
    }

    #[test]
    fn dropout_and_negative_interval() {
        let mut s = constant(36.0, 10);
        for x in s.iter_mut().skip(5) {
            x.timestamp += 100;
        }
        let km = *integrate_daily_distance(&s).unwrap().values().next().unwrap();
        // 9 one-second steps at 10 m/s, one dropped pair
        assert!((km - 0.09).abs() < 1e-12);

        s.swap(2, 3);
        assert!(matches!(
            integrate_daily_distance(&s),
            Err(TelemetryError::NegativeInterval { index: 3, .. })
        ));
    }

    #[test]
    fn dense_series_fills_gaps() {
        let a = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        let mut m = BTreeMap::new();
        m.insert(a, 5.0);
        let s = daily_series(&m, a, a + chrono::Days::new(2));
        assert_eq!(s.iter().map(|x| x.1).collect::<Vec<_>>(), vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn trip_stats_counts_runs() {
        let mut s = constant(30.0, 5);
        let mut later = constant(60.0, 5);
        for x in later.iter_mut() {
            x.timestamp += 1000;
        }
        s.extend(later);
        let st = daily_trip_stats(&s, 60);
        let v = st.values().next().unwrap();
        assert_eq!(v.n_trips, 2);
        assert_eq!(v.max_speed_kmh, 60.0);
        assert!((v.avg_speed_kmh - 45.0).abs() < 1e-12);
    }
}
