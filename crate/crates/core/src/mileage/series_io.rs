use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::csvio::{fmt_f64, read_rows, write_rows, CsvError};
use crate::telemetry::DailyStats;

use super::DailySeries;

pub const DAILY_HEADER: [&str; 5] = ["date", "km", "n_trips", "avg_speed_kmh", "max_speed_kmh"];

/// One row per day; trip-statistic cells are empty for days without them.
pub fn write_daily_series(path: &Path, series: &DailySeries) -> Result<(), CsvError> {
    write_rows(
        path,
        &DAILY_HEADER,
        series.km.iter().enumerate().map(|(i, km)| {
            let stats = series.stats.as_ref().and_then(|s| s[i]);
            [
                series.date(i).to_string(),
                fmt_f64(*km),
                stats.map(|s| s.n_trips.to_string()).unwrap_or_default(),
                stats.map(|s| fmt_f64(s.avg_speed_kmh)).unwrap_or_default(),
                stats.map(|s| fmt_f64(s.max_speed_kmh)).unwrap_or_default(),
            ]
        }),
    )
}

/// Dates must be consecutive. A file without any statistics loads with
/// `stats: None`.
pub fn load_daily_series(path: &Path) -> Result<DailySeries, CsvError> {
    let mut expected: Option<NaiveDate> = None;
    let rows = read_rows(path, &DAILY_HEADER, |row| {
        let date: NaiveDate = row.parse("date")?;
        if let Some(want) = expected {
            if date != want {
                return Err(row.error("date", format!("expected {want} (dates must be consecutive)")));
            }
        }
        expected = Some(date + Days::new(1));
        let km = row.parse_f64("km", 0.0, f64::MAX)?;
        let cells = ["n_trips", "avg_speed_kmh", "max_speed_kmh"].map(|f| row.raw(f).trim().is_empty());
        let stats = if cells.iter().all(|empty| *empty) {
            None
        } else {
            Some(DailyStats {
                n_trips: row.parse("n_trips")?,
                avg_speed_kmh: row.parse_f64("avg_speed_kmh", 0.0, f64::MAX)?,
                max_speed_kmh: row.parse_f64("max_speed_kmh", 0.0, f64::MAX)?,
            })
        };
        Ok((date, km, stats))
    })?;
    let start = rows.first().map(|r| r.0).unwrap_or_default();
    let any_stats = rows.iter().any(|r| r.2.is_some());
    let series = DailySeries::new(start, rows.iter().map(|r| r.1).collect());
    Ok(if any_stats {
        series.with_stats(rows.iter().map(|r| r.2).collect())
    } else {
        series
    })
}
