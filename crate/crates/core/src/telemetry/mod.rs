//! Vehicle telemetry: trip-log ingest, halt detection from CAN message gaps,
//! speed-integrated daily distance, and a seeded synthetic driver.

mod distance;
mod halts;
pub mod synth;
mod triplog;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{date_of, Timestamp};
use crate::csvio::CsvError;
use crate::routing::geo::LatLon;

pub use distance::{
    daily_series, daily_trip_stats, geodesic_daily_distance, integrate_daily_distance, integrate_daily_distance_with,
    DailyStats, DROPOUT_CUTOFF_S,
};
pub use halts::{detect_halts, HALT_GAP_S};
pub use synth::{
    generate_synthetic_log, generate_synthetic_log_on, DriverProfile, LegPlanner, RoadLegs, StraightLine, SyntheticLog,
};
pub use triplog::{load_trip_log, write_trip_log, TRIP_LOG_HEADER};

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("CAN trace has no messages")]
    EmptyTrace,
    #[error("no GPS fix within the gap threshold of t={gap_start}")]
    NoLocationFix { gap_start: Timestamp },
    #[error("timestamps decrease at sample {index}: {from} -> {to}")]
    NegativeInterval {
        index: usize,
        from: Timestamp,
        to: Timestamp,
    },
    #[error("gap threshold must be positive, got {0}")]
    InvalidThreshold(i64),
    #[error("invalid driver profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Csv(#[from] CsvError),
}

/// Times at which vehicle-bus messages were observed. Non-decreasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CanTrace {
    message_times: Vec<Timestamp>,
}

impl CanTrace {
    pub fn new(mut message_times: Vec<Timestamp>) -> Self {
        message_times.sort_unstable();
        Self { message_times }
    }

    pub fn message_times(&self) -> &[Timestamp] {
        &self.message_times
    }

    pub fn is_empty(&self) -> bool {
        self.message_times.is_empty()
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.message_times.binary_search(&t).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripSample {
    pub timestamp: Timestamp,
    pub speed_kmh: f64,
    pub position: Option<LatLon<f64>>,
    pub fuel_l: Option<f64>,
}

/// A detected halt, located at the nearest-in-time GPS fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopEvent {
    pub timestamp: Timestamp,
    pub date: NaiveDate,
    pub pos: LatLon<f64>,
}

impl StopEvent {
    pub fn new(timestamp: Timestamp, pos: LatLon<f64>) -> Self {
        Self {
            timestamp,
            date: date_of(timestamp),
            pos,
        }
    }
}

const STOP_HEADER: [&str; 4] = ["timestamp", "date", "lat", "lon"];

pub fn write_stop_events(path: &std::path::Path, events: &[StopEvent]) -> Result<(), CsvError> {
    use crate::csvio::{fmt_f64, write_rows};
    write_rows(
        path,
        &STOP_HEADER,
        events.iter().map(|e| {
            [
                e.timestamp.to_string(),
                e.date.to_string(),
                fmt_f64(e.pos.lat),
                fmt_f64(e.pos.lon),
            ]
        }),
    )
}

pub fn load_stop_events(path: &std::path::Path) -> Result<Vec<StopEvent>, CsvError> {
    let mut events = crate::csvio::read_rows(path, &STOP_HEADER, |row| {
        let ts: Timestamp = row.parse("timestamp")?;
        let pos = LatLon::new(row.parse_f64("lat", -90.0, 90.0)?, row.parse_f64("lon", -180.0, 180.0)?);
        let date: NaiveDate = row.parse("date")?;
        if date != date_of(ts) {
            return Err(row.error("date", "does not match timestamp"));
        }
        Ok(StopEvent::new(ts, pos))
    })?;
    events.sort_by_key(|e| e.timestamp);
    Ok(events)
}
