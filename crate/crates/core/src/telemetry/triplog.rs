use std::path::Path;

use crate::calendar::Timestamp;
use crate::csvio::{fmt_f64, fmt_opt_f64, read_rows, write_rows, CsvError};
use crate::routing::geo::LatLon;

use super::{CanTrace, TripSample};

pub const TRIP_LOG_HEADER: [&str; 6] = ["timestamp", "speed_kmh", "lat", "lon", "fuel_l", "can_msg"];

/// Reads a trip log. Rows are returned sorted by timestamp (stable for
/// equal timestamps); the trace holds the timestamps flagged `can_msg = 1`.
pub fn load_trip_log(path: &Path) -> Result<(CanTrace, Vec<TripSample>), CsvError> {
    let rows = read_rows(path, &TRIP_LOG_HEADER, |row| {
        let timestamp: Timestamp = row.parse("timestamp")?;
        let speed_kmh = row.parse_f64("speed_kmh", 0.0, f64::MAX)?;
        let lat = row.parse_f64_opt("lat", -90.0, 90.0)?;
        let lon = row.parse_f64_opt("lon", -180.0, 180.0)?;
        let position = match (lat, lon) {
            (Some(lat), Some(lon)) => Some(LatLon::new(lat, lon)),
            (None, None) => None,
            (Some(_), None) => return Err(row.error("lon", "missing while lat is present")),
            (None, Some(_)) => return Err(row.error("lat", "missing while lon is present")),
        };
        let fuel_l = row.parse_f64_opt("fuel_l", 0.0, f64::MAX)?;
        let can = match row.raw("can_msg").trim() {
            "1" => true,
            "0" => false,
            other => return Err(row.error("can_msg", format!("`{other}` is not 0 or 1"))),
        };
        Ok((
            TripSample {
                timestamp,
                speed_kmh,
                position,
                fuel_l,
            },
            can,
        ))
    })?;
    let mut rows = rows;
    rows.sort_by_key(|r| r.0.timestamp);
    let trace = CanTrace::new(rows.iter().filter(|r| r.1).map(|r| r.0.timestamp).collect());
    Ok((trace, rows.into_iter().map(|r| r.0).collect()))
}

/// Writes one row per sample. Trace timestamps without a matching sample
/// are not representable in this format and are dropped.
pub fn write_trip_log(path: &Path, trace: &CanTrace, samples: &[TripSample]) -> Result<(), CsvError> {
    write_rows(
        path,
        &TRIP_LOG_HEADER,
        samples.iter().map(|s| {
            [
                s.timestamp.to_string(),
                fmt_f64(s.speed_kmh),
                fmt_opt_f64(s.position.map(|p| p.lat)),
                fmt_opt_f64(s.position.map(|p| p.lon)),
                fmt_opt_f64(s.fuel_l),
                if trace.contains(s.timestamp) { "1" } else { "0" }.to_string(),
            ]
        }),
    )
}
