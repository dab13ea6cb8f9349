use crate::calendar::Timestamp;

use super::{CanTrace, StopEvent, TelemetryError, TripSample};

/// Bus silence longer than this counts as a parking halt rather than a
/// traffic stop.
pub const HALT_GAP_S: i64 = 120;

/// One stop per maximal message gap strictly longer than `gap_threshold_s`,
/// placed at the GPS fix nearest in time to the start of the silence.
pub fn detect_halts(
    trace: &CanTrace,
    gps: &[TripSample],
    gap_threshold_s: i64,
) -> Result<Vec<StopEvent>, TelemetryError> {
    if gap_threshold_s <= 0 {
        return Err(TelemetryError::InvalidThreshold(gap_threshold_s));
    }
    if trace.is_empty() {
        return Err(TelemetryError::EmptyTrace);
    }
    let mut fixes: Vec<(Timestamp, _)> = gps
        .iter()
        .filter_map(|s| s.position.map(|p| (s.timestamp, p)))
        .collect();
    fixes.sort_by_key(|f| f.0);

    trace
        .message_times()
        .windows(2)
        .filter(|w| w[1] - w[0] > gap_threshold_s)
        .map(|w| {
            let start = w[0];
            nearest_fix(&fixes, start)
                .filter(|(t, _)| (t - start).abs() <= gap_threshold_s)
                .map(|(_, pos)| StopEvent::new(start, pos))
                .ok_or(TelemetryError::NoLocationFix { gap_start: start })
        })
        .collect()
}

/// Nearest fix by |Δt|; equal distance resolves to the earlier fix.
fn nearest_fix<P: Copy>(fixes: &[(Timestamp, P)], t: Timestamp) -> Option<(Timestamp, P)> {
    let i = fixes.partition_point(|f| f.0 <= t);
    let before = i.checked_sub(1).map(|j| fixes[j]);
    let after = fixes.get(i).copied();
    match (before, after) {
        (Some(b), Some(a)) => Some(if t - b.0 <= a.0 - t { b } else { a }),
        (b, a) => b.or(a),
    }
}
