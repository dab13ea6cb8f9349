//! Habitual destinations and per-weekday trip sequences learned from halts.

mod cluster;
mod flows;
mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::Weekday;
use crate::csvio::CsvError;
use crate::routing::geo::LatLon;
use crate::telemetry::StopEvent;

pub use cluster::{assign_clusters, categorize_frequency, observation_weeks, select_pois};
pub use flows::build_daily_flows;
pub use io::{export_graph_csv, export_stops_csv, import_graph_csv, EDGES_HEADER, NODES_HEADER};

/// Default clustering radius.
pub const CLUSTER_RADIUS_M: f64 = 100.0;

#[derive(Debug, Error)]
pub enum TripGraphError {
    #[error("visit frequency must be finite and >= 0, got {0}")]
    InvalidFrequency(f64),
    #[error("observation spans {weeks} full week(s); at least 2 are required")]
    ObservationTooShort { weeks: u32 },
    #[error("cluster radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("edge {day}/{seq_index} references unknown POI `{dest_id}`")]
    UnknownPoi {
        day: Weekday,
        seq_index: u32,
        dest_id: String,
    },
    #[error("{day}: sequence indices must run 1..m without gaps, found {found:?}")]
    BrokenSequence { day: Weekday, found: Vec<u32> },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

/// Visit-frequency label, ordered from least to most frequent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FrequencyCategory {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl FrequencyCategory {
    pub const ALL: [FrequencyCategory; 5] = [
        FrequencyCategory::VeryLow,
        FrequencyCategory::Low,
        FrequencyCategory::Medium,
        FrequencyCategory::High,
        FrequencyCategory::VeryHigh,
    ];

    /// MEDIUM and above.
    pub fn default_accepted() -> BTreeSet<FrequencyCategory> {
        [Self::Medium, Self::High, Self::VeryHigh].into_iter().collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::VeryLow => "VERY_LOW",
            Self::Low => "LOW",
            Self::Medium => "MEDIUM",
            Self::High => "HIGH",
            Self::VeryHigh => "VERY_HIGH",
        }
    }
}

impl fmt::Display for FrequencyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FrequencyCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown frequency category `{s}`"))
    }
}

/// A spatial group of halts. The centroid is the mean of member coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StopCluster {
    pub id: String,
    pub centroid: LatLon<f64>,
    pub visits_total: u32,
    pub visits_weekday: u32,
    pub visits_weekend: u32,
    pub days_visited: BTreeSet<Weekday>,
    pub members: Vec<StopEvent>,
}

/// A cluster promoted to habitual destination. Member events are not kept,
/// so a POI read back from CSV equals the one written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiNode {
    pub id: String,
    pub pos: LatLon<f64>,
    pub visits_total: u32,
    pub visits_weekday: u32,
    pub visits_weekend: u32,
    pub days_visited: BTreeSet<Weekday>,
    pub category: FrequencyCategory,
}

impl PoiNode {
    pub fn from_cluster(c: &StopCluster, category: FrequencyCategory) -> Self {
        Self {
            id: c.id.clone(),
            pos: c.centroid,
            visits_total: c.visits_total,
            visits_weekday: c.visits_weekday,
            visits_weekend: c.visits_weekend,
            days_visited: c.days_visited.clone(),
            category,
        }
    }
}

/// Transition into `dest_id`; its source is the destination of the edge
/// with `seq_index - 1`, or the day's origin for `seq_index == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripEdge {
    pub day: Weekday,
    pub seq_index: u32,
    pub dest_id: String,
    pub dest: LatLon<f64>,
}

/// Habitual POI sequence per weekday, stored as edges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DailyTripGraph {
    days: BTreeMap<Weekday, Vec<TripEdge>>,
}

impl DailyTripGraph {
    /// Edges must be grouped per day with `seq_index` running 1..m.
    pub fn from_edges(edges: Vec<TripEdge>) -> Result<Self, TripGraphError> {
        let mut days: BTreeMap<Weekday, Vec<TripEdge>> = BTreeMap::new();
        for e in edges {
            days.entry(e.day).or_default().push(e);
        }
        for (day, list) in days.iter_mut() {
            list.sort_by_key(|e| e.seq_index);
            let found: Vec<u32> = list.iter().map(|e| e.seq_index).collect();
            if found.iter().enumerate().any(|(i, s)| *s as usize != i + 1) {
                return Err(TripGraphError::BrokenSequence { day: *day, found });
            }
        }
        days.retain(|_, l| !l.is_empty());
        Ok(Self { days })
    }

    pub fn edges(&self, day: Weekday) -> &[TripEdge] {
        self.days.get(&day).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_edges(&self) -> impl Iterator<Item = &TripEdge> {
        self.days.values().flatten()
    }

    pub fn edge_count(&self) -> usize {
        self.days.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Weekdays with at least one edge, Monday first.
    pub fn active_days(&self) -> Vec<Weekday> {
        self.days.keys().copied().collect()
    }

    /// Where the vehicle starts `day` when no explicit departure is given:
    /// the final destination of the closest earlier weekday (cyclically)
    /// that has edges.
    pub fn origin(&self, day: Weekday) -> Option<&str> {
        (1..=7)
            .map(|k| Weekday::from_index(day.index() + 7 - k))
            .find_map(|d| self.days.get(&d).and_then(|l| l.last()))
            .map(|e| e.dest_id.as_str())
    }

    /// Destinations of `day` in visiting order, without the origin.
    pub fn destinations(&self, day: Weekday) -> Vec<&str> {
        self.edges(day).iter().map(|e| e.dest_id.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(day: Weekday, seq: u32, id: &str) -> TripEdge {
        TripEdge {
            day,
            seq_index: seq,
            dest_id: id.into(),
            dest: LatLon::new(44.0, 10.0),
        }
    }

    #[test]
    fn category_labels_round_trip() {
        for c in FrequencyCategory::ALL {
            assert_eq!(c.to_string().parse::<FrequencyCategory>().unwrap(), c);
        }
        assert!(FrequencyCategory::VeryLow < FrequencyCategory::VeryHigh);
    }

    #[test]
    fn origin_wraps_to_previous_active_day() {
        let g = DailyTripGraph::from_edges(vec![
            edge(Weekday::Mon, 1, "W"),
            edge(Weekday::Mon, 2, "H"),
            edge(Weekday::Sat, 1, "M"),
        ])
        .unwrap();
        assert_eq!(g.origin(Weekday::Mon), Some("M"));
        assert_eq!(g.origin(Weekday::Sat), Some("H"));
        assert_eq!(g.origin(Weekday::Wed), Some("H"));
        assert_eq!(g.destinations(Weekday::Mon), vec!["W", "H"]);
        assert!(DailyTripGraph::default().origin(Weekday::Mon).is_none());
    }

    #[test]
    fn gapped_sequence_is_rejected() {
        let err = DailyTripGraph::from_edges(vec![edge(Weekday::Tue, 1, "A"), edge(Weekday::Tue, 3, "B")]);
        assert!(matches!(err, Err(TripGraphError::BrokenSequence { .. })));
    }
}
