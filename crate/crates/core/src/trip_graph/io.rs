use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use crate::calendar::Weekday;
use crate::csvio::{fmt_f64, read_rows, write_rows, CsvError};
use crate::routing::geo::LatLon;

use super::{categorize_frequency, DailyTripGraph, PoiNode, StopCluster, TripEdge, TripGraphError};

pub const NODES_HEADER: [&str; 8] = [
    "id",
    "lat",
    "lon",
    "visits_total",
    "visits_weekday",
    "visits_weekend",
    "category",
    "days_visited",
];
pub const EDGES_HEADER: [&str; 5] = ["day", "seq_index", "dest_id", "dest_lat", "dest_lon"];

fn node_row(p: &PoiNode) -> [String; 8] {
    let days: Vec<&str> = p.days_visited.iter().map(|d| d.name()).collect();
    [
        p.id.clone(),
        fmt_f64(p.pos.lat),
        fmt_f64(p.pos.lon),
        p.visits_total.to_string(),
        p.visits_weekday.to_string(),
        p.visits_weekend.to_string(),
        p.category.to_string(),
        days.join("|"),
    ]
}

/// Writes POIs (sorted by id) and edges (by weekday, then sequence index).
pub fn export_graph_csv(
    pois: &[PoiNode],
    graph: &DailyTripGraph,
    nodes_path: &Path,
    edges_path: &Path,
) -> Result<(), CsvError> {
    let mut sorted: Vec<&PoiNode> = pois.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    write_rows(nodes_path, &NODES_HEADER, sorted.into_iter().map(node_row))?;
    write_rows(
        edges_path,
        &EDGES_HEADER,
        graph.all_edges().map(|e| {
            [
                e.day.name().to_string(),
                e.seq_index.to_string(),
                e.dest_id.clone(),
                fmt_f64(e.dest.lat),
                fmt_f64(e.dest.lon),
            ]
        }),
    )
}

/// Every cluster, promoted or not, in the nodes schema.
pub fn export_stops_csv(clusters: &[StopCluster], observation_weeks: u32, path: &Path) -> Result<(), TripGraphError> {
    let weeks = f64::from(observation_weeks.max(1));
    let mut rows = Vec::with_capacity(clusters.len());
    for c in clusters {
        let cat = categorize_frequency(f64::from(c.visits_total) / weeks)?;
        rows.push(node_row(&PoiNode::from_cluster(c, cat)));
    }
    rows.sort_by(|a, b| a[0].cmp(&b[0]));
    Ok(write_rows(path, &NODES_HEADER, rows)?)
}

pub fn import_graph_csv(
    nodes_path: &Path,
    edges_path: &Path,
) -> Result<(Vec<PoiNode>, DailyTripGraph), TripGraphError> {
    let pois = read_rows(nodes_path, &NODES_HEADER, |row| {
        let visits_total: u32 = row.parse("visits_total")?;
        let visits_weekday: u32 = row.parse("visits_weekday")?;
        let visits_weekend: u32 = row.parse("visits_weekend")?;
        if visits_weekday.checked_add(visits_weekend) != Some(visits_total) {
            return Err(row.error("visits_total", "must equal visits_weekday + visits_weekend"));
        }
        let raw_days = row.raw("days_visited").trim();
        let days_visited = if raw_days.is_empty() {
            BTreeSet::new()
        } else {
            raw_days
                .split('|')
                .map(|d| {
                    d.parse::<Weekday>()
                        .map_err(|e| row.error("days_visited", e.to_string()))
                })
                .collect::<Result<BTreeSet<_>, _>>()?
        };
        Ok(PoiNode {
            id: row.raw("id").trim().to_string(),
            pos: LatLon::new(row.parse_f64("lat", -90.0, 90.0)?, row.parse_f64("lon", -180.0, 180.0)?),
            visits_total,
            visits_weekday,
            visits_weekend,
            days_visited,
            category: row.parse("category")?,
        })
    })?;
    let ids: HashSet<&str> = pois.iter().map(|p| p.id.as_str()).collect();

    let edges = read_rows(edges_path, &EDGES_HEADER, |row| {
        let seq_index: u32 = row.parse("seq_index")?;
        if seq_index == 0 {
            return Err(row.error("seq_index", "must be >= 1"));
        }
        Ok(TripEdge {
            day: row.parse("day")?,
            seq_index,
            dest_id: row.raw("dest_id").trim().to_string(),
            dest: LatLon::new(
                row.parse_f64("dest_lat", -90.0, 90.0)?,
                row.parse_f64("dest_lon", -180.0, 180.0)?,
            ),
        })
    })?;
    if let Some(e) = edges.iter().find(|e| !ids.contains(e.dest_id.as_str())) {
        return Err(TripGraphError::UnknownPoi {
            day: e.day,
            seq_index: e.seq_index,
            dest_id: e.dest_id.clone(),
        });
    }
    let graph = DailyTripGraph::from_edges(edges)?;
    let mut pois = pois;
    pois.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((pois, graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trip_graph::FrequencyCategory;
    use std::fs;

    fn poi(id: &str, days: &[Weekday]) -> PoiNode {
        PoiNode {
            id: id.into(),
            pos: LatLon::new(44.6471, 10.9252),
            visits_total: 3,
            visits_weekday: 2,
            visits_weekend: 1,
            days_visited: days.iter().copied().collect(),
            category: FrequencyCategory::Medium,
        }
    }

    #[test]
    fn empty_graph_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let (n, e) = (dir.path().join("nodes.csv"), dir.path().join("edges.csv"));
        export_graph_csv(&[], &DailyTripGraph::default(), &n, &e).unwrap();
        assert_eq!(fs::read_to_string(&n).unwrap(), NODES_HEADER.join(",") + "\n");
        assert_eq!(fs::read_to_string(&e).unwrap(), EDGES_HEADER.join(",") + "\n");
    }

    #[test]
    fn pipe_separated_days() {
        let dir = tempfile::tempdir().unwrap();
        let (n, e) = (dir.path().join("nodes.csv"), dir.path().join("edges.csv"));
        let p = poi("STOP_001", &[Weekday::Wed, Weekday::Mon, Weekday::Tue]);
        let g = DailyTripGraph::from_edges(vec![TripEdge {
            day: Weekday::Mon,
            seq_index: 1,
            dest_id: "STOP_001".into(),
            dest: p.pos,
        }])
        .unwrap();
        export_graph_csv(std::slice::from_ref(&p), &g, &n, &e).unwrap();
        let text = fs::read_to_string(&n).unwrap();
        assert!(
            text.ends_with("STOP_001,44.6471,10.9252,3,2,1,MEDIUM,Mon|Tue|Wed\n"),
            "{text}"
        );
        let (pois, g2) = import_graph_csv(&n, &e).unwrap();
        assert_eq!(pois, vec![p]);
        assert_eq!(g2, g);
    }

    #[test]
    fn dangling_destination_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (n, e) = (dir.path().join("nodes.csv"), dir.path().join("edges.csv"));
        fs::write(&n, NODES_HEADER.join(",") + "\n").unwrap();
        fs::write(&e, EDGES_HEADER.join(",") + "\nMon,1,STOP_009,44,10\n").unwrap();
        assert!(matches!(
            import_graph_csv(&n, &e),
            Err(TripGraphError::UnknownPoi { .. })
        ));
    }

    #[test]
    fn inconsistent_visit_counts_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let (n, e) = (dir.path().join("nodes.csv"), dir.path().join("edges.csv"));
        fs::write(&n, NODES_HEADER.join(",") + "\nSTOP_001,44,10,5,2,1,LOW,Mon\n").unwrap();
        fs::write(&e, EDGES_HEADER.join(",") + "\n").unwrap();
        match import_graph_csv(&n, &e) {
            Err(TripGraphError::Csv(err)) => assert_eq!(err.line(), Some(2)),
            other => panic!("{other:?}"),
        }
    }
}
