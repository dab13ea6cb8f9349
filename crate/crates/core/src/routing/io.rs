use std::path::Path;

use crate::csvio::{fmt_f64, read_rows, write_rows};

use super::geo::LatLon;
use super::{GraphNode, RoadEdge, RoadGraph, RoutingError};

const NODE_HEADER: [&str; 3] = ["id", "lat", "lon"];
const EDGE_HEADER: [&str; 4] = ["from", "to", "length_m", "time_s"];

/// Loads a `nodes` / `edges` CSV pair and validates the result.
pub fn load_road_graph(nodes_path: &Path, edges_path: &Path) -> Result<RoadGraph, RoutingError> {
    let nodes = read_rows(nodes_path, &NODE_HEADER, |row| {
        Ok(GraphNode {
            id: row.parse("id")?,
            pos: LatLon::new(row.parse_f64("lat", -90.0, 90.0)?, row.parse_f64("lon", -180.0, 180.0)?),
        })
    })?;
    let edges = read_rows(edges_path, &EDGE_HEADER, |row| {
        Ok(RoadEdge {
            from: row.parse("from")?,
            to: row.parse("to")?,
            length_m: row.parse_f64("length_m", f64::MIN_POSITIVE, f64::MAX)?,
            time_s: row.parse_f64("time_s", f64::MIN_POSITIVE, f64::MAX)?,
        })
    })?;
    RoadGraph::new(nodes, edges)
}

pub fn save_road_graph(graph: &RoadGraph, nodes_path: &Path, edges_path: &Path) -> Result<(), RoutingError> {
    write_rows(
        nodes_path,
        &NODE_HEADER,
        graph
            .nodes()
            .iter()
            .map(|n| [n.id.to_string(), fmt_f64(n.pos.lat), fmt_f64(n.pos.lon)]),
    )?;
    write_rows(
        edges_path,
        &EDGE_HEADER,
        graph.edges().iter().map(|e| {
            [
                e.from.to_string(),
                e.to.to_string(),
                fmt_f64(e.length_m),
                fmt_f64(e.time_s),
            ]
        }),
    )?;
    Ok(())
}
