//! Road-network routing: geodesic math, shortest paths, one-stop via-routes
//! and the route-corridor filter.
//!
//! [`RouterPort`] is the seam for substituting an external routing engine;
//! [`RoadGraph`] is the built-in implementation.

pub mod city;
pub mod geo;
mod graph;
mod io;

use thiserror::Error;

use crate::csvio::CsvError;

pub use graph::{GraphNode, Metric, NodeId, RoadEdge, RoadGraph, Route};
pub use io::{load_road_graph, save_road_graph};

use geo::{point_polyline_distance, LatLon};

/// Default corridor half-width around a day route.
pub const CORRIDOR_RADIUS_M: f64 = 2_000.0;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("no path from node {from} to node {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("unknown node {id}")]
    UnknownNode { id: NodeId },
    #[error("duplicate node id {id}")]
    DuplicateNode { id: NodeId },
    #[error("node {id} has invalid coordinates")]
    InvalidNode { id: NodeId },
    #[error("edge #{edge} references unknown node {node}")]
    DanglingEdge { edge: usize, node: NodeId },
    #[error("edge #{edge} is invalid: {reason}")]
    InvalidEdge { edge: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("empty graph")]
    EmptyGraph,
}

/// Routing engine contract. Any implementation must satisfy
/// `one_stop_route(..) >= multi_stop_route(..)` under the same metric.
pub trait RouterPort: Sync {
    fn position(&self, node: NodeId) -> Option<LatLon<f64>>;

    /// Snaps a coordinate to the closest routable node, returning the snap
    /// distance in meters.
    fn nearest_node(&self, p: LatLon<f64>) -> Option<(NodeId, f64)>;

    fn shortest_route(&self, from: NodeId, to: NodeId, metric: Metric) -> Result<Route, RoutingError>;

    /// Route visiting `waypoints` in order, starting at `start`.
    fn multi_stop_route(&self, start: NodeId, waypoints: &[NodeId], metric: Metric) -> Result<Route, RoutingError> {
        let mut route = Route::trivial(start);
        let mut at = start;
        for &next in waypoints {
            let leg = self.shortest_route(at, next, metric)?;
            route.extend(&leg);
            at = next;
        }
        Ok(route)
    }

    /// `start -> stop`, then on through every remaining POI in order.
    fn one_stop_route(
        &self,
        start: NodeId,
        stop: NodeId,
        remaining: &[NodeId],
        metric: Metric,
    ) -> Result<Route, RoutingError> {
        let mut route = self.shortest_route(start, stop, metric)?;
        let tail = self.multi_stop_route(stop, remaining, metric)?;
        route.extend(&tail);
        Ok(route)
    }

    fn polyline(&self, route: &Route) -> Vec<LatLon<f64>> {
        route.nodes.iter().filter_map(|&n| self.position(n)).collect()
    }
}

impl RouterPort for RoadGraph {
    fn position(&self, node: NodeId) -> Option<LatLon<f64>> {
        RoadGraph::position(self, node)
    }

    fn nearest_node(&self, p: LatLon<f64>) -> Option<(NodeId, f64)> {
        RoadGraph::nearest_node(self, p)
    }

    fn shortest_route(&self, from: NodeId, to: NodeId, metric: Metric) -> Result<Route, RoutingError> {
        RoadGraph::shortest_route(self, from, to, metric)
    }
}

/// Anything with a fixed geographic position.
pub trait Located {
    fn location(&self) -> LatLon<f64>;
}

impl Located for LatLon<f64> {
    fn location(&self) -> LatLon<f64> {
        *self
    }
}

/// Items whose distance to the polyline is at most `radius_m`, in input order.
pub fn corridor_stations<'a, S: Located>(polyline: &[LatLon<f64>], items: &'a [S], radius_m: f64) -> Vec<&'a S> {
    items
        .iter()
        .filter(|s| point_polyline_distance(s.location(), polyline).is_some_and(|d| d <= radius_m))
        .collect()
}
