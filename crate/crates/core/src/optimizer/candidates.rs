use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;
use crate::routing::geo::LatLon;
use crate::routing::{corridor_stations, Metric, NodeId, Route, RouterPort};
use crate::stations::Station;
use crate::trip_graph::{DailyTripGraph, PoiNode};

use super::{CandidateStop, OptimizerError};

/// The POIs visited on one weekday, departure first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayPath {
    pub day: Weekday,
    pub pois: Vec<(String, LatLon<f64>)>,
}

impl DayPath {
    /// Departure (the given POI, or the graph's day origin) followed by the
    /// day's destinations.
    pub fn from_graph(
        graph: &DailyTripGraph,
        pois: &[PoiNode],
        day: Weekday,
        departure: Option<&str>,
    ) -> Result<Self, OptimizerError> {
        let dests = graph.destinations(day);
        if dests.is_empty() {
            return Err(OptimizerError::EmptyDayGraph);
        }
        let origin = departure.or_else(|| graph.origin(day)).unwrap_or(dests[0]);
        let lookup = |id: &str| {
            pois.iter()
                .find(|p| p.id == id)
                .map(|p| (p.id.clone(), p.pos))
                .ok_or_else(|| OptimizerError::UnknownPoi(id.to_string()))
        };
        let mut out = vec![lookup(origin)?];
        for d in dests {
            let next = lookup(d)?;
            if out.last().map(|(id, _)| id) != Some(&next.0) {
                out.push(next);
            }
        }
        if out.len() < 2 {
            return Err(OptimizerError::EmptyDayGraph);
        }
        Ok(Self { day, pois: out })
    }
}

/// Everything derived from one day path that the selection and reports use.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Snapped node of each POI on the path.
    pub poi_nodes: Vec<NodeId>,
    /// Whole-day route through every POI.
    pub day_route: Route,
    /// Route from the current POI through the remaining ones, no stop.
    pub onward_route: Route,
    pub corridor: Vec<Station>,
    pub candidates: Vec<CandidateStop<f64>>,
    /// One-stop route per candidate, same order.
    pub routes: Vec<Route>,
}

impl CandidateSet {
    pub fn station(&self, index: usize) -> Option<&Station> {
        let id = &self.candidates.get(index)?.station_id;
        self.corridor.iter().find(|s| &s.id == id)
    }
}

/// Corridor-filters `stations` against the day route and routes a one-stop
/// detour for each from POI `current` through the remaining POIs. Stations
/// with no price for the day, or that cannot be reached on the network, are
/// dropped.
#[allow(clippy::too_many_arguments)]
pub fn generate_candidates<R: RouterPort + ?Sized>(
    router: &R,
    path: &DayPath,
    current: usize,
    stations: &[Station],
    price: &dyn Fn(&str) -> Option<f64>,
    delta_km: f64,
    radius_m: f64,
) -> Result<CandidateSet, OptimizerError> {
    if path.pois.len() < 2 {
        return Err(OptimizerError::EmptyDayGraph);
    }
    if current >= path.pois.len() {
        return Err(OptimizerError::UnknownPoi(format!("path index {current}")));
    }
    if !(delta_km >= 0.0 && delta_km.is_finite()) {
        return Err(OptimizerError::InvalidVehicle(format!(
            "delta must be >= 0, got {delta_km}"
        )));
    }

    let mut poi_nodes = Vec::with_capacity(path.pois.len());
    for (id, pos) in &path.pois {
        let (node, _) = router
            .nearest_node(*pos)
            .ok_or_else(|| OptimizerError::UnknownPoi(id.clone()))?;
        poi_nodes.push(node);
    }
    let day_route = router.multi_stop_route(poi_nodes[0], &poi_nodes[1..], Metric::Time)?;
    let here = poi_nodes[current];
    let remaining = &poi_nodes[current + 1..];
    let onward_route = router.multi_stop_route(here, remaining, Metric::Time)?;

    let polyline = router.polyline(&day_route);
    let corridor: Vec<Station> = corridor_stations(&polyline, stations, radius_m)
        .into_iter()
        .cloned()
        .collect();
    if corridor.is_empty() {
        return Err(OptimizerError::NoCandidates { radius_m });
    }

    let mut candidates = Vec::new();
    let mut routes = Vec::new();
    for s in &corridor {
        let Some(c) = price(&s.id) else { continue };
        let Some((node, _)) = router.nearest_node(s.pos) else {
            continue;
        };
        let Ok(route) = router.one_stop_route(here, node, remaining, Metric::Time) else {
            continue;
        };
        candidates.push(CandidateStop {
            station_id: s.id.clone(),
            price: c,
            l_km: route.distance_km,
            delta_km,
            t_s: route.time_s,
        });
        routes.push(route);
    }
    if candidates.is_empty() {
        return Err(OptimizerError::NoCandidates { radius_m });
    }
    Ok(CandidateSet {
        poi_nodes,
        day_route,
        onward_route,
        corridor,
        candidates,
        routes,
    })
}
