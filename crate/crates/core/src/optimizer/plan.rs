use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calendar::Weekday;
use crate::csvio::{fmt_f64, write_rows, CsvError};
use crate::routing::geo::LatLon;
use crate::routing::{Route, RouterPort};
use crate::stations::{Station, WeeklyPriceForecast};

use super::{generate_candidates, select_stop, CandidateStop, DayPath, Mode, OptimizerError, Selection, VehicleState};

pub const PLAN_HEADER: [&str; 9] = [
    "day",
    "station_id",
    "lat",
    "lon",
    "price_eur_l",
    "C_eur",
    "T_min",
    "L",
    "mode",
];

/// Everything except the path that a single plan needs.
#[derive(Debug, Clone)]
pub struct PlanInputs<'a> {
    pub stations: &'a [Station],
    pub forecast: &'a WeeklyPriceForecast,
    pub vehicle: VehicleState<f64>,
    pub mode: Mode<f64>,
    pub delta_km: f64,
    pub radius_m: f64,
    pub refuel_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefuelPlan {
    pub day: Weekday,
    pub mode: Mode<f64>,
    pub station: Station,
    pub candidate: CandidateStop<f64>,
    pub selection: Selection<f64>,
    /// One-stop route from the current POI through the station and on.
    pub route: Route,
    pub route_polyline: Vec<LatLon<f64>>,
    pub day_polyline: Vec<LatLon<f64>>,
    pub corridor: Vec<Station>,
    /// Time of the onward route without the stop, seconds.
    pub onward_time_s: f64,
}

impl RefuelPlan {
    pub fn cost_eur(&self) -> f64 {
        self.selection.fuel_cost
    }

    pub fn time_min(&self) -> f64 {
        self.selection.time_cost_s / 60.0
    }

    /// Detour time plus refueling, minutes.
    pub fn overhead_min(&self) -> f64 {
        (self.selection.time_cost_s - self.onward_time_s) / 60.0
    }
}

/// Candidates priced at the path's weekday, then the objective's argmin.
pub fn plan_refuel<R: RouterPort + ?Sized>(
    router: &R,
    path: &DayPath,
    current: usize,
    inputs: &PlanInputs<'_>,
) -> Result<RefuelPlan, OptimizerError> {
    inputs.vehicle.validate()?;
    let price = |id: &str| inputs.forecast.station_price(id, path.day);
    let set = generate_candidates(
        router,
        path,
        current,
        inputs.stations,
        &price,
        inputs.delta_km,
        inputs.radius_m,
    )?;
    let selection = select_stop(&set.candidates, &inputs.vehicle, &inputs.mode, inputs.refuel_s)?;
    let station = set.station(selection.index).expect("candidate from corridor").clone();
    let route = set.routes[selection.index].clone();
    Ok(RefuelPlan {
        day: path.day,
        mode: inputs.mode,
        station,
        candidate: set.candidates[selection.index].clone(),
        selection,
        route_polyline: router.polyline(&route),
        route,
        day_polyline: router.polyline(&set.day_route),
        corridor: set.corridor,
        onward_time_s: set.onward_route.time_s,
    })
}

pub fn write_plan_csv(path: &Path, plans: &[RefuelPlan]) -> Result<(), CsvError> {
    write_rows(
        path,
        &PLAN_HEADER,
        plans.iter().map(|p| {
            [
                p.day.to_string(),
                p.station.id.clone(),
                fmt_f64(p.station.pos.lat),
                fmt_f64(p.station.pos.lon),
                fmt_f64(p.candidate.price),
                fmt_f64(p.cost_eur()),
                fmt_f64(p.time_min()),
                fmt_f64(p.selection.objective),
                p.mode.name.to_string(),
            ]
        }),
    )
}

fn line(points: &[LatLon<f64>]) -> Value {
    Value::Array(points.iter().map(|p| json!([p.lon, p.lat])).collect())
}

/// FeatureCollection: the day route, the planned route, every corridor
/// station and exactly one `chosen_station`.
pub fn plan_geojson(plan: &RefuelPlan) -> Value {
    let mut features = vec![
        json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": line(&plan.day_polyline)},
            "properties": {"kind": "day_route", "day": plan.day.to_string()},
        }),
        json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": line(&plan.route_polyline)},
            "properties": {
                "kind": "planned_route",
                "distance_km": plan.route.distance_km,
                "time_s": plan.route.time_s,
            },
        }),
    ];
    for s in plan.corridor.iter().filter(|s| s.id != plan.station.id) {
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [s.pos.lon, s.pos.lat]},
            "properties": {"kind": "station", "station_id": s.id, "brand": s.brand},
        }));
    }
    features.push(json!({
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [plan.station.pos.lon, plan.station.pos.lat]},
        "properties": {
            "kind": "chosen_station",
            "station_id": plan.station.id,
            "brand": plan.station.brand,
            "price_eur_l": plan.candidate.price,
            "C_eur": plan.cost_eur(),
            "T_min": plan.time_min(),
            "L": plan.selection.objective,
            "mode": plan.mode.name.to_string(),
        },
    }));
    json!({"type": "FeatureCollection", "features": features})
}

pub fn write_plan_geojson(path: &Path, plan: &RefuelPlan) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&plan_geojson(plan)).map_err(std::io::Error::other)?;
    fs::write(path, text)
}
