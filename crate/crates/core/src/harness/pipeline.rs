use std::collections::BTreeSet;

use chrono::Days;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::Weekday;
use crate::mileage::{extra_mileage_delta, validate_forecast, DailySeries, GateThresholds, Validation};
use crate::optimizer::{generate_candidates, DayPath, OptimizerError};
use crate::routing::city::generate_city;
use crate::routing::geo::haversine;
use crate::routing::RoadGraph;
use crate::stations::{
    cheapest_day_among, forecast_week, generate_stations, StationCatalog, WeeklyPriceForecast, LOOKBACK_WEEKS,
};
use crate::telemetry::{
    daily_series, daily_trip_stats, detect_halts, generate_synthetic_log_on, integrate_daily_distance, DriverProfile,
    RoadLegs, StopEvent, SyntheticLog, DROPOUT_CUTOFF_S, HALT_GAP_S,
};
use crate::trip_graph::{
    assign_clusters, build_daily_flows, select_pois, DailyTripGraph, FrequencyCategory, PoiNode, StopCluster,
    CLUSTER_RADIUS_M,
};

use super::{HarnessError, Scenario, SharedContext};

/// Every intermediate product of one scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub city: RoadGraph,
    pub catalog: StationCatalog,
    pub log: SyntheticLog,
    pub halts: Vec<StopEvent>,
    pub clusters: Vec<StopCluster>,
    pub pois: Vec<PoiNode>,
    pub graph: DailyTripGraph,
    pub series: DailySeries,
    /// `None` when the series is too short to validate.
    pub validation: Option<Validation>,
    pub forecast: WeeklyPriceForecast,
    pub departure_poi: String,
    pub context: SharedContext,
}

struct Seeds {
    city: u64,
    stations: u64,
    driver: u64,
    forest: u64,
}

impl Seeds {
    fn from_root(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            city: rng.random(),
            stations: rng.random(),
            driver: rng.random(),
            forest: rng.random(),
        }
    }
}

/// The generated inputs of a scenario, before any learning.
#[derive(Debug, Clone)]
pub struct World {
    pub city: RoadGraph,
    /// Prices end on the last observation day.
    pub catalog: StationCatalog,
    /// The scenario's driver with its derived seed.
    pub driver: DriverProfile,
    pub log: SyntheticLog,
    pub forest_seed: u64,
}

/// City, stations and the driver's log over the observation weeks, all
/// derived from `scenario.seed` (which overrides `driver.seed`).
pub fn generate_world(scenario: &Scenario) -> Result<World, HarnessError> {
    scenario.validate()?;
    let seeds = Seeds::from_root(scenario.seed);
    let city = generate_city(&scenario.city, seeds.city);

    let mut driver = scenario.driver.clone();
    driver.seed = seeds.driver;
    let weeks = scenario.observation_weeks;
    let last_day = driver.start_date + Days::new(7 * u64::from(weeks) - 1);

    let mut station_params = scenario.stations.clone();
    station_params.end_date = last_day;
    let sites: Vec<_> = city.nodes().iter().map(|n| n.pos).collect();
    let catalog = generate_stations(&sites, &station_params, seeds.stations);

    let log = generate_synthetic_log_on(&driver, weeks, &RoadLegs(&city))?;
    Ok(World {
        city,
        catalog,
        driver,
        log,
        forest_seed: seeds.forest,
    })
}

/// Generates the scenario's world, replays the driver's observation weeks
/// through halt detection, clustering, trip-graph construction and mileage
/// validation, then fixes the shared context for the week after: the
/// cheapest active weekday, its learned path from the departure POI, the
/// mileage correction and that day's forecast prices.
pub fn prepare(scenario: &Scenario) -> Result<Prepared, HarnessError> {
    let World {
        city,
        catalog,
        driver,
        log,
        forest_seed,
    } = generate_world(scenario)?;
    let weeks = scenario.observation_weeks;
    let last_day = driver.start_date + Days::new(7 * u64::from(weeks) - 1);
    let halts = detect_halts(&log.trace, &log.samples, HALT_GAP_S)?;
    let clusters = assign_clusters(&halts, CLUSTER_RADIUS_M)?;
    let pois = select_pois(&clusters, &FrequencyCategory::default_accepted(), weeks)?;
    let graph = build_daily_flows(&pois, &clusters);
    if graph.is_empty() {
        return Err(OptimizerError::EmptyDayGraph.into());
    }

    let km = integrate_daily_distance(&log.samples)?;
    let stats = daily_trip_stats(&log.samples, DROPOUT_CUTOFF_S);
    let dense = daily_series(&km, driver.start_date, last_day);
    let series = DailySeries::new(driver.start_date, dense.iter().map(|d| d.1).collect())
        .with_stats(dense.iter().map(|(d, _)| stats.get(d).copied()).collect());
    let validation = validate_forecast(
        &series,
        scenario.window_weeks,
        scenario.forest,
        forest_seed,
        &GateThresholds::default(),
    )
    .ok();

    let forecast = forecast_week(&catalog.history, &scenario.stations.fuel, LOOKBACK_WEEKS)?;

    let anchor = driver.anchors[&scenario.departure];
    let departure_poi = pois
        .iter()
        .map(|p| (haversine(anchor, p.pos), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .filter(|(d, _)| *d <= 2.0 * CLUSTER_RADIUS_M)
        .map(|(_, p)| p.id.clone())
        .ok_or_else(|| HarnessError::InvalidScenario(format!("no POI near departure `{}`", scenario.departure)))?;

    // Area price over the union of every active day's corridor.
    let no_price = |_: &str| Some(1.0);
    let mut paths = Vec::new();
    let mut corridor_ids = BTreeSet::new();
    for day in graph.active_days() {
        let Ok(path) = DayPath::from_graph(&graph, &pois, day, Some(&departure_poi)) else {
            continue;
        };
        match generate_candidates(
            &city,
            &path,
            0,
            &catalog.stations,
            &no_price,
            0.0,
            scenario.corridor_radius_m,
        ) {
            Ok(set) => {
                corridor_ids.extend(set.corridor.iter().map(|s| s.id.clone()));
                paths.push((path, set.day_route.distance_km));
            }
            Err(OptimizerError::NoCandidates { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let active: Vec<Weekday> = paths.iter().map(|(p, _)| p.day).collect();
    let local = forecast.restricted_to(corridor_ids.iter().map(String::as_str));
    let day = cheapest_day_among(&local, &active).ok_or(OptimizerError::NoCandidates {
        radius_m: scenario.corridor_radius_m,
    })?;
    let (path, routed_km) = paths
        .into_iter()
        .find(|(p, _)| p.day == day)
        .expect("chosen among active days");

    let (gate_passed, delta_km) = match &validation {
        Some(v) if v.accepted => {
            let predicted = v
                .next_week
                .iter()
                .find(|(d, _)| Weekday::of(*d) == day)
                .map(|(_, km)| *km)
                .expect("seven consecutive days");
            (true, extra_mileage_delta(predicted, routed_km))
        }
        _ => (false, 0.0),
    };

    let context = SharedContext {
        scenario: scenario.name.clone(),
        day,
        path,
        current: 0,
        delta_km,
        gate_passed,
        prices: forecast
            .per_station
            .iter()
            .map(|(id, p)| (id.clone(), p[day.index()]))
            .collect(),
        stations: catalog.stations.clone(),
        vehicle: scenario.vehicle,
        refuel_s: scenario.refuel_time_s,
        corridor_radius_m: scenario.corridor_radius_m,
        search_radius_m: scenario.search_radius_m,
    };
    Ok(Prepared {
        city,
        catalog,
        log,
        halts,
        clusters,
        pois,
        graph,
        series,
        validation,
        forecast,
        departure_poi,
        context,
    })
}
