use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;
use crate::optimizer::{
    fuel_cost, generate_candidates, select_stop, time_cost, CandidateStop, DayPath, Mode, OptimizerError, VehicleState,
};
use crate::routing::geo::haversine;
use crate::routing::{Metric, NodeId, Route, RouterPort};
use crate::stations::Station;

use super::Strategy;

/// Inputs every strategy of one scenario consumes. Strategies read nothing
/// else, so equal fingerprints mean equal inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedContext {
    pub scenario: String,
    pub day: Weekday,
    pub path: DayPath,
    /// Index in `path.pois` of the POI the driver is leaving.
    pub current: usize,
    pub delta_km: f64,
    pub gate_passed: bool,
    /// Forecast €/L for `day`, per station.
    pub prices: BTreeMap<String, f64>,
    pub stations: Vec<Station>,
    pub vehicle: VehicleState<f64>,
    pub refuel_s: f64,
    pub corridor_radius_m: f64,
    pub search_radius_m: f64,
}

impl SharedContext {
    /// Hash of the serialized context.
    pub fn fingerprint(&self) -> u64 {
        let text = serde_json::to_string(self).expect("context serializes");
        let mut h = DefaultHasher::new();
        text.hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyChoice {
    pub station: Station,
    pub candidate: CandidateStop<f64>,
    pub route: Route,
    /// `C` of the chosen stop, euros.
    pub cost_eur: f64,
    /// Detour time over the no-stop onward route plus refueling, minutes.
    pub overhead_min: f64,
}

struct Routed {
    here: NodeId,
    remaining: Vec<NodeId>,
    onward_s: f64,
}

fn snap_path<R: RouterPort + ?Sized>(router: &R, ctx: &SharedContext) -> Result<Routed, OptimizerError> {
    let mut nodes = Vec::with_capacity(ctx.path.pois.len());
    for (id, pos) in &ctx.path.pois {
        let (n, _) = router
            .nearest_node(*pos)
            .ok_or_else(|| OptimizerError::UnknownPoi(id.clone()))?;
        nodes.push(n);
    }
    let here = nodes[ctx.current];
    let remaining = nodes[ctx.current + 1..].to_vec();
    let onward_s = router.multi_stop_route(here, &remaining, Metric::Time)?.time_s;
    Ok(Routed {
        here,
        remaining,
        onward_s,
    })
}

fn one_stop<R: RouterPort + ?Sized>(
    router: &R,
    ctx: &SharedContext,
    routed: &Routed,
    station: &Station,
) -> Option<(CandidateStop<f64>, Route)> {
    let price = *ctx.prices.get(&station.id)?;
    let (node, _) = router.nearest_node(station.pos)?;
    let route = router
        .one_stop_route(routed.here, node, &routed.remaining, Metric::Time)
        .ok()?;
    let c = CandidateStop {
        station_id: station.id.clone(),
        price,
        l_km: route.distance_km,
        delta_km: ctx.delta_km,
        t_s: route.time_s,
    };
    Some((c, route))
}

fn choice(
    ctx: &SharedContext,
    routed: &Routed,
    station: &Station,
    c: CandidateStop<f64>,
    route: Route,
) -> StrategyChoice {
    StrategyChoice {
        station: station.clone(),
        cost_eur: fuel_cost(&c, &ctx.vehicle),
        overhead_min: (time_cost(&c, ctx.refuel_s) - routed.onward_s) / 60.0,
        candidate: c,
        route,
    }
}

/// Runs one strategy. `mode` only affects [`Strategy::PathAware`]; the
/// others report cost and time with the same formulas.
pub fn run_strategy<R: RouterPort + ?Sized>(
    router: &R,
    ctx: &SharedContext,
    strategy: Strategy,
    mode: &Mode<f64>,
) -> Result<StrategyChoice, OptimizerError> {
    if ctx.path.pois.len() < 2 {
        return Err(OptimizerError::EmptyDayGraph);
    }
    ctx.vehicle.validate()?;
    let routed = snap_path(router, ctx)?;
    let here = ctx.path.pois[ctx.current].1;
    match strategy {
        Strategy::Baseline => {
            let mut by_distance: Vec<(f64, &Station)> = ctx
                .stations
                .iter()
                .filter(|s| ctx.prices.contains_key(&s.id))
                .map(|s| (haversine(here, s.pos), s))
                .collect();
            by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            for (_, s) in by_distance {
                if let Some((c, route)) = one_stop(router, ctx, &routed, s) {
                    if c.is_reachable(&ctx.vehicle) {
                        return Ok(choice(ctx, &routed, s, c, route));
                    }
                }
            }
            Err(OptimizerError::NoReachableStation)
        }
        Strategy::RadiusCheapest => {
            let mut best: Option<(f64, &Station, CandidateStop<f64>, Route)> = None;
            for s in &ctx.stations {
                let d = haversine(here, s.pos);
                if d > ctx.search_radius_m {
                    continue;
                }
                let Some((c, route)) = one_stop(router, ctx, &routed, s) else {
                    continue;
                };
                if !c.is_reachable(&ctx.vehicle) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bd, bs, bc, _)) => c
                        .price
                        .total_cmp(&bc.price)
                        .then(d.total_cmp(bd))
                        .then(s.id.cmp(&bs.id))
                        .is_lt(),
                };
                if better {
                    best = Some((d, s, c, route));
                }
            }
            let (_, s, c, route) = best.ok_or(OptimizerError::NoReachableStation)?;
            Ok(choice(ctx, &routed, s, c, route))
        }
        Strategy::PathAware => {
            let price = |id: &str| ctx.prices.get(id).copied();
            let mut set = generate_candidates(
                router,
                &ctx.path,
                ctx.current,
                &ctx.stations,
                &price,
                ctx.delta_km,
                ctx.corridor_radius_m,
            )?;
            let sel = select_stop(&set.candidates, &ctx.vehicle, mode, ctx.refuel_s)?;
            let station = set.station(sel.index).expect("candidate from corridor").clone();
            let c = set.candidates.swap_remove(sel.index);
            let route = set.routes.swap_remove(sel.index);
            Ok(choice(ctx, &routed, &station, c, route))
        }
    }
}
