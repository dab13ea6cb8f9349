//! Refuel-stop scoring and selection along a day's habitual route.
//!
//! For a candidate station `k` with price `c`, one-stop route distance `l`
//! and time `t`, corrected distance `l̂ = l + δ`:
//!
//! * fuel cost `C = (f_full − f_0 + r·l̂)·c` in euros,
//! * time cost `T = t + Δ` in seconds,
//! * objective `L = K1·C + K2·T/60` if `r·l̂ ≤ f_0`, otherwise infinite.

mod candidates;
mod plan;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::RoutingError;
use crate::scalar::Scalar;

pub use candidates::{generate_candidates, CandidateSet, DayPath};
pub use plan::{plan_geojson, plan_refuel, write_plan_csv, write_plan_geojson, PlanInputs, RefuelPlan, PLAN_HEADER};

/// Fixed refueling duration, seconds.
pub const REFUEL_TIME_S: f64 = 300.0;

/// (K1, K2) pairs ordered by increasing weight on time.
pub const WEIGHT_LADDER: [(f64, f64); 5] = [(1.0, 0.0), (10.0, 1.0), (1.0, 1.0), (1.0, 10.0), (0.0, 1.0)];

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid vehicle state: {0}")]
    InvalidVehicle(String),
    #[error("invalid mode weights: {0}")]
    InvalidMode(String),
    #[error("the selected day has no trip edges")]
    EmptyDayGraph,
    #[error("no stations within {radius_m} m of the day route")]
    NoCandidates { radius_m: f64 },
    #[error("unknown POI `{0}`")]
    UnknownPoi(String),
    #[error("no candidate is reachable with the current fuel")]
    NoReachableStation,
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState<T> {
    /// Tank capacity, liters.
    pub f_full: T,
    /// Current fuel, liters.
    pub f0: T,
    /// Consumption, liters per km.
    pub r: T,
}

impl<T: Scalar> VehicleState<T> {
    pub fn new(f_full: T, f0: T, r: T) -> Result<Self, OptimizerError> {
        let v = Self { f_full, f0, r };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let finite = self.f_full.is_finite() && self.f0.is_finite() && self.r.is_finite();
        if !finite || self.f0 < T::zero() || self.f0 > self.f_full {
            return Err(OptimizerError::InvalidVehicle(format!(
                "need 0 <= f0 <= f_full, got f0={} f_full={}",
                self.f0, self.f_full
            )));
        }
        if self.r <= T::zero() {
            return Err(OptimizerError::InvalidVehicle(format!(
                "consumption must be > 0, got {}",
                self.r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    FuelSensitive,
    Balanced,
    TimeSensitive,
    Custom,
}

impl ModeName {
    pub fn label(self) -> &'static str {
        match self {
            Self::FuelSensitive => "fuel_sensitive",
            Self::Balanced => "balanced",
            Self::TimeSensitive => "time_sensitive",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fuel" | "fuel_sensitive" => Ok(Self::FuelSensitive),
            "balanced" => Ok(Self::Balanced),
            "time" | "time_sensitive" => Ok(Self::TimeSensitive),
            "custom" => Ok(Self::Custom),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Preference weights: K1 per euro, K2 per minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode<T> {
    pub name: ModeName,
    pub k1: T,
    pub k2: T,
}

impl<T: Scalar> Mode<T> {
    pub fn fuel_sensitive() -> Self {
        Self::preset(ModeName::FuelSensitive, 1.0, 0.0)
    }

    pub fn balanced() -> Self {
        Self::preset(ModeName::Balanced, 1.0, 1.0)
    }

    pub fn time_sensitive() -> Self {
        Self::preset(ModeName::TimeSensitive, 1.0, 10.0)
    }

    fn preset(name: ModeName, k1: f64, k2: f64) -> Self {
        Self {
            name,
            k1: T::lit(k1),
            k2: T::lit(k2),
        }
    }

    pub fn custom(k1: T, k2: T) -> Result<Self, OptimizerError> {
        let ok = k1.is_finite() && k2.is_finite() && k1 >= T::zero() && k2 >= T::zero() && k1 + k2 > T::zero();
        if !ok {
            return Err(OptimizerError::InvalidMode(format!(
                "need K1, K2 >= 0 and K1 + K2 > 0, got ({k1}, {k2})"
            )));
        }
        Ok(Self {
            name: ModeName::Custom,
            k1,
            k2,
        })
    }

    pub fn by_name(name: ModeName) -> Option<Self> {
        match name {
            ModeName::FuelSensitive => Some(Self::fuel_sensitive()),
            ModeName::Balanced => Some(Self::balanced()),
            ModeName::TimeSensitive => Some(Self::time_sensitive()),
            ModeName::Custom => None,
        }
    }
}

/// A candidate station with its routed one-stop distance and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateStop<T> {
    pub station_id: String,
    /// Unit price, €/L.
    pub price: T,
    /// One-stop route distance, km.
    pub l_km: T,
    /// Extra-mileage correction added to `l_km`, km.
    pub delta_km: T,
    /// One-stop route time, seconds.
    pub t_s: T,
}

impl<T: Scalar> CandidateStop<T> {
    pub fn l_hat_km(&self) -> T {
        self.l_km + self.delta_km
    }

    pub fn is_reachable(&self, v: &VehicleState<T>) -> bool {
        v.r * self.l_hat_km() <= v.f0
    }
}

/// `(f_full − f_0 + r·l̂)·c`, euros.
pub fn fuel_cost<T: Scalar>(c: &CandidateStop<T>, v: &VehicleState<T>) -> T {
    (v.f_full - v.f0 + v.r * c.l_hat_km()) * c.price
}

/// `t + Δ`, seconds.
pub fn time_cost<T: Scalar>(c: &CandidateStop<T>, refuel_s: T) -> T {
    c.t_s + refuel_s
}

/// `K1·C + K2·T_minutes` when reachable, `+∞` otherwise.
pub fn objective<T: Scalar>(c: &CandidateStop<T>, v: &VehicleState<T>, mode: &Mode<T>, refuel_s: T) -> T {
    if !c.is_reachable(v) {
        return T::infinity();
    }
    mode.k1 * fuel_cost(c, v) + mode.k2 * time_cost(c, refuel_s) / T::lit(60.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection<T> {
    pub index: usize,
    pub fuel_cost: T,
    pub time_cost_s: T,
    pub objective: T,
}

/// Argmin of the objective; ties go to lower fuel cost, then lower route
/// time, then smaller station id.
pub fn select_stop<T: Scalar>(
    candidates: &[CandidateStop<T>],
    v: &VehicleState<T>,
    mode: &Mode<T>,
    refuel_s: T,
) -> Result<Selection<T>, OptimizerError> {
    let mut best: Option<Selection<T>> = None;
    for (index, c) in candidates.iter().enumerate() {
        let objective = objective(c, v, mode, refuel_s);
        if objective.is_infinite() {
            continue;
        }
        let s = Selection {
            index,
            fuel_cost: fuel_cost(c, v),
            time_cost_s: time_cost(c, refuel_s),
            objective,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let cb = &candidates[b.index];
                s.objective
                    .total_cmp(&b.objective)
                    .then(s.fuel_cost.total_cmp(&b.fuel_cost))
                    .then(c.t_s.total_cmp(&cb.t_s))
                    .then(c.station_id.cmp(&cb.station_id))
                    .is_lt()
            }
        };
        if better {
            best = Some(s);
        }
    }
    best.ok_or(OptimizerError::NoReachableStation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(id: &str, price: f64, l: f64, t: f64) -> CandidateStop<f64> {
        CandidateStop {
            station_id: id.into(),
            price,
            l_km: l,
            delta_km: 0.0,
            t_s: t,
        }
    }

    #[test]
    fn fuel_cost_examples() {
        let v = VehicleState::new(50.0, 10.0, 0.05).unwrap();
        assert!((fuel_cost(&cand("a", 1.8, 20.0, 0.0), &v) - 73.8).abs() < 1e-12);
        let full = VehicleState::new(50.0, 50.0, 0.05).unwrap();
        assert_eq!(fuel_cost(&cand("a", 1.8, 0.0, 0.0), &full), 0.0);
    }

    #[test]
    fn time_cost_examples() {
        assert_eq!(time_cost(&cand("a", 1.0, 0.0, 360.0), REFUEL_TIME_S), 660.0);
        assert_eq!(time_cost(&cand("a", 1.0, 0.0, 0.0), REFUEL_TIME_S), 300.0);
        assert_eq!(time_cost(&cand("a", 1.0, 0.0, 360.0), 0.0), 360.0);
    }

    #[test]
    fn objective_examples() {
        // C = 43 €, T = 5 min with Δ = 0
        let v = VehicleState::new(50.0, 30.0, 0.1).unwrap();
        let c = CandidateStop {
            station_id: "a".into(),
            price: 43.0 / 21.0,
            l_km: 10.0,
            delta_km: 0.0,
            t_s: 300.0,
        };
        let l: f64 = objective(&c, &v, &Mode::balanced(), 0.0);
        assert!((l - 48.0).abs() < 1e-12, "{l}");

        let edge = VehicleState::new(50.0, 2.0, 0.1).unwrap();
        let at_limit = cand("b", 1.8, 20.0, 100.0);
        assert!(objective(&at_limit, &edge, &Mode::balanced(), 300.0).is_finite());
        let beyond = cand("c", 1.8, 20.5, 100.0);
        assert!(objective(&beyond, &edge, &Mode::balanced(), 300.0).is_infinite());
    }

    #[test]
    fn selection_and_ties() {
        let v = VehicleState::new(50.0, 40.0, 0.05).unwrap();
        let mode = Mode::custom(1.0, 0.0).unwrap();
        // objectives proportional to price: [10, 12, 11] scaled
        let cs = vec![
            cand("a", 1.0, 0.0, 9.0),
            cand("b", 1.2, 0.0, 1.0),
            cand("c", 1.1, 0.0, 5.0),
        ];
        assert_eq!(select_stop(&cs, &v, &mode, 300.0).unwrap().index, 0);

        let tied = vec![
            cand("z", 1.0, 0.0, 50.0),
            cand("y", 1.0, 0.0, 10.0),
            cand("x", 1.0, 0.0, 10.0),
        ];
        assert_eq!(select_stop(&tied, &v, &mode, 300.0).unwrap().index, 2);

        let empty_tank = VehicleState::new(50.0, 0.0, 0.05).unwrap();
        assert!(matches!(
            select_stop(&[cand("a", 1.0, 1.0, 1.0)], &empty_tank, &mode, 300.0),
            Err(OptimizerError::NoReachableStation)
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(VehicleState::new(50.0, 60.0, 0.05).is_err());
        assert!(VehicleState::new(50.0, 10.0, 0.0).is_err());
        assert!(Mode::custom(0.0, 0.0).is_err());
        assert!(Mode::custom(-1.0, 1.0).is_err());
        assert_eq!("time".parse::<ModeName>().unwrap(), ModeName::TimeSensitive);
    }

    #[test]
    fn f32_matches_f64() {
        let v32 = VehicleState::new(50.0f32, 10.0, 0.05).unwrap();
        let c32 = CandidateStop {
            station_id: "a".into(),
            price: 1.8f32,
            l_km: 20.0,
            delta_km: 0.0,
            t_s: 0.0,
        };
        assert!((fuel_cost(&c32, &v32) - 73.8).abs() < 1e-4);
    }
}
