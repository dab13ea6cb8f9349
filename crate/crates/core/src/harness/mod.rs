//! End-to-end replay: builds a synthetic world per scenario, runs the
//! learning pipeline, and compares stop-choice strategies on identical
//! inputs.

mod cohort;
mod pipeline;
mod presets;
mod strategy;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mileage::{ForestParams, MileageError};
use crate::optimizer::{Mode, OptimizerError, VehicleState, REFUEL_TIME_S};
use crate::routing::city::CityParams;
use crate::routing::{RoutingError, CORRIDOR_RADIUS_M};
use crate::stations::{StationError, StationSynthParams};
use crate::telemetry::{DriverProfile, TelemetryError};
use crate::trip_graph::TripGraphError;

pub use cohort::{
    load_run_csv, run_cohort, write_report_csv, write_run_csv, AggregateReport, CohortOptions, Outcome, ReportRow,
    REPORT_HEADER, RUN_HEADER,
};
pub use pipeline::{generate_world, prepare, Prepared, World};
pub use presets::{preset_cohort, preset_drivers};
pub use strategy::{run_strategy, SharedContext, StrategyChoice};

/// Cheapest-station search radius for [`Strategy::RadiusCheapest`].
pub const DEFAULT_SEARCH_RADIUS_M: f64 = 5_000.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    TripGraph(#[from] TripGraphError),
    #[error(transparent)]
    Mileage(#[from] MileageError),
    #[error(transparent)]
    Stations(#[from] StationError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] crate::csvio::CsvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Nearest station to the current position, price ignored.
    Baseline,
    /// Cheapest station within a fixed radius of the current position,
    /// onward path ignored.
    RadiusCheapest,
    /// Corridor candidates on the learned day path, scored by the objective.
    PathAware,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::RadiusCheapest, Strategy::PathAware];

    pub fn label(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::RadiusCheapest => "radius_cheapest",
            Self::PathAware => "path_aware",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.label() == s.trim())
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// One recording: a driver in a generated city with a generated station
/// market, observed for some weeks and then planned for the next week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    /// Root of every random draw in the scenario.
    pub seed: u64,
    pub observation_weeks: u32,
    /// Training window of the mileage model, weeks.
    pub window_weeks: usize,
    /// Driver anchor whose POI starts the planned day.
    pub departure: String,
    pub city: CityParams,
    pub stations: StationSynthParams,
    pub driver: DriverProfile,
    pub vehicle: VehicleState<f64>,
    pub mode: Mode<f64>,
    pub forest: ForestParams,
    pub corridor_radius_m: f64,
    pub search_radius_m: f64,
    pub refuel_time_s: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "demo".to_string(),
            seed: 7,
            observation_weeks: 10,
            window_weeks: 4,
            departure: "home".to_string(),
            city: CityParams::default(),
            stations: StationSynthParams::default(),
            driver: preset_drivers().remove(0),
            vehicle: VehicleState {
                f_full: 40.0,
                f0: 16.0,
                r: 0.06,
            },
            mode: Mode::balanced(),
            forest: ForestParams::default(),
            corridor_radius_m: CORRIDOR_RADIUS_M,
            search_radius_m: DEFAULT_SEARCH_RADIUS_M,
            refuel_time_s: REFUEL_TIME_S,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidScenario(m));
        self.driver.validate()?;
        self.vehicle.validate()?;
        Mode::custom(self.mode.k1, self.mode.k2)?;
        if !self.driver.anchors.contains_key(&self.departure) {
            return bad(format!("departure `{}` is not a driver anchor", self.departure));
        }
        if (self.observation_weeks as usize) <= self.window_weeks + 1 || self.window_weeks == 0 {
            return bad(format!(
                "need observation_weeks > window_weeks + 1, got {} and {}",
                self.observation_weeks, self.window_weeks
            ));
        }
        for (field, v) in [
            ("corridor_radius_m", self.corridor_radius_m),
            ("search_radius_m", self.search_radius_m),
            ("refuel_time_s", self.refuel_time_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{field} must be finite and >= 0, got {v}"));
            }
        }
        if self.city.rows < 2 || self.city.cols < 2 {
            return bad("city needs at least 2x2 intersections".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// A list of scenarios sharing one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub scenarios: Vec<Scenario>,
}

impl Cohort {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let c: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if c.scenarios.is_empty() {
            return Err(HarnessError::InvalidScenario("cohort has no scenarios".into()));
        }
        for s in &c.scenarios {
            s.validate()?;
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_toml_round_trip() {
        let s = Scenario::default();
        let text = s.to_toml().unwrap();
        assert_eq!(Scenario::from_toml(&text).unwrap(), s);
        let partial = Scenario::from_toml("name = \"x\"\nseed = 3\n").unwrap();
        assert_eq!(partial.seed, 3);
        assert_eq!(partial.driver, preset_drivers()[0]);
    }

    #[test]
    fn scenario_validation() {
        let s = Scenario {
            departure: "moon".into(),
            ..Scenario::default()
        };
        assert!(matches!(s.validate(), Err(HarnessError::InvalidScenario(_))));
        let s = Scenario {
            observation_weeks: 4,
            ..Scenario::default()
        };
        assert!(s.validate().is_err());
        assert!(Scenario::from_toml("[vehicle]\nf_full = 10.0\nf0 = 20.0\nr = 0.1\n").is_err());
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.label().parse::<Strategy>().unwrap(), s);
        }
    }
}
