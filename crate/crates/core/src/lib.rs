//! Habit-aware refueling planner.
//!
//! The pipeline turns vehicle telemetry into stop events, clusters them into
//! points of interest, learns each weekday's habitual trip sequence,
//! forecasts daily mileage, and picks a refueling station along the cheapest
//! day's route by trading fuel cost against detour time.
//!
//! Numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`.

pub mod calendar;
pub mod csvio;
pub mod harness;
pub mod mileage;
pub mod optimizer;
pub mod routing;
pub mod scalar;
pub mod stations;
pub mod telemetry;
pub mod trip_graph;

pub use scalar::Scalar;

pub type LatLon = routing::geo::LatLon<f64>;
pub type ForestModel = mileage::ForestModel<f64>;
pub type PredictionMetrics = mileage::PredictionMetrics<f64>;
pub type GateThresholds = mileage::GateThresholds<f64>;
pub type VehicleState = optimizer::VehicleState<f64>;
pub type Mode = optimizer::Mode<f64>;
pub type CandidateStop = optimizer::CandidateStop<f64>;

pub type LatLon32 = routing::geo::LatLon<f32>;
pub type ForestModel32 = mileage::ForestModel<f32>;
pub type VehicleState32 = optimizer::VehicleState<f32>;
pub type Mode32 = optimizer::Mode<f32>;
pub type CandidateStop32 = optimizer::CandidateStop<f32>;
