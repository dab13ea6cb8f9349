//! Next-week daily mileage forecasting with a seeded regression forest,
//! forecast validation, and the extra-mileage correction δ.

mod cv;
mod features;
mod forest;
mod metrics;
mod scaler;
mod series_io;

use thiserror::Error;

use crate::csvio::CsvError;

pub use cv::{forecast_recursive, sliding_cv, sliding_cv_on_weeks, validate_forecast, CvReport, Fold, Validation};
pub use features::{build_features, feature_names, DailyFeatureRow, DailySeries, LaggedStats, MIN_SERIES_DAYS};
pub use forest::{fit_forest, predict_week, ForestModel, ForestParams, Tree, MODEL_FORMAT_VERSION};
pub use metrics::{evaluate_metrics, extra_mileage_delta, gate, write_metrics_csv, GateThresholds, PredictionMetrics};
pub use scaler::ScalerStats;
pub use series_io::{load_daily_series, write_daily_series, DAILY_HEADER};

#[derive(Debug, Error)]
pub enum MileageError {
    #[error("series covers {days} day(s); at least {needed} are required")]
    SeriesTooShort { days: usize, needed: usize },
    #[error("{rows} training row(s); at least {needed} are required")]
    TooFewRows { rows: usize, needed: usize },
    #[error("target on {date} is not finite")]
    NonFiniteTarget { date: chrono::NaiveDate },
    #[error("row {index} is missing its target")]
    MissingTarget { index: usize },
    #[error("feature schema mismatch: model expects {expected:?}, rows have {found:?}")]
    FeatureMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("actual weekly total is zero; percentage error undefined")]
    ZeroWeekTotal,
    #[error("{weeks} week(s) of rows cannot fill a {window}-week window plus a test week")]
    InsufficientHistory { weeks: usize, window: usize },
    #[error("window must be at least 2 weeks, got {0}")]
    InvalidWindow(usize),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {found}, expected {expected}")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Csv(#[from] CsvError),
}
