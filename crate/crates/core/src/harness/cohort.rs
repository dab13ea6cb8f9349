use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;
use crate::csvio::{fmt_f64, fmt_opt_f64, read_rows, write_rows, CsvError};
use crate::optimizer::{Mode, ModeName};
use crate::scalar::{mean, std_dev};

use super::{prepare, run_strategy, HarnessError, Scenario, Strategy};

pub const RUN_HEADER: [&str; 14] = [
    "run",
    "scenario",
    "strategy",
    "mode",
    "K1",
    "K2",
    "day",
    "station_id",
    "cost_eur",
    "time_min",
    "gate_passed",
    "delta_km",
    "context_hash",
    "error",
];

pub const REPORT_HEADER: [&str; 10] = [
    "strategy",
    "mode",
    "K1",
    "K2",
    "cost_mean",
    "cost_std",
    "time_mean",
    "time_std",
    "n_runs",
    "n_failed",
];

/// One (scenario, strategy, mode) replay. A failed run carries `error` and
/// no cost or time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub run: usize,
    pub scenario: String,
    pub strategy: Strategy,
    pub mode: ModeName,
    pub k1: f64,
    pub k2: f64,
    pub day: Option<Weekday>,
    pub station_id: Option<String>,
    pub cost_eur: Option<f64>,
    /// Detour plus refueling time, minutes.
    pub time_min: Option<f64>,
    /// Whether the mileage forecast passed its gate; false means δ = 0.
    pub gate_passed: Option<bool>,
    pub delta_km: Option<f64>,
    pub context_hash: Option<u64>,
    pub error: Option<String>,
}

impl Outcome {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: Strategy,
    pub mode: ModeName,
    pub k1: f64,
    pub k2: f64,
    pub cost_mean: f64,
    pub cost_std: f64,
    pub time_mean: f64,
    pub time_std: f64,
    pub n_runs: usize,
    pub n_failed: usize,
}

/// Mean and population std per (strategy, mode) over successful runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<ReportRow>,
}

impl AggregateReport {
    /// Rows in `strategies × modes` order.
    pub fn from_outcomes(outcomes: &[Outcome], strategies: &[Strategy], modes: &[Mode<f64>]) -> Self {
        let mut rows = Vec::new();
        for &strategy in strategies {
            for mode in modes {
                let cell: Vec<&Outcome> = outcomes
                    .iter()
                    .filter(|o| o.strategy == strategy && o.mode == mode.name && o.k1 == mode.k1 && o.k2 == mode.k2)
                    .collect();
                let ok: Vec<&Outcome> = cell.iter().copied().filter(|o| o.succeeded()).collect();
                let cost: Vec<f64> = ok.iter().filter_map(|o| o.cost_eur).collect();
                let time: Vec<f64> = ok.iter().filter_map(|o| o.time_min).collect();
                rows.push(ReportRow {
                    strategy,
                    mode: mode.name,
                    k1: mode.k1,
                    k2: mode.k2,
                    cost_mean: mean(&cost).unwrap_or(f64::NAN),
                    cost_std: std_dev(&cost).unwrap_or(f64::NAN),
                    time_mean: mean(&time).unwrap_or(f64::NAN),
                    time_std: std_dev(&time).unwrap_or(f64::NAN),
                    n_runs: ok.len(),
                    n_failed: cell.len() - ok.len(),
                });
            }
        }
        Self { rows }
    }

    pub fn row(&self, strategy: Strategy, mode: ModeName) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.mode == mode)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CohortOptions {
    /// Worker threads; `None` uses the global pool, `Some(1)` is sequential.
    pub threads: Option<usize>,
}

fn failed(run: usize, scenario: &Scenario, strategy: Strategy, mode: &Mode<f64>, err: String) -> Outcome {
    Outcome {
        run,
        scenario: scenario.name.clone(),
        strategy,
        mode: mode.name,
        k1: mode.k1,
        k2: mode.k2,
        day: None,
        station_id: None,
        cost_eur: None,
        time_min: None,
        gate_passed: None,
        delta_km: None,
        context_hash: None,
        error: Some(err),
    }
}

fn replay(run: usize, scenario: &Scenario, strategies: &[Strategy], modes: &[Mode<f64>]) -> Vec<Outcome> {
    let prepared = match prepare(scenario) {
        Ok(p) => p,
        Err(e) => {
            let msg = e.to_string();
            return strategies
                .iter()
                .flat_map(|&s| modes.iter().map(move |m| (s, m)))
                .map(|(s, m)| failed(run, scenario, s, m, msg.clone()))
                .collect();
        }
    };
    let ctx = &prepared.context;
    let mut out = Vec::new();
    for &strategy in strategies {
        for mode in modes {
            let hash = ctx.fingerprint();
            let o = match run_strategy(&prepared.city, ctx, strategy, mode) {
                Ok(c) => Outcome {
                    run,
                    scenario: scenario.name.clone(),
                    strategy,
                    mode: mode.name,
                    k1: mode.k1,
                    k2: mode.k2,
                    day: Some(ctx.day),
                    station_id: Some(c.station.id),
                    cost_eur: Some(c.cost_eur),
                    time_min: Some(c.overhead_min),
                    gate_passed: Some(ctx.gate_passed),
                    delta_km: Some(ctx.delta_km),
                    context_hash: Some(hash),
                    error: None,
                },
                Err(e) => {
                    let mut f = failed(run, scenario, strategy, mode, e.to_string());
                    f.day = Some(ctx.day);
                    f.gate_passed = Some(ctx.gate_passed);
                    f.delta_km = Some(ctx.delta_km);
                    f.context_hash = Some(hash);
                    f
                }
            };
            out.push(o);
        }
    }
    out
}

/// Replays `scenarios × strategies × modes`. Scenarios run in parallel; the
/// output order (scenario, strategy, mode) does not depend on scheduling.
pub fn run_cohort(
    scenarios: &[Scenario],
    strategies: &[Strategy],
    modes: &[Mode<f64>],
    options: CohortOptions,
) -> Result<(Vec<Outcome>, AggregateReport), HarnessError> {
    if scenarios.is_empty() {
        return Err(HarnessError::InvalidScenario("no scenarios".into()));
    }
    let work = || -> Vec<Outcome> {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| replay(i, s, strategies, modes))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let outcomes = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let report = AggregateReport::from_outcomes(&outcomes, strategies, modes);
    Ok((outcomes, report))
}

fn two_decimals(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        String::new()
    }
}

pub fn write_report_csv(path: &Path, report: &AggregateReport) -> Result<(), CsvError> {
    write_rows(
        path,
        &REPORT_HEADER,
        report.rows.iter().map(|r| {
            [
                r.strategy.to_string(),
                r.mode.to_string(),
                fmt_f64(r.k1),
                fmt_f64(r.k2),
                two_decimals(r.cost_mean),
                two_decimals(r.cost_std),
                two_decimals(r.time_mean),
                two_decimals(r.time_std),
                r.n_runs.to_string(),
                r.n_failed.to_string(),
            ]
        }),
    )
}

/// Full-precision per-run rows; values round-trip exactly.
pub fn write_run_csv(path: &Path, outcomes: &[Outcome]) -> Result<(), CsvError> {
    write_rows(
        path,
        &RUN_HEADER,
        outcomes.iter().map(|o| {
            [
                o.run.to_string(),
                o.scenario.clone(),
                o.strategy.to_string(),
                o.mode.to_string(),
                fmt_f64(o.k1),
                fmt_f64(o.k2),
                o.day.map(|d| d.to_string()).unwrap_or_default(),
                o.station_id.clone().unwrap_or_default(),
                fmt_opt_f64(o.cost_eur),
                fmt_opt_f64(o.time_min),
                o.gate_passed.map(|g| g.to_string()).unwrap_or_default(),
                fmt_opt_f64(o.delta_km),
                o.context_hash.map(|h| format!("{h:016x}")).unwrap_or_default(),
                o.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn load_run_csv(path: &Path) -> Result<Vec<Outcome>, CsvError> {
    read_rows(path, &RUN_HEADER, |row| {
        let opt = |field: &str| {
            let v = row.raw(field).trim();
            (!v.is_empty()).then(|| v.to_string())
        };
        let parse_opt = |field: &str| -> Result<Option<f64>, CsvError> {
            match opt(field) {
                None => Ok(None),
                Some(v) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| row.error(field, format!("`{v}` is not a number"))),
            }
        };
        let strategy = row
            .raw("strategy")
            .parse::<Strategy>()
            .map_err(|e| row.error("strategy", e))?;
        let mode = row.raw("mode").parse::<ModeName>().map_err(|e| row.error("mode", e))?;
        let day = match opt("day") {
            None => None,
            Some(d) => Some(d.parse::<Weekday>().map_err(|e| row.error("day", e))?),
        };
        let gate_passed = match opt("gate_passed") {
            None => None,
            Some(g) => Some(
                g.parse::<bool>()
                    .map_err(|_| row.error("gate_passed", "expected true or false"))?,
            ),
        };
        let context_hash = match opt("context_hash") {
            None => None,
            Some(h) => Some(u64::from_str_radix(&h, 16).map_err(|_| row.error("context_hash", "expected hex"))?),
        };
        Ok(Outcome {
            run: row.parse("run")?,
            scenario: row.raw("scenario").to_string(),
            strategy,
            mode,
            k1: row.parse("K1")?,
            k2: row.parse("K2")?,
            day,
            station_id: opt("station_id"),
            cost_eur: parse_opt("cost_eur")?,
            time_min: parse_opt("time_min")?,
            gate_passed,
            delta_km: parse_opt("delta_km")?,
            context_hash,
            error: opt("error"),
        })
    })
}
