use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use refuel_core::csvio::{fmt_f64, write_rows, CsvError};
use refuel_core::harness::{
    generate_world, prepare, preset_cohort, run_cohort, write_report_csv, write_run_csv, Cohort, CohortOptions,
    HarnessError, Scenario, Strategy,
};
use refuel_core::mileage::{
    load_daily_series, sliding_cv, validate_forecast, write_daily_series, write_metrics_csv, DailySeries, ForestParams,
    GateThresholds, MileageError,
};
use refuel_core::optimizer::{
    plan_refuel, write_plan_csv, write_plan_geojson, Mode, ModeName, OptimizerError, PlanInputs, WEIGHT_LADDER,
};
use refuel_core::routing::{save_road_graph, RoutingError};
use refuel_core::stations::{save_stations, StationError};
use refuel_core::telemetry::{
    daily_series, daily_trip_stats, detect_halts, integrate_daily_distance, load_stop_events, load_trip_log,
    write_stop_events, write_trip_log, TelemetryError, DROPOUT_CUTOFF_S, HALT_GAP_S,
};
use refuel_core::trip_graph::{
    assign_clusters, build_daily_flows, export_graph_csv, export_stops_csv, observation_weeks, select_pois,
    FrequencyCategory, TripGraphError, CLUSTER_RADIUS_M,
};

const DEFAULT_COHORT_SEED: u64 = 7;

#[derive(Parser)]
#[command(
    name = "refuel",
    version,
    about = "Plan refueling stops from driving habits and simulate strategies"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario TOML (`plan`, `gen`) or cohort TOML (`simulate`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// fuel | balanced | time | custom K1 K2
    #[arg(long, global = true, num_args = 1..=3, value_name = "MODE")]
    mode: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trip log -> stop events and daily distance.
    Ingest {
        #[arg(long)]
        log: PathBuf,
        /// Bus silence (s) that counts as a halt.
        #[arg(long, default_value_t = HALT_GAP_S)]
        gap_s: i64,
    },
    /// Stop events -> clusters, POIs and daily trip graph CSVs.
    Graph {
        #[arg(long)]
        stops: PathBuf,
        /// Observation length; defaults to the span of the events.
        #[arg(long)]
        weeks: Option<u32>,
        #[arg(long, default_value_t = CLUSTER_RADIUS_M)]
        radius_m: f64,
    },
    /// Daily distance -> cross-validated forecast and gate verdict.
    Predict {
        #[arg(long)]
        daily: PathBuf,
        /// Training window, weeks.
        #[arg(long, default_value_t = 4)]
        window: usize,
    },
    /// One refueling plan for a scenario (GeoJSON + CSV).
    Plan,
    /// Replay a cohort under every strategy and write the aggregate report.
    Simulate {
        /// Recordings per preset driver when no config is given.
        #[arg(long, default_value_t = 5)]
        per_driver: usize,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        threads: Option<usize>,
        /// Sweep the five-point weight ladder instead of the three presets.
        #[arg(long)]
        ladder: bool,
    },
    /// Synthetic city, stations and driver log for a scenario.
    Gen,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(if is_validation(&e) { 2 } else { 1 })
        }
    }
}

fn csv_invalid(e: &CsvError) -> bool {
    !matches!(e, CsvError::Io { .. })
}

fn harness_invalid(e: &HarnessError) -> bool {
    match e {
        HarnessError::InvalidScenario(_) | HarnessError::Config(_) => true,
        HarnessError::Telemetry(TelemetryError::InvalidProfile(_)) => true,
        HarnessError::Optimizer(OptimizerError::InvalidMode(_) | OptimizerError::InvalidVehicle(_)) => true,
        HarnessError::Csv(c) => csv_invalid(c),
        _ => false,
    }
}

/// Bad input (arguments, configs, malformed files) versus failures while
/// running on valid input.
fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        if e.is::<Invalid>() {
            return true;
        }
        if let Some(c) = e.downcast_ref::<CsvError>() {
            return csv_invalid(c);
        }
        if let Some(h) = e.downcast_ref::<HarnessError>() {
            return harness_invalid(h);
        }
        if let Some(o) = e.downcast_ref::<OptimizerError>() {
            return matches!(o, OptimizerError::InvalidMode(_) | OptimizerError::InvalidVehicle(_));
        }
        if let Some(t) = e.downcast_ref::<TelemetryError>() {
            return match t {
                TelemetryError::InvalidThreshold(_) | TelemetryError::InvalidProfile(_) => true,
                TelemetryError::Csv(c) => csv_invalid(c),
                _ => false,
            };
        }
        if let Some(t) = e.downcast_ref::<TripGraphError>() {
            return match t {
                TripGraphError::InvalidRadius(_) | TripGraphError::ObservationTooShort { .. } => true,
                TripGraphError::Csv(c) => csv_invalid(c),
                _ => false,
            };
        }
        if let Some(m) = e.downcast_ref::<MileageError>() {
            return match m {
                MileageError::SeriesTooShort { .. }
                | MileageError::InsufficientHistory { .. }
                | MileageError::InvalidWindow(_) => true,
                MileageError::Csv(c) => csv_invalid(c),
                _ => false,
            };
        }
        if let Some(s) = e.downcast_ref::<StationError>() {
            return !matches!(s, StationError::Csv(CsvError::Io { .. }));
        }
        if let Some(r) = e.downcast_ref::<RoutingError>() {
            return match r {
                RoutingError::Csv(c) => csv_invalid(c),
                RoutingError::Unreachable { .. } => false,
                _ => true,
            };
        }
        false
    })
}

fn parse_mode(words: &[String]) -> Result<Mode<f64>> {
    let name: ModeName = words[0].parse().map_err(Invalid)?;
    if name == ModeName::Custom {
        let [_, k1, k2] = words else {
            bail!(Invalid("custom mode needs two weights: --mode custom K1 K2".into()));
        };
        let num = |s: &String| s.parse::<f64>().map_err(|_| Invalid(format!("`{s}` is not a number")));
        return Ok(Mode::custom(num(k1)?, num(k2)?)?);
    }
    if words.len() > 1 {
        bail!(Invalid(format!("mode `{}` takes no weights", words[0])));
    }
    Ok(Mode::by_name(name).expect("preset mode"))
}

fn ladder() -> Vec<Mode<f64>> {
    WEIGHT_LADDER
        .iter()
        .map(|&(k1, k2)| {
            [Mode::fuel_sensitive(), Mode::balanced(), Mode::time_sensitive()]
                .into_iter()
                .find(|m| m.k1 == k1 && m.k2 == k2)
                .unwrap_or(Mode::custom(k1, k2).expect("ladder weights are valid"))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let mode = cli.mode.as_deref().map(parse_mode).transpose()?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match cli.command {
        Command::Ingest { log, gap_s } => ingest(&log, gap_s, &cli.out),
        Command::Graph { stops, weeks, radius_m } => graph(&stops, weeks, radius_m, &cli.out),
        Command::Predict { daily, window } => predict(&daily, window, cli.seed.unwrap_or(0), &cli.out),
        Command::Plan => plan(load_scenario(cli.config.as_deref(), cli.seed, mode)?, &cli.out),
        Command::Simulate {
            per_driver,
            threads,
            ladder: use_ladder,
        } => {
            let scenarios = match &cli.config {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Cohort::from_toml(&text)?.scenarios
                }
                None => {
                    if per_driver == 0 {
                        bail!(Invalid("--per-driver must be at least 1".into()));
                    }
                    preset_cohort(cli.seed.unwrap_or(DEFAULT_COHORT_SEED), per_driver)
                }
            };
            let modes = match (mode, use_ladder) {
                (Some(_), true) => bail!(Invalid("--mode and --ladder are exclusive".into())),
                (Some(m), false) => vec![m],
                (None, true) => ladder(),
                (None, false) => vec![Mode::fuel_sensitive(), Mode::balanced(), Mode::time_sensitive()],
            };
            simulate(&scenarios, &modes, threads, &cli.out)
        }
        Command::Gen => gen(&load_scenario(cli.config.as_deref(), cli.seed, mode)?, &cli.out),
    }
}

fn load_scenario(config: Option<&Path>, seed: Option<u64>, mode: Option<Mode<f64>>) -> Result<Scenario> {
    let mut s = match config {
        Some(p) => Scenario::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Scenario::default(),
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(m) = mode {
        s.mode = m;
    }
    Ok(s)
}

fn ingest(log: &Path, gap_s: i64, out: &Path) -> Result<()> {
    let (trace, samples) = load_trip_log(log)?;
    let halts = detect_halts(&trace, &samples, gap_s)?;
    let stops_path = out.join("stop_events.csv");
    write_stop_events(&stops_path, &halts)?;

    let km = integrate_daily_distance(&samples)?;
    let (Some((&first, _)), Some((&last, _))) = (km.first_key_value(), km.last_key_value()) else {
        bail!(Invalid("trip log has no samples".into()));
    };
    let stats = daily_trip_stats(&samples, DROPOUT_CUTOFF_S);
    let dense = daily_series(&km, first, last);
    let series = DailySeries::new(first, dense.iter().map(|d| d.1).collect())
        .with_stats(dense.iter().map(|(d, _)| stats.get(d).copied()).collect());
    let daily_path = out.join("daily_km.csv");
    write_daily_series(&daily_path, &series)?;
    println!("stops: {} -> {}", halts.len(), stops_path.display());
    println!("days: {} ({first} to {last}) -> {}", series.len(), daily_path.display());
    Ok(())
}

fn graph(stops: &Path, weeks: Option<u32>, radius_m: f64, out: &Path) -> Result<()> {
    let events = load_stop_events(stops)?;
    let clusters = assign_clusters(&events, radius_m)?;
    let weeks = weeks.unwrap_or_else(|| observation_weeks(&events));
    let pois = select_pois(&clusters, &FrequencyCategory::default_accepted(), weeks)?;
    let dtg = build_daily_flows(&pois, &clusters);
    export_stops_csv(&clusters, weeks, &out.join("stop_clusters.csv"))?;
    export_graph_csv(&pois, &dtg, &out.join("dtg_nodes.csv"), &out.join("dtg_edges.csv"))?;
    println!("clusters: {}, POIs: {}, weeks: {weeks}", clusters.len(), pois.len());
    for day in dtg.active_days() {
        println!(
            "{day}: {} -> {}",
            dtg.origin(day).unwrap_or("?"),
            dtg.destinations(day).join(" -> ")
        );
    }
    Ok(())
}

fn predict(daily: &Path, window: usize, seed: u64, out: &Path) -> Result<()> {
    let series = load_daily_series(daily)?;
    let params = ForestParams::default();
    let cv = sliding_cv(&series, window, params, seed)?;
    write_metrics_csv(&out.join("cv_metrics.csv"), &cv.metrics())?;
    let v = validate_forecast(&series, window, params, seed, &GateThresholds::default())?;
    write_rows(
        &out.join("forecast.csv"),
        &["date", "km"],
        v.next_week.iter().map(|(d, km)| [d.to_string(), fmt_f64(*km)]),
    )?;
    println!(
        "cv folds: {}  mean MAE {:.2} km  E_week {:.2} km  E_week% {:.2}",
        cv.folds.len(),
        cv.mean.mae,
        cv.mean.e_week,
        cv.mean.e_week_pct
    );
    println!(
        "last week: MAE {:.2} km  E_week {:.2} km  E_week% {:.2}",
        v.metrics.mae, v.metrics.e_week, v.metrics.e_week_pct
    );
    println!("verdict: {}", if v.accepted { "accepted" } else { "rejected" });
    Ok(())
}

fn plan(scenario: Scenario, out: &Path) -> Result<()> {
    let prepared = prepare(&scenario)?;
    let ctx = &prepared.context;
    let inputs = PlanInputs {
        stations: &prepared.catalog.stations,
        forecast: &prepared.forecast,
        vehicle: ctx.vehicle,
        mode: scenario.mode,
        delta_km: ctx.delta_km,
        radius_m: ctx.corridor_radius_m,
        refuel_s: ctx.refuel_s,
    };
    let plan = plan_refuel(&prepared.city, &ctx.path, ctx.current, &inputs)?;
    write_plan_csv(&out.join("plan.csv"), std::slice::from_ref(&plan))?;
    write_plan_geojson(&out.join("plan.geojson"), &plan)?;
    let stops: Vec<&str> = ctx.path.pois.iter().map(|(id, _)| id.as_str()).collect();
    println!("day: {} via {}", plan.day, stops.join(" -> "));
    println!(
        "mileage gate: {}  delta {:.2} km",
        if ctx.gate_passed {
            "accepted"
        } else {
            "rejected (delta = 0)"
        },
        ctx.delta_km
    );
    println!(
        "station: {} ({}) at {:.3} EUR/L  cost {:.2} EUR  time {:.2} min  overhead {:.2} min  L {:.3}  [{}]",
        plan.station.id,
        plan.station.brand,
        plan.candidate.price,
        plan.cost_eur(),
        plan.time_min(),
        plan.overhead_min(),
        plan.selection.objective,
        plan.mode.name
    );
    println!("corridor stations: {}", plan.corridor.len());
    Ok(())
}

fn simulate(scenarios: &[Scenario], modes: &[Mode<f64>], threads: Option<usize>, out: &Path) -> Result<()> {
    if threads == Some(0) {
        bail!(Invalid("--threads must be at least 1".into()));
    }
    let (outcomes, report) = run_cohort(scenarios, &Strategy::ALL, modes, CohortOptions { threads })?;
    write_report_csv(&out.join("report.csv"), &report)?;
    write_run_csv(&out.join("runs.csv"), &outcomes)?;
    println!(
        "{:<16} {:<15} {:>6} {:>6} {:>16} {:>14} {:>4} {:>4}",
        "strategy", "mode", "K1", "K2", "cost EUR", "time min", "n", "fail"
    );
    for r in &report.rows {
        println!(
            "{:<16} {:<15} {:>6} {:>6} {:>8.2} ± {:<5.2} {:>6.2} ± {:<5.2} {:>4} {:>4}",
            r.strategy.label(),
            r.mode.label(),
            r.k1,
            r.k2,
            r.cost_mean,
            r.cost_std,
            r.time_mean,
            r.time_std,
            r.n_runs,
            r.n_failed
        );
    }
    let failed = outcomes.iter().filter(|o| !o.succeeded()).count();
    if failed == outcomes.len() {
        return Err(anyhow!("every run failed; see runs.csv"));
    }
    Ok(())
}

fn gen(scenario: &Scenario, out: &Path) -> Result<()> {
    let world = generate_world(scenario)?;
    save_road_graph(&world.city, &out.join("road_nodes.csv"), &out.join("road_edges.csv"))?;
    save_stations(&out.join("stations.csv"), &world.catalog)?;
    write_trip_log(&out.join("trip_log.csv"), &world.log.trace, &world.log.samples)?;
    write_rows(
        &out.join("daily_truth_km.csv"),
        &["date", "km"],
        world
            .log
            .daily_truth_km
            .iter()
            .map(|(d, km)| [d.to_string(), fmt_f64(*km)]),
    )?;
    fs::write(out.join("scenario.toml"), scenario.to_toml()?)?;
    println!(
        "city: {} nodes, {} edges; stations: {}; samples: {}",
        world.city.nodes().len(),
        world.city.edges().len(),
        world.catalog.stations.len(),
        world.log.samples.len()
    );
    Ok(())
}
