use chrono::NaiveDate;
use proptest::prelude::*;
use refuel_core::mileage::{
    build_features, evaluate_metrics, extra_mileage_delta, fit_forest, gate, load_daily_series, validate_forecast,
    write_daily_series, DailySeries, ForestModel, ForestParams, GateThresholds, PredictionMetrics,
};

const PATTERN: [f64; 7] = [32.0, 28.0, 35.0, 28.0, 40.0, 12.0, 3.0];

fn monday() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
}

fn periodic(weeks: usize) -> DailySeries {
    DailySeries::new(monday(), (0..7 * weeks).map(|i| PATTERN[i % 7]).collect())
}

fn small() -> ForestParams {
    ForestParams {
        n_trees: 30,
        ..ForestParams::default()
    }
}

proptest! {
    #[test]
    fn metrics_follow_their_definitions(pairs in prop::collection::vec((0.1f64..100.0, 0.0f64..100.0), 1..30)) {
        let (y, y_hat): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = evaluate_metrics(&y, &y_hat).unwrap();
        let n = y.len() as f64;
        let mae = y.iter().zip(&y_hat).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
        let total: f64 = y.iter().sum();
        let e = (total - y_hat.iter().sum::<f64>()).abs();
        prop_assert!((m.mae - mae).abs() <= 1e-12 * mae.max(1.0));
        prop_assert!((m.e_week - e).abs() <= 1e-9 * e.max(1.0));
        prop_assert!((m.e_week_pct - 100.0 * e / total).abs() <= 1e-9 * m.e_week_pct.max(1.0));
        // triangle inequality
        prop_assert!(m.e_week <= n * m.mae + 1e-9);
    }

    #[test]
    fn perfect_forecast_has_zero_error(y in prop::collection::vec(0.1f64..100.0, 1..30)) {
        let m = evaluate_metrics(&y, &y).unwrap();
        prop_assert_eq!(m, PredictionMetrics { mae: 0.0, e_week: 0.0, e_week_pct: 0.0 });
        prop_assert!(gate(&m, &GateThresholds::default()));
    }

    #[test]
    fn correction_is_clamped_difference(f in 0.0f64..200.0, d in 0.0f64..200.0) {
        let delta = extra_mileage_delta(f, d);
        prop_assert!(delta >= 0.0);
        prop_assert_eq!(delta, if f > d { f - d } else { 0.0 });
    }
}

#[test]
fn gate_includes_its_boundaries() {
    let t = GateThresholds::default();
    let at = PredictionMetrics {
        mae: 2.5,
        e_week: 5.7,
        e_week_pct: 21.3,
    };
    assert!(gate(&at, &t));
    let up = |x: f64| f64::from_bits(x.to_bits() + 1);
    assert!(!gate(&PredictionMetrics { mae: up(2.5), ..at }, &t));
    assert!(!gate(&PredictionMetrics { e_week: up(5.7), ..at }, &t));
    assert!(!gate(
        &PredictionMetrics {
            e_week_pct: up(21.3),
            ..at
        },
        &t
    ));
}

#[test]
fn forest_is_seed_deterministic_and_thread_independent() {
    let rows = build_features(&periodic(6)).unwrap();
    let a: ForestModel<f64> = fit_forest(&rows, small(), 3).unwrap();
    let b: ForestModel<f64> = fit_forest(&rows, small(), 3).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c: ForestModel<f64> = pool.install(|| fit_forest(&rows, small(), 3).unwrap());
    assert_eq!(a, c);
    let d: ForestModel<f64> = fit_forest(&rows, small(), 4).unwrap();
    assert_ne!(a.trees, d.trees);
}

#[test]
fn forest_json_round_trip_preserves_predictions() {
    let rows = build_features(&periodic(6)).unwrap();
    let model: ForestModel<f64> = fit_forest(&rows, small(), 9).unwrap();
    let back = ForestModel::<f64>::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.predict(&rows).unwrap(), model.predict(&rows).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    assert_eq!(ForestModel::<f64>::load(&path).unwrap(), model);
    assert!(ForestModel::<f64>::from_json("{\"version\": 99}").is_err());
}

#[test]
fn single_and_double_precision_forests_agree() {
    let rows = build_features(&periodic(6)).unwrap();
    let wide: ForestModel<f64> = fit_forest(&rows, small(), 1).unwrap();
    let narrow: ForestModel<f32> = fit_forest(&rows, small(), 1).unwrap();
    for r in &rows {
        let (a, b) = (wide.predict_row(r).unwrap(), narrow.predict_row(r).unwrap());
        assert!((a - f64::from(b)).abs() < 0.05 * a.max(1.0), "{a} vs {b}");
    }
}

#[test]
fn periodic_driver_passes_the_gate() {
    let v = validate_forecast(&periodic(8), 6, small(), 5, &GateThresholds::default()).unwrap();
    assert!(v.accepted, "{:?}", v.metrics);
    assert!(v.metrics.e_week_pct < 5.0);
    assert_eq!(v.next_week.len(), 7);
    for (j, (date, km)) in v.next_week.iter().enumerate() {
        assert_eq!(*date, monday() + chrono::Days::new(56 + j as u64));
        assert!((km - PATTERN[j]).abs() < 2.0, "{date}: {km}");
    }
}

#[test]
fn daily_series_round_trips_through_csv() {
    let s = periodic(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("daily.csv");
    write_daily_series(&path, &s).unwrap();
    assert_eq!(load_daily_series(&path).unwrap(), s);
}
