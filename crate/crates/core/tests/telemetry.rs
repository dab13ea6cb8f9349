use proptest::prelude::*;
use refuel_core::calendar::date_of;
use refuel_core::routing::geo::LatLon;
use refuel_core::telemetry::{
    detect_halts, generate_synthetic_log, integrate_daily_distance, integrate_daily_distance_with, load_stop_events,
    load_trip_log, write_stop_events, write_trip_log, CanTrace, DriverProfile, TripSample, HALT_GAP_S,
};

// 2024-03-04 06:00 UTC
const T0: i64 = 1_709_532_000;

fn sample(t: i64, v: f64) -> TripSample {
    TripSample {
        timestamp: t,
        speed_kmh: v,
        position: Some(LatLon::new(44.6, 10.9)),
        fuel_l: None,
    }
}

proptest! {
    #[test]
    fn constant_speed_integrates_to_speed_times_duration(v in 0.0f64..130.0, step in 1i64..60, n in 2usize..500) {
        let samples: Vec<_> = (0..n).map(|i| sample(T0 + i as i64 * step, v)).collect();
        let km = integrate_daily_distance(&samples).unwrap();
        let total: f64 = km.values().sum();
        let want = v * ((n - 1) as i64 * step) as f64 / 3600.0;
        prop_assert!((total - want).abs() <= 1e-9 * want.max(1.0), "{total} vs {want}");
    }

    #[test]
    fn gaps_beyond_cutoff_contribute_nothing(v in 1.0f64..130.0, gap in 61i64..10_000) {
        let samples = [sample(T0, v), sample(T0 + 30, v), sample(T0 + 30 + gap, v), sample(T0 + 60 + gap, v)];
        let total: f64 = integrate_daily_distance_with(&samples, 60).unwrap().values().sum();
        prop_assert!((total - v * 60.0 / 3600.0).abs() < 1e-12);
    }

    #[test]
    fn one_halt_per_long_gap(gaps in prop::collection::vec(1i64..1000, 1..60)) {
        let mut t = T0;
        let mut times = vec![t];
        for g in &gaps {
            t += g;
            times.push(t);
        }
        let gps: Vec<_> = times.iter().map(|&t| sample(t, 0.0)).collect();
        let halts = detect_halts(&CanTrace::new(times.clone()), &gps, HALT_GAP_S).unwrap();
        let expected = gaps.iter().filter(|&&g| g > HALT_GAP_S).count();
        prop_assert_eq!(halts.len(), expected);
        for h in &halts {
            prop_assert_eq!(h.date, date_of(h.timestamp));
        }
    }
}

#[test]
fn halt_threshold_is_strict() {
    let times = vec![T0, T0 + HALT_GAP_S, T0 + 2 * HALT_GAP_S + 1];
    let gps: Vec<_> = times.iter().map(|&t| sample(t, 0.0)).collect();
    let halts = detect_halts(&CanTrace::new(times), &gps, HALT_GAP_S).unwrap();
    assert_eq!(halts.len(), 1);
    assert_eq!(halts[0].timestamp, T0 + HALT_GAP_S);
    assert!(detect_halts(&CanTrace::new(vec![]), &gps, HALT_GAP_S).is_err());
    assert!(detect_halts(&CanTrace::new(vec![T0]), &gps, 0).is_err());
}

#[test]
fn synthetic_log_is_deterministic_and_integrates_close_to_truth() {
    let p = DriverProfile::default();
    let a = generate_synthetic_log(&p, 2).unwrap();
    let b = generate_synthetic_log(&p, 2).unwrap();
    assert_eq!(a, b);
    let c = generate_synthetic_log(&DriverProfile { seed: 2, ..p }, 2).unwrap();
    assert_ne!(a.samples, c.samples);

    let km = integrate_daily_distance(&a.samples).unwrap();
    for (day, truth) in &a.daily_truth_km {
        let got = km.get(day).copied().unwrap_or(0.0);
        assert!((got - truth).abs() <= 0.05 * truth + 0.5, "{day}: {got} vs {truth}");
    }
}

#[test]
fn trip_log_and_stop_events_round_trip() {
    let log = generate_synthetic_log(&DriverProfile::default(), 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    write_trip_log(&first, &log.trace, &log.samples).unwrap();
    let (trace, samples) = load_trip_log(&first).unwrap();
    assert_eq!(samples, log.samples);
    assert_eq!(trace, log.trace);
    write_trip_log(&second, &trace, &samples).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let halts = detect_halts(&trace, &samples, HALT_GAP_S).unwrap();
    assert!(!halts.is_empty());
    let stops = dir.path().join("stops.csv");
    write_stop_events(&stops, &halts).unwrap();
    assert_eq!(load_stop_events(&stops).unwrap(), halts);
}
