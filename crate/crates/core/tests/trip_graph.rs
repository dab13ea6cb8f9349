use chrono::NaiveDate;
use proptest::prelude::*;
use refuel_core::calendar::{midnight, Weekday};
use refuel_core::routing::geo::{haversine, LatLon};
use refuel_core::telemetry::{detect_halts, generate_synthetic_log, DriverProfile, StopEvent, HALT_GAP_S};
use refuel_core::trip_graph::{
    assign_clusters, build_daily_flows, categorize_frequency, export_graph_csv, import_graph_csv, select_pois,
    FrequencyCategory, CLUSTER_RADIUS_M,
};

fn monday() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
}

fn events() -> impl Strategy<Value = Vec<StopEvent>> {
    prop::collection::vec((0i64..28 * 86_400, 0usize..4, -60.0f64..60.0, -60.0f64..60.0), 1..80).prop_map(|raw| {
        let sites = [(0.0, 0.0), (1500.0, 0.0), (0.0, 2500.0), (-3000.0, -800.0)];
        let base = LatLon::new(44.64, 10.92);
        raw.into_iter()
            .map(|(t, s, dn, de)| {
                let (n, e) = sites[s];
                StopEvent::new(midnight(monday()) + t, base.offset_m(n + dn, e + de))
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn category_is_monotone_in_visit_rate(a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(categorize_frequency(lo).unwrap() <= categorize_frequency(hi).unwrap());
    }

    #[test]
    fn clustering_conserves_events(evs in events()) {
        let clusters = assign_clusters(&evs, CLUSTER_RADIUS_M).unwrap();
        let members: usize = clusters.iter().map(|c| c.members.len()).sum();
        prop_assert_eq!(members, evs.len());
        for c in &clusters {
            prop_assert_eq!(c.visits_total as usize, c.members.len());
            prop_assert_eq!(c.visits_weekday + c.visits_weekend, c.visits_total);
            let n = c.members.len() as f64;
            let lat = c.members.iter().map(|m| m.pos.lat).sum::<f64>() / n;
            let lon = c.members.iter().map(|m| m.pos.lon).sum::<f64>() / n;
            prop_assert!(haversine(c.centroid, LatLon::new(lat, lon)) < 1e-6);
        }
        // sites are kilometres apart, so no cluster mixes them
        for c in &clusters {
            for m in &c.members {
                prop_assert!(haversine(m.pos, c.members[0].pos) < 500.0);
            }
        }
    }

    #[test]
    fn clustering_ignores_input_order(evs in events()) {
        let mut rev = evs.clone();
        rev.reverse();
        prop_assert_eq!(assign_clusters(&evs, CLUSTER_RADIUS_M).unwrap(), assign_clusters(&rev, CLUSTER_RADIUS_M).unwrap());
    }
}

#[test]
fn frequency_band_edges() {
    use FrequencyCategory::*;
    let cases = [
        (0.0, VeryLow),
        (1.0, VeryLow),
        (1.0 + 1e-9, Low),
        (2.0, Low),
        (2.0 + 1e-9, Medium),
        (4.0, Medium),
        (4.0 + 1e-9, High),
        (10.0 - 1e-9, High),
        (10.0, VeryHigh),
    ];
    for (v, want) in cases {
        assert_eq!(categorize_frequency(v).unwrap(), want, "v = {v}");
    }
    assert!(categorize_frequency(-0.1).is_err());
    assert!(categorize_frequency(f64::NAN).is_err());
}

#[test]
fn learned_graph_round_trips_through_csv() {
    let log = generate_synthetic_log(&DriverProfile::default(), 4).unwrap();
    let halts = detect_halts(&log.trace, &log.samples, HALT_GAP_S).unwrap();
    let clusters = assign_clusters(&halts, CLUSTER_RADIUS_M).unwrap();
    let pois = select_pois(&clusters, &FrequencyCategory::default_accepted(), 4).unwrap();
    let graph = build_daily_flows(&pois, &clusters);
    assert!(pois.len() >= 2);
    assert!(graph.active_days().contains(&Weekday::Mon));

    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s);
    export_graph_csv(&pois, &graph, &p("n1.csv"), &p("e1.csv")).unwrap();
    let (pois2, graph2) = import_graph_csv(&p("n1.csv"), &p("e1.csv")).unwrap();
    export_graph_csv(&pois2, &graph2, &p("n2.csv"), &p("e2.csv")).unwrap();
    for (a, b) in [("n1.csv", "n2.csv"), ("e1.csv", "e2.csv")] {
        assert_eq!(std::fs::read(p(a)).unwrap(), std::fs::read(p(b)).unwrap(), "{a}");
    }
    assert_eq!(graph2, graph);
}
