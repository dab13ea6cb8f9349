use proptest::prelude::*;
use refuel_core::routing::geo::{haversine, point_polyline_distance, point_segment_distance, LatLon};
use refuel_core::routing::{
    corridor_stations, load_road_graph, save_road_graph, GraphNode, Metric, RoadEdge, RoadGraph, RouterPort,
};

fn base() -> LatLon<f64> {
    LatLon::new(44.64, 10.92)
}

/// Nodes scattered over a few km, edges with lengths at least geodesic.
fn random_graph() -> impl Strategy<Value = RoadGraph> {
    (3usize..9)
        .prop_flat_map(|n| {
            let pts = prop::collection::vec((0.0f64..4000.0, 0.0f64..4000.0), n);
            let edges = prop::collection::vec((0..n, 0..n, 1.0f64..1.6, 5.0f64..25.0), n..3 * n);
            (pts, edges)
        })
        .prop_map(|(pts, raw)| {
            let nodes: Vec<GraphNode> = pts
                .iter()
                .enumerate()
                .map(|(i, (n, e))| GraphNode {
                    id: i as u32,
                    pos: base().offset_m(*n, *e),
                })
                .collect();
            let edges = raw
                .into_iter()
                .filter(|(a, b, _, _)| a != b)
                .map(|(a, b, stretch, speed)| {
                    let length_m = haversine(nodes[a].pos, nodes[b].pos).max(1.0) * stretch;
                    RoadEdge {
                        from: a as u32,
                        to: b as u32,
                        length_m,
                        time_s: length_m / speed,
                    }
                })
                .collect();
            RoadGraph::new(nodes, edges).unwrap()
        })
}

/// Minimum cost over every simple path, by exhaustive DFS.
fn brute_force(g: &RoadGraph, from: u32, to: u32, metric: Metric) -> Option<f64> {
    fn dfs(g: &RoadGraph, at: u32, to: u32, metric: Metric, seen: &mut Vec<u32>, cost: f64, best: &mut Option<f64>) {
        if at == to {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for e in g.edges().iter().filter(|e| e.from == at) {
            if !seen.contains(&e.to) {
                seen.push(e.to);
                dfs(g, e.to, to, metric, seen, cost + e.weight(metric), best);
                seen.pop();
            }
        }
    }
    let mut best = None;
    dfs(g, from, to, metric, &mut vec![from], 0.0, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shortest_route_matches_exhaustive_search(g in random_graph()) {
        let n = g.nodes().len() as u32;
        for metric in [Metric::Time, Metric::Distance] {
            for a in 0..n {
                for b in 0..n {
                    let oracle = brute_force(&g, a, b, metric);
                    match (g.shortest_route(a, b, metric), oracle) {
                        (Ok(r), Some(best)) => {
                            let got = match metric {
                                Metric::Time => r.time_s,
                                Metric::Distance => r.distance_km * 1000.0,
                            };
                            prop_assert!((got - best).abs() <= 1e-9 * best.max(1.0), "{a}->{b}: {got} vs {best}");
                            prop_assert_eq!(r.nodes.first(), Some(&a));
                            prop_assert_eq!(r.nodes.last(), Some(&b));
                        }
                        (Err(_), None) => {}
                        (got, want) => prop_assert!(false, "{a}->{b}: {got:?} vs {want:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn one_stop_never_beats_direct(g in random_graph(), stop in 0u32..3) {
        let n = g.nodes().len() as u32;
        let (start, end) = (0, n - 1);
        if let (Ok(direct), Ok(via)) = (
            g.multi_stop_route(start, &[end], Metric::Time),
            g.one_stop_route(start, stop, &[end], Metric::Time),
        ) {
            prop_assert!(via.time_s + 1e-9 >= direct.time_s);
        }
    }

    #[test]
    fn polyline_distance_matches_dense_sampling(
        pts in prop::collection::vec((-3000.0f64..3000.0, -3000.0f64..3000.0), 2..5),
        p in (-4000.0f64..4000.0, -4000.0f64..4000.0),
    ) {
        let line: Vec<LatLon<f64>> = pts.iter().map(|(n, e)| base().offset_m(*n, *e)).collect();
        let q = base().offset_m(p.0, p.1);
        let mut oracle = f64::INFINITY;
        for w in line.windows(2) {
            let steps = (haversine(w[0], w[1]).ceil() as usize).max(1);
            for i in 0..=steps {
                oracle = oracle.min(haversine(q, w[0].lerp(&w[1], i as f64 / steps as f64)));
            }
        }
        let got = point_polyline_distance(q, &line).unwrap();
        prop_assert!((got - oracle).abs() <= 1.0, "{got} vs {oracle}");
        let first = point_segment_distance(q, line[0], line[1]);
        prop_assert!(got <= first + 1e-9);
    }

    #[test]
    fn corridor_membership_respects_radius(
        offsets in prop::collection::vec((-4000.0f64..4000.0, -1000.0f64..6000.0), 1..20),
        radius in 100.0f64..3000.0,
    ) {
        let line = [base(), base().offset_m(0.0, 5000.0)];
        let items: Vec<LatLon<f64>> = offsets.iter().map(|(n, e)| base().offset_m(*n, *e)).collect();
        let inside = corridor_stations(&line, &items, radius);
        for s in &items {
            let d = point_polyline_distance(*s, &line).unwrap();
            prop_assert_eq!(inside.contains(&s), d <= radius);
        }
    }
}

#[test]
fn road_graph_csv_round_trip_is_byte_identical() {
    let g = refuel_core::routing::city::generate_city(&Default::default(), 11);
    let dir = tempfile::tempdir().unwrap();
    let (n1, e1) = (dir.path().join("n1.csv"), dir.path().join("e1.csv"));
    let (n2, e2) = (dir.path().join("n2.csv"), dir.path().join("e2.csv"));
    save_road_graph(&g, &n1, &e1).unwrap();
    let back = load_road_graph(&n1, &e1).unwrap();
    save_road_graph(&back, &n2, &e2).unwrap();
    assert_eq!(std::fs::read(&n1).unwrap(), std::fs::read(&n2).unwrap());
    assert_eq!(std::fs::read(&e1).unwrap(), std::fs::read(&e2).unwrap());
    assert_eq!(back.nodes(), g.nodes());
}
