use std::collections::BTreeSet;

use crate::calendar::Weekday;
use crate::routing::geo::{haversine, LatLon};
use crate::telemetry::StopEvent;

use super::{FrequencyCategory, PoiNode, StopCluster, TripGraphError};

/// Incremental clustering in timestamp order. Each event joins the nearest
/// cluster whose current centroid lies within `radius_m`, otherwise it
/// founds a new one. Events with equal timestamps are processed in
/// coordinate order so input permutations give identical output.
pub fn assign_clusters(events: &[StopEvent], radius_m: f64) -> Result<Vec<StopCluster>, TripGraphError> {
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(TripGraphError::InvalidRadius(radius_m));
    }
    let mut ordered: Vec<&StopEvent> = events.iter().collect();
    ordered.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(a.pos.lat.total_cmp(&b.pos.lat))
            .then(a.pos.lon.total_cmp(&b.pos.lon))
    });

    let mut clusters: Vec<StopCluster> = Vec::new();
    let mut sums: Vec<(f64, f64)> = Vec::new();
    for ev in ordered {
        let nearest = clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (i, haversine(c.centroid, ev.pos)))
            .filter(|(_, d)| *d <= radius_m)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let i = match nearest {
            Some((i, _)) => i,
            None => {
                clusters.push(StopCluster {
                    id: format!("STOP_{:03}", clusters.len() + 1),
                    centroid: ev.pos,
                    visits_total: 0,
                    visits_weekday: 0,
                    visits_weekend: 0,
                    days_visited: BTreeSet::new(),
                    members: Vec::new(),
                });
                sums.push((0.0, 0.0));
                clusters.len() - 1
            }
        };
        let c = &mut clusters[i];
        let day = Weekday::of(ev.date);
        c.members.push(*ev);
        c.visits_total += 1;
        if day.is_weekend() {
            c.visits_weekend += 1;
        } else {
            c.visits_weekday += 1;
        }
        c.days_visited.insert(day);
        sums[i].0 += ev.pos.lat;
        sums[i].1 += ev.pos.lon;
        let n = c.members.len() as f64;
        c.centroid = LatLon::new(sums[i].0 / n, sums[i].1 / n);
    }
    Ok(clusters)
}

/// Maps average weekly visits to its category:
/// `v <= 1` VERY_LOW, `1 < v <= 2` LOW, `2 < v <= 4` MEDIUM,
/// `4 < v < 10` HIGH, `v >= 10` VERY_HIGH.
pub fn categorize_frequency(v: f64) -> Result<FrequencyCategory, TripGraphError> {
    if !v.is_finite() || v < 0.0 {
        return Err(TripGraphError::InvalidFrequency(v));
    }
    Ok(if v <= 1.0 {
        FrequencyCategory::VeryLow
    } else if v <= 2.0 {
        FrequencyCategory::Low
    } else if v <= 4.0 {
        FrequencyCategory::Medium
    } else if v < 10.0 {
        FrequencyCategory::High
    } else {
        FrequencyCategory::VeryHigh
    })
}

/// Full weeks spanned by the events' calendar days, inclusive.
pub fn observation_weeks(events: &[StopEvent]) -> u32 {
    let first = events.iter().map(|e| e.date).min();
    let last = events.iter().map(|e| e.date).max();
    match first.zip(last) {
        Some((a, b)) => (((b - a).num_days() + 1) / 7) as u32,
        None => 0,
    }
}

/// Promotes clusters whose weekly visit rate falls in `accepted`.
pub fn select_pois(
    clusters: &[StopCluster],
    accepted: &BTreeSet<FrequencyCategory>,
    observation_weeks: u32,
) -> Result<Vec<PoiNode>, TripGraphError> {
    if observation_weeks < 2 {
        return Err(TripGraphError::ObservationTooShort {
            weeks: observation_weeks,
        });
    }
    let mut out = Vec::new();
    for c in clusters {
        let cat = categorize_frequency(f64::from(c.visits_total) / f64::from(observation_weeks))?;
        if accepted.contains(&cat) {
            out.push(PoiNode::from_cluster(c, cat));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::midnight;
    use chrono::NaiveDate;

    fn monday() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
    }

    fn ev(t: i64, pos: LatLon<f64>) -> StopEvent {
        StopEvent::new(midnight(monday()) + t, pos)
    }

    #[test]
    fn fifty_meters_merge_at_midpoint() {
        let a = LatLon::new(44.0, 10.0);
        let b = a.offset_m(50.0, 0.0);
        let c = assign_clusters(&[ev(0, a), ev(10, b)], 100.0).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].centroid.lat - (a.lat + b.lat) / 2.0).abs() < 1e-12);
        assert_eq!(c[0].id, "STOP_001");
    }

    #[test]
    fn hundred_fifty_meters_split() {
        let a = LatLon::new(44.0, 10.0);
        let c = assign_clusters(&[ev(0, a), ev(10, a.offset_m(150.0, 0.0))], 100.0).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].id, "STOP_002");
    }

    #[test]
    fn drifting_centroid_absorbs_third_event() {
        let a = LatLon::new(44.0, 10.0);
        let b = a.offset_m(90.0, 0.0);
        let mid = LatLon::new((a.lat + b.lat) / 2.0, (a.lon + b.lon) / 2.0);
        // C is 90 m past the running centroid, 135 m from A: out of reach of
        // A alone but inside the drifted cluster
        let c = mid.offset_m(90.0, 0.0);
        assert!(haversine(a, c) > 130.0);
        assert!(haversine(mid, c) <= 100.0);

        // replay the rule by hand
        let mut centroid = a;
        let mut n = 1.0;
        let mut count = 1;
        for p in [b, c] {
            if haversine(centroid, p) <= 100.0 {
                centroid = LatLon::new(
                    (centroid.lat * n + p.lat) / (n + 1.0),
                    (centroid.lon * n + p.lon) / (n + 1.0),
                );
                n += 1.0;
            } else {
                count += 1;
            }
        }
        let got = assign_clusters(&[ev(0, a), ev(1, b), ev(2, c)], 100.0).unwrap();
        assert_eq!(got.len(), count);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].visits_total, 3);
    }

    #[test]
    fn weekday_weekend_counts() {
        let p = LatLon::new(44.0, 10.0);
        let c = assign_clusters(&[ev(0, p), ev(5 * 86_400, p), ev(6 * 86_400, p)], 100.0).unwrap();
        assert_eq!((c[0].visits_weekday, c[0].visits_weekend), (1, 2));
        assert_eq!(
            c[0].days_visited.iter().copied().collect::<Vec<_>>(),
            vec![Weekday::Mon, Weekday::Sat, Weekday::Sun]
        );
    }

    #[test]
    fn category_examples() {
        use FrequencyCategory::*;
        assert_eq!(categorize_frequency(0.5).unwrap(), VeryLow);
        assert_eq!(categorize_frequency(4.0).unwrap(), Medium);
        assert_eq!(categorize_frequency(10.0).unwrap(), VeryHigh);
        assert!(categorize_frequency(-0.1).is_err());
        assert!(categorize_frequency(f64::NAN).is_err());
    }

    #[test]
    fn promotion_rules() {
        let p = LatLon::new(44.0, 10.0);
        let six: Vec<_> = (0..6).map(|i| ev(i * 86_400, p)).collect();
        let two: Vec<_> = (0..2).map(|i| ev(i * 86_400, p)).collect();
        let c6 = assign_clusters(&six, 100.0).unwrap();
        let c2 = assign_clusters(&two, 100.0).unwrap();
        let acc = FrequencyCategory::default_accepted();
        assert_eq!(
            select_pois(&c6, &acc, 2).unwrap()[0].category,
            FrequencyCategory::Medium
        );
        assert!(select_pois(&c2, &acc, 2).unwrap().is_empty());
        let all = FrequencyCategory::ALL.into_iter().collect();
        assert_eq!(select_pois(&c2, &all, 2).unwrap().len(), 1);
        assert!(matches!(
            select_pois(&c2, &acc, 1),
            Err(TripGraphError::ObservationTooShort { weeks: 1 })
        ));
    }

    #[test]
    fn weeks_are_floored() {
        let p = LatLon::new(44.0, 10.0);
        assert_eq!(observation_weeks(&[ev(0, p), ev(13 * 86_400, p)]), 2);
        assert_eq!(observation_weeks(&[ev(0, p), ev(12 * 86_400, p)]), 1);
        assert_eq!(observation_weeks(&[]), 0);
    }
}
