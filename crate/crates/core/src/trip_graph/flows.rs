use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;

use crate::calendar::{Timestamp, Weekday};
use crate::routing::geo::LatLon;

use super::{DailyTripGraph, PoiNode, StopCluster, TripEdge};

/// Builds one habitual POI sequence per weekday.
///
/// Each calendar day's sequence is the last POI visited before that day
/// (where the vehicle spent the night) followed by the day's POI visits in
/// time order, with consecutive repeats collapsed. Halts at non-POI clusters
/// are skipped. Among the days sharing a weekday, the most frequent
/// sequence wins; ties go to the most recent day.
pub fn build_daily_flows(pois: &[PoiNode], clusters: &[StopCluster]) -> DailyTripGraph {
    let poi_pos: HashMap<&str, LatLon<f64>> = pois.iter().map(|p| (p.id.as_str(), p.pos)).collect();

    let mut visits: Vec<(Timestamp, NaiveDate, &str)> = clusters
        .iter()
        .filter(|c| poi_pos.contains_key(c.id.as_str()))
        .flat_map(|c| c.members.iter().map(move |e| (e.timestamp, e.date, c.id.as_str())))
        .collect();
    visits.sort();

    let mut per_day: BTreeMap<NaiveDate, Vec<&str>> = BTreeMap::new();
    let mut last_poi: Option<&str> = None;
    for (_, date, id) in visits {
        let seq = per_day.entry(date).or_insert_with(|| last_poi.into_iter().collect());
        if seq.last() != Some(&id) {
            seq.push(id);
        }
        last_poi = Some(id);
    }

    let mut by_weekday: BTreeMap<Weekday, Vec<(NaiveDate, Vec<&str>)>> = BTreeMap::new();
    for (date, seq) in per_day {
        by_weekday.entry(Weekday::of(date)).or_default().push((date, seq));
    }

    let mut edges = Vec::new();
    for (day, candidates) in by_weekday {
        let modal = modal_sequence(&candidates);
        for (i, id) in modal.iter().enumerate().skip(1) {
            edges.push(TripEdge {
                day,
                seq_index: i as u32,
                dest_id: id.to_string(),
                dest: poi_pos[id],
            });
        }
    }
    DailyTripGraph::from_edges(edges).expect("sequences are contiguous by construction")
}

/// Most frequent sequence; ties go to the one seen on the latest date.
fn modal_sequence<'a>(candidates: &[(NaiveDate, Vec<&'a str>)]) -> Vec<&'a str> {
    let mut stats: HashMap<&[&str], (usize, NaiveDate)> = HashMap::new();
    for (date, seq) in candidates {
        let e = stats.entry(seq.as_slice()).or_insert((0, *date));
        e.0 += 1;
        e.1 = e.1.max(*date);
    }
    stats
        .into_iter()
        .max_by_key(|(_, (count, latest))| (*count, *latest))
        .map(|(seq, _)| seq.to_vec())
        .unwrap_or_default()
}
