use std::collections::BTreeMap;

use chrono::Days;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::Weekday;
use crate::routing::geo::LatLon;
use crate::telemetry::DriverProfile;

use super::Scenario;

fn plan(stops: &[&str]) -> Vec<String> {
    stops.iter().map(|s| s.to_string()).collect()
}

/// Three habitual drivers: an office commuter, a shift worker with an
/// afternoon start, and a parent doing school runs.
pub fn preset_drivers() -> Vec<DriverProfile> {
    let center = LatLon::new(44.6471, 10.9252);
    let mut commuter = DriverProfile::default();
    // a third gym evening lifts the gym into an accepted frequency band
    commuter
        .schedule
        .insert(Weekday::Fri, plan(&["home", "work", "gym", "home"]));

    let shift = DriverProfile {
        name: "shift_worker".into(),
        anchors: BTreeMap::from([
            ("home".to_string(), center.offset_m(1_500.0, -3_500.0)),
            ("plant".to_string(), center.offset_m(-2_000.0, 4_000.0)),
            ("market".to_string(), center.offset_m(500.0, 500.0)),
            ("parents".to_string(), center.offset_m(3_500.0, 2_000.0)),
        ]),
        schedule: BTreeMap::from([
            (Weekday::Mon, plan(&["home", "plant", "home"])),
            (Weekday::Tue, plan(&["home", "plant", "market", "home"])),
            (Weekday::Wed, plan(&["home", "plant", "home"])),
            (Weekday::Thu, plan(&["home", "plant", "market", "home"])),
            (Weekday::Fri, plan(&["home", "plant", "home"])),
            (Weekday::Sun, plan(&["home", "parents", "home"])),
        ]),
        errand_rate: 1.5,
        depart_hour: 13.5,
        dwell_min: 120.0,
        ..DriverProfile::default()
    };

    let parent = DriverProfile {
        name: "parent".into(),
        anchors: BTreeMap::from([
            ("home".to_string(), center.offset_m(-3_000.0, 1_000.0)),
            ("school".to_string(), center.offset_m(-1_500.0, -1_500.0)),
            ("office".to_string(), center.offset_m(2_500.0, -500.0)),
            ("mall".to_string(), center.offset_m(-500.0, 3_500.0)),
        ]),
        schedule: BTreeMap::from([
            (Weekday::Mon, plan(&["home", "school", "office", "school", "home"])),
            (Weekday::Tue, plan(&["home", "school", "office", "school", "home"])),
            (Weekday::Wed, plan(&["home", "school", "office", "school", "home"])),
            (Weekday::Thu, plan(&["home", "school", "office", "school", "home"])),
            (Weekday::Fri, plan(&["home", "school", "office", "school", "home"])),
            (Weekday::Sat, plan(&["home", "mall", "home"])),
        ]),
        errand_rate: 2.5,
        depart_hour: 7.75,
        dwell_min: 60.0,
        ..DriverProfile::default()
    };

    vec![commuter, shift, parent]
}

/// `per_driver` recordings of each preset driver. Recording `i` gets its own
/// seed from stream `i` of the cohort seed, a start date shifted by whole
/// weeks, and anchors displaced by up to 600 m.
pub fn preset_cohort(seed: u64, per_driver: usize) -> Vec<Scenario> {
    let drivers = preset_drivers();
    let mut out = Vec::new();
    for k in 0..per_driver {
        for driver in &drivers {
            let index = out.len() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index);
            let scenario_seed = rng.next_u64();
            let mut d = driver.clone();
            d.start_date = d.start_date + Days::new(35 * k as u64);
            for p in d.anchors.values_mut() {
                let north = rng.random_range(-600.0..=600.0);
                let east = rng.random_range(-600.0..=600.0);
                *p = p.offset_m(north, east);
            }
            out.push(Scenario {
                name: format!("{}_{:02}", driver.name, k + 1),
                seed: scenario_seed,
                driver: d,
                ..Scenario::default()
            });
        }
    }
    out
}
