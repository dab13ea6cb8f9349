//! Seeded synthetic driver logs.
//!
//! A profile names anchor locations and a per-weekday visit order. Each day
//! the vehicle leaves its overnight spot, drives every leg at 1 Hz (one bus
//! message and one GPS fix per second), parks between visits with the bus
//! silent, and occasionally inserts an errand: a round trip from the
//! current location to a random point within `errand_radius_m`.
//!
//! Ground truth is the driven arc length, attributed to the day of each
//! one-second step. Reported speed carries multiplicative Gaussian noise and
//! positions carry isotropic Gaussian noise; neither affects the truth.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::calendar::{date_of, midnight, Timestamp, Weekday};
use crate::routing::geo::{haversine, LatLon};
use crate::routing::{Metric, RouterPort};

use super::{CanTrace, TelemetryError, TripSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverProfile {
    pub name: String,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub anchors: BTreeMap<String, LatLon<f64>>,
    /// Visit order per weekday; the vehicle drives to each entry in turn.
    pub schedule: BTreeMap<Weekday, Vec<String>>,
    /// Expected extra round trips per week (Poisson).
    pub errand_rate: f64,
    pub errand_radius_m: f64,
    /// Standard deviation of reported speed, percent of true speed.
    pub speed_noise_pct: f64,
    /// Standard deviation of each GPS coordinate, meters.
    pub gps_noise_m: f64,
    pub cruise_kmh: f64,
    pub depart_hour: f64,
    pub dwell_min: f64,
    pub tank_l: f64,
    pub consumption_l_per_km: f64,
}

impl Default for DriverProfile {
    fn default() -> Self {
        let center = LatLon::new(44.6471, 10.9252);
        let anchors = [
            ("home", center.offset_m(-2_500.0, -3_000.0)),
            ("work", center.offset_m(2_000.0, 3_500.0)),
            ("gym", center.offset_m(3_000.0, -1_000.0)),
            ("market", center.offset_m(-1_000.0, 1_500.0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let commute = |extra: &[&str]| {
            let mut v = vec!["home".to_string(), "work".to_string()];
            v.extend(extra.iter().map(|s| s.to_string()));
            v.push("home".to_string());
            v
        };
        let schedule = BTreeMap::from([
            (Weekday::Mon, commute(&["gym"])),
            (Weekday::Tue, commute(&[])),
            (Weekday::Wed, commute(&["gym"])),
            (Weekday::Thu, commute(&[])),
            (Weekday::Fri, commute(&[])),
            (
                Weekday::Sat,
                vec!["home".to_string(), "market".to_string(), "home".to_string()],
            ),
        ]);
        Self {
            name: "commuter".to_string(),
            seed: 1,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            anchors,
            schedule,
            errand_rate: 2.0,
            errand_radius_m: 3_000.0,
            speed_noise_pct: 2.0,
            gps_noise_m: 1.0,
            cruise_kmh: 40.0,
            depart_hour: 7.5,
            dwell_min: 90.0,
            tank_l: 50.0,
            consumption_l_per_km: 0.06,
        }
    }
}

impl DriverProfile {
    pub fn validate(&self) -> Result<(), TelemetryError> {
        let bad = |m: String| Err(TelemetryError::InvalidProfile(m));
        if self.anchors.is_empty() {
            return bad("no anchors".into());
        }
        for (name, p) in &self.anchors {
            if !p.is_valid() {
                return bad(format!("anchor `{name}` has invalid coordinates"));
            }
        }
        for (day, visits) in &self.schedule {
            if let Some(missing) = visits.iter().find(|a| !self.anchors.contains_key(*a)) {
                return bad(format!("{day} references undefined anchor `{missing}`"));
            }
        }
        let non_neg = [
            ("errand_rate", self.errand_rate),
            ("errand_radius_m", self.errand_radius_m),
            ("speed_noise_pct", self.speed_noise_pct),
            ("gps_noise_m", self.gps_noise_m),
            ("dwell_min", self.dwell_min),
            ("consumption_l_per_km", self.consumption_l_per_km),
        ];
        for (field, v) in non_neg {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{field} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.cruise_kmh.is_finite() && self.cruise_kmh > 0.0) {
            return bad(format!("cruise_kmh must be > 0, got {}", self.cruise_kmh));
        }
        if !(self.tank_l.is_finite() && self.tank_l > 0.0) {
            return bad(format!("tank_l must be > 0, got {}", self.tank_l));
        }
        if !(0.0..24.0).contains(&self.depart_hour) {
            return bad(format!("depart_hour must be in [0, 24), got {}", self.depart_hour));
        }
        Ok(())
    }

    /// Where the vehicle is parked before the first simulated day.
    fn initial_position(&self) -> LatLon<f64> {
        let first_day = Weekday::of(self.start_date);
        (0..7)
            .map(|k| Weekday::from_index(first_day.index() + k))
            .find_map(|d| self.schedule.get(&d).and_then(|v| v.first()))
            .and_then(|a| self.anchors.get(a))
            .or_else(|| self.anchors.values().next())
            .copied()
            .expect("validated profile has anchors")
    }
}

/// Produces the polyline a vehicle follows between two points.
pub trait LegPlanner {
    fn leg(&self, from: LatLon<f64>, to: LatLon<f64>) -> Vec<LatLon<f64>>;
}

/// Straight line between the endpoints.
pub struct StraightLine;

impl LegPlanner for StraightLine {
    fn leg(&self, from: LatLon<f64>, to: LatLon<f64>) -> Vec<LatLon<f64>> {
        vec![from, to]
    }
}

/// Time-optimal road route between the nodes nearest to each endpoint.
pub struct RoadLegs<'a, R: RouterPort>(pub &'a R);

impl<R: RouterPort> LegPlanner for RoadLegs<'_, R> {
    fn leg(&self, from: LatLon<f64>, to: LatLon<f64>) -> Vec<LatLon<f64>> {
        let snapped = self.0.nearest_node(from).zip(self.0.nearest_node(to));
        let route = snapped.and_then(|((a, _), (b, _))| self.0.shortest_route(a, b, Metric::Time).ok());
        let mut line = vec![from];
        if let Some(route) = route {
            line.extend(self.0.polyline(&route));
        }
        line.push(to);
        line.dedup();
        line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLog {
    pub trace: CanTrace,
    pub samples: Vec<TripSample>,
    /// Driven km per calendar day, including days with no driving.
    pub daily_truth_km: BTreeMap<NaiveDate, f64>,
}

/// Straight-line legs. Pure function of `(profile, weeks)`.
pub fn generate_synthetic_log(profile: &DriverProfile, weeks: u32) -> Result<SyntheticLog, TelemetryError> {
    generate_synthetic_log_on(profile, weeks, &StraightLine)
}

pub fn generate_synthetic_log_on(
    profile: &DriverProfile,
    weeks: u32,
    planner: &dyn LegPlanner,
) -> Result<SyntheticLog, TelemetryError> {
    profile.validate()?;
    if weeks == 0 {
        return Err(TelemetryError::InvalidProfile("weeks must be >= 1".into()));
    }
    let mut sim = Simulator::new(profile, planner);
    for week in 0..weeks {
        let errands = sim.draw_errands();
        for d in 0..7u64 {
            let date = profile.start_date + Days::new(u64::from(week) * 7 + d);
            let todays: Vec<f64> = errands.iter().filter(|e| e.0 == d).map(|e| e.1).collect();
            sim.run_day(date, &todays);
        }
    }
    Ok(sim.finish())
}

struct Target {
    pos: LatLon<f64>,
    dwell_s: f64,
}

struct Simulator<'a> {
    profile: &'a DriverProfile,
    planner: &'a dyn LegPlanner,
    rng: ChaCha8Rng,
    pos: LatLon<f64>,
    fuel: f64,
    t: Timestamp,
    trace: Vec<Timestamp>,
    samples: Vec<TripSample>,
    truth: BTreeMap<NaiveDate, f64>,
}

impl<'a> Simulator<'a> {
    fn new(profile: &'a DriverProfile, planner: &'a dyn LegPlanner) -> Self {
        Self {
            profile,
            planner,
            rng: ChaCha8Rng::seed_from_u64(profile.seed),
            pos: profile.initial_position(),
            fuel: profile.tank_l,
            t: midnight(profile.start_date),
            trace: Vec::new(),
            samples: Vec::new(),
            truth: BTreeMap::new(),
        }
    }

    /// (day within week, slot position in [0, 1)) per errand.
    fn draw_errands(&mut self) -> Vec<(u64, f64)> {
        let n = if self.profile.errand_rate > 0.0 {
            Poisson::new(self.profile.errand_rate)
                .expect("positive rate")
                .sample(&mut self.rng) as usize
        } else {
            0
        };
        let mut errands: Vec<(u64, f64)> = (0..n)
            .map(|_| (self.rng.random_range(0..7u64), self.rng.random::<f64>()))
            .collect();
        errands.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        errands
    }

    fn dwell(&mut self, minutes: f64) -> f64 {
        minutes * 60.0 * self.rng.random_range(0.8..1.2)
    }

    fn run_day(&mut self, date: NaiveDate, errand_slots: &[f64]) {
        self.truth.entry(date).or_insert(0.0);
        let p = self.profile;
        let mut targets: Vec<Target> = Vec::new();
        if let Some(visits) = p.schedule.get(&Weekday::of(date)) {
            for a in visits {
                let dwell_s = self.dwell(p.dwell_min);
                targets.push(Target {
                    pos: p.anchors[a],
                    dwell_s,
                });
            }
        }
        // insert from the back so earlier slot indices stay valid
        for &u in errand_slots.iter().rev() {
            let slot = ((u * (targets.len() + 1) as f64) as usize).min(targets.len());
            let base = if slot == 0 { self.pos } else { targets[slot - 1].pos };
            let r = p.errand_radius_m * self.rng.random::<f64>().sqrt();
            let theta = self.rng.random_range(0.0..std::f64::consts::TAU);
            let errand = Target {
                pos: base.offset_m(r * theta.cos(), r * theta.sin()),
                dwell_s: self.dwell(20.0),
            };
            let back = Target {
                pos: base,
                dwell_s: self.dwell(10.0),
            };
            targets.insert(slot, back);
            targets.insert(slot, errand);
        }

        let jitter: f64 = self.rng.random_range(-900.0..900.0);
        let depart = midnight(date) as f64 + p.depart_hour * 3600.0 + jitter;
        self.t = self.t.max(depart.round() as Timestamp);
        for target in targets {
            if haversine(self.pos, target.pos) < 1.0 {
                continue;
            }
            self.drive_to(target.pos);
            self.t += target.dwell_s.round() as Timestamp;
        }
    }

    fn drive_to(&mut self, dest: LatLon<f64>) {
        let line = self.planner.leg(self.pos, dest);
        let mut cum = vec![0.0];
        for w in line.windows(2) {
            let last = *cum.last().expect("non-empty");
            cum.push(last + haversine(w[0], w[1]));
        }
        let total = *cum.last().expect("non-empty");
        let speed_ms = self.profile.cruise_kmh / 3.6 * self.rng.random_range(0.85..1.15);
        let speed_noise = Normal::new(1.0, self.profile.speed_noise_pct / 100.0).expect("finite sd");
        let gps_noise = Normal::new(0.0, self.profile.gps_noise_m).expect("finite sd");

        let mut s = 0.0;
        let mut seg = 0;
        loop {
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let seg_len = cum[seg + 1] - cum[seg];
            let frac = if seg_len > 0.0 {
                ((s - cum[seg]) / seg_len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let true_pos = line[seg].lerp(&line[seg + 1], frac);
            let fix = true_pos.offset_m(gps_noise.sample(&mut self.rng), gps_noise.sample(&mut self.rng));
            let step = speed_ms.min(total - s).max(0.0);
            let reported = (step * 3.6 * speed_noise.sample(&mut self.rng)).max(0.0);
            self.samples.push(TripSample {
                timestamp: self.t,
                speed_kmh: reported,
                position: Some(fix),
                fuel_l: Some(self.fuel),
            });
            self.trace.push(self.t);
            if step <= 0.0 {
                break;
            }
            *self.truth.entry(date_of(self.t)).or_insert(0.0) += step / 1000.0;
            self.fuel = (self.fuel - step / 1000.0 * self.profile.consumption_l_per_km).max(0.0);
            s += step;
            self.t += 1;
        }
        self.pos = dest;
        if self.fuel < 0.2 * self.profile.tank_l {
            self.fuel = self.profile.tank_l;
        }
    }

    fn finish(self) -> SyntheticLog {
        SyntheticLog {
            trace: CanTrace::new(self.trace),
            samples: self.samples,
            daily_truth_km: self.truth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{detect_halts, integrate_daily_distance, write_trip_log, HALT_GAP_S};

    #[test]
    fn same_seed_same_bytes() {
        let p = DriverProfile::default();
        let a = generate_synthetic_log(&p, 2).unwrap();
        let b = generate_synthetic_log(&p, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_trip_log(&pa, &a.trace, &a.samples).unwrap();
        write_trip_log(&pb, &b.trace, &b.samples).unwrap();
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn periodic_schedule_repeats_weekly_km() {
        let p = DriverProfile {
            errand_rate: 0.0,
            ..Default::default()
        };
        let log = generate_synthetic_log(&p, 4).unwrap();
        let km: Vec<f64> = log.daily_truth_km.values().copied().collect();
        assert_eq!(km.len(), 28);
        let weekly: Vec<f64> = km.chunks(7).map(|w| w.iter().sum()).collect();
        for w in &weekly[1..] {
            assert!((w - weekly[0]).abs() < 1e-6, "{weekly:?}");
        }
        assert!(weekly[0] > 50.0);
    }

    #[test]
    fn undefined_anchor_is_rejected() {
        let mut p = DriverProfile::default();
        p.schedule.insert(Weekday::Sun, vec!["beach".into()]);
        assert!(matches!(
            generate_synthetic_log(&p, 1),
            Err(TelemetryError::InvalidProfile(_))
        ));
        assert!(generate_synthetic_log(&DriverProfile::default(), 0).is_err());
    }

    #[test]
    fn halts_land_on_anchors() {
        let p = DriverProfile {
            errand_rate: 0.0,
            ..Default::default()
        };
        let log = generate_synthetic_log(&p, 1).unwrap();
        let events = detect_halts(&log.trace, &log.samples, HALT_GAP_S).unwrap();
        // Mon 3 arrivals, Tue 2, Wed 3, Thu 2, Fri 2, Sat 2; the final one
        // has no following message and is not a gap
        assert_eq!(events.len(), 13);
        for e in &events {
            let nearest = p
                .anchors
                .values()
                .map(|a| haversine(*a, e.pos))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 10.0, "{nearest}");
        }
    }

    #[test]
    fn speed_integration_tracks_truth() {
        let p = DriverProfile::default();
        let log = generate_synthetic_log(&p, 2).unwrap();
        let est = integrate_daily_distance(&log.samples).unwrap();
        for (day, truth) in &log.daily_truth_km {
            let e = est.get(day).copied().unwrap_or(0.0);
            assert!((e - truth).abs() < 0.02 * truth + 0.05, "{day}: {e} vs {truth}");
        }
    }
}
