use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;
use crate::routing::geo::LatLon;

use super::{Station, StationCatalog, WeeklyPriceForecast};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationSynthParams {
    pub n_stations: usize,
    pub fuel: String,
    pub base_price: f64,
    /// Station offsets are spread evenly over `±spread`, so the cross-station
    /// dispersion is about `2·spread / base_price`.
    pub spread: f64,
    /// Shared weekday pattern added to every station, Monday first.
    pub weekday_effect: [f64; 7],
    pub noise_sd: f64,
    pub weeks: u32,
    /// Last day of the generated history.
    pub end_date: NaiveDate,
    /// Maximum displacement from the chosen site.
    pub jitter_m: f64,
}

impl Default for StationSynthParams {
    fn default() -> Self {
        Self {
            n_stations: 40,
            fuel: "petrol".to_string(),
            base_price: 1.80,
            spread: 0.07,
            weekday_effect: [0.010, 0.0, -0.020, 0.0, 0.015, 0.025, 0.020],
            noise_sd: 0.004,
            weeks: 4,
            end_date: NaiveDate::from_ymd_opt(2024, 3, 31).expect("valid date"),
            jitter_m: 40.0,
        }
    }
}

const BRANDS: [&str; 5] = ["Eni", "Q8", "IP", "Tamoil", "Esso"];

/// Places stations near distinct `sites` (typically road-graph nodes) and
/// fills `weeks` of daily prices, rounded to 0.001 €/L.
pub fn generate_stations(sites: &[LatLon<f64>], params: &StationSynthParams, seed: u64) -> StationCatalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.shuffle(&mut rng);
    let n = params.n_stations.min(sites.len());

    let mut offsets: Vec<f64> = (0..n)
        .map(|i| {
            if n > 1 {
                -params.spread + 2.0 * params.spread * i as f64 / (n - 1) as f64
            } else {
                0.0
            }
        })
        .collect();
    offsets.shuffle(&mut rng);

    let noise = Normal::new(0.0, params.noise_sd).expect("finite sd");
    let days = 7 * u64::from(params.weeks);
    let first = params.end_date - Days::new(days.saturating_sub(1));
    let mut catalog = StationCatalog::default();
    for (k, &site) in order.iter().take(n).enumerate() {
        let r = params.jitter_m * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let station = Station {
            id: format!("ST{:03}", k + 1),
            pos: sites[site].offset_m(r * theta.cos(), r * theta.sin()),
            brand: BRANDS[rng.random_range(0..BRANDS.len())].to_string(),
        };
        for d in 0..days {
            let date = first + Days::new(d);
            let p = params.base_price
                + offsets[k]
                + params.weekday_effect[Weekday::of(date).index()]
                + noise.sample(&mut rng);
            let p = (p.max(0.5) * 1000.0).round() / 1000.0;
            catalog.history.insert(&station.id, &params.fuel, date, p);
        }
        catalog.stations.push(station);
    }
    catalog
}

/// `(max − min) / min` of the stations' mean weekly forecast price.
pub fn price_dispersion(forecast: &WeeklyPriceForecast) -> f64 {
    let means: Vec<f64> = forecast
        .per_station
        .values()
        .map(|p| p.iter().sum::<f64>() / 7.0)
        .collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if means.is_empty() {
        0.0
    } else {
        (hi - lo) / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stations::{cheapest_day, forecast_week};

    fn sites() -> Vec<LatLon<f64>> {
        let c = LatLon::new(44.6471, 10.9252);
        (0..100)
            .map(|i| c.offset_m((i / 10) as f64 * 500.0, (i % 10) as f64 * 500.0))
            .collect()
    }

    #[test]
    fn deterministic_and_dispersed() {
        let p = StationSynthParams::default();
        let a = generate_stations(&sites(), &p, 5);
        assert_eq!(a, generate_stations(&sites(), &p, 5));
        assert_eq!(a.stations.len(), 40);
        assert_eq!(a.history.len(), 40 * 28);
        let f = forecast_week(&a.history, "petrol", 4).unwrap();
        assert!(price_dispersion(&f) >= 0.05, "{}", price_dispersion(&f));
        assert_eq!(cheapest_day(&f), Weekday::Wed);
    }
}
