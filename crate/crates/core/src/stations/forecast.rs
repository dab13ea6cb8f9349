use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::Weekday;

use super::{PriceHistory, StationError};

pub const LOOKBACK_WEEKS: u32 = 4;
/// Observations older than this, relative to the newest one, are flagged.
pub const STALE_AFTER_DAYS: i64 = 14;

/// Per-station weekday prices and the area price (minimum over stations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyPriceForecast {
    pub fuel: String,
    /// Newest observation date across all stations.
    pub as_of: NaiveDate,
    /// Indexed by `Weekday::index()`.
    pub per_station: BTreeMap<String, [f64; 7]>,
    pub area: [f64; 7],
    /// Stations whose newest price is more than 14 days older than `as_of`.
    pub stale: BTreeSet<String>,
}

impl WeeklyPriceForecast {
    pub fn station_price(&self, id: &str, day: Weekday) -> Option<f64> {
        self.per_station.get(id).map(|p| p[day.index()])
    }

    pub fn area_price(&self, day: Weekday) -> f64 {
        self.area[day.index()]
    }

    /// Same forecast with the area price taken over `ids` only. Unknown ids
    /// are ignored; an empty selection keeps the full area.
    pub fn restricted_to<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> WeeklyPriceForecast {
        let keep: BTreeSet<&str> = ids
            .into_iter()
            .filter(|id| self.per_station.contains_key(*id))
            .collect();
        if keep.is_empty() {
            return self.clone();
        }
        let per_station: BTreeMap<String, [f64; 7]> = self
            .per_station
            .iter()
            .filter(|(id, _)| keep.contains(id.as_str()))
            .map(|(id, p)| (id.clone(), *p))
            .collect();
        WeeklyPriceForecast {
            fuel: self.fuel.clone(),
            as_of: self.as_of,
            area: area_min(&per_station),
            stale: self
                .stale
                .iter()
                .filter(|s| keep.contains(s.as_str()))
                .cloned()
                .collect(),
            per_station,
        }
    }
}

fn area_min(per_station: &BTreeMap<String, [f64; 7]>) -> [f64; 7] {
    let mut area = [f64::INFINITY; 7];
    for prices in per_station.values() {
        for (a, p) in area.iter_mut().zip(prices) {
            *a = a.min(*p);
        }
    }
    area
}

/// For each station and weekday: mean of that weekday's prices within the
/// last `lookback_weeks` weeks before the newest observation in the
/// history; without one, the station's most recent price.
pub fn forecast_week(
    history: &PriceHistory,
    fuel: &str,
    lookback_weeks: u32,
) -> Result<WeeklyPriceForecast, StationError> {
    let as_of = history
        .stations_with(fuel)
        .filter_map(|(_, s)| s.keys().next_back().copied())
        .max()
        .ok_or_else(|| StationError::EmptyHistory { fuel: fuel.to_string() })?;
    let window_start = as_of - Days::new(7 * u64::from(lookback_weeks)) + Days::new(1);

    let mut per_station = BTreeMap::new();
    let mut stale = BTreeSet::new();
    for (id, series) in history.stations_with(fuel) {
        let (&last_date, &last_price) = series.iter().next_back().expect("non-empty series");
        if (as_of - last_date).num_days() > STALE_AFTER_DAYS {
            stale.insert(id.to_string());
        }
        let mut sums = [(0.0, 0usize); 7];
        for (date, price) in series.range(window_start..) {
            let slot = &mut sums[Weekday::of(*date).index()];
            slot.0 += price;
            slot.1 += 1;
        }
        let prices = sums.map(|(s, n)| if n > 0 { s / n as f64 } else { last_price });
        per_station.insert(id.to_string(), prices);
    }
    Ok(WeeklyPriceForecast {
        fuel: fuel.to_string(),
        as_of,
        area: area_min(&per_station),
        per_station,
        stale,
    })
}

/// Weekday with the lowest area price; ties go to the earliest weekday.
pub fn cheapest_day(forecast: &WeeklyPriceForecast) -> Weekday {
    cheapest_day_among(forecast, &Weekday::ALL).expect("seven weekdays")
}

/// Like [`cheapest_day`] restricted to `days`; `None` if `days` is empty.
pub fn cheapest_day_among(forecast: &WeeklyPriceForecast, days: &[Weekday]) -> Option<Weekday> {
    let mut sorted = days.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted.into_iter().fold(None, |best, d| match best {
        Some(b) if forecast.area_price(b) <= forecast.area_price(d) => Some(b),
        _ => Some(d),
    })
}
