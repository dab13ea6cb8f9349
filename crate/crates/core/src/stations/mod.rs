//! Fuel-station catalog, price history, weekday price forecast and the
//! cheapest refueling day.

mod forecast;
mod synth;

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio::{fmt_f64, read_rows, write_rows, CsvError};
use crate::routing::geo::LatLon;
use crate::routing::Located;

pub use forecast::{
    cheapest_day, cheapest_day_among, forecast_week, WeeklyPriceForecast, LOOKBACK_WEEKS, STALE_AFTER_DAYS,
};
pub use synth::{generate_stations, price_dispersion, StationSynthParams};

pub const STATIONS_HEADER: [&str; 7] = [
    "station_id",
    "lat",
    "lon",
    "brand",
    "fuel_type",
    "price_eur_l",
    "observed_date",
];

#[derive(Debug, Error)]
pub enum StationError {
    #[error("duplicate station `{id}`: {reason}")]
    DuplicateId { id: String, reason: String },
    #[error("no price observations for fuel `{fuel}`")]
    EmptyHistory { fuel: String },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: String,
    pub pos: LatLon<f64>,
    pub brand: String,
}

impl Located for Station {
    fn location(&self) -> LatLon<f64> {
        self.pos
    }
}

/// Dated €/L observations keyed by (station id, fuel type).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceHistory {
    series: BTreeMap<(String, String), BTreeMap<NaiveDate, f64>>,
}

impl PriceHistory {
    /// Returns false if the (station, fuel, date) key already had a price.
    pub fn insert(&mut self, station: &str, fuel: &str, date: NaiveDate, price: f64) -> bool {
        self.series
            .entry((station.to_string(), fuel.to_string()))
            .or_default()
            .insert(date, price)
            .is_none()
    }

    pub fn series(&self, station: &str, fuel: &str) -> Option<&BTreeMap<NaiveDate, f64>> {
        self.series.get(&(station.to_string(), fuel.to_string()))
    }

    /// Station ids with at least one observation for `fuel`.
    pub fn stations_with<'a>(
        &'a self,
        fuel: &'a str,
    ) -> impl Iterator<Item = (&'a str, &'a BTreeMap<NaiveDate, f64>)> + 'a {
        self.series
            .iter()
            .filter(move |((_, f), s)| f == fuel && !s.is_empty())
            .map(|((id, _), s)| (id.as_str(), s))
    }

    /// Most recent observation of a station.
    pub fn latest(&self, station: &str, fuel: &str) -> Option<(NaiveDate, f64)> {
        self.series(station, fuel)
            .and_then(|s| s.iter().next_back())
            .map(|(d, p)| (*d, *p))
    }

    pub fn len(&self) -> usize {
        self.series.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds `c` to every price.
    pub fn shifted(&self, c: f64) -> PriceHistory {
        let mut out = self.clone();
        for s in out.series.values_mut() {
            for p in s.values_mut() {
                *p += c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StationCatalog {
    pub stations: Vec<Station>,
    pub history: PriceHistory,
}

impl StationCatalog {
    pub fn get(&self, id: &str) -> Option<&Station> {
        self.stations.iter().find(|s| s.id == id)
    }
}

/// Reads the flattened station×fuel×date CSV. A station id that reappears
/// with different coordinates or brand, or a repeated (station, fuel, date),
/// is a `DuplicateId`. Stations keep first-appearance order.
pub fn load_stations(path: &Path) -> Result<StationCatalog, StationError> {
    let rows = read_rows(path, &STATIONS_HEADER, |row| {
        let id = row.raw("station_id").trim().to_string();
        if id.is_empty() {
            return Err(row.error("station_id", "empty"));
        }
        let fuel = row.raw("fuel_type").trim().to_string();
        if fuel.is_empty() {
            return Err(row.error("fuel_type", "empty"));
        }
        let price = row.parse_f64("price_eur_l", 0.0, f64::MAX)?;
        if price <= 0.0 {
            return Err(row.error("price_eur_l", format!("{price} is not positive")));
        }
        let station = Station {
            id,
            pos: LatLon::new(row.parse_f64("lat", -90.0, 90.0)?, row.parse_f64("lon", -180.0, 180.0)?),
            brand: row.raw("brand").trim().to_string(),
        };
        let date: NaiveDate = row.parse("observed_date")?;
        Ok((station, fuel, price, date))
    })?;

    let mut catalog = StationCatalog::default();
    for (station, fuel, price, date) in rows {
        match catalog.get(&station.id) {
            Some(known) if *known != station => {
                return Err(StationError::DuplicateId {
                    id: station.id,
                    reason: "conflicting coordinates or brand".into(),
                });
            }
            Some(_) => {}
            None => catalog.stations.push(station.clone()),
        }
        if !catalog.history.insert(&station.id, &fuel, date, price) {
            return Err(StationError::DuplicateId {
                id: station.id,
                reason: format!("two prices for {fuel} on {date}"),
            });
        }
    }
    Ok(catalog)
}

/// Rows grouped by station (catalog order), then fuel, then date.
pub fn save_stations(path: &Path, catalog: &StationCatalog) -> Result<(), CsvError> {
    let mut rows = Vec::new();
    for s in &catalog.stations {
        for ((id, fuel), series) in &catalog.history.series {
            if *id != s.id {
                continue;
            }
            for (date, price) in series {
                rows.push([
                    s.id.clone(),
                    fmt_f64(s.pos.lat),
                    fmt_f64(s.pos.lon),
                    s.brand.clone(),
                    fuel.clone(),
                    fmt_f64(*price),
                    date.to_string(),
                ]);
            }
        }
    }
    write_rows(path, &STATIONS_HEADER, rows)
}
