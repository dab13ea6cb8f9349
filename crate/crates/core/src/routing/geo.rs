//! Great-circle distance and point-to-polyline distance.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Mean Earth radius used by every distance in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A WGS84 position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatLon<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> LatLon<T> {
    pub fn new(lat: T, lon: T) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && self.lat.abs() <= T::lit(90.0)
            && self.lon.abs() <= T::lit(180.0)
    }

    /// Linear interpolation in degree space.
    pub fn lerp(&self, other: &Self, t: T) -> Self {
        Self {
            lat: self.lat + (other.lat - self.lat) * t,
            lon: self.lon + (other.lon - self.lon) * t,
        }
    }

    /// Point displaced by `north_m` / `east_m` meters (local flat approximation).
    pub fn offset_m(&self, north_m: T, east_m: T) -> Self {
        let r = T::lit(EARTH_RADIUS_M);
        let dlat = (north_m / r).to_degrees();
        let dlon = (east_m / (r * self.lat.to_radians().cos())).to_degrees();
        Self {
            lat: self.lat + dlat,
            lon: self.lon + dlon,
        }
    }
}

/// Great-circle distance in meters.
pub fn haversine<T: Scalar>(a: LatLon<T>, b: LatLon<T>) -> T {
    let two = T::lit(2.0);
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let s1 = (dphi / two).sin();
    let s2 = (dlambda / two).sin();
    let h = s1 * s1 + phi1.cos() * phi2.cos() * s2 * s2;
    // clamp guards asin against rounding just above 1 for antipodes
    let h = h.min(T::one()).max(T::zero());
    two * T::lit(EARTH_RADIUS_M) * h.sqrt().asin()
}

/// Distance in meters from `p` to the segment `a`–`b`.
///
/// The closest-point parameter is found in an equirectangular projection
/// centred on the segment; the returned distance is the haversine distance to
/// that point. Adequate for segments of a few kilometres.
pub fn point_segment_distance<T: Scalar>(p: LatLon<T>, a: LatLon<T>, b: LatLon<T>) -> T {
    let t = closest_param(p, a, b);
    haversine(p, a.lerp(&b, t))
}

fn closest_param<T: Scalar>(p: LatLon<T>, a: LatLon<T>, b: LatLon<T>) -> T {
    let ref_lat = ((a.lat + b.lat) / T::lit(2.0)).to_radians();
    let kx = ref_lat.cos();
    let bx = (b.lon - a.lon) * kx;
    let by = b.lat - a.lat;
    let px = (p.lon - a.lon) * kx;
    let py = p.lat - a.lat;
    let len2 = bx * bx + by * by;
    if len2 == T::zero() {
        return T::zero();
    }
    ((px * bx + py * by) / len2).max(T::zero()).min(T::one())
}

/// Minimum distance in meters from `p` to a polyline. A single-vertex
/// polyline degenerates to point distance; an empty one yields `None`.
pub fn point_polyline_distance<T: Scalar>(p: LatLon<T>, line: &[LatLon<T>]) -> Option<T> {
    match line {
        [] => None,
        [only] => Some(haversine(p, *only)),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .reduce(T::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ll(lat: f64, lon: f64) -> LatLon<f64> {
        LatLon::new(lat, lon)
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(haversine(ll(44.6, 10.9), ll(44.6, 10.9)), 0.0);
    }

    #[test]
    fn one_degree_on_equator() {
        let d = haversine(ll(0.0, 0.0), ll(0.0, 1.0));
        assert!((d - 111_194.9).abs() < 0.1, "{d}");
        assert!((d - EARTH_RADIUS_M * PI / 180.0).abs() < 1e-6);
    }

    #[test]
    fn antipodal_half_circumference() {
        let d = haversine(ll(0.0, 0.0), ll(0.0, 180.0));
        assert!((d - PI * EARTH_RADIUS_M).abs() < 1.0, "{d}");
        assert!((d - 20_015_086.0).abs() < 1.0);
    }

    #[test]
    fn works_in_f32() {
        let d: f32 = haversine(LatLon::new(0.0f32, 0.0), LatLon::new(0.0, 1.0));
        assert!((d - 111_194.9).abs() < 5.0, "{d}");
    }

    #[test]
    fn offset_round_trips_distance() {
        let a = ll(44.65, 10.92);
        let b = a.offset_m(300.0, 400.0);
        assert!((haversine(a, b) - 500.0).abs() < 0.5);
    }

    #[test]
    fn segment_distance_perpendicular_and_endpoint() {
        let a = ll(44.0, 10.0);
        let b = a.offset_m(0.0, 1000.0);
        let mid_above = a.offset_m(200.0, 500.0);
        let d = point_segment_distance(mid_above, a, b);
        assert!((d - 200.0).abs() < 0.5, "{d}");
        let beyond = b.offset_m(0.0, 300.0);
        assert!((point_segment_distance(beyond, a, b) - 300.0).abs() < 0.5);
    }

    #[test]
    fn polyline_edge_cases() {
        let p = ll(1.0, 1.0);
        assert_eq!(point_polyline_distance(p, &[]), None);
        assert_eq!(point_polyline_distance(p, &[p]), Some(0.0));
        assert_eq!(point_polyline_distance(p, &[p, ll(1.0, 1.01)]), Some(0.0));
    }
}
