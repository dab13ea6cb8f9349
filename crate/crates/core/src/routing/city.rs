//! Seeded synthetic grid city: jittered intersections, two-way streets,
//! faster arterials every few blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geo::{haversine, LatLon};
use super::{GraphNode, NodeId, RoadEdge, RoadGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CityParams {
    pub center: LatLon<f64>,
    pub rows: u32,
    pub cols: u32,
    pub block_m: f64,
    /// Max intersection displacement, as a fraction of `block_m`.
    pub jitter: f64,
    pub local_kmh: f64,
    pub arterial_kmh: f64,
    /// Every n-th row and column is an arterial.
    pub arterial_every: u32,
}

impl Default for CityParams {
    fn default() -> Self {
        Self {
            center: LatLon::new(44.6471, 10.9252),
            rows: 25,
            cols: 25,
            block_m: 500.0,
            jitter: 0.15,
            local_kmh: 30.0,
            arterial_kmh: 60.0,
            arterial_every: 4,
        }
    }
}

impl CityParams {
    pub fn node_id(&self, row: u32, col: u32) -> NodeId {
        row * self.cols + col
    }
}

pub fn generate_city(params: &CityParams, seed: u64) -> RoadGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_h = (params.rows.saturating_sub(1)) as f64 * params.block_m / 2.0;
    let half_w = (params.cols.saturating_sub(1)) as f64 * params.block_m / 2.0;
    let amp = params.jitter * params.block_m;

    let mut nodes = Vec::with_capacity((params.rows * params.cols) as usize);
    for r in 0..params.rows {
        for c in 0..params.cols {
            let dn = rng.random_range(-amp..=amp);
            let de = rng.random_range(-amp..=amp);
            let north = r as f64 * params.block_m - half_h + dn;
            let east = c as f64 * params.block_m - half_w + de;
            nodes.push(GraphNode {
                id: params.node_id(r, c),
                pos: params.center.offset_m(north, east),
            });
        }
    }

    let every = params.arterial_every.max(1);
    let mut edges = Vec::new();
    let mut link = |a: NodeId, b: NodeId, arterial: bool, rng: &mut ChaCha8Rng| {
        let geodesic = haversine(nodes[a as usize].pos, nodes[b as usize].pos);
        // streets are never straighter than the chord
        let length_m = geodesic * (1.0 + rng.random_range(0.0..0.08));
        let kmh = if arterial {
            params.arterial_kmh
        } else {
            params.local_kmh
        };
        let time_s = length_m / (kmh / 3.6);
        for (from, to) in [(a, b), (b, a)] {
            edges.push(RoadEdge {
                from,
                to,
                length_m,
                time_s,
            });
        }
    };
    for r in 0..params.rows {
        for c in 0..params.cols {
            let here = params.node_id(r, c);
            if c + 1 < params.cols {
                link(here, params.node_id(r, c + 1), r % every == 0, &mut rng);
            }
            if r + 1 < params.rows {
                link(here, params.node_id(r + 1, c), c % every == 0, &mut rng);
            }
        }
    }
    RoadGraph::new(nodes, edges).expect("generated city is valid")
}
