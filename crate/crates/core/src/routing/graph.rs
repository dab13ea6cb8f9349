use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::geo::{haversine, LatLon};
use super::RoutingError;

pub type NodeId = u32;

/// Edge weight used by a route query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Time,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub pos: LatLon<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub time_s: f64,
}

impl RoadEdge {
    pub fn weight(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Time => self.time_s,
            Metric::Distance => self.length_m,
        }
    }
}

/// A driven path: node sequence plus the summed length and time of the
/// traversed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<NodeId>,
    pub distance_km: f64,
    pub time_s: f64,
}

impl Route {
    pub fn trivial(node: NodeId) -> Self {
        Self {
            nodes: vec![node],
            distance_km: 0.0,
            time_s: 0.0,
        }
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn extend(&mut self, next: &Route) {
        debug_assert_eq!(self.nodes.last(), next.nodes.first());
        self.nodes.extend_from_slice(&next.nodes[1..]);
        self.distance_km += next.distance_km;
        self.time_s += next.time_s;
    }
}

/// Directed road network. Immutable after construction.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<RoadEdge>,
    index: HashMap<NodeId, usize>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for RoadGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

/// Roads may not be shorter than the geodesic between their endpoints,
/// up to this relative slack.
const GEODESIC_SLACK: f64 = 0.999;

impl RoadGraph {
    pub fn new(nodes: Vec<GraphNode>, edges: Vec<RoadEdge>) -> Result<Self, RoutingError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !n.pos.is_valid() {
                return Err(RoutingError::InvalidNode { id: n.id });
            }
            if index.insert(n.id, i).is_some() {
                return Err(RoutingError::DuplicateNode { id: n.id });
            }
        }
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            let (Some(&fi), Some(&ti)) = (index.get(&e.from), index.get(&e.to)) else {
                let missing = if index.contains_key(&e.from) { e.to } else { e.from };
                return Err(RoutingError::DanglingEdge {
                    edge: ei,
                    node: missing,
                });
            };
            let geodesic = haversine(nodes[fi].pos, nodes[ti].pos);
            let ok = e.length_m.is_finite()
                && e.time_s.is_finite()
                && e.length_m > 0.0
                && e.time_s > 0.0
                && e.length_m >= geodesic * GEODESIC_SLACK;
            if !ok {
                return Err(RoutingError::InvalidEdge {
                    edge: ei,
                    reason: format!(
                        "length {} m, time {} s, geodesic {:.3} m",
                        e.length_m, e.time_s, geodesic
                    ),
                });
            }
            outgoing[fi].push(ei);
        }
        Ok(Self {
            nodes,
            edges,
            index,
            outgoing,
        })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn position(&self, id: NodeId) -> Option<LatLon<f64>> {
        self.index.get(&id).map(|&i| self.nodes[i].pos)
    }

    /// Nearest node by haversine; ties go to the lower node id.
    pub fn nearest_node(&self, p: LatLon<f64>) -> Option<(NodeId, f64)> {
        self.nodes
            .iter()
            .map(|n| (n.id, haversine(p, n.pos)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    fn idx(&self, id: NodeId) -> Result<usize, RoutingError> {
        self.index.get(&id).copied().ok_or(RoutingError::UnknownNode { id })
    }

    /// Minimum-cost route under `metric`. Among equal-cost routes the one
    /// with the lexicographically smallest node-id sequence wins.
    pub fn shortest_route(&self, from: NodeId, to: NodeId, metric: Metric) -> Result<Route, RoutingError> {
        let src = self.idx(from)?;
        let dst = self.idx(to)?;
        if src == dst {
            return Ok(Route::trivial(from));
        }

        let n = self.nodes.len();
        let mut cost = vec![f64::INFINITY; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        cost[src] = 0.0;
        heap.push(Entry { cost: 0.0, node: src });

        while let Some(Entry { cost: c, node: u }) = heap.pop() {
            if settled[u] || c > cost[u] {
                continue;
            }
            settled[u] = true;
            if u == dst {
                break;
            }
            for &ei in &self.outgoing[u] {
                let e = &self.edges[ei];
                let v = self.index[&e.to];
                if settled[v] {
                    continue;
                }
                let cand = c + e.weight(metric);
                match cand.total_cmp(&cost[v]) {
                    Ordering::Less => {
                        cost[v] = cand;
                        parent[v] = Some(ei);
                        heap.push(Entry { cost: cand, node: v });
                    }
                    Ordering::Equal => {
                        let mut via_u = self.id_path(&parent, src, u);
                        via_u.push(e.to);
                        if via_u < self.id_path(&parent, src, v) {
                            parent[v] = Some(ei);
                        }
                    }
                    Ordering::Greater => {}
                }
            }
        }

        if !settled[dst] {
            return Err(RoutingError::Unreachable { from, to });
        }
        Ok(self.assemble(&parent, src, dst))
    }

    fn id_path(&self, parent: &[Option<usize>], src: usize, mut at: usize) -> Vec<NodeId> {
        let mut ids = vec![self.nodes[at].id];
        while at != src {
            let e = &self.edges[parent[at].expect("settled node has a parent")];
            at = self.index[&e.from];
            ids.push(e.from);
        }
        ids.reverse();
        ids
    }

    fn assemble(&self, parent: &[Option<usize>], src: usize, dst: usize) -> Route {
        let mut edge_path = Vec::new();
        let mut at = dst;
        while at != src {
            let ei = parent[at].expect("settled node has a parent");
            edge_path.push(ei);
            at = self.index[&self.edges[ei].from];
        }
        edge_path.reverse();
        let mut nodes = vec![self.nodes[src].id];
        let mut length_m = 0.0;
        let mut time_s = 0.0;
        for ei in edge_path {
            let e = &self.edges[ei];
            nodes.push(e.to);
            length_m += e.length_m;
            time_s += e.time_s;
        }
        Route {
            nodes,
            distance_km: length_m / 1000.0,
            time_s,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    cost: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // min-heap on cost
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line_graph() -> RoadGraph {
        let base = LatLon::new(44.0, 10.0);
        let nodes = (0..3)
            .map(|i| GraphNode {
                id: i,
                pos: base.offset_m(0.0, 1000.0 * i as f64),
            })
            .collect::<Vec<_>>();
        let mut edges = Vec::new();
        for i in 0..2u32 {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                edges.push(RoadEdge {
                    from: a,
                    to: b,
                    length_m: 1000.5,
                    time_s: 120.0,
                });
            }
        }
        RoadGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn single_edge_route() {
        let g = line_graph();
        let r = g.shortest_route(0, 1, Metric::Distance).unwrap();
        assert_eq!(r.nodes, vec![0, 1]);
        assert!((r.distance_km - 1.0005).abs() < 1e-12);
        assert_eq!(r.time_s, 120.0);
    }

    #[test]
    fn same_node_is_trivial() {
        let g = line_graph();
        assert_eq!(g.shortest_route(2, 2, Metric::Time).unwrap(), Route::trivial(2));
    }

    #[test]
    fn unreachable_and_unknown() {
        let g = line_graph();
        let nodes = g.nodes().to_vec();
        let edges = vec![g.edges()[0]];
        let g = RoadGraph::new(nodes, edges).unwrap();
        assert!(matches!(
            g.shortest_route(1, 0, Metric::Time),
            Err(RoutingError::Unreachable { from: 1, to: 0 })
        ));
        assert!(matches!(
            g.shortest_route(0, 9, Metric::Time),
            Err(RoutingError::UnknownNode { id: 9 })
        ));
    }

    #[test]
    fn rejects_dangling_and_short_edges() {
        let g = line_graph();
        let mut edges = g.edges().to_vec();
        edges.push(RoadEdge {
            from: 0,
            to: 7,
            length_m: 5.0,
            time_s: 1.0,
        });
        assert!(matches!(
            RoadGraph::new(g.nodes().to_vec(), edges),
            Err(RoutingError::DanglingEdge { node: 7, .. })
        ));
        let short = vec![RoadEdge {
            from: 0,
            to: 1,
            length_m: 900.0,
            time_s: 1.0,
        }];
        assert!(matches!(
            RoadGraph::new(g.nodes().to_vec(), short),
            Err(RoutingError::InvalidEdge { .. })
        ));
    }

    #[test]
    fn equal_cost_tie_prefers_smaller_sequence() {
        // diamond 0 -> {1,2} -> 3 with identical weights
        let base = LatLon::new(0.0, 0.0);
        let nodes = vec![
            GraphNode { id: 0, pos: base },
            GraphNode {
                id: 2,
                pos: base.offset_m(100.0, 100.0),
            },
            GraphNode {
                id: 1,
                pos: base.offset_m(-100.0, 100.0),
            },
            GraphNode {
                id: 3,
                pos: base.offset_m(0.0, 200.0),
            },
        ];
        let e = |from, to| RoadEdge {
            from,
            to,
            length_m: 200.0,
            time_s: 10.0,
        };
        // insert the id-2 branch first so the tie-break must override it
        let edges = vec![e(0, 2), e(2, 3), e(0, 1), e(1, 3)];
        let g = RoadGraph::new(nodes, edges).unwrap();
        let r = g.shortest_route(0, 3, Metric::Time).unwrap();
        assert_eq!(r.nodes, vec![0, 1, 3]);
    }
}
