use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SensorNode;
use crate::cloud_field::Point2;
use crate::invariant::{ensure, InvariantViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Elements within mutual radio range talk to each other directly.
    #[default]
    DirectMesh,
    /// Sensor → access point → router tree.
    Hierarchical,
}

impl TopologyKind {
    pub fn other(self) -> TopologyKind {
        match self {
            TopologyKind::DirectMesh => TopologyKind::Hierarchical,
            TopologyKind::Hierarchical => TopologyKind::DirectMesh,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::DirectMesh => "direct_mesh",
            TopologyKind::Hierarchical => "hierarchical",
        }
    }
}

/// A vertex of the communication graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hop {
    Node(u32),
    AccessPoint(usize),
    Router(usize),
}

impl Hop {
    pub fn kind(self) -> &'static str {
        match self {
            Hop::Node(_) => "sensor",
            Hop::AccessPoint(_) => "access_point",
            Hop::Router(_) => "router",
        }
    }

    /// Numeric id within the vertex's kind.
    pub fn index(self) -> u64 {
        match self {
            Hop::Node(id) => u64::from(id),
            Hop::AccessPoint(i) | Hop::Router(i) => i as u64,
        }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hop::Node(id) => write!(f, "n{id}"),
            Hop::AccessPoint(i) => write!(f, "ap{i}"),
            Hop::Router(i) => write!(f, "r{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPointSpec {
    pub position: Point2,
    /// Radius within which nodes may associate; unlimited when absent.
    #[serde(default)]
    pub coverage: Option<f64>,
    /// Upstream router; the access point is a tree root when absent.
    #[serde(default)]
    pub router: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSpec {
    #[serde(default)]
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    pub access_points: Vec<AccessPointSpec>,
    #[serde(default)]
    pub routers: Vec<RouterSpec>,
}

impl HierarchySpec {
    /// One unlimited access point at `hub` and no routers.
    pub fn star(hub: Point2) -> Self {
        Self {
            access_points: vec![AccessPointSpec {
                position: hub,
                coverage: None,
                router: None,
            }],
            routers: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(
            !self.access_points.is_empty(),
            "access_points",
            "at least one access point is required",
        )?;
        for (i, ap) in self.access_points.iter().enumerate() {
            let field = format!("access_points[{i}]");
            ensure(ap.position.is_finite(), &format!("{field}.position"), "must be finite")?;
            if let Some(c) = ap.coverage {
                ensure(c.is_finite() && c > 0.0, &format!("{field}.coverage"), "must be > 0")?;
            }
            if let Some(r) = ap.router {
                ensure(
                    r < self.routers.len(),
                    &format!("{field}.router"),
                    format!("router index {r} out of range"),
                )?;
            }
        }
        for (i, router) in self.routers.iter().enumerate() {
            let field = format!("routers[{i}].parent");
            if let Some(p) = router.parent {
                ensure(p < self.routers.len(), &field, format!("router index {p} out of range"))?;
            }
            // Walking up must terminate within routers.len() steps.
            let mut cursor = router.parent;
            let mut steps = 0;
            while let Some(p) = cursor {
                steps += 1;
                ensure(steps <= self.routers.len(), &field, "router parents form a cycle")?;
                cursor = self.routers.get(p).and_then(|r| r.parent);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("duplicate sensor id {0}")]
    DuplicateId(u32),
    #[error("unknown sensor id {0}")]
    UnknownNode(u32),
    #[error("route endpoints must differ (got {0} twice)")]
    SameEndpoints(u32),
    #[error("no route from {src} to {dst}")]
    NoRoute { src: u32, dst: u32 },
    #[error("sensor {0} is not covered by any access point")]
    NoAccessPoint(u32),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(InvariantViolation),
}

/// Immutable communication graph over a set of sensor nodes.
#[derive(Debug, Clone)]
pub struct Topology {
    kind: TopologyKind,
    nodes: BTreeMap<u32, SensorNode>,
    /// Direct mesh: sorted neighbor lists.
    adjacency: BTreeMap<u32, Vec<u32>>,
    /// Hierarchical: child → parent links.
    parent: BTreeMap<Hop, Hop>,
    access_points: usize,
    routers: usize,
}

fn index_nodes(nodes: &[SensorNode]) -> Result<BTreeMap<u32, SensorNode>, TopologyError> {
    let mut map = BTreeMap::new();
    for node in nodes {
        if map.insert(node.id, node.clone()).is_some() {
            return Err(TopologyError::DuplicateId(node.id));
        }
    }
    Ok(map)
}

/// Range-disc connectivity: an edge joins two nodes iff their distance is
/// within both radio ranges.
pub fn build_direct_topology(nodes: &[SensorNode]) -> Result<Topology, TopologyError> {
    let nodes = index_nodes(nodes)?;
    let mut adjacency: BTreeMap<u32, Vec<u32>> = nodes.keys().map(|&id| (id, Vec::new())).collect();
    let list: Vec<&SensorNode> = nodes.values().collect();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            if a.position.distance(b.position) <= a.radio_range.min(b.radio_range) {
                adjacency.get_mut(&a.id).expect("indexed").push(b.id);
                adjacency.get_mut(&b.id).expect("indexed").push(a.id);
            }
        }
    }
    for neighbors in adjacency.values_mut() {
        neighbors.sort_unstable();
    }
    Ok(Topology {
        kind: TopologyKind::DirectMesh,
        nodes,
        adjacency,
        parent: BTreeMap::new(),
        access_points: 0,
        routers: 0,
    })
}

/// Attaches every node to its nearest covering access point (ties go to the
/// lowest index) and access points to their routers.
pub fn build_hierarchical_topology(nodes: &[SensorNode], spec: &HierarchySpec) -> Result<Topology, TopologyError> {
    spec.validate().map_err(TopologyError::InvalidHierarchy)?;
    let nodes = index_nodes(nodes)?;
    let mut parent = BTreeMap::new();
    for node in nodes.values() {
        let mut best: Option<(usize, f64)> = None;
        for (i, ap) in spec.access_points.iter().enumerate() {
            let d = node.position.distance(ap.position);
            if ap.coverage.is_some_and(|c| d > c) {
                continue;
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (ap, _) = best.ok_or(TopologyError::NoAccessPoint(node.id))?;
        parent.insert(Hop::Node(node.id), Hop::AccessPoint(ap));
    }
    for (i, ap) in spec.access_points.iter().enumerate() {
        if let Some(r) = ap.router {
            parent.insert(Hop::AccessPoint(i), Hop::Router(r));
        }
    }
    for (i, router) in spec.routers.iter().enumerate() {
        if let Some(p) = router.parent {
            parent.insert(Hop::Router(i), Hop::Router(p));
        }
    }
    Ok(Topology {
        kind: TopologyKind::Hierarchical,
        nodes,
        adjacency: BTreeMap::new(),
        parent,
        access_points: spec.access_points.len(),
        routers: spec.routers.len(),
    })
}

impl Topology {
    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SensorNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: u32) -> Option<&SensorNode> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Every vertex: sensors, then access points, then routers.
    pub fn vertices(&self) -> Vec<Hop> {
        self.nodes
            .keys()
            .map(|&id| Hop::Node(id))
            .chain((0..self.access_points).map(Hop::AccessPoint))
            .chain((0..self.routers).map(Hop::Router))
            .collect()
    }

    /// Direct-mesh neighbors of `id`, ascending; empty for hierarchical graphs.
    pub fn neighbors(&self, id: u32) -> &[u32] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Undirected direct-mesh edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.adjacency
            .iter()
            .flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn access_point_of(&self, id: u32) -> Option<usize> {
        match self.parent.get(&Hop::Node(id)) {
            Some(Hop::AccessPoint(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn parent_of(&self, hop: Hop) -> Option<Hop> {
        self.parent.get(&hop).copied()
    }

    /// Full hop list from `src` to `dst`, endpoints included.
    pub fn route(&self, src: u32, dst: u32) -> Result<Vec<Hop>, TopologyError> {
        for id in [src, dst] {
            if !self.contains(id) {
                return Err(TopologyError::UnknownNode(id));
            }
        }
        if src == dst {
            return Err(TopologyError::SameEndpoints(src));
        }
        match self.kind {
            TopologyKind::DirectMesh => self.mesh_route(src, dst),
            TopologyKind::Hierarchical => self.tree_route(src, dst),
        }
    }

    /// Number of links traversed by `route(src, dst)`.
    pub fn hop_count(&self, src: u32, dst: u32) -> Result<usize, TopologyError> {
        Ok(self.route(src, dst)?.len() - 1)
    }

    fn mesh_route(&self, src: u32, dst: u32) -> Result<Vec<Hop>, TopologyError> {
        // Distances to dst; walking greedily from src over ascending
        // neighbor lists then yields the lexicographically smallest
        // shortest id sequence.
        let mut dist: BTreeMap<u32, usize> = BTreeMap::from([(dst, 0)]);
        let mut queue = VecDeque::from([dst]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &w in self.neighbors(v) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        let Some(&len) = dist.get(&src) else {
            return Err(TopologyError::NoRoute { src, dst });
        };
        let mut path = Vec::with_capacity(len + 1);
        let mut cursor = src;
        path.push(Hop::Node(cursor));
        while cursor != dst {
            let want = dist[&cursor] - 1;
            cursor = *self
                .neighbors(cursor)
                .iter()
                .find(|w| dist.get(w) == Some(&want))
                .expect("bfs layer has a predecessor");
            path.push(Hop::Node(cursor));
        }
        Ok(path)
    }

    fn ancestors(&self, start: Hop) -> Vec<Hop> {
        let mut chain = vec![start];
        let mut cursor = start;
        while let Some(&p) = self.parent.get(&cursor) {
            chain.push(p);
            cursor = p;
        }
        chain
    }

    fn tree_route(&self, src: u32, dst: u32) -> Result<Vec<Hop>, TopologyError> {
        let up = self.ancestors(Hop::Node(src));
        let down = self.ancestors(Hop::Node(dst));
        let down_set: BTreeSet<Hop> = down.iter().copied().collect();
        let meet = up
            .iter()
            .position(|h| down_set.contains(h))
            .ok_or(TopologyError::NoRoute { src, dst })?;
        let apex = up[meet];
        let mut path: Vec<Hop> = up[..=meet].to_vec();
        let apex_in_down = down.iter().position(|&h| h == apex).expect("shared ancestor");
        path.extend(down[..apex_in_down].iter().rev());
        Ok(path)
    }
}

/// Free function form of [`Topology::route`].
pub fn route(topology: &Topology, src: u32, dst: u32) -> Result<Vec<Hop>, TopologyError> {
    topology.route(src, dst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, x: f64, y: f64, range: f64) -> SensorNode {
        SensorNode::new(id, Point2::new(x, y), range, 10.0)
    }

    fn ids(path: &[Hop]) -> Vec<Hop> {
        path.to_vec()
    }

    #[test]
    fn close_pair_has_edge() {
        let t = build_direct_topology(&[node(1, 0.0, 0.0, 100.0), node(2, 50.0, 0.0, 100.0)]).unwrap();
        assert_eq!(t.edges(), vec![(1, 2)]);
    }

    #[test]
    fn distant_pair_has_no_edge() {
        let t = build_direct_topology(&[node(1, 0.0, 0.0, 100.0), node(2, 150.0, 0.0, 100.0)]).unwrap();
        assert!(t.edges().is_empty());
        assert_eq!(t.route(1, 2), Err(TopologyError::NoRoute { src: 1, dst: 2 }));
    }

    #[test]
    fn edge_needs_both_ranges() {
        let t = build_direct_topology(&[node(1, 0.0, 0.0, 100.0), node(2, 80.0, 0.0, 50.0)]).unwrap();
        assert!(t.edges().is_empty());
    }

    #[test]
    fn line_of_three_is_a_path() {
        let t = build_direct_topology(&[
            node(1, 0.0, 0.0, 100.0),
            node(2, 100.0, 0.0, 100.0),
            node(3, 200.0, 0.0, 100.0),
        ])
        .unwrap();
        assert_eq!(t.edges(), vec![(1, 2), (2, 3)]);
        assert_eq!(
            ids(&t.route(1, 3).unwrap()),
            vec![Hop::Node(1), Hop::Node(2), Hop::Node(3)]
        );
        assert_eq!(t.hop_count(1, 2).unwrap(), 1);
    }

    #[test]
    fn bfs_tie_takes_lowest_ids() {
        // Square 1-2-4-3-1 plus nothing diagonal: two shortest paths 1→4.
        let t = build_direct_topology(&[
            node(1, 0.0, 0.0, 100.0),
            node(3, 0.0, 100.0, 100.0),
            node(2, 100.0, 0.0, 100.0),
            node(4, 100.0, 100.0, 100.0),
        ])
        .unwrap();
        assert_eq!(t.route(1, 4).unwrap(), vec![Hop::Node(1), Hop::Node(2), Hop::Node(4)]);
        assert_eq!(t.route(4, 1).unwrap(), vec![Hop::Node(4), Hop::Node(2), Hop::Node(1)]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = build_direct_topology(&[node(1, 0.0, 0.0, 1.0), node(1, 5.0, 0.0, 1.0)]).unwrap_err();
        assert_eq!(err, TopologyError::DuplicateId(1));
    }

    #[test]
    fn route_preconditions() {
        let t = build_direct_topology(&[node(1, 0.0, 0.0, 100.0), node(2, 50.0, 0.0, 100.0)]).unwrap();
        assert_eq!(t.route(1, 1), Err(TopologyError::SameEndpoints(1)));
        assert_eq!(t.route(1, 9), Err(TopologyError::UnknownNode(9)));
    }

    #[test]
    fn single_access_point_is_a_star() {
        let nodes = [
            node(1, 0.0, 0.0, 10.0),
            node(2, 500.0, 0.0, 10.0),
            node(3, 0.0, 700.0, 10.0),
        ];
        let t = build_hierarchical_topology(&nodes, &HierarchySpec::star(Point2::ORIGIN)).unwrap();
        for n in &nodes {
            assert_eq!(t.access_point_of(n.id), Some(0));
        }
        assert_eq!(
            t.route(2, 3).unwrap(),
            vec![Hop::Node(2), Hop::AccessPoint(0), Hop::Node(3)]
        );
    }

    fn two_aps(router: bool) -> HierarchySpec {
        HierarchySpec {
            access_points: vec![
                AccessPointSpec {
                    position: Point2::new(0.0, 0.0),
                    coverage: None,
                    router: router.then_some(0),
                },
                AccessPointSpec {
                    position: Point2::new(300.0, 0.0),
                    coverage: None,
                    router: router.then_some(0),
                },
            ],
            routers: if router { vec![RouterSpec::default()] } else { vec![] },
        }
    }

    #[test]
    fn equidistant_node_goes_to_first_access_point() {
        let t = build_hierarchical_topology(&[node(1, 150.0, 20.0, 10.0)], &two_aps(true)).unwrap();
        assert_eq!(t.access_point_of(1), Some(0));
    }

    #[test]
    fn nearest_access_point_split() {
        let nodes = [
            node(1, 10.0, 0.0, 10.0),
            node(2, 60.0, 0.0, 10.0),
            node(3, 240.0, 0.0, 10.0),
            node(4, 290.0, 0.0, 10.0),
        ];
        let t = build_hierarchical_topology(&nodes, &two_aps(true)).unwrap();
        assert_eq!(t.access_point_of(1), Some(0));
        assert_eq!(t.access_point_of(2), Some(0));
        assert_eq!(t.access_point_of(3), Some(1));
        assert_eq!(t.access_point_of(4), Some(1));
        assert_eq!(
            t.route(1, 4).unwrap(),
            vec![
                Hop::Node(1),
                Hop::AccessPoint(0),
                Hop::Router(0),
                Hop::AccessPoint(1),
                Hop::Node(4)
            ]
        );
        assert_eq!(t.hop_count(1, 2).unwrap(), 2);
    }

    #[test]
    fn forest_without_shared_root_has_no_route() {
        let nodes = [node(1, 10.0, 0.0, 10.0), node(2, 290.0, 0.0, 10.0)];
        let t = build_hierarchical_topology(&nodes, &two_aps(false)).unwrap();
        assert_eq!(t.route(1, 2), Err(TopologyError::NoRoute { src: 1, dst: 2 }));
    }

    #[test]
    fn uncovered_node_is_an_error() {
        let mut spec = HierarchySpec::star(Point2::ORIGIN);
        spec.access_points[0].coverage = Some(50.0);
        let err = build_hierarchical_topology(&[node(7, 100.0, 0.0, 10.0)], &spec).unwrap_err();
        assert_eq!(err, TopologyError::NoAccessPoint(7));
    }

    #[test]
    fn hierarchy_validation() {
        let empty = HierarchySpec::default();
        assert!(matches!(
            build_hierarchical_topology(&[], &empty),
            Err(TopologyError::InvalidHierarchy(v)) if v.field == "access_points"
        ));
        let cyclic = HierarchySpec {
            access_points: vec![AccessPointSpec {
                position: Point2::ORIGIN,
                coverage: None,
                router: Some(0),
            }],
            routers: vec![RouterSpec { parent: Some(1) }, RouterSpec { parent: Some(0) }],
        };
        assert_eq!(cyclic.validate().unwrap_err().field, "routers[0].parent");
    }
}
