use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::topology::{Hop, Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("traffic matrix must be square over {n} ids")]
    NotSquare { n: usize },
    #[error("duplicate id {0} in traffic matrix")]
    DuplicateId(u32),
    #[error("negative or non-finite volume {value} from {src} to {dst}")]
    BadVolume { src: u32, dst: u32, value: f64 },
    #[error("self-traffic at {0} must be zero")]
    NonZeroDiagonal(u32),
    #[error("id {0} is not in the traffic matrix")]
    UnknownId(u32),
    #[error("id {0} appears in both subnets")]
    OverlappingSubnets(u32),
}

/// Directed data volumes `m[i][j]` sent from element `i` to element `j`,
/// in abstract units. Diagonal entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    ids: Vec<u32>,
    index: BTreeMap<u32, usize>,
    m: Vec<f64>,
}

impl TrafficMatrix {
    pub fn zeros(ids: impl IntoIterator<Item = u32>) -> Result<Self, TrafficError> {
        let ids: Vec<u32> = ids.into_iter().collect();
        let mut index = BTreeMap::new();
        for (k, &id) in ids.iter().enumerate() {
            if index.insert(id, k).is_some() {
                return Err(TrafficError::DuplicateId(id));
            }
        }
        let n = ids.len();
        Ok(Self {
            ids,
            index,
            m: vec![0.0; n * n],
        })
    }

    /// Builds from row-major rows ordered like `ids`.
    pub fn from_rows(ids: Vec<u32>, rows: Vec<Vec<f64>>) -> Result<Self, TrafficError> {
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(TrafficError::NotSquare { n });
        }
        let mut tm = Self::zeros(ids)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                let (src, dst) = (tm.ids[i], tm.ids[j]);
                if !(value.is_finite() && value >= 0.0) {
                    return Err(TrafficError::BadVolume { src, dst, value });
                }
                if i == j && value != 0.0 {
                    return Err(TrafficError::NonZeroDiagonal(src));
                }
                tm.m[i * n + j] = value;
            }
        }
        Ok(tm)
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn slot(&self, id: u32) -> Result<usize, TrafficError> {
        self.index.get(&id).copied().ok_or(TrafficError::UnknownId(id))
    }

    pub fn get(&self, src: u32, dst: u32) -> Result<f64, TrafficError> {
        Ok(self.m[self.slot(src)? * self.len() + self.slot(dst)?])
    }

    /// Adds `volume` to the `src → dst` entry.
    pub fn add(&mut self, src: u32, dst: u32, volume: f64) -> Result<(), TrafficError> {
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(TrafficError::BadVolume {
                src,
                dst,
                value: volume,
            });
        }
        if src == dst {
            return Err(TrafficError::NonZeroDiagonal(src));
        }
        let k = self.slot(src)? * self.len() + self.slot(dst)?;
        self.m[k] += volume;
        Ok(())
    }

    /// Nonzero entries as `(src, dst, volume)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let n = self.len();
        self.m
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(move |(k, &v)| (self.ids[k / n], self.ids[k % n], v))
    }
}

/// Load on a single central node that relays every exchange: the sum of
/// all entries.
pub fn central_node_traffic(tm: &TrafficMatrix) -> f64 {
    tm.m.iter().sum()
}

/// Volume crossing a router from `subnet1` into `subnet2` (one direction).
pub fn router_traffic(
    tm: &TrafficMatrix,
    subnet1: &BTreeSet<u32>,
    subnet2: &BTreeSet<u32>,
) -> Result<f64, TrafficError> {
    if let Some(&id) = subnet1.intersection(subnet2).next() {
        return Err(TrafficError::OverlappingSubnets(id));
    }
    let rows: Vec<usize> = subnet1.iter().map(|&id| tm.slot(id)).collect::<Result<_, _>>()?;
    let cols: Vec<usize> = subnet2.iter().map(|&id| tm.slot(id)).collect::<Result<_, _>>()?;
    let n = tm.len();
    Ok(rows
        .iter()
        .map(|&i| cols.iter().map(|&j| tm.m[i * n + j]).sum::<f64>())
        .sum())
}

/// Volume each vertex relays for others: every nonzero `m[i][j]` is charged
/// to the intermediate hops of `route(i, j)`. All vertices appear in the
/// result, endpoints-only vertices with zero.
pub fn accumulate_traffic(topology: &Topology, tm: &TrafficMatrix) -> Result<BTreeMap<Hop, f64>, TopologyError> {
    let mut relayed: BTreeMap<Hop, f64> = topology.vertices().into_iter().map(|h| (h, 0.0)).collect();
    for (src, dst, volume) in tm.entries() {
        let path = topology.route(src, dst)?;
        for hop in &path[1..path.len() - 1] {
            *relayed.entry(*hop).or_insert(0.0) += volume;
        }
    }
    Ok(relayed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_field::Point2;
    use crate::sensor_mesh::{build_direct_topology, build_hierarchical_topology, HierarchySpec, SensorNode};

    fn uniform(n: u32, m: f64) -> TrafficMatrix {
        let ids: Vec<u32> = (1..=n).collect();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { m }).collect())
            .collect();
        TrafficMatrix::from_rows(ids, rows).unwrap()
    }

    #[test]
    fn central_sums() {
        assert_eq!(central_node_traffic(&TrafficMatrix::zeros([1, 2, 3]).unwrap()), 0.0);
        let tm = TrafficMatrix::from_rows(vec![1, 2], vec![vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(central_node_traffic(&tm), 10.0);
        assert_eq!(central_node_traffic(&uniform(3, 2.0)), 12.0);
    }

    #[test]
    fn router_sums() {
        let tm = uniform(4, 3.0);
        let none = BTreeSet::new();
        assert_eq!(router_traffic(&tm, &none, &BTreeSet::from([1, 2])).unwrap(), 0.0);
        assert_eq!(
            router_traffic(&tm, &BTreeSet::from([1, 2]), &BTreeSet::from([3, 4])).unwrap(),
            12.0
        );
        let mut one = TrafficMatrix::zeros([1, 2]).unwrap();
        one.add(1, 2, 7.0).unwrap();
        assert_eq!(
            router_traffic(&one, &BTreeSet::from([1]), &BTreeSet::from([2])).unwrap(),
            7.0
        );
        assert_eq!(
            router_traffic(&one, &BTreeSet::from([2]), &BTreeSet::from([1])).unwrap(),
            0.0
        );
    }

    #[test]
    fn router_rejects_overlap_and_unknown() {
        let tm = uniform(3, 1.0);
        assert_eq!(
            router_traffic(&tm, &BTreeSet::from([1, 2]), &BTreeSet::from([2, 3])),
            Err(TrafficError::OverlappingSubnets(2))
        );
        assert_eq!(
            router_traffic(&tm, &BTreeSet::from([9]), &BTreeSet::from([1])),
            Err(TrafficError::UnknownId(9))
        );
    }

    #[test]
    fn matrix_validation() {
        assert_eq!(
            TrafficMatrix::from_rows(vec![1, 2], vec![vec![0.0, 1.0]]),
            Err(TrafficError::NotSquare { n: 2 })
        );
        assert_eq!(
            TrafficMatrix::from_rows(vec![1, 2], vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(TrafficError::NonZeroDiagonal(1))
        );
        assert!(matches!(
            TrafficMatrix::from_rows(vec![1, 2], vec![vec![0.0, -1.0], vec![0.0, 0.0]]),
            Err(TrafficError::BadVolume { .. })
        ));
    }

    fn line(n: u32, spacing: f64) -> Vec<SensorNode> {
        (1..=n)
            .map(|i| SensorNode::new(i, Point2::new(f64::from(i) * spacing, 0.0), 100.0, 10.0))
            .collect()
    }

    #[test]
    fn one_hop_mesh_relays_nothing() {
        let topo = build_direct_topology(&line(3, 10.0)).unwrap();
        let relayed = accumulate_traffic(&topo, &uniform(3, 4.0)).unwrap();
        assert!(relayed.values().all(|&v| v == 0.0));
    }

    #[test]
    fn star_hub_relays_everything() {
        let nodes = line(5, 10.0);
        let topo = build_hierarchical_topology(&nodes, &HierarchySpec::star(Point2::ORIGIN)).unwrap();
        let tm = uniform(5, 2.5);
        let relayed = accumulate_traffic(&topo, &tm).unwrap();
        assert_eq!(relayed[&Hop::AccessPoint(0)], central_node_traffic(&tm));
        assert_eq!(relayed[&Hop::Node(1)], 0.0);
    }

    #[test]
    fn path_middle_relays() {
        let topo = build_direct_topology(&line(3, 100.0)).unwrap();
        let mut tm = TrafficMatrix::zeros([1, 2, 3]).unwrap();
        tm.add(1, 3, 4.0).unwrap();
        let relayed = accumulate_traffic(&topo, &tm).unwrap();
        assert_eq!(relayed[&Hop::Node(2)], 4.0);
        assert_eq!(relayed[&Hop::Node(1)], 0.0);
        assert_eq!(relayed[&Hop::Node(3)], 0.0);
    }

    #[test]
    fn disconnected_pair_propagates_no_route() {
        let topo = build_direct_topology(&line(3, 150.0)).unwrap();
        let mut tm = TrafficMatrix::zeros([1, 2, 3]).unwrap();
        tm.add(1, 3, 1.0).unwrap();
        assert_eq!(
            accumulate_traffic(&topo, &tm),
            Err(TopologyError::NoRoute { src: 1, dst: 3 })
        );
    }
}
