//! Residual-graph partitioning, ECU identification and the number of
//! expansion steps (NES) for each ECU.
//!
//! Common paths are removed from the integrated graph, the remainder is
//! split into weakly connected components, and a CU entity becomes an ECU
//! when at least two search entities sit strictly below it inside its
//! component. NES is the maximum over the shortest downward distances to
//! those seeds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::store::EntityId;
use crate::upper::{CommonPathSet, CuSet, IntegratedGraph, TraceEdge};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionedGraph {
    #[serde(with = "edge_set_serde")]
    pub residual_edges: BTreeSet<TraceEdge>,
    pub component_of: BTreeMap<EntityId, u32>,
    pub components: Vec<Component>,
    pub seeds: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: u32,
    pub nodes: BTreeSet<EntityId>,
    pub seeds: BTreeSet<EntityId>,
}

mod edge_set_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(set: &BTreeSet<TraceEdge>, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&set.iter().collect::<Vec<_>>(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<TraceEdge>, D::Error> {
        let entries: Vec<TraceEdge> = serde::Deserialize::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}

/// Removes the common paths and partitions the residual graph into weakly
/// connected components. Nodes stranded by the removal stay as singleton
/// components.
pub fn remove_common_paths(graph: &IntegratedGraph, common: &CommonPathSet) -> PartitionedGraph {
    let residual_edges: BTreeSet<TraceEdge> = graph
        .edge_support
        .keys()
        .filter(|edge| !common.edges.contains(*edge))
        .copied()
        .collect();

    // undirected adjacency over residual edges
    let mut adjacency: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for node in graph.node_support.keys() {
        adjacency.entry(*node).or_default();
    }
    for (child, _, parent) in &residual_edges {
        adjacency.entry(*child).or_default().push(*parent);
        adjacency.entry(*parent).or_default().push(*child);
    }

    let mut component_of: BTreeMap<EntityId, u32> = BTreeMap::new();
    let mut components: Vec<Component> = Vec::new();
    for &start in adjacency.keys() {
        if component_of.contains_key(&start) {
            continue;
        }
        let id = components.len() as u32;
        let mut nodes = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        component_of.insert(start, id);
        while let Some(node) = queue.pop_front() {
            nodes.insert(node);
            for next in &adjacency[&node] {
                if !component_of.contains_key(next) {
                    component_of.insert(*next, id);
                    queue.push_back(*next);
                }
            }
        }
        let seeds = nodes.intersection(&graph.seeds).copied().collect();
        components.push(Component { id, nodes, seeds });
    }
    PartitionedGraph {
        residual_edges,
        component_of,
        components,
        seeds: graph.seeds.clone(),
    }
}

/// An expansion root: a CU entity with ≥2 search entities strictly below it
/// in its residual component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcuRecord {
    pub entity: EntityId,
    pub component: u32,
    /// seed → shortest downward hop count over residual edges (all ≥ 1).
    pub seed_distances: BTreeMap<EntityId, u32>,
    pub nes: u32,
}

impl EcuRecord {
    pub fn reachable_seed_count(&self) -> usize {
        self.seed_distances.len()
    }
}

/// Maximum of a nonempty shortest-distance set.
pub fn compute_nes(distances: &BTreeMap<EntityId, u32>) -> u32 {
    assert!(
        !distances.is_empty(),
        "NES is undefined for an empty distance set"
    );
    distances.values().copied().max().unwrap()
}

/// Finds every ECU with its distances and NES. Distances are measured over
/// the residual trace edges (downward = against edge direction), not
/// re-queried from the store.
pub fn find_ecu(part: &PartitionedGraph, cu: &CuSet) -> Vec<EcuRecord> {
    // reverse adjacency: parent → children
    let mut down: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for (child, _, parent) in &part.residual_edges {
        down.entry(*parent).or_default().push(*child);
    }
    let mut records = Vec::new();
    for &entity in &cu.entities {
        let component = match part.component_of.get(&entity) {
            Some(&c) => c,
            None => continue,
        };
        // BFS downward from the candidate ECU
        let mut dist: BTreeMap<EntityId, u32> = BTreeMap::from([(entity, 0)]);
        let mut queue = VecDeque::from([(entity, 0u32)]);
        let mut seed_distances: BTreeMap<EntityId, u32> = BTreeMap::new();
        while let Some((node, d)) = queue.pop_front() {
            if d > 0 && part.seeds.contains(&node) {
                seed_distances.insert(node, d);
            }
            if let Some(children) = down.get(&node) {
                for child in children {
                    if !dist.contains_key(child) {
                        dist.insert(*child, d + 1);
                        queue.push_back((*child, d + 1));
                    }
                }
            }
        }
        if seed_distances.len() >= 2 {
            let nes = compute_nes(&seed_distances);
            records.push(EcuRecord {
                entity,
                component,
                seed_distances,
                nes,
            });
        }
    }
    records
}
