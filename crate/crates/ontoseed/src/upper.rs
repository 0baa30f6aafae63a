//! Upward tracing from search entities, graph integration, and the
//! identification of common upper-level (CU) entities and common paths.
//!
//! The edge rule: hop 1 from a seed may follow subClassOf or instanceOf,
//! every later hop follows subClassOf only.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::store::{Direction, EntityId, HierPredicate, HierStore};

pub const DEFAULT_MAX_DEPTH: u32 = 30;
pub const DEFAULT_CU_THRESHOLD: usize = 2;

/// Directed child→parent edge with its predicate.
pub type TraceEdge = (EntityId, HierPredicate, EntityId);

/// Upward closure from one seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpwardTrace {
    pub seed: EntityId,
    /// node → shortest hop count from the seed.
    pub depths: BTreeMap<EntityId, u32>,
    pub edges: BTreeSet<TraceEdge>,
    /// frontier nodes cut off by the depth cap.
    pub truncated: usize,
}

/// Breadth-first upward closure under the two-phase edge rule, cycle-safe.
/// Nodes deeper than `max_depth` are omitted and counted in `truncated`.
pub fn trace_upward(seed: EntityId, store: &HierStore, max_depth: u32) -> UpwardTrace {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    let mut depths: BTreeMap<EntityId, u32> = BTreeMap::new();
    let mut edges: BTreeSet<TraceEdge> = BTreeSet::new();
    let mut truncated: BTreeSet<EntityId> = BTreeSet::new();
    let mut queue: VecDeque<(EntityId, u32)> = VecDeque::new();
    depths.insert(seed, 0);
    queue.push_back((seed, 0));
    while let Some((node, depth)) = queue.pop_front() {
        let predicates: &[HierPredicate] = if depth == 0 {
            &HierPredicate::ALL
        } else {
            &[HierPredicate::SubClassOf]
        };
        for pred in predicates {
            for parent in store.neighbors(node, Direction::Up, &[*pred]) {
                if depth + 1 > max_depth {
                    if !depths.contains_key(&parent) {
                        truncated.insert(parent);
                    }
                    continue;
                }
                edges.insert((node, *pred, parent));
                if !depths.contains_key(&parent) {
                    depths.insert(parent, depth + 1);
                    queue.push_back((parent, depth + 1));
                }
            }
        }
    }
    UpwardTrace {
        seed,
        depths,
        edges,
        truncated: truncated.len(),
    }
}

/// Union of all traces with per-node and per-edge supporting-seed sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratedGraph {
    pub node_support: BTreeMap<EntityId, BTreeSet<EntityId>>,
    #[serde(with = "edge_map_serde")]
    pub edge_support: BTreeMap<TraceEdge, BTreeSet<EntityId>>,
    pub seeds: BTreeSet<EntityId>,
}

/// Tuple-keyed maps are not valid JSON objects; persist them as entry lists.
mod edge_map_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<TraceEdge, BTreeSet<EntityId>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&map.iter().collect::<Vec<_>>(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<TraceEdge, BTreeSet<EntityId>>, D::Error> {
        let entries: Vec<(TraceEdge, BTreeSet<EntityId>)> = serde::Deserialize::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}

impl IntegratedGraph {
    pub fn support_count(&self, node: EntityId) -> usize {
        self.node_support.get(&node).map(BTreeSet::len).unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.node_support.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_support.len()
    }
}

/// Merges traces. A node's support is the set of seeds whose trace visits
/// it (a seed supports itself); an edge's support is the set of seeds whose
/// trace contains the edge. Deterministic under trace permutation.
pub fn integrate(traces: &[UpwardTrace]) -> IntegratedGraph {
    let mut graph = IntegratedGraph::default();
    for trace in traces {
        graph.seeds.insert(trace.seed);
        for node in trace.depths.keys() {
            graph
                .node_support
                .entry(*node)
                .or_default()
                .insert(trace.seed);
        }
        for edge in &trace.edges {
            graph
                .edge_support
                .entry(*edge)
                .or_default()
                .insert(trace.seed);
        }
    }
    graph
}

/// Traces all seeds (in parallel) and integrates the result. The second
/// value is the total number of depth-cap truncations across traces.
pub fn trace_and_integrate(
    seeds: &BTreeSet<EntityId>,
    store: &HierStore,
    max_depth: u32,
) -> (IntegratedGraph, usize) {
    let seed_list: Vec<EntityId> = seeds.iter().copied().collect();
    let traces: Vec<UpwardTrace> = seed_list
        .par_iter()
        .map(|&seed| trace_upward(seed, store, max_depth))
        .collect();
    let truncated = traces.iter().map(|t| t.truncated).sum();
    (integrate(&traces), truncated)
}

/// Nodes supported by at least `threshold` distinct seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuSet {
    pub entities: BTreeSet<EntityId>,
    pub threshold: usize,
}

pub fn find_cu(graph: &IntegratedGraph, threshold: usize) -> CuSet {
    let entities = graph
        .node_support
        .iter()
        .filter(|(_, support)| support.len() >= threshold)
        .map(|(node, _)| *node)
        .collect();
    CuSet {
        entities,
        threshold,
    }
}

/// Edges between CU entities that carry duplicated paths (edge support ≥ 2).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonPathSet {
    pub edges: BTreeSet<TraceEdge>,
}

pub fn find_common_paths(graph: &IntegratedGraph, cu: &CuSet) -> CommonPathSet {
    let edges = graph
        .edge_support
        .iter()
        .filter(|((child, _, parent), support)| {
            cu.entities.contains(child) && cu.entities.contains(parent) && support.len() >= 2
        })
        .map(|(edge, _)| *edge)
        .collect();
    CommonPathSet { edges }
}
