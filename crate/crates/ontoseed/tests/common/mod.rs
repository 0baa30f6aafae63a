//! Shared fixtures, random-graph generators, and independent brute-force
//! oracles used by the integration suites.
//!
//! The oracles deliberately avoid the production algorithms: reachability is
//! computed by fixpoint relaxation instead of BFS, components by union-find,
//! and harvesting by layered exact-length path enumeration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ontoseed::store::{ingest, store_from_edges, IngestFilter};
use ontoseed::{EntityId, HierPredicate, HierStore, LabelKind};

/// A small graph over integer nodes. Edges run child → parent.
#[derive(Debug, Clone)]
pub struct TestGraph {
    pub n: usize,
    pub sub: BTreeSet<(usize, usize)>,
    pub inst: BTreeSet<(usize, usize)>,
    pub seeds: BTreeSet<usize>,
}

pub fn node_iri(i: usize) -> String {
    format!("n:{i:04}")
}

impl TestGraph {
    /// Random DAG: edges only point from a higher index to a lower one.
    pub fn random_dag(seed: u64, max_nodes: usize, max_seeds: usize) -> TestGraph {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(2..=max_nodes);
        let mut sub = BTreeSet::new();
        let mut inst = BTreeSet::new();
        for child in 1..n {
            let degree = rng.gen_range(0..=3.min(child));
            for _ in 0..degree {
                let parent = rng.gen_range(0..child);
                if rng.gen_bool(0.75) {
                    sub.insert((child, parent));
                } else {
                    inst.insert((child, parent));
                }
            }
        }
        let seed_count = rng.gen_range(1..=max_seeds.min(n));
        let mut seeds = BTreeSet::new();
        while seeds.len() < seed_count {
            seeds.insert(rng.gen_range(0..n));
        }
        TestGraph { n, sub, inst, seeds }
    }

    /// Random graph, cycles allowed.
    pub fn random_graph(seed: u64, max_nodes: usize, max_seeds: usize) -> TestGraph {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(2..=max_nodes);
        let edge_count = rng.gen_range(0..=(n * 2));
        let mut sub = BTreeSet::new();
        let mut inst = BTreeSet::new();
        for _ in 0..edge_count {
            let child = rng.gen_range(0..n);
            let parent = rng.gen_range(0..n);
            if child == parent {
                continue;
            }
            if rng.gen_bool(0.8) {
                sub.insert((child, parent));
            } else {
                inst.insert((child, parent));
            }
        }
        let seed_count = rng.gen_range(1..=max_seeds.min(n));
        let mut seeds = BTreeSet::new();
        while seeds.len() < seed_count {
            seeds.insert(rng.gen_range(0..n));
        }
        TestGraph { n, sub, inst, seeds }
    }

    /// Ingests the graph; every node also carries a label so that isolated
    /// nodes are interned too.
    pub fn store(&self) -> HierStore {
        let filter = IngestFilter::default();
        let mut text = String::new();
        let subclass = filter.subclass_predicates.iter().next().unwrap().clone();
        let instance = filter.instance_predicates.iter().next().unwrap().clone();
        let label = filter
            .representative_label_predicates
            .iter()
            .next()
            .unwrap()
            .clone();
        for &(c, p) in &self.sub {
            text.push_str(&format!("<{}> <{subclass}> <{}> .\n", node_iri(c), node_iri(p)));
        }
        for &(c, p) in &self.inst {
            text.push_str(&format!("<{}> <{instance}> <{}> .\n", node_iri(c), node_iri(p)));
        }
        for i in 0..self.n {
            text.push_str(&format!("<{}> <{label}> \"term {i}\"@ja .\n", node_iri(i)));
        }
        ingest(text.as_bytes(), &filter).expect("test graph ingest")
    }

    pub fn id(&self, store: &HierStore, node: usize) -> EntityId {
        store.resolve(&node_iri(node)).expect("node interned")
    }

    pub fn node_of(&self, store: &HierStore, id: EntityId) -> usize {
        store.iri(id)[2..].parse().expect("node iri")
    }

    pub fn seed_ids(&self, store: &HierStore) -> BTreeSet<EntityId> {
        self.seeds.iter().map(|&s| self.id(store, s)).collect()
    }
}

/// Index-space mirror of a trace edge.
pub type OracleEdge = (usize, HierPredicate, usize);

/// Index-space mirror of the full upper-level analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleUpper {
    pub node_support: BTreeMap<usize, BTreeSet<usize>>,
    pub edge_support: BTreeMap<OracleEdge, BTreeSet<usize>>,
    pub cu: BTreeSet<usize>,
    pub common: BTreeSet<OracleEdge>,
    /// node → canonical component representative (smallest member).
    pub component_rep: BTreeMap<usize, usize>,
    /// ecu → (seed → distance, nes).
    pub ecus: BTreeMap<usize, (BTreeMap<usize, u32>, u32)>,
}

/// Nodes visited by the upward trace from `seed` under the two-phase rule,
/// by fixpoint relaxation rather than BFS.
fn oracle_visited(g: &TestGraph, seed: usize) -> BTreeSet<usize> {
    let mut visited = BTreeSet::from([seed]);
    for &(c, p) in g.sub.iter().chain(&g.inst) {
        if c == seed {
            visited.insert(p);
        }
    }
    loop {
        let mut grew = false;
        for &(c, p) in &g.sub {
            if visited.contains(&c) && c != seed && visited.insert(p) {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    visited
}

/// Edges contributed by the trace from `seed`: both predicates at hop one,
/// subClassOf from every other visited node.
fn oracle_trace_edges(g: &TestGraph, seed: usize) -> BTreeSet<OracleEdge> {
    let visited = oracle_visited(g, seed);
    let mut edges = BTreeSet::new();
    for &(c, p) in &g.sub {
        if c == seed || visited.contains(&c) && c != seed {
            edges.insert((c, HierPredicate::SubClassOf, p));
        }
    }
    for &(c, p) in &g.inst {
        if c == seed {
            edges.insert((c, HierPredicate::InstanceOf, p));
        }
    }
    edges
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Shortest downward distances from `from` over the reversed residual edges,
/// by Bellman-Ford-style relaxation.
fn oracle_down_distances(
    residual: &BTreeSet<OracleEdge>,
    from: usize,
    n: usize,
) -> Vec<Option<u32>> {
    let mut dist: Vec<Option<u32>> = vec![None; n];
    dist[from] = Some(0);
    for _ in 0..n {
        let mut changed = false;
        for &(child, _, parent) in residual {
            if let Some(dp) = dist[parent] {
                let candidate = dp + 1;
                if dist[child].map_or(true, |d| candidate < d) {
                    dist[child] = Some(candidate);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Full upper-level analysis in index space.
pub fn oracle_upper(g: &TestGraph, cu_threshold: usize) -> OracleUpper {
    let mut node_support: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut edge_support: BTreeMap<OracleEdge, BTreeSet<usize>> = BTreeMap::new();
    for &seed in &g.seeds {
        for node in oracle_visited(g, seed) {
            node_support.entry(node).or_default().insert(seed);
        }
        for edge in oracle_trace_edges(g, seed) {
            edge_support.entry(edge).or_default().insert(seed);
        }
    }
    let cu: BTreeSet<usize> = node_support
        .iter()
        .filter(|(_, s)| s.len() >= cu_threshold)
        .map(|(&n, _)| n)
        .collect();
    let common: BTreeSet<OracleEdge> = edge_support
        .iter()
        .filter(|((c, _, p), support)| {
            cu.contains(c) && cu.contains(p) && support.len() >= 2
        })
        .map(|(&e, _)| e)
        .collect();
    let residual: BTreeSet<OracleEdge> = edge_support
        .keys()
        .filter(|e| !common.contains(*e))
        .copied()
        .collect();

    let mut uf = UnionFind::new(g.n);
    for &(c, _, p) in &residual {
        uf.union(c, p);
    }
    // canonical representative = smallest node in the class, graph nodes only
    let graph_nodes: BTreeSet<usize> = node_support.keys().copied().collect();
    let mut rep_of_class: BTreeMap<usize, usize> = BTreeMap::new();
    for &node in &graph_nodes {
        let class = uf.find(node);
        let rep = rep_of_class.entry(class).or_insert(node);
        if node < *rep {
            *rep = node;
        }
    }
    let component_rep: BTreeMap<usize, usize> = graph_nodes
        .iter()
        .map(|&node| {
            let class = uf.find(node);
            (node, rep_of_class[&class])
        })
        .collect();

    let mut ecus: BTreeMap<usize, (BTreeMap<usize, u32>, u32)> = BTreeMap::new();
    for &entity in &cu {
        let dist = oracle_down_distances(&residual, entity, g.n);
        let seed_distances: BTreeMap<usize, u32> = g
            .seeds
            .iter()
            .filter_map(|&s| match dist[s] {
                Some(d) if d >= 1 => Some((s, d)),
                _ => None,
            })
            .collect();
        if seed_distances.len() >= 2 {
            let nes = *seed_distances.values().max().unwrap();
            ecus.insert(entity, (seed_distances, nes));
        }
    }

    OracleUpper {
        node_support,
        edge_support,
        cu,
        common,
        component_rep,
        ecus,
    }
}

/// Layered exact-length harvest enumeration: depth-k candidates are the
/// endpoints of k−1 inverse-subClassOf hops followed by one inverse hop of
/// either predicate. Returns candidate → subtree root → minimal depth.
pub fn oracle_harvest(
    g: &TestGraph,
    ecu: usize,
    nes: u32,
) -> BTreeMap<usize, BTreeMap<usize, u32>> {
    let mut down_sub: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut down_any: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(c, p) in &g.sub {
        down_sub.entry(p).or_default().insert(c);
        down_any.entry(p).or_default().insert(c);
    }
    for &(c, p) in &g.inst {
        down_any.entry(p).or_default().insert(c);
    }
    let empty = BTreeSet::new();

    let mut candidates: BTreeMap<usize, BTreeMap<usize, u32>> = BTreeMap::new();
    let mut record = |cand: usize, root: usize, depth: u32| {
        let slot = candidates.entry(cand).or_default().entry(root).or_insert(depth);
        if depth < *slot {
            *slot = depth;
        }
    };

    // depth 1: every direct child, rooted at itself
    for &child in down_any.get(&ecu).unwrap_or(&empty) {
        record(child, child, 1);
    }
    // deeper layers per subClassOf root
    for &root in down_sub.get(&ecu).unwrap_or(&empty) {
        let mut layer: BTreeSet<usize> = BTreeSet::from([root]);
        for depth in 1..nes {
            for &node in &layer {
                for &cand in down_any.get(&node).unwrap_or(&empty) {
                    record(cand, root, depth + 1);
                }
            }
            layer = layer
                .iter()
                .flat_map(|&node| down_sub.get(&node).unwrap_or(&empty).iter().copied())
                .collect();
        }
    }
    candidates
}

/// G1: three seeds with a shared upper structure (see the upper-module docs).
pub fn g1_store() -> (HierStore, BTreeSet<EntityId>) {
    use HierPredicate::{InstanceOf, SubClassOf};
    let store = store_from_edges(
        &[
            ("e:S1", SubClassOf, "e:A"),
            ("e:S2", SubClassOf, "e:A"),
            ("e:A", SubClassOf, "e:B"),
            ("e:S3", InstanceOf, "e:C"),
            ("e:C", SubClassOf, "e:B"),
            ("e:B", SubClassOf, "e:R"),
        ],
        &[],
        &IngestFilter::default(),
    );
    let seeds = ["e:S1", "e:S2", "e:S3"]
        .iter()
        .map(|n| store.resolve(n).unwrap())
        .collect();
    (store, seeds)
}

pub fn label_kind_rep() -> LabelKind {
    LabelKind::Representative
}
