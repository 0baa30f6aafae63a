//! Downward expansion from ECU entities.
//!
//! For an ECU with expansion radius `nes`, depth-k candidates (k = 1..nes)
//! are the entities reachable by k−1 inverse-subClassOf hops followed by one
//! inverse-(subClassOf ∪ instanceOf) hop. instanceOf is terminal only: the
//! expansion never continues below an instanceOf edge.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecu::EcuRecord;
use crate::store::{iri, Direction, EntityId, HierPredicate, HierStore};

/// One ECU's harvest: candidate → subtree root → minimal discovery depth.
/// The subtree root is the direct child of the ECU on the discovery path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcuHarvest {
    pub ecu: EntityId,
    pub nes: u32,
    pub candidates: BTreeMap<EntityId, BTreeMap<EntityId, u32>>,
}

impl EcuHarvest {
    pub fn candidate_set(&self) -> BTreeSet<EntityId> {
        self.candidates.keys().copied().collect()
    }

    pub fn min_depth(&self, candidate: EntityId) -> Option<u32> {
        self.candidates
            .get(&candidate)
            .and_then(|roots| roots.values().copied().min())
    }
}

/// Expands one ECU down to depth `nes` over the full store.
pub fn expand_down(ecu: EntityId, nes: u32, store: &HierStore) -> EcuHarvest {
    assert!(nes >= 1, "expansion requires nes >= 1");
    let mut candidates: BTreeMap<EntityId, BTreeMap<EntityId, u32>> = BTreeMap::new();
    let mut record = |entity: EntityId, root: EntityId, depth: u32| {
        let per_root = candidates.entry(entity).or_default();
        let slot = per_root.entry(root).or_insert(depth);
        if depth < *slot {
            *slot = depth;
        }
    };

    // depth-1 candidates: every direct child, either predicate
    for child in store.neighbors(ecu, Direction::Down, &HierPredicate::ALL) {
        record(child, child, 1);
    }
    // deeper candidates: interior subClassOf walk per direct subClassOf child
    for root in store.neighbors(ecu, Direction::Down, &[HierPredicate::SubClassOf]) {
        let mut interior: BTreeMap<EntityId, u32> = BTreeMap::from([(root, 1)]);
        let mut queue = VecDeque::from([(root, 1u32)]);
        while let Some((node, depth)) = queue.pop_front() {
            if depth >= nes {
                continue;
            }
            // terminal hop: either predicate, depth + 1
            for child in store.neighbors(node, Direction::Down, &HierPredicate::ALL) {
                record(child, root, depth + 1);
            }
            // interior continuation: subClassOf only, stays within nes - 1
            if depth + 1 <= nes.saturating_sub(1) {
                for child in store.neighbors(node, Direction::Down, &[HierPredicate::SubClassOf]) {
                    if !interior.contains_key(&child) {
                        interior.insert(child, depth + 1);
                        queue.push_back((child, depth + 1));
                    }
                }
            }
        }
    }
    EcuHarvest {
        ecu,
        nes,
        candidates,
    }
}

/// Expands every ECU in parallel.
pub fn expand_all(records: &[EcuRecord], store: &HierStore) -> Vec<EcuHarvest> {
    records
        .par_iter()
        .map(|r| expand_down(r.entity, r.nes, store))
        .collect()
}

/// SPARQL text equivalent to depth-k retrieval, for external verification.
/// Never executed by this toolkit.
pub fn emit_sparql(ecu_iri: &str, k: u32, store: &HierStore) -> String {
    assert!(k >= 1, "retrieval depth must be at least 1");
    let filter = store.filter();
    let subclass: Vec<String> = filter.subclass_predicates.iter().map(|p| abbreviate(p)).collect();
    let terminal: Vec<String> = filter
        .subclass_predicates
        .iter()
        .chain(&filter.instance_predicates)
        .map(|p| abbreviate(p))
        .collect();
    let interior_step = if subclass.len() == 1 {
        format!("^{}", subclass[0])
    } else {
        format!("^({})", subclass.join("|"))
    };
    let terminal_step = format!("^({})", terminal.join("|"));
    let mut path: Vec<String> = vec![interior_step; (k - 1) as usize];
    path.push(terminal_step);
    let mut query = String::new();
    query.push_str(&format!("PREFIX wdt: <{}>\n", iri::DIRECT_PROP_PREFIX));
    query.push_str(&format!("PREFIX wd: <{}>\n", iri::ENTITY_PREFIX));
    query.push_str("SELECT DISTINCT ?item WHERE {\n");
    query.push_str(&format!(
        "  {} {} ?item .\n",
        abbreviate(ecu_iri),
        path.join("/")
    ));
    query.push_str("}\n");
    query
}

fn abbreviate(full: &str) -> String {
    if let Some(local) = full.strip_prefix(iri::DIRECT_PROP_PREFIX) {
        format!("wdt:{local}")
    } else if let Some(local) = full.strip_prefix(iri::ENTITY_PREFIX) {
        format!("wd:{local}")
    } else {
        format!("<{full}>")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub ecu: EntityId,
    pub depth: u32,
    pub subtree_root: EntityId,
}

/// Globally deduplicated candidate with merged provenance, sorted by
/// (ecu, depth, subtree_root).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptCandidate {
    pub entity: EntityId,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestReport {
    /// ecu → depth → number of candidates whose minimal depth under that ECU
    /// is the given depth.
    pub per_ecu_depth_counts: BTreeMap<EntityId, BTreeMap<u32, usize>>,
    pub global_unique: usize,
    /// NES cutoff → unique candidates over ECUs with nes ≤ cutoff.
    pub cumulative_by_nes: BTreeMap<u32, usize>,
}

impl HarvestReport {
    pub fn tsv(&self, store: &HierStore) -> String {
        let mut out = String::from("ecu\tdepth\tcount\n");
        for (ecu, by_depth) in &self.per_ecu_depth_counts {
            for (depth, count) in by_depth {
                out.push_str(&format!("{}\t{depth}\t{count}\n", store.iri(*ecu)));
            }
        }
        out.push_str("\ncutoff\tcumulative_unique\n");
        for (cutoff, count) in &self.cumulative_by_nes {
            out.push_str(&format!("{cutoff}\t{count}\n"));
        }
        out.push_str(&format!("\nglobal_unique\t{}\n", self.global_unique));
        out
    }
}

/// Deduplicates across ECUs, merging provenance, and derives the report.
pub fn merge_harvests(
    harvests: &[EcuHarvest],
) -> (BTreeMap<EntityId, ConceptCandidate>, HarvestReport) {
    let mut merged: BTreeMap<EntityId, ConceptCandidate> = BTreeMap::new();
    let mut report = HarvestReport::default();
    for harvest in harvests {
        let mut depth_counts: BTreeMap<u32, usize> = BTreeMap::new();
        for (&entity, roots) in &harvest.candidates {
            let candidate = merged.entry(entity).or_insert_with(|| ConceptCandidate {
                entity,
                provenance: Vec::new(),
            });
            for (&root, &depth) in roots {
                candidate.provenance.push(Provenance {
                    ecu: harvest.ecu,
                    depth,
                    subtree_root: root,
                });
            }
            let min_depth = roots.values().copied().min().expect("nonempty roots");
            *depth_counts.entry(min_depth).or_default() += 1;
        }
        report.per_ecu_depth_counts.insert(harvest.ecu, depth_counts);
    }
    for candidate in merged.values_mut() {
        candidate
            .provenance
            .sort_by_key(|p| (p.ecu, p.depth, p.subtree_root));
        candidate.provenance.dedup();
    }
    report.global_unique = merged.len();

    let max_nes = harvests.iter().map(|h| h.nes).max().unwrap_or(0);
    for cutoff in 1..=max_nes {
        let mut unique: BTreeSet<EntityId> = BTreeSet::new();
        for harvest in harvests.iter().filter(|h| h.nes <= cutoff) {
            unique.extend(harvest.candidates.keys().copied());
        }
        report.cumulative_by_nes.insert(cutoff, unique.len());
    }
    (merged, report)
}
