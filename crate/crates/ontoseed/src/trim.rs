//! Pruning harvested subtrees by search-entity occurrence.
//!
//! Radius-1 harvests are kept whole. For deeper harvests, only branches that
//! contain a search entity survive: the subtree rooted two steps above each
//! seed (clamped to the ECU's direct child when the seed is shallow) plus
//! the nodes on the path from the ECU down to that ancestor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::harvest::EcuHarvest;
use crate::store::{Direction, EntityId, HierPredicate, HierStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KeepRule {
    /// nes = 1: everything kept.
    RadiusOne,
    /// whole subtree kept because it contains a seed at shallow depth.
    SubtreeWithSeed,
    /// inside the subtree rooted two steps above a seed.
    TwoAboveSeed,
    /// on the path from the ECU down to a kept ancestor.
    PathToAncestor,
}

impl KeepRule {
    pub fn as_str(self) -> &'static str {
        match self {
            KeepRule::RadiusOne => "radius-one",
            KeepRule::SubtreeWithSeed => "subtree-with-seed",
            KeepRule::TwoAboveSeed => "two-above-seed",
            KeepRule::PathToAncestor => "path-to-ancestor",
        }
    }
}

/// Kept candidates of one ECU's harvest, each with the strongest rule that
/// kept it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimOutcome {
    pub ecu: EntityId,
    pub kept: BTreeMap<EntityId, KeepRule>,
    pub dropped: BTreeSet<EntityId>,
}

/// Applies the pruning rule to one ECU's harvest. Seed membership is tested
/// by entity id against the flat search-entity set.
pub fn trim(harvest: &EcuHarvest, seeds: &BTreeSet<EntityId>, store: &HierStore) -> TrimOutcome {
    let all: BTreeSet<EntityId> = harvest.candidate_set();
    let mut kept: BTreeMap<EntityId, KeepRule> = BTreeMap::new();
    let mut keep = |entity: EntityId, rule: KeepRule| {
        let slot = kept.entry(entity).or_insert(rule);
        if rule < *slot {
            *slot = rule;
        }
    };

    if harvest.nes == 1 {
        for &entity in &all {
            keep(entity, KeepRule::RadiusOne);
        }
    } else {
        // interior subClassOf reachability per subtree root, as in the harvest
        let mut interior_cache: BTreeMap<EntityId, BTreeMap<EntityId, u32>> = BTreeMap::new();
        let mut interior_of = |root: EntityId| -> BTreeMap<EntityId, u32> {
            interior_cache
                .entry(root)
                .or_insert_with(|| interior_map(root, harvest.nes, store))
                .clone()
        };

        for (&seed, roots) in harvest.candidates.iter().filter(|(c, _)| seeds.contains(c)) {
            for (&root, &depth) in roots {
                let ancestor_depth = depth.saturating_sub(2).max(1);
                if ancestor_depth == 1 {
                    // shallow seed: the whole subtree under this root survives
                    for (&candidate, cand_roots) in &harvest.candidates {
                        if cand_roots.contains_key(&root) {
                            keep(candidate, KeepRule::SubtreeWithSeed);
                        }
                    }
                } else {
                    let interior = interior_of(root);
                    for ancestor in two_above(seed, ancestor_depth, &interior, store) {
                        for entity in subtree_below(ancestor, ancestor_depth, harvest.nes, store) {
                            if all.contains(&entity) {
                                keep(entity, KeepRule::TwoAboveSeed);
                            }
                        }
                        for entity in path_nodes(root, ancestor, &interior, store) {
                            if all.contains(&entity) {
                                keep(entity, KeepRule::PathToAncestor);
                            }
                        }
                    }
                }
            }
        }
    }

    let dropped = all
        .iter()
        .copied()
        .filter(|c| !kept.contains_key(c))
        .collect();
    TrimOutcome {
        ecu: harvest.ecu,
        kept,
        dropped,
    }
}

/// subClassOf-only downward reachability from a direct child of the ECU,
/// limited to interior positions (depth ≤ nes − 1). node → minimal depth.
fn interior_map(root: EntityId, nes: u32, store: &HierStore) -> BTreeMap<EntityId, u32> {
    let mut interior: BTreeMap<EntityId, u32> = BTreeMap::from([(root, 1)]);
    let mut queue = VecDeque::from([(root, 1u32)]);
    while let Some((node, depth)) = queue.pop_front() {
        if depth + 1 > nes.saturating_sub(1) {
            continue;
        }
        for child in store.neighbors(node, Direction::Down, &[HierPredicate::SubClassOf]) {
            if !interior.contains_key(&child) {
                interior.insert(child, depth + 1);
                queue.push_back((child, depth + 1));
            }
        }
    }
    interior
}

/// Ancestors exactly two hops above `seed` that sit at `ancestor_depth` in
/// the subtree: one inverse terminal hop then one inverse subClassOf hop.
fn two_above(
    seed: EntityId,
    ancestor_depth: u32,
    interior: &BTreeMap<EntityId, u32>,
    store: &HierStore,
) -> BTreeSet<EntityId> {
    let mut ancestors = BTreeSet::new();
    for mid in store.neighbors(seed, Direction::Up, &HierPredicate::ALL) {
        for upper in store.neighbors(mid, Direction::Up, &[HierPredicate::SubClassOf]) {
            if interior.get(&upper) == Some(&ancestor_depth) {
                ancestors.insert(upper);
            }
        }
    }
    ancestors
}

/// Everything harvested at or below `ancestor`: interior subClassOf walk
/// with the terminal-predicate rule, within the remaining depth budget.
fn subtree_below(
    ancestor: EntityId,
    ancestor_depth: u32,
    nes: u32,
    store: &HierStore,
) -> BTreeSet<EntityId> {
    let mut out = BTreeSet::from([ancestor]);
    let mut interior: BTreeSet<EntityId> = BTreeSet::from([ancestor]);
    let mut queue = VecDeque::from([(ancestor, ancestor_depth)]);
    while let Some((node, depth)) = queue.pop_front() {
        if depth >= nes {
            continue;
        }
        for child in store.neighbors(node, Direction::Down, &HierPredicate::ALL) {
            out.insert(child);
        }
        if depth + 1 <= nes.saturating_sub(1) {
            for child in store.neighbors(node, Direction::Down, &[HierPredicate::SubClassOf]) {
                if interior.insert(child) {
                    queue.push_back((child, depth + 1));
                }
            }
        }
    }
    out
}

/// Interior nodes on subClassOf paths from the subtree root down to the
/// ancestor (root and ancestor included).
fn path_nodes(
    root: EntityId,
    ancestor: EntityId,
    interior: &BTreeMap<EntityId, u32>,
    store: &HierStore,
) -> BTreeSet<EntityId> {
    // reverse walk from the ancestor through interior nodes only
    let mut on_path = BTreeSet::from([ancestor]);
    let mut queue = VecDeque::from([ancestor]);
    while let Some(node) = queue.pop_front() {
        if node == root {
            continue;
        }
        for parent in store.neighbors(node, Direction::Up, &[HierPredicate::SubClassOf]) {
            if interior.contains_key(&parent) && on_path.insert(parent) {
                queue.push_back(parent);
            }
        }
    }
    on_path
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimReport {
    /// ecu → (kept, dropped).
    pub per_ecu: BTreeMap<EntityId, (usize, usize)>,
    /// rule name → kept count across ECUs (by provenance entry).
    pub per_rule: BTreeMap<String, usize>,
    pub global_unique_kept: usize,
}

impl TrimReport {
    pub fn tsv(&self, store: &HierStore) -> String {
        let mut out = String::from("ecu\tkept\tdropped\n");
        for (ecu, (kept, dropped)) in &self.per_ecu {
            out.push_str(&format!("{}\t{kept}\t{dropped}\n", store.iri(*ecu)));
        }
        out.push_str("\nrule\tkept\n");
        for (rule, count) in &self.per_rule {
            out.push_str(&format!("{rule}\t{count}\n"));
        }
        out.push_str(&format!("\nglobal_unique_kept\t{}\n", self.global_unique_kept));
        out
    }
}

/// Trims every harvest and unions the survivors: a candidate kept under any
/// ECU survives globally.
pub fn trim_all(
    harvests: &[EcuHarvest],
    seeds: &BTreeSet<EntityId>,
    store: &HierStore,
) -> (Vec<TrimOutcome>, BTreeSet<EntityId>, TrimReport) {
    let outcomes: Vec<TrimOutcome> = harvests
        .iter()
        .map(|h| trim(h, seeds, store))
        .collect();
    let mut global: BTreeSet<EntityId> = BTreeSet::new();
    let mut report = TrimReport::default();
    for outcome in &outcomes {
        report
            .per_ecu
            .insert(outcome.ecu, (outcome.kept.len(), outcome.dropped.len()));
        for rule in outcome.kept.values() {
            *report.per_rule.entry(rule.as_str().to_owned()).or_default() += 1;
        }
        global.extend(outcome.kept.keys().copied());
    }
    report.global_unique_kept = global.len();
    (outcomes, global, report)
}
