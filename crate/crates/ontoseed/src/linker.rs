//! Entity linking: exact label matching of domain terms against the store,
//! followed by the two exclusion models (adjacent-entity and property) and
//! the hierarchy-membership requirement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{normalize_label, Direction, EntityId, HierStore, LabelKind};

/// Normalized, deduplicated domain vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermList {
    pub terms: Vec<String>,
    pub provenance: String,
}

#[derive(Debug, Error)]
pub enum TermListError {
    #[error("term list {0} is empty after normalization")]
    Empty(String),
}

/// Parses one term per line; `#` starts a comment line. Terms are NFC
/// normalized and whitespace trimmed (including ideographic spaces);
/// duplicates are dropped, keeping first-occurrence order.
pub fn load_terms(text: &str, provenance: &str, case_fold: bool) -> Result<TermList, TermListError> {
    let mut seen = BTreeSet::new();
    let mut terms = Vec::new();
    for line in text.lines() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let term = normalize_label(line, case_fold);
        if term.is_empty() {
            continue;
        }
        if seen.insert(term.clone()) {
            terms.push(term);
        }
    }
    if terms.is_empty() {
        return Err(TermListError::Empty(provenance.to_owned()));
    }
    Ok(TermList {
        terms,
        provenance: provenance.to_owned(),
    })
}

/// Like [`load_terms`] but an empty result is fine; used for the
/// ground-truth index where an empty truth is degenerate, not fatal.
pub fn load_terms_allow_empty(text: &str, provenance: &str, case_fold: bool) -> TermList {
    match load_terms(text, provenance, case_fold) {
        Ok(list) => list,
        Err(_) => TermList {
            terms: Vec::new(),
            provenance: provenance.to_owned(),
        },
    }
}

/// The exclusion models: (A) drop candidates with an adjacency-predicate
/// edge to a blacklisted entity, (B) drop candidates that are the subject of
/// a blacklisted property. Empty sets disable a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExclusionPolicy {
    pub adjacent_blacklist: BTreeSet<String>,
    /// Predicates used for the adjacency test (default instanceOf).
    pub adjacency_predicates: BTreeSet<String>,
    pub property_blacklist: BTreeSet<String>,
}

impl ExclusionPolicy {
    pub fn wikidata_defaults() -> Self {
        use crate::store::iri;
        ExclusionPolicy {
            adjacent_blacklist: [
                "http://www.wikidata.org/entity/Q5",         // human
                "http://www.wikidata.org/entity/Q11879590",  // female given name
                "http://www.wikidata.org/entity/Q20202269",  // music term
                "http://www.wikidata.org/entity/Q11424",     // film
            ]
            .into_iter()
            .map(str::to_owned)
            .collect(),
            adjacency_predicates: BTreeSet::from([iri::INSTANCE_OF.to_owned()]),
            property_blacklist: [iri::LOCATED_IN, iri::SEX_OR_GENDER]
                .into_iter()
                .map(str::to_owned)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkStatus {
    Kept,
    Unmatched,
    ExcludedAdjacency,
    ExcludedProperty,
    NoHierarchy,
}

impl LinkStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkStatus::Kept => "kept",
            LinkStatus::Unmatched => "unmatched",
            LinkStatus::ExcludedAdjacency => "excluded-by-adjacency",
            LinkStatus::ExcludedProperty => "excluded-by-property",
            LinkStatus::NoHierarchy => "no-hierarchy-membership",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub term: String,
    /// Empty for unmatched terms.
    pub iri: String,
    pub status: LinkStatus,
    pub reason: String,
}

/// Surviving search entities plus the complete per-term audit trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchEntitySet {
    pub entries: BTreeMap<String, BTreeSet<EntityId>>,
    pub flat: BTreeSet<EntityId>,
    pub audit: Vec<AuditRow>,
}

impl SearchEntitySet {
    pub fn audit_tsv(&self, store: &HierStore) -> String {
        let _ = store;
        let mut out = String::from("term\tentity\tstatus\treason\n");
        for row in &self.audit {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.term,
                row.iri,
                row.status.as_str(),
                row.reason
            ));
        }
        out
    }
}

/// Exact matching over representative labels and aliases. Terms with zero
/// matches are recorded; nothing is excluded yet.
pub fn link_terms(terms: &TermList, store: &HierStore) -> BTreeMap<String, BTreeSet<EntityId>> {
    terms
        .terms
        .iter()
        .map(|term| {
            let hits =
                store.lookup_label(term, &[LabelKind::Representative, LabelKind::Alias]);
            (term.clone(), hits)
        })
        .collect()
}

/// Applies both exclusion models and the hierarchy-membership requirement.
/// Every dropped candidate gets an audit row with the first rule that fired
/// (adjacency, then property, then membership).
pub fn apply_exclusions(
    candidates: &BTreeMap<String, BTreeSet<EntityId>>,
    policy: &ExclusionPolicy,
    store: &HierStore,
) -> SearchEntitySet {
    let blacklist: BTreeSet<EntityId> = policy
        .adjacent_blacklist
        .iter()
        .filter_map(|iri| store.resolve(iri))
        .collect();
    let property_blacklist: BTreeSet<EntityId> = policy
        .property_blacklist
        .iter()
        .filter_map(|iri| store.resolve(iri))
        .collect();
    // adjacency predicates split into hierarchy classes vs extra predicates
    let filter = store.filter();
    let mut adjacency_hier = Vec::new();
    let mut adjacency_extra = BTreeSet::new();
    for pred in &policy.adjacency_predicates {
        if filter.subclass_predicates.contains(pred) {
            adjacency_hier.push(crate::HierPredicate::SubClassOf);
        } else if filter.instance_predicates.contains(pred) {
            adjacency_hier.push(crate::HierPredicate::InstanceOf);
        } else if let Some(id) = store.resolve(pred) {
            adjacency_extra.insert(id);
        }
    }
    // a blacklisted property may itself be a hierarchy predicate
    let mut property_hier: Vec<(crate::HierPredicate, &str)> = Vec::new();
    for pred in &policy.property_blacklist {
        if filter.subclass_predicates.contains(pred) {
            property_hier.push((crate::HierPredicate::SubClassOf, pred));
        } else if filter.instance_predicates.contains(pred) {
            property_hier.push((crate::HierPredicate::InstanceOf, pred));
        }
    }

    let mut entries = BTreeMap::new();
    let mut flat = BTreeSet::new();
    let mut audit = Vec::new();
    for (term, ids) in candidates {
        if ids.is_empty() {
            audit.push(AuditRow {
                term: term.clone(),
                iri: String::new(),
                status: LinkStatus::Unmatched,
                reason: "no exact label match".into(),
            });
            continue;
        }
        let mut survivors = BTreeSet::new();
        for &id in ids {
            // (A) adjacency exclusion: candidate as subject only
            let adjacent_hit = store
                .neighbors(id, Direction::Up, &adjacency_hier)
                .into_iter()
                .find(|n| blacklist.contains(n))
                .or_else(|| {
                    store
                        .subject_properties(id)
                        .iter()
                        .find(|(p, o)| adjacency_extra.contains(p) && blacklist.contains(o))
                        .map(|(_, o)| *o)
                });
            if let Some(target) = adjacent_hit {
                audit.push(AuditRow {
                    term: term.clone(),
                    iri: store.iri(id).to_owned(),
                    status: LinkStatus::ExcludedAdjacency,
                    reason: format!("adjacent to {}", store.iri(target)),
                });
                continue;
            }
            // (B) property exclusion: candidate is subject of a blacklisted predicate
            let property_hit = store
                .subject_properties(id)
                .iter()
                .find(|(p, _)| property_blacklist.contains(p))
                .map(|(p, _)| store.iri(*p).to_owned())
                .or_else(|| {
                    property_hier
                        .iter()
                        .find(|(hp, _)| !store.neighbors(id, Direction::Up, &[*hp]).is_empty())
                        .map(|(_, iri)| (*iri).to_owned())
                });
            if let Some(pred) = property_hit {
                audit.push(AuditRow {
                    term: term.clone(),
                    iri: store.iri(id).to_owned(),
                    status: LinkStatus::ExcludedProperty,
                    reason: format!("has property {pred}"),
                });
                continue;
            }
            if !store.has_hierarchy_out(id) {
                audit.push(AuditRow {
                    term: term.clone(),
                    iri: store.iri(id).to_owned(),
                    status: LinkStatus::NoHierarchy,
                    reason: "no outgoing subClassOf/instanceOf edge".into(),
                });
                continue;
            }
            audit.push(AuditRow {
                term: term.clone(),
                iri: store.iri(id).to_owned(),
                status: LinkStatus::Kept,
                reason: String::new(),
            });
            survivors.insert(id);
        }
        flat.extend(survivors.iter().copied());
        entries.insert(term.clone(), survivors);
    }
    SearchEntitySet {
        entries,
        flat,
        audit,
    }
}
