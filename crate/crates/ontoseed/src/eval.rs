//! Recall/precision scoring of the candidate vocabulary against a
//! dictionary-index ground truth, by cumulative NES cutoff.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::harvest::EcuHarvest;
use crate::linker::TermList;
use crate::store::{EntityId, HierStore, LabelKind};

/// Index terms that exist in the store's label index; the denominator of
/// recall.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub index_terms: Vec<String>,
    pub matched: BTreeSet<String>,
    pub total: usize,
}

/// A dictionary-index term counts as a correct answer when it has at least
/// one exact label or alias hit in the store.
pub fn build_ground_truth(index: &TermList, store: &HierStore) -> GroundTruth {
    let matched: BTreeSet<String> = index
        .terms
        .iter()
        .filter(|term| {
            !store
                .lookup_label(term, &[LabelKind::Representative, LabelKind::Alias])
                .is_empty()
        })
        .cloned()
        .collect();
    GroundTruth {
        index_terms: index.terms.clone(),
        total: matched.len(),
        matched,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub cutoff: u32,
    pub ecu_count: usize,
    pub concept_count: usize,
    pub term_count: usize,
    pub matched: usize,
    pub recall: f64,
    pub precision: f64,
}

/// Scores cumulative candidate sets: for each cutoff, the unique candidates
/// harvested by ECUs with NES ≤ cutoff, expanded to their label terms and
/// intersected with the ground truth. `restrict_to` (the trimmed survivor
/// set) limits which candidates count, when given.
pub fn evaluate(
    harvests: &[EcuHarvest],
    truth: &GroundTruth,
    cutoffs: &[u32],
    restrict_to: Option<&BTreeSet<EntityId>>,
    store: &HierStore,
) -> Vec<EvalRow> {
    let mut sorted_cutoffs: Vec<u32> = cutoffs.to_vec();
    sorted_cutoffs.sort_unstable();
    sorted_cutoffs.dedup();
    let mut rows = Vec::with_capacity(sorted_cutoffs.len());
    for &cutoff in &sorted_cutoffs {
        let selected: Vec<&EcuHarvest> = harvests.iter().filter(|h| h.nes <= cutoff).collect();
        let mut concepts: BTreeSet<EntityId> = BTreeSet::new();
        for harvest in &selected {
            concepts.extend(harvest.candidates.keys().copied());
        }
        if let Some(survivors) = restrict_to {
            concepts.retain(|c| survivors.contains(c));
        }
        let mut terms: BTreeSet<&str> = BTreeSet::new();
        for &concept in &concepts {
            for (_, label) in store.labels_of(concept) {
                terms.insert(label.as_str());
            }
        }
        let matched = terms
            .iter()
            .filter(|t| truth.matched.contains(**t))
            .count();
        let recall = if truth.total > 0 {
            matched as f64 / truth.total as f64
        } else {
            0.0
        };
        let precision = if terms.is_empty() {
            0.0
        } else {
            matched as f64 / terms.len() as f64
        };
        rows.push(EvalRow {
            cutoff,
            ecu_count: selected.len(),
            concept_count: concepts.len(),
            term_count: terms.len(),
            matched,
            recall,
            precision,
        });
    }
    rows
}

/// Fractions are printed to three significant figures as percentages.
fn pct3(fraction: f64) -> String {
    let pct = fraction * 100.0;
    if pct == 0.0 {
        return "0.00%".into();
    }
    let magnitude = pct.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{pct:.decimals$}%")
}

/// TSV table sorted by cutoff.
pub fn report_tsv(rows: &[EvalRow]) -> String {
    let mut sorted: Vec<&EvalRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.cutoff);
    let mut out =
        String::from("cutoff\tecuCount\tconceptCount\ttermCount\tmatched\trecall\tprecision\n");
    for row in sorted {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\n",
            row.cutoff,
            row.ecu_count,
            row.concept_count,
            row.term_count,
            row.matched,
            row.recall,
            row.precision
        ));
    }
    out
}

/// Human-readable table with percentages.
pub fn report_pretty(rows: &[EvalRow]) -> String {
    let mut sorted: Vec<&EvalRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.cutoff);
    let mut out = String::from(
        "NES<=  #ECU     #concepts      #terms     #matched   recall     precision\n",
    );
    for row in sorted {
        out.push_str(&format!(
            "{:<6} {:<8} {:<13} {:<11} {:<10} {:<10} {}\n",
            row.cutoff,
            row.ecu_count,
            row.concept_count,
            row.term_count,
            row.matched,
            pct3(row.recall),
            pct3(row.precision)
        ));
    }
    out
}

/// Plot-ready CSV series (cutoff, recall, precision).
pub fn report_series_csv(rows: &[EvalRow]) -> String {
    let mut sorted: Vec<&EvalRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.cutoff);
    let mut out = String::from("cutoff,recall,precision\n");
    for row in sorted {
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            row.cutoff, row.recall, row.precision
        ));
    }
    out
}
