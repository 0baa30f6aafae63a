//! Predicate-filtered triple store over an N-Triples class-hierarchy dump.
//!
//! Ingest streams the dump once, keeps only the configured hierarchy, label
//! and extra predicates, interns every IRI, and builds upward/downward
//! adjacency plus an exact-match label index. The finished store is immutable
//! and safe to share across threads.

mod ntriples;
pub mod snapshot;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use ntriples::{Object, ParsedTriple};

pub mod iri {
    //! Default Wikidata / RDFS vocabulary.
    pub const SUBCLASS_OF: &str = "http://www.wikidata.org/prop/direct/P279";
    pub const INSTANCE_OF: &str = "http://www.wikidata.org/prop/direct/P31";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const SKOS_ALT_LABEL: &str = "http://www.w3.org/2004/02/skos/core#altLabel";
    pub const LOCATED_IN: &str = "http://www.wikidata.org/prop/direct/P131";
    pub const SEX_OR_GENDER: &str = "http://www.wikidata.org/prop/direct/P21";
    pub const ENTITY_PREFIX: &str = "http://www.wikidata.org/entity/";
    pub const DIRECT_PROP_PREFIX: &str = "http://www.wikidata.org/prop/direct/";
}

/// Dense handle for an interned IRI. Ids are canonical: after ingest the
/// intern table is remapped to lexicographic IRI order, so the same kept
/// triples always produce the same ids regardless of input line order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The two edge classes of the assumed data model. `SubClassOf` edges are
/// followed on every hop; `InstanceOf` edges only on the hop adjacent to a
/// search entity (first hop upward, terminal hop downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HierPredicate {
    SubClassOf,
    InstanceOf,
}

impl HierPredicate {
    pub const ALL: [HierPredicate; 2] = [HierPredicate::SubClassOf, HierPredicate::InstanceOf];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    Representative,
    Alias,
}

/// Normalization applied to every label and query term: Unicode NFC plus
/// surrounding-whitespace trim. Case folding is off by default (the target
/// vocabulary is Japanese) and opt-in for Latin-script domains.
pub fn normalize_label(raw: &str, case_fold: bool) -> String {
    let normalized: String = raw.trim().nfc().collect();
    if case_fold {
        normalized.to_lowercase()
    } else {
        normalized
    }
}

/// Which predicates and languages survive ingest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestFilter {
    /// is-a predicates, followed on every hop (default wdt:P279).
    pub subclass_predicates: BTreeSet<String>,
    /// membership predicates, adjacent hop only (default wdt:P31).
    pub instance_predicates: BTreeSet<String>,
    pub representative_label_predicates: BTreeSet<String>,
    pub alias_label_predicates: BTreeSet<String>,
    pub kept_languages: BTreeSet<String>,
    /// Non-hierarchy predicates retained (subject side) for exclusion checks.
    pub extra_predicates: BTreeSet<String>,
    pub case_fold: bool,
}

impl Default for IngestFilter {
    fn default() -> Self {
        let one = |s: &str| BTreeSet::from([s.to_owned()]);
        IngestFilter {
            subclass_predicates: one(iri::SUBCLASS_OF),
            instance_predicates: one(iri::INSTANCE_OF),
            representative_label_predicates: one(iri::RDFS_LABEL),
            alias_label_predicates: one(iri::SKOS_ALT_LABEL),
            kept_languages: one("ja"),
            extra_predicates: [iri::LOCATED_IN, iri::SEX_OR_GENDER]
                .into_iter()
                .map(str::to_owned)
                .collect(),
            case_fold: false,
        }
    }
}

impl IngestFilter {
    pub fn validate(&self) -> Result<(), FilterError> {
        if self.subclass_predicates.is_empty() && self.instance_predicates.is_empty() {
            return Err(FilterError::NoHierarchyPredicates);
        }
        let hierarchy: BTreeSet<&String> = self
            .subclass_predicates
            .iter()
            .chain(&self.instance_predicates)
            .collect();
        let labels: BTreeSet<&String> = self
            .representative_label_predicates
            .iter()
            .chain(&self.alias_label_predicates)
            .collect();
        if let Some(shared) = hierarchy.intersection(&labels).next() {
            return Err(FilterError::OverlappingPredicate((*shared).clone()));
        }
        Ok(())
    }

    /// Stable digest of the filter, stored in snapshots so a store can be
    /// matched against the configuration that produced it.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        let mut feed = |tag: &str, set: &BTreeSet<String>| {
            hasher.update(tag.as_bytes());
            for item in set {
                hasher.update([0u8]);
                hasher.update(item.as_bytes());
            }
            hasher.update([1u8]);
        };
        feed("subclass", &self.subclass_predicates);
        feed("instance", &self.instance_predicates);
        feed("replabel", &self.representative_label_predicates);
        feed("altlabel", &self.alias_label_predicates);
        feed("lang", &self.kept_languages);
        feed("extra", &self.extra_predicates);
        hasher.update([self.case_fold as u8]);
        hex(&hasher.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("filter keeps no hierarchy predicates")]
    NoHierarchyPredicates,
    #[error("predicate {0} is both a hierarchy and a label predicate")]
    OverlappingPredicate(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("filter invalid: {0}")]
    Filter(#[from] FilterError),
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: io::Error,
    },
    #[error("read failed near byte offset {offset}: {source}")]
    Read {
        offset: u64,
        source: io::Error,
    },
}

/// Per-ingest bookkeeping. `kept + dropped + malformed == total_lines`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub total_lines: u64,
    pub kept: u64,
    pub dropped: u64,
    pub malformed: u64,
    /// kept triples per predicate IRI.
    pub kept_per_predicate: std::collections::BTreeMap<String, u64>,
    /// dropped lines per predicate IRI (parseable lines only).
    pub dropped_per_predicate: std::collections::BTreeMap<String, u64>,
    pub dropped_blank_or_comment: u64,
    pub dropped_typed_literals: u64,
    pub dropped_language: u64,
    /// hierarchy/extra triples whose object was not an IRI.
    pub dropped_non_iri_object: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PredicateClass {
    Hierarchy(HierPredicate),
    Label(LabelKind),
    Extra,
}

/// Immutable, queryable snapshot of the kept portion of the dump.
pub struct HierStore {
    filter: IngestFilter,
    /// IRIs in lexicographic order; position == EntityId.
    iris: Vec<String>,
    iri_index: HashMap<String, EntityId>,
    up_sub: Vec<Vec<EntityId>>,
    up_inst: Vec<Vec<EntityId>>,
    down_sub: Vec<Vec<EntityId>>,
    down_inst: Vec<Vec<EntityId>>,
    /// subject → (predicate, object) for extra predicates.
    extra: Vec<Vec<(EntityId, EntityId)>>,
    /// normalized label → entity ids, per label kind.
    label_rep: HashMap<String, Vec<EntityId>>,
    label_alias: HashMap<String, Vec<EntityId>>,
    /// entity → its labels.
    entity_labels: Vec<Vec<(LabelKind, String)>>,
    counts: IngestCounts,
}

impl fmt::Debug for HierStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HierStore")
            .field("entities", &self.iris.len())
            .field("kept_triples", &self.counts.kept)
            .finish()
    }
}

impl HierStore {
    pub fn filter(&self) -> &IngestFilter {
        &self.filter
    }

    pub fn counts(&self) -> &IngestCounts {
        &self.counts
    }

    pub fn entity_count(&self) -> usize {
        self.iris.len()
    }

    pub fn resolve(&self, iri: &str) -> Option<EntityId> {
        self.iri_index.get(iri).copied()
    }

    pub fn iri(&self, id: EntityId) -> &str {
        &self.iris[id.index()]
    }

    /// Adjacency rows for the requested predicates, ascending id, deduplicated.
    /// Unknown entities have no neighbors.
    pub fn neighbors(
        &self,
        entity: EntityId,
        direction: Direction,
        predicates: &[HierPredicate],
    ) -> Vec<EntityId> {
        let idx = entity.index();
        if idx >= self.iris.len() {
            return Vec::new();
        }
        let mut out: Vec<EntityId> = Vec::new();
        for pred in predicates {
            let table = match (direction, pred) {
                (Direction::Up, HierPredicate::SubClassOf) => &self.up_sub,
                (Direction::Up, HierPredicate::InstanceOf) => &self.up_inst,
                (Direction::Down, HierPredicate::SubClassOf) => &self.down_sub,
                (Direction::Down, HierPredicate::InstanceOf) => &self.down_inst,
            };
            out.extend_from_slice(&table[idx]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exact-match lookup across the requested label kinds. The term is
    /// normalized with the store's own policy before matching.
    pub fn lookup_label(&self, term: &str, kinds: &[LabelKind]) -> BTreeSet<EntityId> {
        let key = normalize_label(term, self.filter.case_fold);
        let mut out = BTreeSet::new();
        for kind in kinds {
            let index = match kind {
                LabelKind::Representative => &self.label_rep,
                LabelKind::Alias => &self.label_alias,
            };
            if let Some(ids) = index.get(&key) {
                out.extend(ids.iter().copied());
            }
        }
        out
    }

    /// Normalized labels attached to an entity (representative + alias).
    pub fn labels_of(&self, entity: EntityId) -> &[(LabelKind, String)] {
        self.entity_labels
            .get(entity.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// (predicate, object) pairs where `entity` is the subject of a kept
    /// extra predicate.
    pub fn subject_properties(&self, entity: EntityId) -> &[(EntityId, EntityId)] {
        self.extra
            .get(entity.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// True when the entity has at least one outgoing subClassOf/instanceOf
    /// edge, the hierarchy-membership requirement for search entities.
    pub fn has_hierarchy_out(&self, entity: EntityId) -> bool {
        let idx = entity.index();
        idx < self.iris.len() && (!self.up_sub[idx].is_empty() || !self.up_inst[idx].is_empty())
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.iris.len() as u32).map(EntityId)
    }

    /// Digest of everything observable through the query API. Two stores with
    /// equal digests answer every query identically.
    pub fn canonical_digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.filter.fingerprint().as_bytes());
        for (id, iri) in self.iris.iter().enumerate() {
            hasher.update(iri.as_bytes());
            hasher.update([0u8]);
            for table in [&self.up_sub, &self.up_inst] {
                for parent in &table[id] {
                    hasher.update(parent.0.to_le_bytes());
                }
                hasher.update([1u8]);
            }
            for (kind, label) in &self.entity_labels[id] {
                hasher.update([match kind {
                    LabelKind::Representative => 2u8,
                    LabelKind::Alias => 3u8,
                }]);
                hasher.update(label.as_bytes());
            }
            for (p, o) in &self.extra[id] {
                hasher.update(p.0.to_le_bytes());
                hasher.update(o.0.to_le_bytes());
            }
            hasher.update([4u8]);
        }
        hex(&hasher.finalize())
    }

    /// Rough heap footprint of the retained structures, used by the
    /// memory-proportionality check.
    pub fn approx_heap_bytes(&self) -> usize {
        use std::mem::size_of;
        let mut total = 0usize;
        total += self.iris.iter().map(|s| s.len() + size_of::<String>()).sum::<usize>();
        total += self.iri_index.len() * (size_of::<String>() + size_of::<EntityId>());
        total += self.iris.iter().map(|s| s.len()).sum::<usize>(); // index keys
        for table in [&self.up_sub, &self.up_inst, &self.down_sub, &self.down_inst] {
            total += table
                .iter()
                .map(|v| v.len() * size_of::<EntityId>() + size_of::<Vec<EntityId>>())
                .sum::<usize>();
        }
        total += self
            .extra
            .iter()
            .map(|v| v.len() * 2 * size_of::<EntityId>() + size_of::<Vec<EntityId>>())
            .sum::<usize>();
        for index in [&self.label_rep, &self.label_alias] {
            total += index
                .iter()
                .map(|(k, v)| k.len() + v.len() * size_of::<EntityId>() + 48)
                .sum::<usize>();
        }
        total += self
            .entity_labels
            .iter()
            .map(|v| {
                v.iter().map(|(_, s)| s.len() + 32).sum::<usize>() + size_of::<Vec<u8>>()
            })
            .sum::<usize>();
        total
    }

    /// TSV report: one row per predicate with kept/dropped counts, then
    /// summary rows for blank, typed-literal, language and malformed drops.
    pub fn ingest_report_tsv(&self) -> String {
        let c = &self.counts;
        let mut out = String::from("predicate\tkept\tdropped\n");
        let mut predicates: BTreeSet<&String> = c.kept_per_predicate.keys().collect();
        predicates.extend(c.dropped_per_predicate.keys());
        for pred in predicates {
            let kept = c.kept_per_predicate.get(pred).copied().unwrap_or(0);
            let dropped = c.dropped_per_predicate.get(pred).copied().unwrap_or(0);
            out.push_str(&format!("{pred}\t{kept}\t{dropped}\n"));
        }
        out.push_str(&format!("(blank/comment)\t0\t{}\n", c.dropped_blank_or_comment));
        out.push_str(&format!("(malformed)\t0\t{}\n", c.malformed));
        out.push_str(&format!(
            "(total)\t{}\t{}\n",
            c.kept,
            c.dropped + c.malformed
        ));
        out
    }
}

/// Streams N-Triples from `reader` and builds a store.
///
/// Malformed lines are counted and skipped; triples failing the filter are
/// counted and dropped. The result is independent of input line order.
pub fn ingest<R: BufRead>(reader: R, filter: &IngestFilter) -> Result<HierStore, IngestError> {
    ingest_with_progress(reader, filter, |_| {})
}

pub fn ingest_with_progress<R: BufRead>(
    mut reader: R,
    filter: &IngestFilter,
    mut progress: impl FnMut(u64),
) -> Result<HierStore, IngestError> {
    filter.validate()?;
    let mut builder = StoreBuilder::new(filter.clone());
    let mut line = String::new();
    let mut offset: u64 = 0;
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|source| IngestError::Read { offset, source })?;
        if n == 0 {
            break;
        }
        offset += n as u64;
        builder.add_line(line.trim_end_matches(['\n', '\r']));
        if builder.counts.total_lines % 1_000_000 == 0 {
            progress(builder.counts.total_lines);
        }
    }
    Ok(builder.finish())
}

/// Opens `.nt` or `.nt.gz` (by extension) and ingests it.
pub fn ingest_path(
    path: &Path,
    filter: &IngestFilter,
    progress: impl FnMut(u64),
) -> Result<HierStore, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let is_gz = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("gz"))
        .unwrap_or(false);
    if is_gz {
        let reader: Box<dyn Read> = Box::new(MultiGzDecoder::new(file));
        ingest_with_progress(BufReader::with_capacity(1 << 20, reader), filter, progress)
    } else {
        ingest_with_progress(BufReader::with_capacity(1 << 20, file), filter, progress)
    }
}

struct StoreBuilder {
    filter: IngestFilter,
    predicate_class: HashMap<String, PredicateClass>,
    iris: Vec<String>,
    iri_index: HashMap<String, u32>,
    up_sub: Vec<Vec<u32>>,
    up_inst: Vec<Vec<u32>>,
    extra: Vec<Vec<(u32, u32)>>,
    labels: Vec<Vec<(LabelKind, String)>>,
    counts: IngestCounts,
}

impl StoreBuilder {
    fn new(filter: IngestFilter) -> Self {
        let mut predicate_class = HashMap::new();
        for p in &filter.subclass_predicates {
            predicate_class.insert(p.clone(), PredicateClass::Hierarchy(HierPredicate::SubClassOf));
        }
        for p in &filter.instance_predicates {
            predicate_class.insert(p.clone(), PredicateClass::Hierarchy(HierPredicate::InstanceOf));
        }
        for p in &filter.representative_label_predicates {
            predicate_class.insert(p.clone(), PredicateClass::Label(LabelKind::Representative));
        }
        for p in &filter.alias_label_predicates {
            predicate_class.insert(p.clone(), PredicateClass::Label(LabelKind::Alias));
        }
        for p in &filter.extra_predicates {
            predicate_class.entry(p.clone()).or_insert(PredicateClass::Extra);
        }
        StoreBuilder {
            filter,
            predicate_class,
            iris: Vec::new(),
            iri_index: HashMap::new(),
            up_sub: Vec::new(),
            up_inst: Vec::new(),
            extra: Vec::new(),
            labels: Vec::new(),
            counts: IngestCounts::default(),
        }
    }

    fn intern(&mut self, iri: &str) -> u32 {
        if let Some(&id) = self.iri_index.get(iri) {
            return id;
        }
        let id = self.iris.len() as u32;
        self.iris.push(iri.to_owned());
        self.iri_index.insert(iri.to_owned(), id);
        self.up_sub.push(Vec::new());
        self.up_inst.push(Vec::new());
        self.extra.push(Vec::new());
        self.labels.push(Vec::new());
        id
    }

    fn drop_predicate(&mut self, predicate: &str) {
        self.counts.dropped += 1;
        *self
            .counts
            .dropped_per_predicate
            .entry(predicate.to_owned())
            .or_default() += 1;
    }

    fn keep_predicate(&mut self, predicate: &str) {
        self.counts.kept += 1;
        *self
            .counts
            .kept_per_predicate
            .entry(predicate.to_owned())
            .or_default() += 1;
    }

    fn add_line(&mut self, line: &str) {
        self.counts.total_lines += 1;
        let parsed = match ntriples::parse_line(line) {
            Ok(Some(t)) => t,
            Ok(None) => {
                self.counts.dropped += 1;
                self.counts.dropped_blank_or_comment += 1;
                return;
            }
            Err(_) => {
                self.counts.malformed += 1;
                return;
            }
        };
        let class = match self.predicate_class.get(parsed.predicate) {
            Some(&c) => c,
            None => {
                self.drop_predicate(parsed.predicate);
                return;
            }
        };
        if parsed.subject.is_empty() {
            // blank-node subject on a kept predicate: outside the data model
            self.counts.dropped += 1;
            self.counts.dropped_non_iri_object += 1;
            return;
        }
        match class {
            PredicateClass::Hierarchy(pred) => match parsed.object {
                Object::Iri(obj) => {
                    let s = self.intern(parsed.subject);
                    let o = self.intern(obj);
                    match pred {
                        HierPredicate::SubClassOf => self.up_sub[s as usize].push(o),
                        HierPredicate::InstanceOf => self.up_inst[s as usize].push(o),
                    }
                    self.keep_predicate(parsed.predicate);
                }
                _ => {
                    self.counts.dropped += 1;
                    self.counts.dropped_non_iri_object += 1;
                    *self
                        .counts
                        .dropped_per_predicate
                        .entry(parsed.predicate.to_owned())
                        .or_default() += 1;
                }
            },
            PredicateClass::Label(kind) => match parsed.object {
                Object::Literal {
                    lexical,
                    lang: Some(lang),
                } if self.filter.kept_languages.contains(lang) => {
                    let s = self.intern(parsed.subject);
                    let normalized = normalize_label(&lexical, self.filter.case_fold);
                    self.labels[s as usize].push((kind, normalized));
                    self.keep_predicate(parsed.predicate);
                }
                Object::Literal { .. } => {
                    self.counts.dropped += 1;
                    self.counts.dropped_language += 1;
                    *self
                        .counts
                        .dropped_per_predicate
                        .entry(parsed.predicate.to_owned())
                        .or_default() += 1;
                }
                Object::TypedLiteral => {
                    self.counts.dropped += 1;
                    self.counts.dropped_typed_literals += 1;
                    *self
                        .counts
                        .dropped_per_predicate
                        .entry(parsed.predicate.to_owned())
                        .or_default() += 1;
                }
                _ => {
                    self.counts.dropped += 1;
                    self.counts.dropped_non_iri_object += 1;
                    *self
                        .counts
                        .dropped_per_predicate
                        .entry(parsed.predicate.to_owned())
                        .or_default() += 1;
                }
            },
            PredicateClass::Extra => match parsed.object {
                Object::Iri(obj) => {
                    let s = self.intern(parsed.subject);
                    let p = self.intern(parsed.predicate);
                    let o = self.intern(obj);
                    self.extra[s as usize].push((p, o));
                    self.keep_predicate(parsed.predicate);
                }
                _ => {
                    self.counts.dropped += 1;
                    self.counts.dropped_non_iri_object += 1;
                    *self
                        .counts
                        .dropped_per_predicate
                        .entry(parsed.predicate.to_owned())
                        .or_default() += 1;
                }
            },
        }
    }

    /// Remaps ids to lexicographic IRI order, sorts and deduplicates every
    /// adjacency row, and builds the inverse tables and label index. This
    /// canonicalization is what makes ingest order-insensitive.
    fn finish(self) -> HierStore {
        let n = self.iris.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| self.iris[a as usize].cmp(&self.iris[b as usize]));
        // remap[old] = new
        let mut remap = vec![0u32; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }

        let mut iris = vec![String::new(); n];
        for (old, iri) in self.iris.into_iter().enumerate() {
            iris[remap[old] as usize] = iri;
        }
        let iri_index: HashMap<String, EntityId> = iris
            .iter()
            .enumerate()
            .map(|(i, iri)| (iri.clone(), EntityId(i as u32)))
            .collect();

        let remap_table = |table: Vec<Vec<u32>>| -> Vec<Vec<EntityId>> {
            let mut out = vec![Vec::new(); n];
            for (old, row) in table.into_iter().enumerate() {
                let mut mapped: Vec<EntityId> =
                    row.into_iter().map(|id| EntityId(remap[id as usize])).collect();
                mapped.sort_unstable();
                mapped.dedup();
                out[remap[old] as usize] = mapped;
            }
            out
        };
        let up_sub = remap_table(self.up_sub);
        let up_inst = remap_table(self.up_inst);

        let invert = |up: &Vec<Vec<EntityId>>| -> Vec<Vec<EntityId>> {
            let mut down = vec![Vec::new(); n];
            for (child, parents) in up.iter().enumerate() {
                for parent in parents {
                    down[parent.index()].push(EntityId(child as u32));
                }
            }
            for row in &mut down {
                row.sort_unstable();
                row.dedup();
            }
            down
        };
        let down_sub = invert(&up_sub);
        let down_inst = invert(&up_inst);

        let mut extra = vec![Vec::new(); n];
        for (old, row) in self.extra.into_iter().enumerate() {
            let mut mapped: Vec<(EntityId, EntityId)> = row
                .into_iter()
                .map(|(p, o)| (EntityId(remap[p as usize]), EntityId(remap[o as usize])))
                .collect();
            mapped.sort_unstable();
            mapped.dedup();
            extra[remap[old] as usize] = mapped;
        }

        let mut entity_labels = vec![Vec::new(); n];
        for (old, mut row) in self.labels.into_iter().enumerate() {
            row.sort();
            row.dedup();
            entity_labels[remap[old] as usize] = row;
        }

        let mut label_rep: HashMap<String, Vec<EntityId>> = HashMap::new();
        let mut label_alias: HashMap<String, Vec<EntityId>> = HashMap::new();
        for (id, row) in entity_labels.iter().enumerate() {
            for (kind, label) in row {
                let index = match kind {
                    LabelKind::Representative => &mut label_rep,
                    LabelKind::Alias => &mut label_alias,
                };
                index.entry(label.clone()).or_default().push(EntityId(id as u32));
            }
        }
        for index in [&mut label_rep, &mut label_alias] {
            for ids in index.values_mut() {
                ids.sort_unstable();
                ids.dedup();
            }
        }

        HierStore {
            filter: self.filter,
            iris,
            iri_index,
            up_sub,
            up_inst,
            down_sub,
            down_inst,
            extra,
            label_rep,
            label_alias,
            entity_labels,
            counts: self.counts,
        }
    }
}

impl HierStore {
    /// Rebuilds the derived tables (inverse adjacency, IRI index, label
    /// index) from the persisted primary tables.
    pub(crate) fn assemble(
        filter: IngestFilter,
        iris: Vec<String>,
        up_sub: Vec<Vec<EntityId>>,
        up_inst: Vec<Vec<EntityId>>,
        extra: Vec<Vec<(EntityId, EntityId)>>,
        entity_labels: Vec<Vec<(LabelKind, String)>>,
        counts: IngestCounts,
    ) -> HierStore {
        let n = iris.len();
        let iri_index: HashMap<String, EntityId> = iris
            .iter()
            .enumerate()
            .map(|(i, iri)| (iri.clone(), EntityId(i as u32)))
            .collect();
        let invert = |up: &Vec<Vec<EntityId>>| -> Vec<Vec<EntityId>> {
            let mut down = vec![Vec::new(); n];
            for (child, parents) in up.iter().enumerate() {
                for parent in parents {
                    down[parent.index()].push(EntityId(child as u32));
                }
            }
            for row in &mut down {
                row.sort_unstable();
                row.dedup();
            }
            down
        };
        let down_sub = invert(&up_sub);
        let down_inst = invert(&up_inst);
        let mut label_rep: HashMap<String, Vec<EntityId>> = HashMap::new();
        let mut label_alias: HashMap<String, Vec<EntityId>> = HashMap::new();
        for (id, row) in entity_labels.iter().enumerate() {
            for (kind, label) in row {
                let index = match kind {
                    LabelKind::Representative => &mut label_rep,
                    LabelKind::Alias => &mut label_alias,
                };
                index.entry(label.clone()).or_default().push(EntityId(id as u32));
            }
        }
        for index in [&mut label_rep, &mut label_alias] {
            for ids in index.values_mut() {
                ids.sort_unstable();
                ids.dedup();
            }
        }
        HierStore {
            filter,
            iris,
            iri_index,
            up_sub,
            up_inst,
            down_sub,
            down_inst,
            extra,
            label_rep,
            label_alias,
            entity_labels,
            counts,
        }
    }

    pub(crate) fn primary_tables(
        &self,
    ) -> (
        &[String],
        &[Vec<EntityId>],
        &[Vec<EntityId>],
        &[Vec<(EntityId, EntityId)>],
        &[Vec<(LabelKind, String)>],
    ) {
        (
            &self.iris,
            &self.up_sub,
            &self.up_inst,
            &self.extra,
            &self.entity_labels,
        )
    }
}


/// Builds a store directly from already-classified triples. Test and fixture
/// helper; production ingest goes through the line parser.
pub fn store_from_edges(
    hierarchy: &[(&str, HierPredicate, &str)],
    labels: &[(&str, LabelKind, &str, &str)], // (subject, kind, text, lang)
    filter: &IngestFilter,
) -> HierStore {
    let mut text = String::new();
    for (s, p, o) in hierarchy {
        let pred = match p {
            HierPredicate::SubClassOf => {
                filter.subclass_predicates.iter().next().expect("subclass predicate")
            }
            HierPredicate::InstanceOf => {
                filter.instance_predicates.iter().next().expect("instance predicate")
            }
        };
        text.push_str(&format!("<{s}> <{pred}> <{o}> .\n"));
    }
    for (s, kind, label, lang) in labels {
        let pred = match kind {
            LabelKind::Representative => filter
                .representative_label_predicates
                .iter()
                .next()
                .expect("label predicate"),
            LabelKind::Alias => filter.alias_label_predicates.iter().next().expect("alias predicate"),
        };
        text.push_str(&format!("<{s}> <{pred}> \"{label}\"@{lang} .\n"));
    }
    ingest(text.as_bytes(), filter).expect("fixture ingest")
}
