//! Bootstrapping an initial domain-ontology class hierarchy from a large
//! linked-open-data dump.
//!
//! The pipeline: ingest an N-Triples dump into a [`store::HierStore`], link a
//! domain term list to entities ([`linker`]), trace and integrate upward
//! concept graphs and find common upper-level (CU) entities ([`upper`]),
//! partition away common paths and determine expansion roots with their
//! search radii ([`ecu`]), harvest lower-level concepts ([`harvest`]), prune
//! them by search-entity occurrence ([`trim`]) and score the resulting
//! vocabulary against a dictionary index ([`eval`]).

pub mod config;
pub mod ecu;
pub mod eval;
pub mod export;
pub mod harvest;
pub mod linker;
pub mod pipeline;
pub mod store;
pub mod trim;
pub mod upper;

pub use store::{Direction, EntityId, HierPredicate, HierStore, IngestFilter, LabelKind};
