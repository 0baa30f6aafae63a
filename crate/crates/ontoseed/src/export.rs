//! DOT / GraphML / TSV / JSON Lines serialization of pipeline artifacts.

use std::collections::{BTreeMap, BTreeSet};

use crate::ecu::PartitionedGraph;
use crate::harvest::ConceptCandidate;
use crate::store::{EntityId, HierPredicate, HierStore};
use crate::upper::{CommonPathSet, CuSet, IntegratedGraph};

fn short_name(store: &HierStore, id: EntityId) -> &str {
    let iri = store.iri(id);
    iri.rsplit(['/', '#']).next().unwrap_or(iri)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn predicate_name(p: HierPredicate) -> &'static str {
    match p {
        HierPredicate::SubClassOf => "subClassOf",
        HierPredicate::InstanceOf => "instanceOf",
    }
}

/// DOT rendering of the integrated graph. Nodes carry their support count
/// and CU/ECU flags; edges carry their support count and common-path flag.
pub fn integrated_dot(
    graph: &IntegratedGraph,
    cu: &CuSet,
    common: &CommonPathSet,
    ecus: &BTreeSet<EntityId>,
    store: &HierStore,
) -> String {
    let mut out = String::from("digraph upper_concepts {\n  rankdir=BT;\n");
    for (node, support) in &graph.node_support {
        let mut attrs = vec![
            format!(
                "label=\"{} ({})\"",
                dot_escape(short_name(store, *node)),
                support.len()
            ),
            format!("support={}", support.len()),
        ];
        if cu.entities.contains(node) {
            attrs.push("cu=true".into());
            attrs.push("shape=box".into());
        }
        if ecus.contains(node) {
            attrs.push("ecu=true".into());
            attrs.push("style=bold".into());
        }
        if graph.seeds.contains(node) {
            attrs.push("seed=true".into());
        }
        out.push_str(&format!("  \"{}\" [{}];\n", node.0, attrs.join(", ")));
    }
    for (edge, support) in &graph.edge_support {
        let (child, pred, parent) = edge;
        let mut attrs = vec![
            format!("label=\"{}\"", predicate_name(*pred)),
            format!("support={}", support.len()),
        ];
        if common.edges.contains(edge) {
            attrs.push("common=true".into());
            attrs.push("penwidth=2".into());
        }
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [{}];\n",
            child.0,
            parent.0,
            attrs.join(", ")
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of the residual graph after common-path removal.
pub fn residual_dot(part: &PartitionedGraph, store: &HierStore) -> String {
    let mut out = String::from("digraph residual {\n  rankdir=BT;\n");
    for (node, component) in &part.component_of {
        out.push_str(&format!(
            "  \"{}\" [label=\"{}\", component={}];\n",
            node.0,
            dot_escape(short_name(store, *node)),
            component
        ));
    }
    for (child, pred, parent) in &part.residual_edges {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            child.0,
            parent.0,
            predicate_name(*pred)
        ));
    }
    out.push_str("}\n");
    out
}

/// GraphML rendering of the integrated graph with the same attributes as
/// the DOT export.
pub fn integrated_graphml(
    graph: &IntegratedGraph,
    cu: &CuSet,
    common: &CommonPathSet,
    ecus: &BTreeSet<EntityId>,
    store: &HierStore,
) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         <key id=\"d0\" for=\"node\" attr.name=\"iri\" attr.type=\"string\"/>\n\
         <key id=\"d1\" for=\"node\" attr.name=\"support\" attr.type=\"int\"/>\n\
         <key id=\"d2\" for=\"node\" attr.name=\"cu\" attr.type=\"boolean\"/>\n\
         <key id=\"d3\" for=\"node\" attr.name=\"ecu\" attr.type=\"boolean\"/>\n\
         <key id=\"d4\" for=\"edge\" attr.name=\"predicate\" attr.type=\"string\"/>\n\
         <key id=\"d5\" for=\"edge\" attr.name=\"support\" attr.type=\"int\"/>\n\
         <key id=\"d6\" for=\"edge\" attr.name=\"common\" attr.type=\"boolean\"/>\n\
         <graph id=\"G\" edgedefault=\"directed\">\n",
    );
    for (node, support) in &graph.node_support {
        out.push_str(&format!(
            "<node id=\"n{}\"><data key=\"d0\">{}</data><data key=\"d1\">{}</data>\
             <data key=\"d2\">{}</data><data key=\"d3\">{}</data></node>\n",
            node.0,
            xml_escape(store.iri(*node)),
            support.len(),
            cu.entities.contains(node),
            ecus.contains(node)
        ));
    }
    for (i, (edge, support)) in graph.edge_support.iter().enumerate() {
        let (child, pred, parent) = edge;
        out.push_str(&format!(
            "<edge id=\"e{i}\" source=\"n{}\" target=\"n{}\">\
             <data key=\"d4\">{}</data><data key=\"d5\">{}</data>\
             <data key=\"d6\">{}</data></edge>\n",
            child.0,
            parent.0,
            predicate_name(*pred),
            support.len(),
            common.edges.contains(edge)
        ));
    }
    out.push_str("</graph>\n</graphml>\n");
    out
}

/// TSV edge list of the integrated graph.
pub fn integrated_edge_tsv(graph: &IntegratedGraph, store: &HierStore) -> String {
    let mut out = String::from("child\tpredicate\tparent\tedgeSupport\n");
    for ((child, pred, parent), support) in &graph.edge_support {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            store.iri(*child),
            predicate_name(*pred),
            store.iri(*parent),
            support.len()
        ));
    }
    out
}

/// ECU summary table: entity, label, component, reachable seeds, NES.
pub fn ecu_tsv(records: &[crate::ecu::EcuRecord], store: &HierStore) -> String {
    let mut out = String::from("entity\tlabel\tcomponent\tN\tnes\n");
    for record in records {
        let label = store
            .labels_of(record.entity)
            .iter()
            .find(|(kind, _)| *kind == crate::store::LabelKind::Representative)
            .or_else(|| store.labels_of(record.entity).first())
            .map(|(_, l)| l.as_str())
            .unwrap_or("");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            store.iri(record.entity),
            label,
            record.component,
            record.reachable_seed_count(),
            record.nes
        ));
    }
    out
}

/// JSON Lines dump of candidates: one object per candidate with its IRI,
/// labels and provenance. `kept_rules` adds the trimmer's kept-by tag.
pub fn candidates_jsonl(
    candidates: &BTreeMap<EntityId, ConceptCandidate>,
    kept_rules: Option<&BTreeMap<EntityId, String>>,
    store: &HierStore,
) -> String {
    let mut out = String::new();
    for (entity, candidate) in candidates {
        let labels: Vec<&str> = store
            .labels_of(*entity)
            .iter()
            .map(|(_, l)| l.as_str())
            .collect();
        let provenance: Vec<serde_json::Value> = candidate
            .provenance
            .iter()
            .map(|p| {
                serde_json::json!({
                    "ecu": store.iri(p.ecu),
                    "depth": p.depth,
                    "subtreeRoot": store.iri(p.subtree_root),
                })
            })
            .collect();
        let mut object = serde_json::json!({
            "iri": store.iri(*entity),
            "labels": labels,
            "provenance": provenance,
        });
        if let Some(rules) = kept_rules {
            if let Some(rule) = rules.get(entity) {
                object["keptBy"] = serde_json::Value::String(rule.clone());
            }
        }
        out.push_str(&serde_json::to_string(&object).expect("jsonl serialization"));
        out.push('\n');
    }
    out
}
