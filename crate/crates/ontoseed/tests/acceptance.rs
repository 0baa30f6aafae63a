//! Acceptance gate. Each test covers one criterion and prints a single
//! `criterion <name>: pass|FAIL` line (visible with `--nocapture`).

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::{
    g1_store, node_iri, oracle_harvest, oracle_upper, OracleEdge, TestGraph,
};
use ontoseed::config::PipelineConfig;
use ontoseed::ecu::{find_ecu, remove_common_paths};
use ontoseed::eval::{build_ground_truth, evaluate};
use ontoseed::harvest::expand_down;
use ontoseed::linker::TermList;
use ontoseed::pipeline::{self, artifact};
use ontoseed::store::{ingest, snapshot, IngestFilter};
use ontoseed::trim::trim;
use ontoseed::upper::{find_common_paths, find_cu, trace_and_integrate};
use ontoseed::{EntityId, HierStore};

fn criterion(name: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {name}: pass"),
        Err(cause) => {
            println!("criterion {name}: FAIL");
            resume_unwind(cause);
        }
    }
}

/// Production upper analysis translated to index space for oracle diffing.
fn production_upper(g: &TestGraph, store: &HierStore) -> common::OracleUpper {
    let seeds = g.seed_ids(store);
    let (graph, _) = trace_and_integrate(&seeds, store, 64);
    let cu = find_cu(&graph, 2);
    let common_paths = find_common_paths(&graph, &cu);
    let part = remove_common_paths(&graph, &common_paths);
    let records = find_ecu(&part, &cu);

    let node = |id: EntityId| g.node_of(store, id);
    let node_support = graph
        .node_support
        .iter()
        .map(|(&n, s)| (node(n), s.iter().map(|&x| node(x)).collect()))
        .collect();
    let edge_support = graph
        .edge_support
        .iter()
        .map(|(&(c, p, q), s)| {
            ((node(c), p, node(q)), s.iter().map(|&x| node(x)).collect())
        })
        .collect();
    let cu_set: BTreeSet<usize> = cu.entities.iter().map(|&e| node(e)).collect();
    let common_set: BTreeSet<OracleEdge> = common_paths
        .edges
        .iter()
        .map(|&(c, p, q)| (node(c), p, node(q)))
        .collect();
    // canonicalize component labels to the smallest member of each component
    let mut rep_of_component: BTreeMap<u32, usize> = BTreeMap::new();
    for component in &part.components {
        let rep = component.nodes.iter().map(|&n| node(n)).min().unwrap();
        rep_of_component.insert(component.id, rep);
    }
    let component_rep = part
        .component_of
        .iter()
        .map(|(&n, c)| (node(n), rep_of_component[c]))
        .collect();
    let ecus = records
        .iter()
        .map(|r| {
            let distances = r
                .seed_distances
                .iter()
                .map(|(&s, &d)| (node(s), d))
                .collect();
            (node(r.entity), (distances, r.nes))
        })
        .collect();
    common::OracleUpper {
        node_support,
        edge_support,
        cu: cu_set,
        common: common_set,
        component_rep,
        ecus,
    }
}

#[test]
fn upper_analysis_matches_oracle() {
    criterion("upper-analysis-oracle", || {
        let started = Instant::now();
        for case in 0..1000u64 {
            let g = TestGraph::random_dag(case, 50, 8);
            let store = g.store();
            let produced = production_upper(&g, &store);
            let expected = oracle_upper(&g, 2);
            assert_eq!(produced, expected, "case {case}: {g:?}");
        }
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs() < 60, "suite took {elapsed:?}");
    });
}

#[test]
fn g1_end_to_end() {
    criterion("g1-end-to-end", || {
        let (store, seeds) = g1_store();
        let (graph, truncated) = trace_and_integrate(&seeds, &store, 30);
        assert_eq!(truncated, 0);
        let cu = find_cu(&graph, 2);
        let names = |set: &BTreeSet<EntityId>| -> BTreeSet<&str> {
            set.iter().map(|&n| store.iri(n)).collect()
        };
        assert_eq!(names(&cu.entities), BTreeSet::from(["e:A", "e:B", "e:R"]));
        let common_paths = find_common_paths(&graph, &cu);
        let common_names: BTreeSet<(&str, &str)> = common_paths
            .edges
            .iter()
            .map(|&(c, _, p)| (store.iri(c), store.iri(p)))
            .collect();
        assert_eq!(
            common_names,
            BTreeSet::from([("e:A", "e:B"), ("e:B", "e:R")])
        );
        let part = remove_common_paths(&graph, &common_paths);
        let records = find_ecu(&part, &cu);
        assert_eq!(records.len(), 1);
        assert_eq!(store.iri(records[0].entity), "e:A");
        assert_eq!(records[0].nes, 1);
    });
}

#[test]
fn harvest_matches_oracle() {
    criterion("harvest-oracle", || {
        for case in 0..500u64 {
            let g = TestGraph::random_graph(case.wrapping_add(9000), 100, 4);
            let store = g.store();
            let ecu_node = (case as usize) % g.n;
            let ecu = g.id(&store, ecu_node);
            let mut previous: BTreeSet<usize> = BTreeSet::new();
            for nes in 1..=4u32 {
                let produced = expand_down(ecu, nes, &store);
                let produced_idx: BTreeMap<usize, BTreeMap<usize, u32>> = produced
                    .candidates
                    .iter()
                    .map(|(&c, roots)| {
                        (
                            g.node_of(&store, c),
                            roots
                                .iter()
                                .map(|(&r, &d)| (g.node_of(&store, r), d))
                                .collect(),
                        )
                    })
                    .collect();
                let expected = oracle_harvest(&g, ecu_node, nes);
                assert_eq!(produced_idx, expected, "case {case} nes {nes}: {g:?}");
                let current: BTreeSet<usize> = produced_idx.keys().copied().collect();
                assert!(
                    previous.is_subset(&current),
                    "case {case}: nes {nes} lost candidates"
                );
                previous = current;
            }
        }
    });
}

#[test]
fn trim_properties_hold() {
    criterion("trim-properties", || {
        // G2: two radius-2 branches, seed on one → that branch survives whole
        let g2 = ontoseed::store::store_from_edges(
            &[
                ("e:X", ontoseed::HierPredicate::SubClassOf, "e:E"),
                ("e:s", ontoseed::HierPredicate::SubClassOf, "e:X"),
                ("e:Y", ontoseed::HierPredicate::SubClassOf, "e:E"),
                ("e:t", ontoseed::HierPredicate::SubClassOf, "e:Y"),
            ],
            &[],
            &IngestFilter::default(),
        );
        let harvest = expand_down(g2.resolve("e:E").unwrap(), 2, &g2);
        let seeds = BTreeSet::from([g2.resolve("e:s").unwrap()]);
        let outcome = trim(&harvest, &seeds, &g2);
        let kept_names: BTreeSet<&str> = outcome.kept.keys().map(|&k| g2.iri(k)).collect();
        assert_eq!(kept_names, BTreeSet::from(["e:X", "e:s"]));

        // G3: depth-3 chain with a seed, seedless sibling branch dropped
        let g3 = ontoseed::store::store_from_edges(
            &[
                ("e:X", ontoseed::HierPredicate::SubClassOf, "e:E"),
                ("e:Y", ontoseed::HierPredicate::SubClassOf, "e:X"),
                ("e:s", ontoseed::HierPredicate::SubClassOf, "e:Y"),
                ("e:Z", ontoseed::HierPredicate::SubClassOf, "e:E"),
                ("e:W", ontoseed::HierPredicate::SubClassOf, "e:Z"),
            ],
            &[],
            &IngestFilter::default(),
        );
        let harvest = expand_down(g3.resolve("e:E").unwrap(), 3, &g3);
        let seeds = BTreeSet::from([g3.resolve("e:s").unwrap()]);
        let outcome = trim(&harvest, &seeds, &g3);
        let kept_names: BTreeSet<&str> = outcome.kept.keys().map(|&k| g3.iri(k)).collect();
        assert_eq!(kept_names, BTreeSet::from(["e:X", "e:Y", "e:s"]));

        // random instances: subset, idempotence, seedless-empty, monotonicity
        for case in 0..200u64 {
            let g = TestGraph::random_graph(case.wrapping_add(40_000), 40, 6);
            let store = g.store();
            let ecu_node = (case as usize) % g.n;
            let ecu = g.id(&store, ecu_node);
            let nes = 2 + (case % 3) as u32;
            let harvest = expand_down(ecu, nes, &store);
            let all = harvest.candidate_set();

            // seedless: nothing survives at radius ≥ 2
            let empty = trim(&harvest, &BTreeSet::new(), &store);
            assert!(empty.kept.is_empty(), "case {case}");

            let seed_ids = g.seed_ids(&store);
            let outcome = trim(&harvest, &seed_ids, &store);
            let kept: BTreeSet<EntityId> = outcome.kept.keys().copied().collect();
            assert!(kept.is_subset(&all), "case {case}: trimmed ⊄ harvested");

            // idempotence: trimming the reduced harvest is a fixpoint
            let reduced = ontoseed::harvest::EcuHarvest {
                ecu: harvest.ecu,
                nes: harvest.nes,
                candidates: harvest
                    .candidates
                    .iter()
                    .filter(|(c, _)| kept.contains(c))
                    .map(|(&c, r)| (c, r.clone()))
                    .collect(),
            };
            let again = trim(&reduced, &seed_ids, &store);
            let kept_again: BTreeSet<EntityId> = again.kept.keys().copied().collect();
            assert_eq!(kept, kept_again, "case {case}: trim not idempotent");

            // seed-monotonicity: a seed subset never keeps more
            let mut smaller = seed_ids.clone();
            if smaller.len() > 1 {
                let drop = *smaller.iter().next().unwrap();
                smaller.remove(&drop);
            }
            let sub_outcome = trim(&harvest, &smaller, &store);
            let sub_kept: BTreeSet<EntityId> = sub_outcome.kept.keys().copied().collect();
            assert!(
                sub_kept.is_subset(&kept),
                "case {case}: fewer seeds kept more"
            );
        }
    });
}

#[test]
fn evaluation_properties_hold() {
    criterion("evaluation", || {
        let filter = IngestFilter::default();
        let mut text = String::new();
        for i in 0..20usize {
            let _ = writeln!(text, "<{}> <{}> <n:top> .", node_iri(i), filter.subclass_predicates.iter().next().unwrap());
            let _ = writeln!(
                text,
                "<{}> <{}> \"term {i}\"@ja .",
                node_iri(i),
                filter.representative_label_predicates.iter().next().unwrap()
            );
        }
        let store = ingest(text.as_bytes(), &filter).unwrap();
        let ids: Vec<EntityId> = (0..20)
            .map(|i| store.resolve(&node_iri(i)).unwrap())
            .collect();
        let harvest_of = |nes: u32, nodes: &[usize]| ontoseed::harvest::EcuHarvest {
            ecu: store.resolve("n:top").unwrap(),
            nes,
            candidates: nodes
                .iter()
                .map(|&i| (ids[i], BTreeMap::from([(ids[i], 1u32)])))
                .collect(),
        };
        let harvests = vec![
            harvest_of(1, &[0, 1, 2]),
            harvest_of(2, &[3, 4]),
            harvest_of(3, &[5, 6, 7, 8]),
            harvest_of(5, &[9]),
        ];
        let truth_terms: Vec<String> = (0..12).map(|i| format!("term {i}")).collect();
        let truth_list = TermList {
            terms: truth_terms,
            provenance: "index".into(),
        };
        let truth = build_ground_truth(&truth_list, &store);
        let rows = evaluate(&harvests, &truth, &[1, 2, 3, 4, 5], None, &store);

        // recall is non-decreasing across nested cutoffs
        let recalls: Vec<f64> = rows.iter().map(|r| r.recall).collect();
        assert!(recalls.windows(2).all(|w| w[0] <= w[1]), "{recalls:?}");

        // truth == candidate terms gives recall = precision = 1
        let exact_truth = TermList {
            terms: (0..3).map(|i| format!("term {i}")).collect(),
            provenance: "index".into(),
        };
        let exact = evaluate(
            &[harvest_of(1, &[0, 1, 2])],
            &build_ground_truth(&exact_truth, &store),
            &[1],
            None,
            &store,
        );
        assert_eq!(exact[0].recall, 1.0);
        assert_eq!(exact[0].precision, 1.0);

        // independent naive recount of every row
        for row in &rows {
            let mut concepts: BTreeSet<EntityId> = BTreeSet::new();
            for harvest in harvests.iter().filter(|h| h.nes <= row.cutoff) {
                concepts.extend(harvest.candidates.keys().copied());
            }
            let mut terms: BTreeSet<String> = BTreeSet::new();
            for &c in &concepts {
                for (_, label) in store.labels_of(c) {
                    terms.insert(label.clone());
                }
            }
            let matched = terms.iter().filter(|t| truth.matched.contains(*t)).count();
            assert_eq!(row.concept_count, concepts.len());
            assert_eq!(row.term_count, terms.len());
            assert_eq!(row.matched, matched);
            assert_eq!(row.recall, matched as f64 / truth.total as f64);
            assert_eq!(row.precision, matched as f64 / terms.len() as f64);
        }
    });
}

// --- ingest scale -----------------------------------------------------------

const SCALE_LINES: u64 = 10_000_000;
const SCALE_ENTITIES: u64 = 200_000;

/// Line `i` of the synthetic dump; pure so the permuted file can be produced
/// without holding anything in memory. One line in ten is kept.
fn scale_line(i: u64, filter: &IngestFilter) -> String {
    let subject = i % SCALE_ENTITIES;
    let object = (i.wrapping_mul(31).wrapping_add(7)) % SCALE_ENTITIES;
    if i % 10 == 0 {
        let pred = if i % 20 == 0 {
            filter.instance_predicates.iter().next().unwrap()
        } else {
            filter.subclass_predicates.iter().next().unwrap()
        };
        format!("<x:{subject}> <{pred}> <x:{object}> .\n")
    } else {
        format!("<x:{subject}> <x:unrelated> <x:{object}> .\n")
    }
}

fn write_scale_file(path: &Path, order: impl Iterator<Item = u64>, filter: &IngestFilter) {
    let mut w = BufWriter::with_capacity(1 << 20, fs::File::create(path).unwrap());
    for i in order {
        w.write_all(scale_line(i, filter).as_bytes()).unwrap();
    }
    w.flush().unwrap();
}

fn proc_status_kb(key: &str) -> u64 {
    let status = fs::read_to_string("/proc/self/status").unwrap();
    status
        .lines()
        .find(|l| l.starts_with(key))
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

#[test]
fn ingest_scale_and_permutation() {
    criterion("ingest-scale", || {
        let filter = IngestFilter::default();
        let dir = tempfile::tempdir().unwrap();
        let original = dir.path().join("scale.nt");
        write_scale_file(&original, 0..SCALE_LINES, &filter);

        let rss_before_kb = proc_status_kb("VmRSS:");
        let started = Instant::now();
        let store = ontoseed::store::ingest_path(&original, &filter, |_| {}).unwrap();
        let elapsed = started.elapsed();
        assert!(
            elapsed.as_secs() < 600,
            "ingest took {elapsed:?}, budget 10 min"
        );
        let peak_kb = proc_status_kb("VmHWM:");

        let counts = store.counts();
        assert_eq!(counts.total_lines, SCALE_LINES);
        assert_eq!(counts.kept, SCALE_LINES / 10);
        assert_eq!(counts.kept + counts.dropped + counts.malformed, counts.total_lines);

        // peak memory proportional to the kept-triple footprint
        let footprint = store.approx_heap_bytes() as u64;
        let peak_delta = peak_kb.saturating_sub(rss_before_kb) * 1024;
        assert!(
            peak_delta < footprint * 5,
            "peak {peak_delta} B vs footprint {footprint} B"
        );

        // a permuted dump produces an observably identical store
        let permuted = dir.path().join("scale_permuted.nt");
        // 7919 is prime and does not divide the line count, so j → 7919·j is
        // a bijection on the index space
        write_scale_file(
            &permuted,
            (0..SCALE_LINES).map(|j| (j.wrapping_mul(7919)) % SCALE_LINES),
            &filter,
        );
        let permuted_store = ontoseed::store::ingest_path(&permuted, &filter, |_| {}).unwrap();
        assert_eq!(store.canonical_digest(), permuted_store.canonical_digest());
        assert_eq!(store.counts(), permuted_store.counts());
        drop(permuted_store);

        // snapshot round-trip identity
        let snap = dir.path().join("scale.bin");
        snapshot::save_snapshot(&store, &snap).unwrap();
        let loaded = snapshot::load_snapshot(&snap).unwrap();
        assert_eq!(store.canonical_digest(), loaded.canonical_digest());
    });
}

// --- determinism ------------------------------------------------------------

fn fixture_bundle(dir: &Path) -> PipelineConfig {
    let filter = IngestFilter::default();
    let sub = filter.subclass_predicates.iter().next().unwrap();
    let inst = filter.instance_predicates.iter().next().unwrap();
    let label = filter.representative_label_predicates.iter().next().unwrap();
    let mut dump = String::new();
    for (s, p, o) in [
        ("e:s1", sub, "e:A"),
        ("e:s2", sub, "e:A"),
        ("e:A", sub, "e:B"),
        ("e:s3", inst, "e:C"),
        ("e:C", sub, "e:B"),
        ("e:B", sub, "e:R"),
        ("e:d1", sub, "e:A"),
    ] {
        let _ = writeln!(dump, "<{s}> <{p}> <{o}> .");
    }
    for (s, l) in [
        ("e:s1", "alpha"),
        ("e:s2", "beta"),
        ("e:s3", "gamma"),
        ("e:d1", "delta"),
        ("e:A", "upper"),
    ] {
        let _ = writeln!(dump, "<{s}> <{label}> \"{l}\"@ja .");
    }
    fs::write(dir.join("dump.nt"), dump).unwrap();
    fs::write(dir.join("terms.txt"), "alpha\nbeta\ngamma\n").unwrap();
    fs::write(dir.join("truth.txt"), "alpha\nbeta\ndelta\nepsilon\n").unwrap();

    let mut config = PipelineConfig::default();
    config.paths.dump = Some(dir.join("dump.nt"));
    config.paths.terms = Some(dir.join("terms.txt"));
    config.paths.ground_truth = Some(dir.join("truth.txt"));
    config.run.cutoffs = vec![1, 2, 3];
    config.run.workers = 1;
    config
}

/// Relative path → file bytes for every artifact, manifest excluded (its
/// stage durations are timing-dependent).
fn artifact_bytes(out_dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                if rel != artifact::MANIFEST {
                    out.insert(rel, fs::read(&path).unwrap());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(out_dir, out_dir, &mut out);
    out
}

#[test]
fn run_all_is_deterministic() {
    criterion("determinism", || {
        let dir = tempfile::tempdir().unwrap();
        let base = fixture_bundle(dir.path());

        let mut first = base.clone();
        first.paths.out_dir = dir.path().join("out1");
        let manifest = pipeline::run_all(&first, false).unwrap();
        assert_eq!(manifest.stages.len(), 7, "expected all seven stages");

        let mut second = base.clone();
        second.paths.out_dir = dir.path().join("out2");
        pipeline::run_all(&second, false).unwrap();

        let bytes1 = artifact_bytes(&first.paths.out_dir);
        let bytes2 = artifact_bytes(&second.paths.out_dir);
        assert!(!bytes1.is_empty());
        assert_eq!(
            bytes1.keys().collect::<Vec<_>>(),
            bytes2.keys().collect::<Vec<_>>()
        );
        for (name, content) in &bytes1 {
            assert_eq!(content, &bytes2[name], "artifact {name} differs between runs");
        }

        // worker count must not influence any artifact
        let mut wide = base.clone();
        wide.paths.out_dir = dir.path().join("out4");
        wide.run.workers = 4;
        pipeline::run_all(&wide, false).unwrap();
        let bytes4 = artifact_bytes(&wide.paths.out_dir);
        for (name, content) in &bytes1 {
            assert_eq!(content, &bytes4[name], "artifact {name} differs by workers");
        }

        // the eval table reflects the fixture: 2 of 3 truth terms retrieved
        let eval_tsv =
            String::from_utf8(bytes1.get(artifact::EVAL_TSV).unwrap().clone()).unwrap();
        assert!(eval_tsv.lines().count() >= 2, "{eval_tsv}");
    });
}

#[test]
fn full_scale_run_is_documented() {
    criterion("full-scale-procedure", || {
        let readme = fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md"),
        )
        .expect("workspace README");
        assert!(
            readme.to_lowercase().contains("full-scale"),
            "README must document the manual full-scale procedure"
        );
    });
}
