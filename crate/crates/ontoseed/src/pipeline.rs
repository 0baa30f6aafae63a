//! File-based stage orchestration. Every stage reads its inputs from the
//! output directory (or the configured input files), writes its artifacts
//! back there, and records an entry in `manifest.json`. Any stage can be
//! rerun in isolation from persisted upstream artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig};
use crate::ecu::{self, EcuRecord, PartitionedGraph};
use crate::eval;
use crate::export;
use crate::harvest::{self, EcuHarvest};
use crate::linker::{self, SearchEntitySet};
use crate::store::{self, snapshot, EntityId, HierStore};
use crate::trim::{self, KeepRule};
use crate::upper::{self, CommonPathSet, CuSet, IntegratedGraph};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod artifact {
    pub const SNAPSHOT: &str = "snapshot.bin";
    pub const INGEST_REPORT: &str = "ingest_report.tsv";
    pub const SEEDS_JSON: &str = "seeds.json";
    pub const SEEDS_TSV: &str = "seeds.tsv";
    pub const SEEDS_FLAT: &str = "seeds_flat.txt";
    pub const UPPER_GRAPH: &str = "upper_graph.json";
    pub const UPPER_EDGES: &str = "upper_edges.tsv";
    pub const ECU_STAGE: &str = "ecu_stage.json";
    pub const ECU_TSV: &str = "ecu.tsv";
    pub const INTEGRATED_DOT: &str = "integrated.dot";
    pub const INTEGRATED_GRAPHML: &str = "integrated.graphml";
    pub const RESIDUAL_DOT: &str = "residual.dot";
    pub const HARVESTS_JSON: &str = "harvests.json";
    pub const HARVEST_JSONL: &str = "harvest.jsonl";
    pub const HARVEST_REPORT: &str = "harvest_report.tsv";
    pub const SPARQL_DIR: &str = "sparql";
    pub const TRIMMED_JSON: &str = "trimmed.json";
    pub const TRIMMED_JSONL: &str = "trimmed.jsonl";
    pub const TRIM_REPORT: &str = "trim_report.tsv";
    pub const EVAL_TSV: &str = "eval.tsv";
    pub const EVAL_PRETTY: &str = "eval_pretty.txt";
    pub const EVAL_SERIES: &str = "eval_series.csv";
    pub const MANIFEST: &str = "manifest.json";
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing input: {0}")]
    MissingInput(PathBuf),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

impl PipelineError {
    /// Fixed exit codes: 1 config, 2 missing input, 3 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::MissingInput(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

fn stage_err(stage: &str, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage: stage.to_owned(),
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    pub name: String,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub duration_ms: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_fingerprint: String,
    pub tool_version: String,
    pub stages: Vec<StageEntry>,
}

impl RunManifest {
    fn load_or_new(out_dir: &Path, config_fingerprint: &str) -> RunManifest {
        let path = out_dir.join(artifact::MANIFEST);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(manifest) = serde_json::from_str::<RunManifest>(&text) {
                if manifest.config_fingerprint == config_fingerprint {
                    return manifest;
                }
            }
        }
        RunManifest {
            config_fingerprint: config_fingerprint.to_owned(),
            tool_version: TOOL_VERSION.to_owned(),
            stages: Vec::new(),
        }
    }

    fn upsert(&mut self, entry: StageEntry) {
        if let Some(existing) = self.stages.iter_mut().find(|s| s.name == entry.name) {
            *existing = entry;
        } else {
            self.stages.push(entry);
        }
    }

    fn save(&self, out_dir: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| stage_err("manifest", e))?;
        fs::write(out_dir.join(artifact::MANIFEST), text)
            .map_err(|e| stage_err("manifest", e))?;
        Ok(())
    }
}

pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(store::hex(&hasher.finalize()))
}

fn file_entry(stage: &str, path: &Path) -> Result<FileEntry, PipelineError> {
    Ok(FileEntry {
        path: path.display().to_string(),
        sha256: file_sha256(path).map_err(|e| stage_err(stage, e))?,
    })
}

fn require(path: &Path) -> Result<&Path, PipelineError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::MissingInput(path.to_owned()))
    }
}

fn write_artifact(
    stage: &str,
    out_dir: &Path,
    name: &str,
    bytes: &[u8],
) -> Result<PathBuf, PipelineError> {
    let path = out_dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| stage_err(stage, e))?;
    }
    fs::write(&path, bytes).map_err(|e| stage_err(stage, e))?;
    Ok(path)
}

fn write_json<T: Serialize>(
    stage: &str,
    out_dir: &Path,
    name: &str,
    value: &T,
) -> Result<PathBuf, PipelineError> {
    let text = serde_json::to_string(value).map_err(|e| stage_err(stage, e))?;
    write_artifact(stage, out_dir, name, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(stage: &str, path: &Path) -> Result<T, PipelineError> {
    require(path)?;
    let text = fs::read_to_string(path).map_err(|e| stage_err(stage, e))?;
    serde_json::from_str(&text).map_err(|e| stage_err(stage, e))
}

fn load_store(stage: &str, config: &PipelineConfig) -> Result<HierStore, PipelineError> {
    let path = config.snapshot_path();
    require(&path)?;
    snapshot::load_snapshot_strict(&path, &config.filter.fingerprint())
        .map_err(|e| stage_err(stage, e))
}

/// Runs `body` inside a worker pool of the configured size. Results are
/// independent of the worker count.
fn with_pool<T: Send>(
    stage: &str,
    workers: usize,
    body: impl FnOnce() -> T + Send,
) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| stage_err(stage, e))?;
    Ok(pool.install(body))
}

fn finish_stage(
    config: &PipelineConfig,
    mut entry: StageEntry,
    started: Instant,
) -> Result<StageEntry, PipelineError> {
    entry.duration_ms = started.elapsed().as_millis() as u64;
    let mut manifest =
        RunManifest::load_or_new(&config.paths.out_dir, &config.fingerprint());
    manifest.upsert(entry.clone());
    manifest.save(&config.paths.out_dir)?;
    Ok(entry)
}

fn prepare_out_dir(config: &PipelineConfig) -> Result<(), PipelineError> {
    fs::create_dir_all(&config.paths.out_dir).map_err(|e| {
        PipelineError::Config(ConfigError::Invalid {
            field: "paths.out_dir".into(),
            message: e.to_string(),
        })
    })
}

pub fn run_ingest(config: &PipelineConfig, verbose: bool) -> Result<StageEntry, PipelineError> {
    let stage = "ingest";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let dump = config
        .paths
        .dump
        .as_deref()
        .ok_or_else(|| PipelineError::MissingInput(PathBuf::from("paths.dump (unset)")))?;
    require(dump)?;
    let store = store::ingest_path(dump, &config.filter, |lines| {
        if verbose {
            eprintln!("ingest: {} lines processed", lines);
        }
    })
    .map_err(|e| stage_err(stage, e))?;
    let mut warnings = Vec::new();
    if store.counts().kept == 0 {
        warnings.push("no triples kept by the filter; store is empty".to_owned());
    }
    let out_dir = &config.paths.out_dir;
    let snapshot_path = config.snapshot_path();
    if let Some(parent) = snapshot_path.parent() {
        fs::create_dir_all(parent).map_err(|e| stage_err(stage, e))?;
    }
    snapshot::save_snapshot(&store, &snapshot_path).map_err(|e| stage_err(stage, e))?;
    let report = write_artifact(
        stage,
        out_dir,
        artifact::INGEST_REPORT,
        store.ingest_report_tsv().as_bytes(),
    )?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![file_entry(stage, dump)?],
        outputs: vec![
            file_entry(stage, &snapshot_path)?,
            file_entry(stage, &report)?,
        ],
        duration_ms: 0,
        warnings,
    };
    finish_stage(config, entry, started)
}

pub fn run_link(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "link";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let terms_path = config
        .paths
        .terms
        .as_deref()
        .ok_or_else(|| PipelineError::MissingInput(PathBuf::from("paths.terms (unset)")))?;
    require(terms_path)?;
    let store = load_store(stage, config)?;
    let text = fs::read_to_string(terms_path).map_err(|e| stage_err(stage, e))?;
    let terms = linker::load_terms(
        &text,
        &terms_path.display().to_string(),
        config.filter.case_fold,
    )
    .map_err(|e| stage_err(stage, e))?;
    let candidates = linker::link_terms(&terms, &store);
    let seeds = linker::apply_exclusions(&candidates, &config.exclusion, &store);
    let mut warnings = Vec::new();
    if seeds.flat.is_empty() {
        warnings.push("no search entities survived linking and exclusion".to_owned());
    }
    let out_dir = &config.paths.out_dir;
    let seeds_json = write_json(stage, out_dir, artifact::SEEDS_JSON, &seeds)?;
    let seeds_tsv = write_artifact(
        stage,
        out_dir,
        artifact::SEEDS_TSV,
        seeds.audit_tsv(&store).as_bytes(),
    )?;
    let flat_text: String = seeds
        .flat
        .iter()
        .map(|id| format!("{}\n", store.iri(*id)))
        .collect();
    let seeds_flat = write_artifact(stage, out_dir, artifact::SEEDS_FLAT, flat_text.as_bytes())?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![
            file_entry(stage, &config.snapshot_path())?,
            file_entry(stage, terms_path)?,
        ],
        outputs: vec![
            file_entry(stage, &seeds_json)?,
            file_entry(stage, &seeds_tsv)?,
            file_entry(stage, &seeds_flat)?,
        ],
        duration_ms: 0,
        warnings,
    };
    finish_stage(config, entry, started)
}

pub fn run_upper(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "upper";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let store = load_store(stage, config)?;
    let out_dir = &config.paths.out_dir;
    let seeds: SearchEntitySet = read_json(stage, &out_dir.join(artifact::SEEDS_JSON))?;
    let max_depth = config.analysis.max_depth;
    let (graph, truncated) = with_pool(stage, config.run.workers, || {
        upper::trace_and_integrate(&seeds.flat, &store, max_depth)
    })?;
    let mut warnings = Vec::new();
    if truncated > 0 {
        warnings.push(format!(
            "{truncated} frontier nodes beyond max_depth {max_depth} were truncated"
        ));
    }
    let graph_json = write_json(stage, out_dir, artifact::UPPER_GRAPH, &graph)?;
    let edges_tsv = write_artifact(
        stage,
        out_dir,
        artifact::UPPER_EDGES,
        export::integrated_edge_tsv(&graph, &store).as_bytes(),
    )?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![
            file_entry(stage, &config.snapshot_path())?,
            file_entry(stage, &out_dir.join(artifact::SEEDS_JSON))?,
        ],
        outputs: vec![
            file_entry(stage, &graph_json)?,
            file_entry(stage, &edges_tsv)?,
        ],
        duration_ms: 0,
        warnings,
    };
    finish_stage(config, entry, started)
}

/// Persisted result of the CU/common-path/partition/ECU analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcuStage {
    pub cu: CuSet,
    pub common: CommonPathSet,
    pub partition: PartitionedGraph,
    pub records: Vec<EcuRecord>,
}

pub fn run_ecu(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "ecu";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let store = load_store(stage, config)?;
    let out_dir = &config.paths.out_dir;
    let graph: IntegratedGraph = read_json(stage, &out_dir.join(artifact::UPPER_GRAPH))?;
    let cu = upper::find_cu(&graph, config.analysis.cu_threshold);
    let common = upper::find_common_paths(&graph, &cu);
    let partition = ecu::remove_common_paths(&graph, &common);
    let records = ecu::find_ecu(&partition, &cu);
    let ecu_entities: BTreeSet<EntityId> = records.iter().map(|r| r.entity).collect();

    let stage_json = write_json(
        stage,
        out_dir,
        artifact::ECU_STAGE,
        &EcuStage {
            cu: cu.clone(),
            common: common.clone(),
            partition: partition.clone(),
            records: records.clone(),
        },
    )?;
    let ecu_tsv = write_artifact(
        stage,
        out_dir,
        artifact::ECU_TSV,
        export::ecu_tsv(&records, &store).as_bytes(),
    )?;
    let dot = write_artifact(
        stage,
        out_dir,
        artifact::INTEGRATED_DOT,
        export::integrated_dot(&graph, &cu, &common, &ecu_entities, &store).as_bytes(),
    )?;
    let graphml = write_artifact(
        stage,
        out_dir,
        artifact::INTEGRATED_GRAPHML,
        export::integrated_graphml(&graph, &cu, &common, &ecu_entities, &store).as_bytes(),
    )?;
    let residual = write_artifact(
        stage,
        out_dir,
        artifact::RESIDUAL_DOT,
        export::residual_dot(&partition, &store).as_bytes(),
    )?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![
            file_entry(stage, &config.snapshot_path())?,
            file_entry(stage, &out_dir.join(artifact::UPPER_GRAPH))?,
        ],
        outputs: vec![
            file_entry(stage, &stage_json)?,
            file_entry(stage, &ecu_tsv)?,
            file_entry(stage, &dot)?,
            file_entry(stage, &graphml)?,
            file_entry(stage, &residual)?,
        ],
        duration_ms: 0,
        warnings: Vec::new(),
    };
    finish_stage(config, entry, started)
}

pub fn run_harvest(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "harvest";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let store = load_store(stage, config)?;
    let out_dir = &config.paths.out_dir;
    let ecu_stage: EcuStage = read_json(stage, &out_dir.join(artifact::ECU_STAGE))?;
    let harvests = with_pool(stage, config.run.workers, || {
        harvest::expand_all(&ecu_stage.records, &store)
    })?;
    let (merged, report) = harvest::merge_harvests(&harvests);

    let harvests_json = write_json(stage, out_dir, artifact::HARVESTS_JSON, &harvests)?;
    let jsonl = write_artifact(
        stage,
        out_dir,
        artifact::HARVEST_JSONL,
        export::candidates_jsonl(&merged, None, &store).as_bytes(),
    )?;
    let report_tsv = write_artifact(
        stage,
        out_dir,
        artifact::HARVEST_REPORT,
        report.tsv(&store).as_bytes(),
    )?;
    let mut outputs = vec![
        file_entry(stage, &harvests_json)?,
        file_entry(stage, &jsonl)?,
        file_entry(stage, &report_tsv)?,
    ];
    // one SPARQL text file per ECU with the query for each retrieval depth
    for record in &ecu_stage.records {
        let iri = store.iri(record.entity);
        let short = iri.rsplit(['/', '#']).next().unwrap_or(iri);
        let mut text = String::new();
        for k in 1..=record.nes {
            text.push_str(&format!("# depth {k}\n"));
            text.push_str(&harvest::emit_sparql(iri, k, &store));
            text.push('\n');
        }
        let name = format!("{}/{}.rq", artifact::SPARQL_DIR, short);
        let path = write_artifact(stage, out_dir, &name, text.as_bytes())?;
        outputs.push(file_entry(stage, &path)?);
    }
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![
            file_entry(stage, &config.snapshot_path())?,
            file_entry(stage, &out_dir.join(artifact::ECU_STAGE))?,
        ],
        outputs,
        duration_ms: 0,
        warnings: Vec::new(),
    };
    finish_stage(config, entry, started)
}

/// Persisted trimming result: global survivors with the rule that kept them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimmedStage {
    pub kept: BTreeMap<EntityId, String>,
}

pub fn run_trim(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "trim";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let store = load_store(stage, config)?;
    let out_dir = &config.paths.out_dir;
    let harvests: Vec<EcuHarvest> = read_json(stage, &out_dir.join(artifact::HARVESTS_JSON))?;
    let seeds: SearchEntitySet = read_json(stage, &out_dir.join(artifact::SEEDS_JSON))?;
    let (outcomes, global, report) = with_pool(stage, config.run.workers, || {
        trim::trim_all(&harvests, &seeds.flat, &store)
    })?;

    // strongest rule per surviving candidate, across ECUs
    let mut kept: BTreeMap<EntityId, KeepRule> = BTreeMap::new();
    for outcome in &outcomes {
        for (&entity, &rule) in &outcome.kept {
            let slot = kept.entry(entity).or_insert(rule);
            if rule < *slot {
                *slot = rule;
            }
        }
    }
    let kept_named: BTreeMap<EntityId, String> = kept
        .iter()
        .map(|(&e, r)| (e, r.as_str().to_owned()))
        .collect();

    let (merged, _) = harvest::merge_harvests(&harvests);
    let survivors: BTreeMap<EntityId, harvest::ConceptCandidate> = merged
        .into_iter()
        .filter(|(e, _)| global.contains(e))
        .collect();

    let trimmed_json = write_json(
        stage,
        out_dir,
        artifact::TRIMMED_JSON,
        &TrimmedStage {
            kept: kept_named.clone(),
        },
    )?;
    let jsonl = write_artifact(
        stage,
        out_dir,
        artifact::TRIMMED_JSONL,
        export::candidates_jsonl(&survivors, Some(&kept_named), &store).as_bytes(),
    )?;
    let report_tsv = write_artifact(
        stage,
        out_dir,
        artifact::TRIM_REPORT,
        report.tsv(&store).as_bytes(),
    )?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs: vec![
            file_entry(stage, &config.snapshot_path())?,
            file_entry(stage, &out_dir.join(artifact::HARVESTS_JSON))?,
            file_entry(stage, &out_dir.join(artifact::SEEDS_JSON))?,
        ],
        outputs: vec![
            file_entry(stage, &trimmed_json)?,
            file_entry(stage, &jsonl)?,
            file_entry(stage, &report_tsv)?,
        ],
        duration_ms: 0,
        warnings: Vec::new(),
    };
    finish_stage(config, entry, started)
}

pub fn run_eval(config: &PipelineConfig) -> Result<StageEntry, PipelineError> {
    let stage = "eval";
    let started = Instant::now();
    prepare_out_dir(config)?;
    let truth_path = config
        .paths
        .ground_truth
        .as_deref()
        .ok_or_else(|| PipelineError::MissingInput(PathBuf::from("paths.ground_truth (unset)")))?;
    require(truth_path)?;
    let store = load_store(stage, config)?;
    let out_dir = &config.paths.out_dir;
    let harvests: Vec<EcuHarvest> = read_json(stage, &out_dir.join(artifact::HARVESTS_JSON))?;

    let text = fs::read_to_string(truth_path).map_err(|e| stage_err(stage, e))?;
    let index = linker::load_terms_allow_empty(
        &text,
        &truth_path.display().to_string(),
        config.filter.case_fold,
    );
    let truth = eval::build_ground_truth(&index, &store);
    let mut warnings = Vec::new();
    if truth.total == 0 {
        warnings.push("ground truth matched no store labels; evaluation is degenerate".to_owned());
    }

    let mut inputs = vec![
        file_entry(stage, &config.snapshot_path())?,
        file_entry(stage, &out_dir.join(artifact::HARVESTS_JSON))?,
        file_entry(stage, truth_path)?,
    ];
    let survivors: Option<BTreeSet<EntityId>> = if config.run.trim {
        let trimmed: TrimmedStage = read_json(stage, &out_dir.join(artifact::TRIMMED_JSON))?;
        inputs.push(file_entry(stage, &out_dir.join(artifact::TRIMMED_JSON))?);
        Some(trimmed.kept.keys().copied().collect())
    } else {
        None
    };
    let rows = eval::evaluate(
        &harvests,
        &truth,
        &config.run.cutoffs,
        survivors.as_ref(),
        &store,
    );

    let tsv = write_artifact(
        stage,
        out_dir,
        artifact::EVAL_TSV,
        eval::report_tsv(&rows).as_bytes(),
    )?;
    let pretty = write_artifact(
        stage,
        out_dir,
        artifact::EVAL_PRETTY,
        eval::report_pretty(&rows).as_bytes(),
    )?;
    let series = write_artifact(
        stage,
        out_dir,
        artifact::EVAL_SERIES,
        eval::report_series_csv(&rows).as_bytes(),
    )?;
    let entry = StageEntry {
        name: stage.to_owned(),
        inputs,
        outputs: vec![
            file_entry(stage, &tsv)?,
            file_entry(stage, &pretty)?,
            file_entry(stage, &series)?,
        ],
        duration_ms: 0,
        warnings,
    };
    finish_stage(config, entry, started)
}

/// Runs the full pipeline. With trimming enabled this produces seven stage
/// entries: ingest, link, upper, ecu, harvest, trim, eval.
pub fn run_all(config: &PipelineConfig, verbose: bool) -> Result<RunManifest, PipelineError> {
    run_ingest(config, verbose)?;
    run_link(config)?;
    run_upper(config)?;
    run_ecu(config)?;
    run_harvest(config)?;
    if config.run.trim {
        run_trim(config)?;
    }
    run_eval(config)?;
    let manifest = RunManifest::load_or_new(&config.paths.out_dir, &config.fingerprint());
    Ok(manifest)
}

/// Re-exports a persisted artifact in the requested format. Returns the
/// written path. Unknown artifact/format combinations are config errors.
pub fn export_artifact(
    config: &PipelineConfig,
    what: &str,
    format: &str,
) -> Result<PathBuf, PipelineError> {
    let stage = "export";
    let out_dir = &config.paths.out_dir;
    match (what, format) {
        ("graph", "dot") => Ok(out_dir.join(artifact::INTEGRATED_DOT)),
        ("graph", "graphml") => Ok(out_dir.join(artifact::INTEGRATED_GRAPHML)),
        ("graph", "tsv") => Ok(out_dir.join(artifact::UPPER_EDGES)),
        ("candidates", "jsonl") => {
            let path = out_dir.join(artifact::HARVEST_JSONL);
            if !path.exists() {
                // no harvest yet: an empty JSON Lines file is still valid
                let store = load_store(stage, config)?;
                let empty = BTreeMap::new();
                return write_artifact(
                    stage,
                    out_dir,
                    artifact::HARVEST_JSONL,
                    export::candidates_jsonl(&empty, None, &store).as_bytes(),
                );
            }
            Ok(path)
        }
        _ => Err(PipelineError::Config(ConfigError::Invalid {
            field: "export".into(),
            message: format!("unknown artifact/format combination {what}/{format}"),
        })),
    }
    .and_then(|path| {
        require(&path)?;
        Ok(path)
    })
}
