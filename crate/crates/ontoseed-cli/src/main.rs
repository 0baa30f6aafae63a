//! CLI driver for the ontology-bootstrapping pipeline.
//!
//! Exit codes: 0 success, 1 configuration error, 2 missing input,
//! 3 stage failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ontoseed::config::PipelineConfig;
use ontoseed::pipeline::{self, PipelineError, StageEntry};

#[derive(Parser)]
#[command(
    name = "ontoseed",
    version,
    about = "Extract an initial domain-ontology class hierarchy from a LOD dump"
)]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker pool size (overrides the config; 0 = all CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Store snapshot path (overrides the config).
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream the dump and build the snapshot.
    Ingest {
        /// Dump path (overrides the config).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Link domain terms to search entities.
    Link {
        /// Term list path (overrides the config).
        #[arg(long)]
        terms: Option<PathBuf>,
    },
    /// Trace and integrate the upper-level concept graph.
    Upper,
    /// Find CU entities, remove common paths, determine ECUs and NES.
    Ecu,
    /// Expand lower-level concepts from each ECU.
    Harvest,
    /// Prune harvested subtrees by search-entity occurrence.
    Trim,
    /// Score candidates against the dictionary-index ground truth.
    Eval {
        /// Ground-truth term list (overrides the config).
        #[arg(long)]
        ground_truth: Option<PathBuf>,
    },
    /// Run the whole pipeline.
    RunAll,
    /// Locate (or materialize) an artifact in a given format.
    Export {
        /// What to export: graph | candidates.
        what: String,
        /// Format: dot | graphml | tsv | jsonl.
        format: String,
    },
    /// Print a starter configuration with the Wikidata defaults.
    InitConfig,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_path(path)?,
        None => PipelineConfig::example(),
    };
    if let Some(workers) = cli.workers {
        config.run.workers = workers;
    }
    if let Some(snapshot) = &cli.snapshot {
        config.paths.snapshot = Some(snapshot.clone());
    }
    if let Some(out) = &cli.out {
        config.paths.out_dir = out.clone();
    }
    Ok(config)
}

fn report(entry: &StageEntry) {
    eprintln!(
        "stage {}: {} outputs, {} ms",
        entry.name,
        entry.outputs.len(),
        entry.duration_ms
    );
    for warning in &entry.warnings {
        eprintln!("  warning: {warning}");
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Ingest { dump } => {
            if let Some(dump) = dump {
                config.paths.dump = Some(dump);
            }
            report(&pipeline::run_ingest(&config, true)?);
        }
        Command::Link { terms } => {
            if let Some(terms) = terms {
                config.paths.terms = Some(terms);
            }
            report(&pipeline::run_link(&config)?);
        }
        Command::Upper => report(&pipeline::run_upper(&config)?),
        Command::Ecu => report(&pipeline::run_ecu(&config)?),
        Command::Harvest => report(&pipeline::run_harvest(&config)?),
        Command::Trim => report(&pipeline::run_trim(&config)?),
        Command::Eval { ground_truth } => {
            if let Some(truth) = ground_truth {
                config.paths.ground_truth = Some(truth);
            }
            report(&pipeline::run_eval(&config)?);
        }
        Command::RunAll => {
            let manifest = pipeline::run_all(&config, true)?;
            for entry in &manifest.stages {
                report(entry);
            }
        }
        Command::Export { what, format } => {
            let path = pipeline::export_artifact(&config, &what, &format)?;
            println!("{}", path.display());
        }
        Command::InitConfig => {
            println!("{}", PipelineConfig::example().to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
