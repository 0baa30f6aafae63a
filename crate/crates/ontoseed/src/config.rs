//! Pipeline configuration: one TOML file holding every path, predicate set,
//! blacklist and threshold. Nothing domain-specific is hardcoded elsewhere.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::ExclusionPolicy;
use crate::store::IngestFilter;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field {field}: {message}")]
    Invalid { field: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub dump: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub terms: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub cu_threshold: usize,
    pub max_depth: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            cu_threshold: crate::upper::DEFAULT_CU_THRESHOLD,
            max_depth: crate::upper::DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub trim: bool,
    pub cutoffs: Vec<u32>,
    /// 0 = one worker per logical CPU.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trim: true,
            cutoffs: (1..=7).collect(),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub filter: IngestFilter,
    pub exclusion: ExclusionPolicy,
    pub analysis: AnalysisConfig,
    pub run: RunConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig, ConfigError> {
        let config: PipelineConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.filter
            .validate()
            .map_err(|e| ConfigError::Invalid {
                field: "filter".into(),
                message: e.to_string(),
            })?;
        if self.analysis.cu_threshold < 1 {
            return Err(ConfigError::Invalid {
                field: "analysis.cu_threshold".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.analysis.max_depth < 1 {
            return Err(ConfigError::Invalid {
                field: "analysis.max_depth".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.run.cutoffs.is_empty() {
            return Err(ConfigError::Invalid {
                field: "run.cutoffs".into(),
                message: "at least one NES cutoff required".into(),
            });
        }
        if self.run.cutoffs.iter().any(|&c| c < 1) {
            return Err(ConfigError::Invalid {
                field: "run.cutoffs".into(),
                message: "cutoffs must be at least 1".into(),
            });
        }
        if self.paths.out_dir.as_os_str().is_empty() {
            return Err(ConfigError::Invalid {
                field: "paths.out_dir".into(),
                message: "output directory required".into(),
            });
        }
        Ok(())
    }

    /// Snapshot location: explicit path or `<out_dir>/snapshot.bin`.
    pub fn snapshot_path(&self) -> PathBuf {
        self.paths
            .snapshot
            .clone()
            .unwrap_or_else(|| self.paths.out_dir.join("snapshot.bin"))
    }

    /// Digest over the canonical TOML rendering of the configuration.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = toml::to_string(self).expect("config serialization");
        crate::store::hex(&Sha256::digest(canonical.as_bytes()))
    }

    /// A starter configuration seeded with the Wikidata defaults.
    pub fn example() -> PipelineConfig {
        PipelineConfig {
            paths: PathsConfig {
                dump: Some(PathBuf::from("dump.nt.gz")),
                snapshot: None,
                terms: Some(PathBuf::from("terms.txt")),
                ground_truth: Some(PathBuf::from("ground_truth.txt")),
                out_dir: PathBuf::from("out"),
            },
            filter: IngestFilter::default(),
            exclusion: ExclusionPolicy::wikidata_defaults(),
            analysis: AnalysisConfig::default(),
            run: RunConfig::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization")
    }
}

impl PipelineConfig {
    /// Disables both exclusion models; mainly for fixtures.
    pub fn empty_blacklists(mut self) -> Self {
        self.exclusion.adjacent_blacklist = BTreeSet::new();
        self.exclusion.property_blacklist = BTreeSet::new();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips_through_toml() {
        let config = PipelineConfig::example();
        let text = config.to_toml();
        let back = PipelineConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
        assert_eq!(config.fingerprint(), back.fingerprint());
    }

    #[test]
    fn defaults_apply_to_missing_sections() {
        let config = PipelineConfig::from_toml("[paths]\nout_dir = \"out\"\n").unwrap();
        assert_eq!(config.analysis.cu_threshold, 2);
        assert_eq!(config.analysis.max_depth, 30);
        assert!(config.run.trim);
        assert_eq!(config.run.cutoffs, (1..=7).collect::<Vec<u32>>());
        assert_eq!(config.snapshot_path(), PathBuf::from("out/snapshot.bin"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = PipelineConfig::from_toml("[paths]\nout_dir = \"out\"\ntypo = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let cases = [
            ("[paths]\nout_dir = \"out\"\n[analysis]\ncu_threshold = 0\n", "cu_threshold"),
            ("[paths]\nout_dir = \"out\"\n[analysis]\nmax_depth = 0\n", "max_depth"),
            ("[paths]\nout_dir = \"out\"\n[run]\ncutoffs = []\n", "cutoffs"),
            ("[paths]\nout_dir = \"out\"\n[run]\ncutoffs = [0]\n", "cutoffs"),
        ];
        for (text, field) in cases {
            match PipelineConfig::from_toml(text) {
                Err(ConfigError::Invalid { field: f, .. }) => assert!(f.contains(field)),
                other => panic!("expected Invalid({field}), got {other:?}"),
            }
        }
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = PipelineConfig::example();
        let mut b = a.clone();
        b.analysis.cu_threshold = 3;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn missing_file_is_a_read_error() {
        let err = PipelineConfig::from_path(Path::new("/nonexistent/config.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Read { .. }));
    }
}
