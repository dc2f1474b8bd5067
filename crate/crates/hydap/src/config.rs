//! Run configuration: one TOML file with a section per module. Every field
//! is optional; `hydap --print-config` prints the full set of defaults.

use std::fs;
use std::path::Path;

use hydap_core::mixture::FmmConfig;
use hydap_core::partition::KPrototypesConfig;
use hydap_core::pipeline::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub kprototypes: KPrototypesConfig,
    pub fmm: FmmConfig,
    pub benchmark: BenchConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            // a single start per fit, as in the benchmark comparisons
            kprototypes: KPrototypesConfig {
                restarts: 1,
                ..KPrototypesConfig::default()
            },
            fmm: FmmConfig::default(),
            benchmark: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Cluster count handed to the comparator methods (HyDaP picks its own).
    pub comparator_k: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { comparator_k: 3 }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
