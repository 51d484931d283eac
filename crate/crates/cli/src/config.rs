//! Optional TOML configuration file for the CLI.
//!
//! Every command-line flag has a file counterpart; flags win over the file.
//!
//! ```toml
//! profile = "5g"
//! policy = "both"
//! gamma = 10.0
//! drops = 10000
//! ues_per_sector = 10
//! seed = 1
//! out = "results"
//! center_only = false
//! no_plots = false
//!
//! [sweep]
//! dmin = 10.0
//! dmax = 100.0
//! step = 5.0
//! samples = 4000
//!
//! # Any SystemProfile field; `base` picks the starting profile.
//! [profile_overrides]
//! inter_site_distance_m = 100.0
//! [profile_overrides.tissue]
//! reflection_coefficient = 0.5
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use emfsim_core::profiles::{builtin_profile, Generation, SystemProfile};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub profile: Option<String>,
    pub policy: Option<String>,
    pub gamma: Option<f64>,
    pub drops: Option<usize>,
    pub ues_per_sector: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub center_only: Option<bool>,
    pub no_plots: Option<bool>,
    pub threads: Option<usize>,
    pub rings: Option<u32>,
    pub update_period: Option<u32>,
    pub cdf_points: Option<usize>,
    #[serde(default)]
    pub sweep: SweepFile,
    pub profile_overrides: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub dmin: Option<f64>,
    pub dmax: Option<f64>,
    pub step: Option<f64>,
    pub samples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    /// Built-in profile for `generation` with this file's overrides applied.
    pub fn profile_for(&self, generation: Generation) -> Result<SystemProfile> {
        let profile = match &self.profile_overrides {
            None => builtin_profile(generation),
            Some(table) if table.contains_key("base") => SystemProfile::from_table(table)?,
            Some(table) => builtin_profile(generation).with_overrides(table)?,
        };
        Ok(profile)
    }
}

/// Parses `5g`, `5g,4g` or `all`.
pub fn parse_generations(spec: &str) -> Result<Vec<Generation>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(Generation::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| Ok(s.trim().parse::<Generation>()?))
        .collect()
}
