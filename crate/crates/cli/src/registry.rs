//! The memory registry: a TOML file holding the channel defaults and one
//! entry per benchmarked memory, optionally with published reference
//! rates for golden comparisons.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use qir_core::repeater::{MemorySpec, RepeaterConfig, SourceKind};

use crate::errors::CliError;

/// Whole registry: channel defaults plus memory entries.
#[derive(Debug, Clone)]
pub struct MemoryRegistry {
    pub defaults: RepeaterConfig,
    pub entries: Vec<RegistryEntry>,
}

/// One memory row plus its optional published reference rates.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub mem: MemorySpec,
    pub published_r_qm: Option<f64>,
    pub published_r_tau: Option<f64>,
    pub tolerance_pct: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    defaults: RepeaterConfig,
    #[serde(default, rename = "memory")]
    memories: Vec<RegistryRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryRow {
    name: String,
    source_kind: SourceKind,
    storage_efficiency: f64,
    lifetime_s: f64,
    #[serde(default = "default_multiplex")]
    multiplex_n: u32,
    mode_count_m: u32,
    qubit_fidelity: f64,
    /// Defaults to the source-kind convention when omitted.
    pair_probability: Option<f64>,
    published_r_qm: Option<f64>,
    published_r_tau: Option<f64>,
    #[serde(default = "default_tolerance")]
    tolerance_pct: f64,
}

fn default_multiplex() -> u32 {
    1
}

fn default_tolerance() -> f64 {
    10.0
}

/// Parses and validates a registry file. Diagnostics carry the TOML
/// span's line number.
pub fn load_registry(path: &Path, text: &str) -> Result<MemoryRegistry, CliError> {
    let file: RegistryFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        CliError::parse(path, line, e.message().to_string())
    })?;

    let mut names = HashSet::new();
    let mut entries = Vec::with_capacity(file.memories.len());
    for row in file.memories {
        if !names.insert(row.name.clone()) {
            return Err(CliError::parse(
                path,
                None,
                format!("duplicate memory name {:?}", row.name),
            ));
        }
        let mem = MemorySpec {
            name: row.name,
            storage_efficiency: row.storage_efficiency,
            lifetime_s: row.lifetime_s,
            multiplex_n: row.multiplex_n,
            mode_count_m: row.mode_count_m,
            qubit_fidelity: row.qubit_fidelity,
            source_kind: row.source_kind,
            pair_probability: row
                .pair_probability
                .unwrap_or_else(|| row.source_kind.default_pair_probability()),
        };
        entries.push(RegistryEntry {
            mem,
            published_r_qm: row.published_r_qm,
            published_r_tau: row.published_r_tau,
            tolerance_pct: row.tolerance_pct,
        });
    }
    file.defaults
        .validate()
        .map_err(|e| CliError::parse(path, None, format!("defaults: {e}")))?;
    Ok(MemoryRegistry {
        defaults: file.defaults,
        entries,
    })
}

fn line_of_offset(text: &str, offset: usize) -> u64 {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count() as u64
        + 1
}
