//! JSON attribution map documents: the map itself plus the settings that
//! produced it.

use std::fs;
use std::path::Path;

use freqatt_core::{AttributionMap, Domain, MaskPolicy, Method, OcclusionConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapHeader {
    pub occlusion: OcclusionConfig,
    pub mask: MaskPolicy,
    /// Seed of the random baseline for this sample.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub format_version: u32,
    pub sample_id: usize,
    pub method: Method,
    pub domain: Domain,
    pub target_class: usize,
    pub rows: usize,
    pub channels: usize,
    pub config: MapHeader,
    /// Row-major: `rows` steps or bins, `channels` columns.
    pub scores: Vec<f64>,
}

impl MapDocument {
    pub fn new(sample_id: usize, map: &AttributionMap, config: MapHeader) -> Self {
        Self {
            format_version: MAP_FORMAT_VERSION,
            sample_id,
            method: map.method,
            domain: map.domain,
            target_class: map.target_class,
            rows: map.rows(),
            channels: map.channels(),
            config,
            scores: map.scores().to_vec(),
        }
    }

    pub fn to_map(&self) -> Result<AttributionMap> {
        Ok(AttributionMap::new(
            self.domain,
            self.method,
            self.target_class,
            self.rows,
            self.channels,
            self.scores.clone(),
        )?)
    }
}

/// File name of the map of one sample and method.
pub fn map_file_name(sample_id: usize, method: Method) -> String {
    format!("sample{sample_id:05}_{method}.json")
}

pub fn save_map(doc: &MapDocument, path: &Path) -> Result<()> {
    let text = serde_json::to_string(doc).map_err(|e| CliError::format(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn load_map(path: &Path) -> Result<MapDocument> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: MapDocument = serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?;
    if doc.format_version != MAP_FORMAT_VERSION {
        return Err(CliError::format(path, format!("unsupported map format {}", doc.format_version)));
    }
    doc.to_map()?;
    Ok(doc)
}
