//! JSON run configuration, schema 1.  Unknown keys are rejected and
//! command-line flags override file values.

use crate::OutputFormat;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: u32,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
    pub verify: Option<VerifySection>,
    pub sweep: Option<SweepSection>,
    pub flow: Option<FlowSection>,
    #[serde(rename = "sphere-report")]
    pub sphere_report: Option<SphereSection>,
}

impl FileConfig {
    pub fn empty() -> Self {
        FileConfig {
            schema: 1,
            seed: None,
            output: None,
            format: None,
            threads: None,
            verify: None,
            sweep: None,
            flow: None,
            sphere_report: None,
        }
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub surface: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub t0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub terms: Option<Vec<(f64, u32, u32)>>,
    pub interior_t: Option<f64>,
    pub c: Option<f64>,
    pub samples: Option<usize>,
    pub fd_step: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub phi0: Option<Vec<f64>>,
    pub cycles: Option<usize>,
    pub initial_radius: Option<f64>,
    pub max_s: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub surface: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub t0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub terms: Option<Vec<(f64, u32, u32)>>,
    pub interior_t: Option<f64>,
    pub start: Option<Vec<f64>>,
    pub max_s: Option<f64>,
    pub pole_radius: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSection {
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub t0: Option<f64>,
    pub samples: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::empty());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
    if cfg.schema != 1 {
        return Err(format!(
            "unsupported config schema {} in {} (expected 1)",
            cfg.schema,
            path.display()
        ));
    }
    Ok(cfg)
}
