use std::path::Path;

use anyhow::Context;
use borninfeld::field::{BoundaryRule, BoxSpec};
use borninfeld::{Charge, ChargeConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// JSON run configuration shared by `check` and `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub charges: Vec<Charge>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub grid_box: Option<BoxSpec>,
    #[serde(default = "default_order")]
    pub order_m: usize,
    #[serde(default)]
    pub boundary_rule: BoundaryRule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_order() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Stationarity residual for grid solves.
    pub solver: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: borninfeld::field::solver::DEFAULT_TOL,
            max_iter: borninfeld::field::solver::DEFAULT_MAX_ITER,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(CliError::Input)?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Invalid(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })
    }

    pub fn charge_config(&self) -> Result<ChargeConfig, CliError> {
        Ok(ChargeConfig::new(self.dim, self.charges.clone())?)
    }
}
