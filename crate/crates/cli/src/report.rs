//! Machine-readable verification reports.

use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};

/// One named check with its worst residual over the sampled points.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check_name: String,
    pub samples_run: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Diagnostics for failed or short-sampled checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A solved Bethe system as reported by the `bethe` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct BetheRecord {
    pub n: usize,
    pub roots: Vec<[f64; 2]>,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub restart: usize,
    pub in_cell: bool,
    /// Transfer-matrix eigenvalue sampled along the spectral line.
    pub lambda_samples: Vec<LambdaSample>,
    /// Unwanted-term coefficient magnitudes at the roots.
    pub unwanted_terms: Vec<KValue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSample {
    pub u: [f64; 2],
    pub lambda: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct KValue {
    pub label: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub config: RunConfig,
    pub version: String,
    pub wall_time_ms: u128,
}

/// The full report emitted on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bethe: Option<BetheRecord>,
    pub environment: Environment,
    pub overall_pass: bool,
}

impl VerificationReport {
    /// Assembles the report: checks sorted by name, overall pass is the
    /// conjunction of the per-check flags.
    pub fn assemble(
        mut checks: Vec<CheckRecord>,
        bethe: Option<BetheRecord>,
        config: RunConfig,
        wall_time_ms: u128,
    ) -> Self {
        checks.sort_by(|a, b| a.check_name.cmp(&b.check_name));
        let overall_pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            checks,
            bethe,
            environment: Environment {
                config,
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms,
            },
            overall_pass,
        }
    }
}
