//! Run configuration: JSON schema, validation, and CLI overrides.
//!
//! Complex numbers are encoded as two-element `[re, im]` arrays throughout
//! the config and report schemas.

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Version stamped on config and report schemas.
pub const SCHEMA_VERSION: u32 = 1;

/// Which family of checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Theta-function identities.
    Theta,
    /// R-matrix identities (including the omega quotient).
    Rmatrix,
    /// Lax-matrix exchange relation.
    Lax,
    /// Operator-algebra relations and the transfer-matrix family.
    Opalg,
    /// Bethe-ansatz structure checks (vacuum, symmetry, cancellation).
    Bethe,
    /// Everything above.
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Theta => "theta",
            Suite::Rmatrix => "rmatrix",
            Suite::Lax => "lax",
            Suite::Opalg => "opalg",
            Suite::Bethe => "bethe",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// A config-validation failure naming the offending field.
#[derive(Debug)]
pub struct ConfigError {
    /// The config field that failed validation.
    pub field: &'static str,
    /// Human-readable explanation.
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

/// The config file as written on disk; every field is optional so partial
/// configs resolve against defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: Option<u32>,
    pub tau: Option<[f64; 2]>,
    pub eta: Option<[f64; 2]>,
    pub c: Option<[f64; 2]>,
    pub z: Option<Vec<[f64; 2]>>,
    pub n: Option<i64>,
    pub suite: Option<Suite>,
    pub samples: Option<i64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// Command-line overrides applied on top of the file config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suite: Option<Suite>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// A fully resolved, validated run configuration; echoed verbatim into the
/// report's environment block.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub tau: [f64; 2],
    pub eta: [f64; 2],
    pub c: [f64; 2],
    pub z: Vec<[f64; 2]>,
    pub n: usize,
    pub suite: Suite,
    pub samples: usize,
    pub tol: Option<f64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn tau_c(&self) -> Complex64 {
        Complex64::new(self.tau[0], self.tau[1])
    }
    pub fn eta_c(&self) -> Complex64 {
        Complex64::new(self.eta[0], self.eta[1])
    }
    pub fn c_c(&self) -> Complex64 {
        Complex64::new(self.c[0], self.c[1])
    }
    pub fn z_c(&self) -> Vec<Complex64> {
        self.z.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }
}

fn finite_pair(v: [f64; 2]) -> bool {
    v[0].is_finite() && v[1].is_finite()
}

/// Resolves a file config plus CLI overrides into a validated [`RunConfig`].
pub fn resolve(file: RunConfigFile, over: &Overrides) -> Result<RunConfig, ConfigError> {
    let schema_version = file.schema_version.unwrap_or(SCHEMA_VERSION);
    if schema_version != SCHEMA_VERSION {
        return Err(err(
            "schema_version",
            format!("unsupported version {schema_version}, expected {SCHEMA_VERSION}"),
        ));
    }
    let tau = file.tau.unwrap_or([0.0, 0.8]);
    if !finite_pair(tau) {
        return Err(err("tau", "must be finite"));
    }
    if tau[1] <= 0.0 {
        return Err(err(
            "tau",
            format!("Im(tau) must be positive, got {}", tau[1]),
        ));
    }
    let eta = file.eta.unwrap_or([0.12, 0.03]);
    if !finite_pair(eta) {
        return Err(err("eta", "must be finite"));
    }
    if eta == [0.0, 0.0] {
        return Err(err("eta", "must be nonzero"));
    }
    let c = file.c.unwrap_or([0.0, 0.0]);
    if !finite_pair(c) {
        return Err(err("c", "must be finite"));
    }
    let z = file.z.unwrap_or_else(|| vec![[0.3, 0.0]]);
    if z.is_empty() {
        return Err(err("z", "must contain at least one evaluation point"));
    }
    if let Some(bad) = z.iter().find(|p| !finite_pair(**p)) {
        return Err(err("z", format!("contains non-finite entry {bad:?}")));
    }
    let n = match file.n {
        Some(n) if n <= 0 => {
            return Err(err("n", format!("must be a positive site count, got {n}")))
        }
        Some(n) if n as usize != z.len() => {
            return Err(err(
                "n",
                format!("must equal the number of evaluation points ({}), got {n}", z.len()),
            ))
        }
        Some(n) => n as usize,
        None => z.len(),
    };
    let samples = match over.samples {
        Some(s) => s as i64,
        None => file.samples.unwrap_or(50),
    };
    if samples < 1 {
        return Err(err("samples", format!("must be at least 1, got {samples}")));
    }
    let tol = over.tol.or(file.tol);
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(err("tol", format!("must be a positive real, got {t}")));
        }
    }
    Ok(RunConfig {
        schema_version,
        tau,
        eta,
        c,
        z,
        n,
        suite: over.suite.or(file.suite).unwrap_or(Suite::All),
        samples: samples as usize,
        tol,
        seed: over.seed.or(file.seed).unwrap_or(42),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = resolve(RunConfigFile::default(), &Overrides::default()).unwrap();
        assert_eq!(cfg.suite, Suite::All);
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.samples, 50);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn rejects_bad_tau() {
        let file = RunConfigFile {
            tau: Some([0.5, -0.1]),
            ..Default::default()
        };
        let e = resolve(file, &Overrides::default()).unwrap_err();
        assert_eq!(e.field, "tau");
    }

    #[test]
    fn rejects_site_count_mismatch() {
        let file = RunConfigFile {
            z: Some(vec![[0.1, 0.0], [0.45, 0.0]]),
            n: Some(3),
            ..Default::default()
        };
        let e = resolve(file, &Overrides::default()).unwrap_err();
        assert_eq!(e.field, "n");
        let file = RunConfigFile {
            n: Some(0),
            ..Default::default()
        };
        let e = resolve(file, &Overrides::default()).unwrap_err();
        assert_eq!(e.field, "n");
    }

    #[test]
    fn overrides_win() {
        let file = RunConfigFile {
            suite: Some(Suite::Theta),
            samples: Some(10),
            ..Default::default()
        };
        let over = Overrides {
            suite: Some(Suite::Rmatrix),
            samples: Some(25),
            seed: Some(7),
            tol: Some(1e-6),
        };
        let cfg = resolve(file, &over).unwrap();
        assert_eq!(cfg.suite, Suite::Rmatrix);
        assert_eq!(cfg.samples, 25);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol, Some(1e-6));
    }
}
