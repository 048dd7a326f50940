//! Modular and coupling parameters shared by every evaluation routine.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Modular parameter, coupling constant, and numerical tolerances.
///
/// `tau` is the modular parameter of the theta function (`Im(tau) > 0`),
/// `eta` the coupling constant of the elliptic quantum group. `series_tol`
/// controls theta-series truncation and `pole_tol` is the smallest magnitude
/// a theta value may have before a denominator is rejected as a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularParams {
    /// Modular parameter; the series requires `Im(tau) > 0`.
    pub tau: Complex64,
    /// Coupling constant of the elliptic quantum group.
    pub eta: Complex64,
    /// Absolute truncation tolerance for the theta series.
    pub series_tol: f64,
    /// Minimum magnitude of a theta value appearing in a denominator.
    pub pole_tol: f64,
}

impl ModularParams {
    /// Builds a parameter set, rejecting values outside the admissible domain.
    pub fn new(tau: Complex64, eta: Complex64) -> Result<Self> {
        let p = Self {
            tau,
            eta,
            series_tol: 1e-15,
            pole_tol: 1e-6,
        };
        p.validate()?;
        Ok(p)
    }

    /// Replaces the series truncation tolerance.
    pub fn with_series_tol(mut self, series_tol: f64) -> Result<Self> {
        self.series_tol = series_tol;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the pole-detection tolerance.
    pub fn with_pole_tol(mut self, pole_tol: f64) -> Result<Self> {
        self.pole_tol = pole_tol;
        self.validate()?;
        Ok(self)
    }

    /// Checks every invariant this type promises.
    pub fn validate(&self) -> Result<()> {
        if !self.tau.re.is_finite() || !self.tau.im.is_finite() {
            return Err(Error::InvalidParams("tau must be finite".into()));
        }
        if self.tau.im <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "tau must satisfy Im(tau) > 0, got Im(tau) = {}",
                self.tau.im
            )));
        }
        if !self.eta.re.is_finite() || !self.eta.im.is_finite() {
            return Err(Error::InvalidParams("eta must be finite".into()));
        }
        if !self.series_tol.is_finite() || self.series_tol <= 0.0 || self.series_tol > 1e-14 {
            return Err(Error::InvalidParams(format!(
                "series_tol must lie in (0, 1e-14], got {}",
                self.series_tol
            )));
        }
        if !self.pole_tol.is_finite() || self.pole_tol <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "pole_tol must be positive, got {}",
                self.pole_tol
            )));
        }
        Ok(())
    }
}

impl Default for ModularParams {
    /// The reference parameter set used throughout the test suite:
    /// `tau = 0.8i`, `eta = 0.12 + 0.03i`.
    fn default() -> Self {
        Self {
            tau: Complex64::new(0.0, 0.8),
            eta: Complex64::new(0.12, 0.03),
            series_tol: 1e-15,
            pole_tol: 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        ModularParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_lower_half_plane_tau() {
        let err = ModularParams::new(Complex64::new(0.0, -0.8), Complex64::new(0.12, 0.03));
        assert!(matches!(err, Err(Error::InvalidParams(_))));
        let err = ModularParams::new(Complex64::new(0.3, 0.0), Complex64::new(0.12, 0.03));
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_non_finite_input() {
        let err = ModularParams::new(Complex64::new(f64::NAN, 0.8), Complex64::new(0.12, 0.03));
        assert!(matches!(err, Err(Error::InvalidParams(_))));
        let err = ModularParams::new(
            Complex64::new(0.0, 0.8),
            Complex64::new(f64::INFINITY, 0.03),
        );
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_loose_series_tol() {
        let err = ModularParams::default().with_series_tol(1e-10);
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }
}
