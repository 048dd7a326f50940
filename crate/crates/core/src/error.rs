//! Error types shared across the crate.

use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while evaluating theta functions, assembling
/// R-matrices and Lax operators, or running the Bethe ansatz machinery.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A modular or coupling parameter is outside the admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The theta series failed to converge within the term cap.
    #[error("theta series did not converge within {terms} terms per side")]
    SeriesDivergence {
        /// Number of terms per side that were summed before giving up.
        terms: usize,
    },

    /// A theta value appearing in a denominator is too close to a lattice zero.
    #[error("denominator {label} has magnitude {magnitude:.3e}, below the pole tolerance {tolerance:.3e}")]
    Pole {
        /// Which denominator vanished, e.g. `theta(q - eta)`.
        label: String,
        /// Magnitude of the offending theta value.
        magnitude: f64,
        /// The pole tolerance in force.
        tolerance: f64,
    },

    /// Tensor-leg indices overlap or point outside the factor count.
    #[error("tensor leg indices out of range or overlapping: {0}")]
    IndexError(String),

    /// An evaluation module needs at least one site.
    #[error("evaluation module must contain at least one site")]
    EmptyModule,

    /// Two operators act on modules of different dimension.
    #[error("operators act on different modules ({left} vs {right} dimensions)")]
    ModuleMismatch {
        /// Dimension of the left operand's module.
        left: usize,
        /// Dimension of the right operand's module.
        right: usize,
    },

    /// Spectral parameters coincide modulo the period lattice.
    #[error("spectral parameters {i} and {j} coincide modulo the period lattice")]
    DuplicateRoots {
        /// First offending index (0-based).
        i: usize,
        /// Second offending index (0-based).
        j: usize,
    },

    /// The Newton iteration never reached the requested residual.
    #[error("Bethe solver did not converge: best residual {best_residual:.3e} after {restarts} restarts")]
    NoConvergence {
        /// Smallest residual norm seen across all restarts.
        best_residual: f64,
        /// Roots attaining that residual.
        best_roots: Vec<Complex64>,
        /// Number of restarts attempted.
        restarts: usize,
    },

    /// A candidate root set has coinciding components.
    #[error("Bethe roots coincide modulo the period lattice")]
    DegenerateRoots,

    /// A vector that should be generically nonzero collapsed numerically.
    #[error("vector norm {norm:.3e} below tolerance; evaluation point is non-generic or the root is spurious")]
    ZeroVector {
        /// Norm of the offending vector.
        norm: f64,
    },
}
