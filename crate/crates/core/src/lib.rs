//! Numerical toolkit for the elliptic quantum group associated with `so(3)`:
//! Jacobi theta functions, the 9x9 dynamical R-matrix, Lax matrices on
//! tensor products of three-dimensional evaluation modules, a q-difference
//! operator algebra over the dynamical parameter, and the algebraic Bethe
//! ansatz (creation operators, Bethe equations, transfer-matrix eigenvalues,
//! eigenvector verification).
//!
//! Everything is exact-formula numerics on small modules: the crate's tests
//! verify each structural identity (quasiperiodicity, unitarity, the shifted
//! Yang-Baxter equation, the RLL relation, generator commutation relations,
//! creation-operator exchange symmetry, vanishing of unwanted terms at Bethe
//! roots) to machine-level tolerances.
//!
//! Quick start:
//!
//! ```
//! use ebethe::{build_module, solve_bethe, eigencheck, ModularParams, SolveOptions};
//! use num_complex::Complex64;
//!
//! let p = ModularParams::default();
//! let z = vec![Complex64::new(0.3, 0.0)];
//! let sys = solve_bethe(&z, Complex64::new(0.0, 0.0), &SolveOptions::default(), &p).unwrap();
//! assert!(sys.residual_norm < 1e-11);
//!
//! let module = build_module(&z).unwrap();
//! let u = Complex64::new(0.37, 0.21);
//! let q = Complex64::new(0.31, 0.2);
//! let r = eigencheck(&module, &sys.roots, sys.c, u, &[q], &p).unwrap();
//! assert!(r < 1e-8);
//! ```

pub mod bethe;
pub mod error;
pub mod opalg;
pub mod params;
pub mod representation;
pub mod rmatrix;
pub mod theta;
pub(crate) mod util;

pub use bethe::{
    a1_action_residual, alpha_beta_identity_residual, annihilation_residual, bethe_residual,
    coefficient, eigencheck, eigenvalue_lambda, f1_closed, k_residuals, lambda_general, phi,
    phi_symmetry_residual, sixline_identity_residual, solve_bethe, vacuum_action_residual,
    vacuum_eigenvalue, vacuum_prefactor, vacuum_state, BetheSystem, CoefficientName, SolveOptions,
};
pub use error::{Error, Result};
pub use opalg::{
    commutation_residual, op_residual, transfer_commute_residual, transfer_matrix,
    transfer_zero_weight_leak, CoeffFn, ShiftedOperator,
};
pub use params::ModularParams;
pub use representation::{build_lax, build_module, generator, rll_residual, EvaluationModule};
pub use rmatrix::{
    alpha, beta, build_r, component, delta, dybe_residual, epsilon, g_fn, gamma, omega_closed,
    omega_quotient, perm_matrix, r_at_zero_residual, r_dyn_shifted, random_cell_point,
    unitarity_residual, y_fn, z_fn, zero_weight_violation, ComponentName, WEIGHTS,
};
pub use theta::{quasiperiodicity_residual, theta, three_term_residual, ThetaValue};
