//! Tensor products of evaluation modules and the Lax matrix acting on them.
//!
//! An [`EvaluationModule`] is the `n`-fold tensor product of 3-dimensional
//! evaluation representations with evaluation points `z_1, ..., z_n`. The Lax
//! matrix acts on `aux (x) W` (auxiliary leg 0, sites at legs `1..=n`) as the
//! ordered product
//!
//! ```text
//! L(q, u) = R_{01}(q - 2 eta (h_2 + ... + h_n), u - z_1) ... R_{0n}(q, u - z_n)
//! ```
//!
//! and satisfies the dynamical RLL relation on `aux (x) aux (x) W`.

use ndarray::{s, Array2};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::opalg::ShiftedOperator;
use crate::params::ModularParams;
use crate::rmatrix::{r_dyn_shifted, WEIGHTS};
use crate::util::max_abs;

/// A tensor product of evaluation representations.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationModule {
    /// Evaluation points `z_1, ..., z_n`.
    pub z: Vec<Complex64>,
    /// Number of tensor factors.
    pub n_sites: usize,
    /// Dimension `3^n` of the module.
    pub dim: usize,
    /// Weight of each basis vector (row-major digit expansion, leg 1 slowest).
    pub weights: Vec<i64>,
    /// Indices of the zero-weight subspace `W[0]`.
    pub zero_weight_indices: Vec<usize>,
}

/// Builds the tensor-product module at evaluation points `z`.
pub fn build_module(z: &[Complex64]) -> Result<EvaluationModule> {
    if z.is_empty() {
        return Err(Error::EmptyModule);
    }
    for (k, zk) in z.iter().enumerate() {
        if !zk.re.is_finite() || !zk.im.is_finite() {
            return Err(Error::InvalidParams(format!(
                "evaluation point z[{k}] must be finite"
            )));
        }
    }
    let n = z.len();
    let dim = 3usize.pow(n as u32);
    let mut weights = Vec::with_capacity(dim);
    for idx in 0..dim {
        let mut rem = idx;
        let mut w = 0i64;
        for _ in 0..n {
            w += WEIGHTS[rem % 3];
            rem /= 3;
        }
        weights.push(w);
    }
    let zero_weight_indices = (0..dim).filter(|&i| weights[i] == 0).collect();
    Ok(EvaluationModule {
        z: z.to_vec(),
        n_sites: n,
        dim,
        weights,
        zero_weight_indices,
    })
}

/// Builds the Lax matrix `L(q, u)` on `aux (x) W`, a `3^(n+1)` square matrix.
pub fn build_lax(
    module: &EvaluationModule,
    q: Complex64,
    u: Complex64,
    p: &ModularParams,
) -> Result<Array2<Complex64>> {
    let n = module.n_sites;
    let n_legs = n + 1;
    let dim = 3usize.pow(n_legs as u32);
    let mut m = Array2::eye(dim);
    for k in 1..=n {
        let shifts: Vec<usize> = (k + 1..=n).collect();
        let factor = r_dyn_shifted(0, k, &shifts, q, u - module.z[k - 1], n_legs, p)?;
        m = m.dot(&factor);
    }
    Ok(m)
}

/// Lax matrix on `n_legs` legs with the auxiliary space at `leg_aux`, the
/// sites at legs `site0..site0+n`, and an optional extra dynamical shift leg.
#[allow(clippy::too_many_arguments)]
fn lax_on(
    module: &EvaluationModule,
    leg_aux: usize,
    site0: usize,
    n_legs: usize,
    q: Complex64,
    u: Complex64,
    shift_extra: Option<usize>,
    p: &ModularParams,
) -> Result<Array2<Complex64>> {
    let n = module.n_sites;
    let dim = 3usize.pow(n_legs as u32);
    let mut m = Array2::eye(dim);
    for k in 0..n {
        let leg_k = site0 + k;
        let mut shifts: Vec<usize> = (leg_k + 1..site0 + n).collect();
        if let Some(extra) = shift_extra {
            shifts.push(extra);
        }
        let factor = r_dyn_shifted(leg_aux, leg_k, &shifts, q, u - module.z[k], n_legs, p)?;
        m = m.dot(&factor);
    }
    Ok(m)
}

/// Residual of the dynamical RLL relation
///
/// ```text
/// R_12(q - 2 eta h_W, u1-u2) L_1(q, u1) L_2(q - 2 eta h_1, u2)
///   = L_2(q, u2) L_1(q - 2 eta h_2, u1) R_12(q, u1-u2)
/// ```
///
/// on `aux (x) aux (x) W`, relative to the largest entry of the left side.
pub fn rll_residual(
    module: &EvaluationModule,
    q: Complex64,
    u1: Complex64,
    u2: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let n = module.n_sites;
    let n_legs = n + 2;
    let u12 = u1 - u2;
    let w_legs: Vec<usize> = (2..2 + n).collect();
    let lhs = r_dyn_shifted(0, 1, &w_legs, q, u12, n_legs, p)?
        .dot(&lax_on(module, 0, 2, n_legs, q, u1, None, p)?)
        .dot(&lax_on(module, 1, 2, n_legs, q, u2, Some(0), p)?);
    let rhs = lax_on(module, 1, 2, n_legs, q, u2, None, p)?
        .dot(&lax_on(module, 0, 2, n_legs, q, u1, Some(1), p)?)
        .dot(&r_dyn_shifted(0, 1, &[], q, u12, n_legs, p)?);
    Ok(max_abs(&(&lhs - &rhs).view()) / max_abs(&lhs.view()))
}

/// The generator `L_{row,col}(u)` as a q-difference operator on the module.
///
/// `row` and `col` are 1-based auxiliary-space component labels; the operator
/// shifts the dynamical parameter by `-2 eta * weight(col)`.
pub fn generator(
    module: &EvaluationModule,
    row: usize,
    col: usize,
    u: Complex64,
    p: &ModularParams,
) -> Result<ShiftedOperator> {
    if !(1..=3).contains(&row) || !(1..=3).contains(&col) {
        return Err(Error::IndexError(format!(
            "generator labels ({row}, {col}) must lie in 1..=3"
        )));
    }
    let dim_w = module.dim;
    let m = module.clone();
    let pp = *p;
    let f = move |q: Complex64| -> Result<Array2<Complex64>> {
        let lax = build_lax(&m, q, u, &pp)?;
        Ok(lax
            .slice(s![
                (row - 1) * dim_w..row * dim_w,
                (col - 1) * dim_w..col * dim_w
            ])
            .to_owned())
    };
    Ok(ShiftedOperator::from_term(
        dim_w,
        p.eta,
        -WEIGHTS[col - 1],
        Arc::new(f),
    ))
}
