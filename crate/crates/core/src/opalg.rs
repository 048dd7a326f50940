//! q-difference operators on an evaluation module.
//!
//! A [`ShiftedOperator`] is a finite sum of terms `(s, M_s)` acting on
//! functions of the dynamical parameter by
//!
//! ```text
//! (Op psi)(q) = sum_s M_s(q) psi(q + 2 eta s)
//! ```
//!
//! Composition shifts the right factor's argument, `M_a(q) N_b(q + 2 eta a)`,
//! so the generators of the monodromy matrix obey their commutation relations
//! as operator identities, uniformly in `q`. The transfer matrix is the trace
//! `t(u) = L_11(u) + L_22(u) + L_33(u)`; it preserves the zero-weight
//! subspace `W[0]` and commutes with itself there.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ModularParams;
use crate::representation::{generator, EvaluationModule};
use crate::rmatrix::{alpha, beta, delta, g_fn, gamma, omega_closed, y_fn, z_fn};
use crate::util::{max_abs, max_abs_vec};

/// A q-dependent coefficient matrix.
pub type CoeffFn = Arc<dyn Fn(Complex64) -> Result<Array2<Complex64>> + Send + Sync>;

/// A finite sum of q-difference terms `(shift, coefficient matrix)`.
#[derive(Clone)]
pub struct ShiftedOperator {
    dim: usize,
    eta: Complex64,
    terms: Vec<(i64, CoeffFn)>,
}

impl std::fmt::Debug for ShiftedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftedOperator")
            .field("dim", &self.dim)
            .field("eta", &self.eta)
            .field("shifts", &self.terms.iter().map(|(s, _)| *s).collect::<Vec<_>>())
            .finish()
    }
}

impl ShiftedOperator {
    /// The identity operator on a module of dimension `dim`.
    pub fn identity(dim: usize, eta: Complex64) -> Self {
        let f = move |_q: Complex64| Ok(Array2::eye(dim));
        Self {
            dim,
            eta,
            terms: vec![(0, Arc::new(f))],
        }
    }

    /// A single-term operator with the given shift and coefficient.
    pub fn from_term(dim: usize, eta: Complex64, shift: i64, coeff: CoeffFn) -> Self {
        Self {
            dim,
            eta,
            terms: vec![(shift, coeff)],
        }
    }

    /// Dimension of the module this operator acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of (unmerged) terms in the sum.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Operator product `self * other`: `M_a(q) N_b(q + 2 eta a)` with
    /// total shift `a + b`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ModuleMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let eta = self.eta;
        let mut terms: Vec<(i64, CoeffFn)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (sa, fa) in &self.terms {
            for (sb, fb) in &other.terms {
                let (sa, fa, fb) = (*sa, fa.clone(), fb.clone());
                let f = move |q: Complex64| -> Result<Array2<Complex64>> {
                    Ok(fa(q)?.dot(&fb(q + 2.0 * eta * sa as f64)?))
                };
                terms.push((sa + sb, Arc::new(f)));
            }
        }
        Ok(Self {
            dim: self.dim,
            eta,
            terms,
        })
    }

    /// Multiplies every term by the scalar function `f(q)`, evaluated at the
    /// outer (unshifted) dynamical parameter.
    pub fn scale<F>(&self, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let terms = self
            .terms
            .iter()
            .map(|(s, coeff)| {
                let (coeff, f) = (coeff.clone(), f.clone());
                let g = move |q: Complex64| -> Result<Array2<Complex64>> {
                    Ok(coeff(q)? * f(q)?)
                };
                (*s, Arc::new(g) as CoeffFn)
            })
            .collect();
        Self {
            dim: self.dim,
            eta: self.eta,
            terms,
        }
    }

    /// Multiplies every term by a constant.
    pub fn scale_const(&self, v: Complex64) -> Self {
        self.scale(move |_| Ok(v))
    }

    /// Operator sum `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ModuleMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            dim: self.dim,
            eta: self.eta,
            terms,
        })
    }

    /// Operator difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_const(Complex64::new(-1.0, 0.0)))
    }

    /// Applies the operator to a `W`-valued function of `q`.
    pub fn apply<F>(&self, psi: F, q: Complex64) -> Result<Array1<Complex64>>
    where
        F: Fn(Complex64) -> Result<Array1<Complex64>>,
    {
        let mut out = Array1::zeros(self.dim);
        for (s, coeff) in &self.terms {
            let v = psi(q + 2.0 * self.eta * *s as f64)?;
            if v.len() != self.dim {
                return Err(Error::ModuleMismatch {
                    left: self.dim,
                    right: v.len(),
                });
            }
            out = out + coeff(q)?.dot(&v);
        }
        Ok(out)
    }

    /// Collects the terms at `q` into one coefficient matrix per shift.
    pub fn merged(&self, q: Complex64) -> Result<BTreeMap<i64, Array2<Complex64>>> {
        let mut out: BTreeMap<i64, Array2<Complex64>> = BTreeMap::new();
        for (s, coeff) in &self.terms {
            let m = coeff(q)?;
            out.entry(*s)
                .and_modify(|acc| *acc += &m)
                .or_insert(m);
        }
        Ok(out)
    }
}

/// Largest per-shift relative difference between two operators at `q`.
pub fn op_residual(a: &ShiftedOperator, b: &ShiftedOperator, q: Complex64) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::ModuleMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let da = a.merged(q)?;
    let db = b.merged(q)?;
    let zero = Array2::zeros((a.dim, a.dim));
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for s in da.keys().chain(db.keys()) {
        let ma = da.get(s).unwrap_or(&zero);
        let mb = db.get(s).unwrap_or(&zero);
        num = num.max(max_abs(&(ma - mb).view()));
        den = den.max(max_abs(&ma.view())).max(max_abs(&mb.view()));
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// The transfer matrix `t(u) = L_11(u) + L_22(u) + L_33(u)`.
pub fn transfer_matrix(
    module: &EvaluationModule,
    u: Complex64,
    p: &ModularParams,
) -> Result<ShiftedOperator> {
    let mut t = generator(module, 1, 1, u, p)?;
    t = t.add(&generator(module, 2, 2, u, p)?)?;
    t = t.add(&generator(module, 3, 3, u, p)?)?;
    Ok(t)
}

/// How far `t(u)` maps a `W[0]`-valued function outside `W[0]`: the largest
/// magnitude of any nonzero-weight component of the image, relative to the
/// largest component overall. Structurally zero.
pub fn transfer_zero_weight_leak(
    module: &EvaluationModule,
    u: Complex64,
    q: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let t = transfer_matrix(module, u, p)?;
    let pattern = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-0.7, 0.2),
        Complex64::new(0.3, -0.4),
    ];
    let mut v0 = Array1::zeros(module.dim);
    for (k, &i) in module.zero_weight_indices.iter().enumerate() {
        v0[i] = pattern[k % 3];
    }
    let psi = move |qq: Complex64| -> Result<Array1<Complex64>> {
        Ok(&v0 * (0.3 * qq).exp())
    };
    let image = t.apply(psi, q)?;
    let scale = max_abs_vec(&image.view()).max(f64::MIN_POSITIVE);
    let mut leak = 0.0f64;
    for i in 0..module.dim {
        if module.weights[i] != 0 {
            leak = leak.max(image[i].norm());
        }
    }
    Ok(leak / scale)
}

/// Residual of `[t(u), t(v)] = 0` restricted to the zero-weight subspace,
/// relative to the largest restricted entry of `t(u) t(v)`.
pub fn transfer_commute_residual(
    module: &EvaluationModule,
    u: Complex64,
    v: Complex64,
    q: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let tu = transfer_matrix(module, u, p)?;
    let tv = transfer_matrix(module, v, p)?;
    let uv = tu.compose(&tv)?;
    let comm = uv.sub(&tv.compose(&tu)?)?;
    let zw = &module.zero_weight_indices;
    let restrict = |m: &Array2<Complex64>| -> f64 {
        let mut worst = 0.0f64;
        for &i in zw {
            for &j in zw {
                worst = worst.max(m[[i, j]].norm());
            }
        }
        worst
    };
    let mut num = 0.0f64;
    for m in comm.merged(q)?.values() {
        num = num.max(restrict(m));
    }
    let mut den = 0.0f64;
    for m in uv.merged(q)?.values() {
        den = den.max(restrict(m));
    }
    Ok(num / den.max(f64::MIN_POSITIVE))
}

/// Residual of one of the five generator commutation relations at spectral
/// parameters `(u1, u2)` and dynamical parameter `q`; `relation_id` is 1-5.
///
/// With `u21 = u2 - u1` and subscripts denoting that argument, the relations
/// are:
///
/// 1. `B1(u1) B1(u2) = omega_21 (B1(u2) B1(u1) - y_21(q)^-1 B2(u2) A1(u1))
///    + y_12(q)^-1 B2(u1) A1(u2)`
/// 2. `A1(u1) B1(u2) = z_21(q) B1(u2) A1(u1)
///    - (alpha_21(eta,q) / beta_21(q,eta)) B1(u1) A1(u2)`
/// 3. `A1(u1) B2(u2) = gamma_21(q,-q)^-1 ( g_21 B2(u2) A1(u1)
///    + gamma_21(eta,-q) B1(u1) B1(u2) - delta_21(-q) B2(u1) A1(u2) )`
/// 4. `B1(u2) B2(u1) = g_21^-1 ( beta_21(-q,eta) B2(u1) B1(u2)
///    + alpha_21(eta,-q) B1(u1) B2(u2) )`
/// 5. `B2(u2) B1(u1) = g_21^-1 ( beta_21(eta,-q) B1(u1) B2(u2)
///    + alpha_21(-q,eta) B2(u1) B1(u2) )`
pub fn commutation_residual(
    module: &EvaluationModule,
    relation_id: u8,
    u1: Complex64,
    u2: Complex64,
    q: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let a1 = |u| generator(module, 1, 1, u, p);
    let b1 = |u| generator(module, 1, 2, u, p);
    let b2 = |u| generator(module, 1, 3, u, p);
    let u21 = u2 - u1;
    let u12 = u1 - u2;
    let pp = *p;
    let (lhs, rhs) = match relation_id {
        1 => {
            let lhs = b1(u1)?.compose(&b1(u2)?)?;
            let main = b1(u2)?.compose(&b1(u1)?)?.sub(
                &b2(u2)?
                    .compose(&a1(u1)?)?
                    .scale(move |q| Ok(1.0 / y_fn(q, u21, &pp)?)),
            )?;
            let rhs = main
                .scale_const(omega_closed(u21, p)?)
                .add(&b2(u1)?.compose(&a1(u2)?)?.scale(move |q| Ok(1.0 / y_fn(q, u12, &pp)?)))?;
            (lhs, rhs)
        }
        2 => {
            let lhs = a1(u1)?.compose(&b1(u2)?)?;
            let rhs = b1(u2)?
                .compose(&a1(u1)?)?
                .scale(move |q| z_fn(q, u21, &pp))
                .sub(&b1(u1)?.compose(&a1(u2)?)?.scale(move |q| {
                    Ok(alpha(pp.eta, q, u21, &pp)? / beta(q, pp.eta, u21, &pp)?)
                }))?;
            (lhs, rhs)
        }
        3 => {
            let lhs = a1(u1)?.compose(&b2(u2)?)?;
            let rhs = b2(u2)?
                .compose(&a1(u1)?)?
                .scale_const(g_fn(u21, p)?)
                .add(&b1(u1)?.compose(&b1(u2)?)?.scale(move |q| gamma(pp.eta, -q, u21, &pp)))?
                .sub(&b2(u1)?.compose(&a1(u2)?)?.scale(move |q| delta(-q, u21, &pp)))?
                .scale(move |q| Ok(1.0 / gamma(q, -q, u21, &pp)?));
            (lhs, rhs)
        }
        4 => {
            let lhs = b1(u2)?.compose(&b2(u1)?)?;
            let rhs = b2(u1)?
                .compose(&b1(u2)?)?
                .scale(move |q| beta(-q, pp.eta, u21, &pp))
                .add(&b1(u1)?.compose(&b2(u2)?)?.scale(move |q| alpha(pp.eta, -q, u21, &pp)))?
                .scale_const(1.0 / g_fn(u21, p)?);
            (lhs, rhs)
        }
        5 => {
            let lhs = b2(u2)?.compose(&b1(u1)?)?;
            let rhs = b1(u1)?
                .compose(&b2(u2)?)?
                .scale(move |q| beta(pp.eta, -q, u21, &pp))
                .add(&b2(u1)?.compose(&b1(u2)?)?.scale(move |q| alpha(-q, pp.eta, u21, &pp)))?
                .scale_const(1.0 / g_fn(u21, p)?);
            (lhs, rhs)
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "relation_id must be 1..=5, got {other}"
            )))
        }
    };
    op_residual(&lhs, &rhs, q)
}
