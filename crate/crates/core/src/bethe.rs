//! The algebraic Bethe ansatz: pseudovacuum, creation operators, Bethe
//! equations, and transfer-matrix eigenvalues.
//!
//! The pseudovacuum is `Omega(q) = f(q) e_1 (x) ... (x) e_1` with
//! `f(q) = exp(c q) theta(q - eta)^n`. The diagonal generators act on it by
//! explicit scalar functions `a_1, a_2, a_3`, and the lower-triangular
//! generators annihilate it. Candidate eigenvectors are
//! `Psi(q) = (Phi_n(u_1, ..., u_n) Omega)(q)` where `Phi_n` is built from the
//! creation recurrence
//!
//! ```text
//! Phi_n(u_1, ..., u_n) = L_12(u_1) Phi_{n-1}(u_2, ..., u_n)
//!   - sum_{j=2}^n  (prod_{k=2}^{j-1} omega(u_j - u_k)) / y(q, u_1 - u_j)
//!     * (prod_{k>=2, k != j} z(q + 2 eta, u_k - u_j))
//!     * L_13(u_1) Phi_{n-2}(rest) L_11(u_j).
//! ```
//!
//! `Psi` is an eigenvector of the transfer matrix exactly when the roots
//! satisfy the Bethe equations
//!
//! ```text
//! prod_k theta(u_j - z_k - 2 eta) / theta(u_j - z_k)
//!   = exp(2 c eta) prod_{k != j} theta(u_j - u_k - eta) / theta(u_j - u_k + eta),
//! ```
//!
//! equivalently when the unwanted-term coefficients `K1, K2, K3` vanish. The
//! eigenvalue is the three-term closed form in [`eigenvalue_lambda`].

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::opalg::{op_residual, transfer_matrix, ShiftedOperator};
use crate::params::ModularParams;
use crate::representation::{generator, EvaluationModule};
use crate::rmatrix::{alpha, beta, delta, gamma, omega_closed, y_fn, z_fn};
use crate::theta::{th, th_den};
use crate::util::{max_abs_vec, solve_dense};

// ---------------------------------------------------------------------------
// pseudovacuum
// ---------------------------------------------------------------------------

/// The vacuum weight `f(q) = exp(c q) theta(q - eta)^n`.
pub fn vacuum_prefactor(q: Complex64, n_sites: usize, c: Complex64, p: &ModularParams) -> Complex64 {
    (c * q).exp() * th(q - p.eta, p).powi(n_sites as i32)
}

/// The pseudovacuum `Omega(q) = f(q) e_1 (x) ... (x) e_1` as a function of `q`.
pub fn vacuum_state(
    module: &EvaluationModule,
    c: Complex64,
    p: &ModularParams,
) -> impl Fn(Complex64) -> Result<Array1<Complex64>> + Clone + Send + Sync + 'static {
    let dim = module.dim;
    let n = module.n_sites;
    let pp = *p;
    move |q: Complex64| {
        let mut v = Array1::zeros(dim);
        v[0] = vacuum_prefactor(q, n, c, &pp);
        Ok(v)
    }
}

/// The scalar `a_i` by which the i-th diagonal generator acts on the
/// pseudovacuum (`i` is 1-3): `A_1 Omega = a_1 f(q-2eta)/f(q) Omega`,
/// `A_2 Omega = a_2 Omega`, `A_3 Omega = a_3 f(q+2eta)/f(q) Omega`.
pub fn vacuum_eigenvalue(
    i: usize,
    q: Complex64,
    u: Complex64,
    z: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = z.len() as f64;
    let de = th_den(e, "theta(eta)", p)?;
    let d2e = th_den(2.0 * e, "theta(2 eta)", p)?;
    match i {
        1 => {
            let mut v = Complex64::new(1.0, 0.0);
            for &zk in z {
                v *= th(u - zk - e, p) * th(u - zk - 2.0 * e, p) / (de * d2e);
            }
            Ok(v)
        }
        2 => {
            let dq = th_den(q - e, "theta(q - eta)", p)?;
            let mut v = th(q - 2.0 * e * n - e, p) / dq;
            for &zk in z {
                v *= th(u - zk - e, p) * th(u - zk, p) / (de * d2e);
            }
            Ok(v)
        }
        3 => {
            let dqp = th_den(q + e, "theta(q + eta)", p)?;
            let dq = th_den(q, "theta(q)", p)?;
            let mut v = th(q - 2.0 * e * n, p) * th(q - 2.0 * e * n + e, p) / (dqp * dq);
            for &zk in z {
                v *= th(u - zk, p) * th(u - zk + e, p) / (de * d2e);
            }
            Ok(v)
        }
        other => Err(Error::InvalidParams(format!(
            "vacuum eigenvalue index must be 1..=3, got {other}"
        ))),
    }
}

/// Residual of the i-th diagonal generator acting on the pseudovacuum against
/// its formula value, relative to the vacuum norm.
pub fn vacuum_action_residual(
    module: &EvaluationModule,
    i: usize,
    u: Complex64,
    q: Complex64,
    c: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let e = p.eta;
    let n = module.n_sites;
    let op = generator(module, i, i, u, p)?;
    let omega_fn = vacuum_state(module, c, p);
    let got = op.apply(&omega_fn, q)?;
    let f = |qq: Complex64| vacuum_prefactor(qq, n, c, p);
    let fq = f(q);
    if fq.norm() < p.pole_tol {
        return Err(Error::ZeroVector { norm: fq.norm() });
    }
    let scalar = match i {
        1 => vacuum_eigenvalue(1, q, u, &module.z, p)? * f(q - 2.0 * e) / fq,
        2 => vacuum_eigenvalue(2, q, u, &module.z, p)?,
        3 => vacuum_eigenvalue(3, q, u, &module.z, p)? * f(q + 2.0 * e) / fq,
        other => {
            return Err(Error::InvalidParams(format!(
                "diagonal generator index must be 1..=3, got {other}"
            )))
        }
    };
    let want = omega_fn(q)? * scalar;
    let scale = max_abs_vec(&want.view()).max(f64::MIN_POSITIVE);
    Ok(max_abs_vec(&(&got - &want).view()) / scale)
}

/// Norm of the i-th lower-triangular (annihilation) generator applied to the
/// pseudovacuum, relative to the vacuum norm; `i` is 1-3 for
/// `L_21, L_31, L_32`.
pub fn annihilation_residual(
    module: &EvaluationModule,
    i: usize,
    u: Complex64,
    q: Complex64,
    c: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let (row, col) = match i {
        1 => (2, 1),
        2 => (3, 1),
        3 => (3, 2),
        other => {
            return Err(Error::InvalidParams(format!(
                "annihilation generator index must be 1..=3, got {other}"
            )))
        }
    };
    let op = generator(module, row, col, u, p)?;
    let omega_fn = vacuum_state(module, c, p);
    let got = op.apply(&omega_fn, q)?;
    let scale = max_abs_vec(&omega_fn(q)?.view()).max(f64::MIN_POSITIVE);
    Ok(max_abs_vec(&got.view()) / scale)
}

// ---------------------------------------------------------------------------
// creation operators
// ---------------------------------------------------------------------------

/// Distance from `a - b` to the nearest period-lattice point.
fn lattice_dist(a: Complex64, b: Complex64, p: &ModularParams) -> f64 {
    let d = a - b;
    let t = d.im / p.tau.im;
    let s = d.re - t * p.tau.re;
    let folded = Complex64::new(s - s.round(), 0.0) + (t - t.round()) * p.tau;
    folded.norm()
}

fn check_distinct(us: &[Complex64], p: &ModularParams) -> Result<()> {
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            if lattice_dist(us[i], us[j], p) < 1e-9 {
                return Err(Error::DuplicateRoots { i, j });
            }
        }
    }
    Ok(())
}

/// The n-root creation operator `Phi_n(u_1, ..., u_n)` on the module.
///
/// Spectral parameters must be pairwise distinct modulo the period lattice.
pub fn phi(
    module: &EvaluationModule,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<ShiftedOperator> {
    check_distinct(us, p)?;
    phi_inner(module, us, p)
}

fn phi_inner(
    module: &EvaluationModule,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<ShiftedOperator> {
    let n = us.len();
    if n == 0 {
        return Ok(ShiftedOperator::identity(module.dim, p.eta));
    }
    if n == 1 {
        return generator(module, 1, 2, us[0], p);
    }
    let b1 = generator(module, 1, 2, us[0], p)?;
    let mut out = b1.compose(&phi_inner(module, &us[1..], p)?)?;
    for j in 2..=n {
        let uj = us[j - 1];
        let mut pref_om = Complex64::new(1.0, 0.0);
        for k in 2..j {
            pref_om *= omega_closed(us[j - 1] - us[k - 1], p)?;
        }
        let rest: Vec<Complex64> = (2..=n).filter(|&k| k != j).map(|k| us[k - 1]).collect();
        let tail: Vec<Complex64> = rest.iter().map(|&v| v - uj).collect();
        let u1j = us[0] - uj;
        let pp = *p;
        let coeff = move |q: Complex64| -> Result<Complex64> {
            let mut v = pref_om / y_fn(q, u1j, &pp)?;
            for &d in &tail {
                v *= z_fn(q + 2.0 * pp.eta, d, &pp)?;
            }
            Ok(v)
        };
        let term = generator(module, 1, 3, us[0], p)?
            .compose(&phi_inner(module, &rest, p)?)?
            .compose(&generator(module, 1, 1, uj, p)?)?
            .scale(coeff);
        out = out.sub(&term)?;
    }
    Ok(out)
}

/// Residual of the exchange symmetry of `Phi_n` under swapping the adjacent
/// spectral parameters at positions `i` and `i+1` (1-based):
/// `Phi(..., u_i, u_{i+1}, ...) = omega(u_{i+1} - u_i) Phi(..., u_{i+1}, u_i, ...)`.
pub fn phi_symmetry_residual(
    module: &EvaluationModule,
    us: &[Complex64],
    i: usize,
    q: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let n = us.len();
    if i == 0 || i >= n {
        return Err(Error::IndexError(format!(
            "swap position {i} must lie in 1..{n}"
        )));
    }
    let lhs = phi(module, us, p)?;
    let mut swapped = us.to_vec();
    swapped.swap(i - 1, i);
    let factor = omega_closed(us[i] - us[i - 1], p)?;
    let rhs = phi(module, &swapped, p)?.scale_const(factor);
    op_residual(&lhs, &rhs, q)
}

// ---------------------------------------------------------------------------
// action coefficients
// ---------------------------------------------------------------------------

/// The named coefficients of the generator actions on Bethe states and the
/// unwanted-term combinations that vanish at Bethe roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientName {
    /// Wanted-term correction for the `A_1` action; one index.
    D,
    /// Paired unwanted term of the `A_1` action; two indices.
    E,
    /// First unwanted term of the `A_2` action; one index.
    F1,
    /// Second unwanted term of the `A_2` action; one index.
    F2,
    /// Paired unwanted term of the `A_2` action; two indices.
    G1,
    /// Paired unwanted term of the `A_2` action; two indices.
    G2,
    /// Paired unwanted term of the `A_2` action; two indices.
    G3,
    /// Unwanted term of the `A_3` action; one index.
    H,
    /// Paired unwanted term of the `A_3` action; two indices.
    I,
    /// Unwanted-term combination of `D`-type and `F1`-type terms; one index.
    K1,
    /// Unwanted-term combination of all paired terms; two indices.
    K2,
    /// Unwanted-term combination of `F2`-type and `H`-type terms; one index.
    K3,
}

fn d_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let uj = us[j - 1];
    let mut v = -alpha(e, q, uj - u, p)? / beta(q, e, uj - u, p)?;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 != j {
            v *= z_fn(q, uk - uj, p)?;
        }
    }
    Ok(v)
}

fn e_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let t1 = delta(-q, ul - u, p)? / (gamma(q, -q, ul - u, p)? * y_fn(q - 2.0 * e, ul - uj, p)?);
    let t2 = z_fn(q, ul - u, p)? * alpha(e, q, uj - u, p)? * omega_closed(u - ul, p)?
        / (beta(q, e, uj - u, p)? * y_fn(q, u - ul, p)?);
    let mut v = t1 + t2;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 != l && k + 1 != j {
            v *= z_fn(q + 2.0 * e, uk - ul, p)? * z_fn(q, uk - uj, p)?;
        }
    }
    Ok(v)
}

fn f1_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let uj = us[j - 1];
    let mut v = -alpha(q, e, u - uj, p)? / beta(q, e, u - uj, p)?;
    let mut pos = 2usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == j {
            continue;
        }
        v *= z_fn(q - 2.0 * e * (pos as f64 - 1.0), uj - uk, p)? / omega_closed(uj - uk, p)?;
        pos += 1;
    }
    Ok(v)
}

/// Closed form of the `F1` coefficient, equal to the positional product form.
pub fn f1_closed(
    l: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = us.len() as f64;
    let ul = us[l - 1];
    let den = th_den(q - 2.0 * e * n - e, "theta(q - 2 eta n - eta)", p)?;
    let mut v = -alpha(q, e, u - ul, p)? / beta(q, e, u - ul, p)? * th(q - 3.0 * e, p) / den;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == l {
            continue;
        }
        let ulk = ul - uk;
        let dth = th_den(ulk, "theta(u_l - u_k)", p)?;
        v *= th(ulk - 2.0 * e, p) / (dth * omega_closed(ulk, p)?);
    }
    Ok(v)
}

fn f2_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let uj = us[j - 1];
    let mut v = 1.0 / y_fn(q, u - uj, p)?;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 != j {
            v *= z_fn(q + 2.0 * e, uk - uj, p)?;
        }
    }
    Ok(v)
}

fn g1_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let q2 = q - 2.0 * e;
    let mut v = (1.0 / y_fn(q, u - ul, p)?)
        * (z_fn(q, u - ul, p)? * alpha(q2, e, u - uj, p)? / beta(q2, e, u - uj, p)?
            - alpha(q, e, u - ul, p)? * alpha(q2, e, ul - uj, p)?
                / (beta(q, e, u - ul, p)? * beta(q2, e, ul - uj, p)?));
    let mut pos = 3usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == l || k + 1 == j {
            continue;
        }
        v *= z_fn(q + 2.0 * e, uk - ul, p)?
            * z_fn(q - 2.0 * e * (pos as f64 - 1.0), uj - uk, p)?
            / omega_closed(uj - uk, p)?;
        pos += 1;
    }
    Ok(v)
}

fn g2_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let mut v = alpha(q, e, u - ul, p)? * alpha(q + 2.0 * e, e, ul - uj, p)?
        / (beta(q, e, u - ul, p)? * y_fn(q, u - ul, p)? * beta(q - 2.0 * e, e, ul - uj, p)?);
    let mut pos = 3usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == l || k + 1 == j {
            continue;
        }
        v *= z_fn(q + 2.0 * e, uk - uj, p)?
            * z_fn(q - 2.0 * e * (pos as f64 - 1.0), ul - uk, p)?
            / omega_closed(ul - uk, p)?;
        pos += 1;
    }
    Ok(v)
}

fn g3_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let mut v = (alpha(q, e, u - ul, p)? / beta(e, -q, u - ul, p)?)
        * (z_fn(q, u - ul, p)? / (omega_closed(u - ul, p)? * y_fn(q, u - uj, p)?)
            - alpha(e, -q, u - ul, p)? / (y_fn(q, ul - uj, p)? * beta(q, e, u - ul, p)?));
    let mut pos = 3usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == l || k + 1 == j {
            continue;
        }
        v *= z_fn(q + 2.0 * e, uk - uj, p)?
            * z_fn(q - 2.0 * e * (pos as f64 - 2.0), ul - uk, p)?
            / omega_closed(ul - uk, p)?;
        pos += 1;
    }
    Ok(v)
}

fn h_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let uj = us[j - 1];
    let mut v = -1.0 / y_fn(q, u - uj, p)?;
    let mut pos = 2usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == j {
            continue;
        }
        v *= z_fn(q - 2.0 * e * (pos as f64 - 2.0), uj - uk, p)? / omega_closed(uj - uk, p)?;
        pos += 1;
    }
    Ok(v)
}

fn i_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let mut v = (1.0 / gamma(q, -q, u - ul, p)?)
        * (delta(q, u - ul, p)? / y_fn(q - 2.0 * e, ul - uj, p)?
            - alpha(q, e, u - ul, p)? / y_fn(q - 2.0 * e, u - uj, p)?);
    let mut pos = 3usize;
    for (k, &uk) in us.iter().enumerate() {
        if k + 1 == l || k + 1 == j {
            continue;
        }
        let qa = q - 2.0 * e * (pos as f64 - 2.0);
        v *= z_fn(qa, uj - uk, p)? * z_fn(qa, ul - uk, p)?
            / (omega_closed(ul - uk, p)? * omega_closed(uj - uk, p)?);
        pos += 1;
    }
    Ok(v)
}

fn k1_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = z.len();
    let uj = us[j - 1];
    let f = |qq: Complex64| vacuum_prefactor(qq, n, c, p);
    Ok(d_coef(j, u, q, us, p)? * vacuum_eigenvalue(1, q, uj, z, p)? * f(q - 2.0 * e) / f(q)
        + f1_coef(j, u, q, us, p)? * vacuum_eigenvalue(2, q, uj, z, p)?)
}

fn k3_coef(
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = z.len();
    let uj = us[j - 1];
    let f = |qq: Complex64| vacuum_prefactor(qq, n, c, p);
    Ok(
        f2_coef(j, u, q, us, p)? * vacuum_eigenvalue(1, q, uj, z, p)? * f(q) / f(q + 2.0 * e)
            + h_coef(j, u, q, us, p)? * vacuum_eigenvalue(2, q + 2.0 * e, uj, z, p)?,
    )
}

#[allow(clippy::too_many_arguments)]
fn k2_coef(
    l: usize,
    j: usize,
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = z.len();
    let (ul, uj) = (us[l - 1], us[j - 1]);
    let f = |qq: Complex64| vacuum_prefactor(qq, n, c, p);
    let a1 = |uu: Complex64| vacuum_eigenvalue(1, q, uu, z, p);
    let a2 = |qq: Complex64, uu: Complex64| vacuum_eigenvalue(2, qq, uu, z, p);
    let fp2 = f(q + 2.0 * e);
    Ok(
        e_coef(l, j, u, q, us, p)? * a1(ul)? * a1(uj)? * f(q - 2.0 * e) / fp2
            + g1_coef(l, j, u, q, us, p)? * a1(ul)? * a2(q, uj)? * f(q) / fp2
            + g2_coef(l, j, u, q, us, p)? * a1(uj)? * a2(q, ul)? * f(q) / fp2
            + g3_coef(l, j, u, q, us, p)? * a1(uj)? * a2(q + 2.0 * e, ul)? * f(q) / fp2
            + i_coef(l, j, u, q, us, p)? * a2(q + 2.0 * e, ul)? * a2(q + 2.0 * e, uj)?,
    )
}

/// Evaluates a named action coefficient at spectral parameter `u`, dynamical
/// parameter `q`, and root set `us`.
///
/// `indices` holds one 1-based root index for `D`, `F1`, `F2`, `H`, `K1`,
/// `K3`, and two distinct indices `(l, j)` for `E`, `G1`, `G2`, `G3`, `I`,
/// `K2`. The evaluation points `z` and twist `c` only enter the `K`
/// combinations but are part of the uniform signature.
#[allow(clippy::too_many_arguments)]
pub fn coefficient(
    name: CoefficientName,
    indices: &[usize],
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    use CoefficientName::*;
    let need = match name {
        D | F1 | F2 | H | K1 | K3 => 1,
        E | G1 | G2 | G3 | I | K2 => 2,
    };
    if indices.len() != need {
        return Err(Error::IndexError(format!(
            "coefficient {name:?} takes {need} index(es), got {}",
            indices.len()
        )));
    }
    for &ix in indices {
        if ix == 0 || ix > us.len() {
            return Err(Error::IndexError(format!(
                "coefficient index {ix} out of range 1..={}",
                us.len()
            )));
        }
    }
    if need == 2 && indices[0] == indices[1] {
        return Err(Error::IndexError(
            "paired coefficient indices must be distinct".into(),
        ));
    }
    match name {
        D => d_coef(indices[0], u, q, us, p),
        E => e_coef(indices[0], indices[1], u, q, us, p),
        F1 => f1_coef(indices[0], u, q, us, p),
        F2 => f2_coef(indices[0], u, q, us, p),
        G1 => g1_coef(indices[0], indices[1], u, q, us, p),
        G2 => g2_coef(indices[0], indices[1], u, q, us, p),
        G3 => g3_coef(indices[0], indices[1], u, q, us, p),
        H => h_coef(indices[0], u, q, us, p),
        I => i_coef(indices[0], indices[1], u, q, us, p),
        K1 => k1_coef(indices[0], u, q, us, z, c, p),
        K2 => k2_coef(indices[0], indices[1], u, q, us, z, c, p),
        K3 => k3_coef(indices[0], u, q, us, z, c, p),
    }
}

// ---------------------------------------------------------------------------
// consistency identities
// ---------------------------------------------------------------------------

/// Residual of the reflection identity
/// `alpha(eta,q;u)/beta(q,eta;u) = -alpha(q,eta;-u)/beta(q,eta;-u)`.
pub fn alpha_beta_identity_residual(
    q: Complex64,
    u: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let e = p.eta;
    let lhs = alpha(e, q, u, p)? / beta(q, e, u, p)?;
    let rhs = -alpha(q, e, -u, p)? / beta(q, e, -u, p)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
}

/// Residual of the five-term theta-weighted identity equivalent to the
/// vanishing structure of the paired unwanted terms (`E`, `I`, `G1`, `G2`,
/// `G3` lead factors): the five lines sum to zero.
pub fn sixline_identity_residual(
    q: Complex64,
    u: Complex64,
    u1: Complex64,
    u2: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let e = p.eta;
    let u21 = u2 - u1;
    let u12 = u1 - u2;
    let q3 = th(q - 3.0 * e, p);
    let l1 = (delta(-q, u1 - u, p)?
        / (gamma(q, -q, u1 - u, p)? * y_fn(q - 2.0 * e, u1 - u2, p)?)
        + z_fn(q, u1 - u, p)? * alpha(e, q, u2 - u, p)? * omega_closed(u - u1, p)?
            / (beta(q, e, u2 - u, p)? * y_fn(q, u - u1, p)?))
        * q3
        * q3;
    let l2 = (delta(q, u - u1, p)? / y_fn(q - 2.0 * e, u1 - u2, p)?
        - alpha(q, e, u - u1, p)? / y_fn(q - 2.0 * e, u - u2, p)?)
        / gamma(q, -q, u - u1, p)?
        * q3
        * q3;
    let d21 = th_den(u21 - e, "theta(u2 - u1 - eta)", p)?;
    let l3 = (1.0 / y_fn(q, u - u1, p)?)
        * (z_fn(q, u - u1, p)? * alpha(q - 2.0 * e, e, u - u2, p)?
            / beta(q - 2.0 * e, e, u - u2, p)?
            - alpha(q, e, u - u1, p)? * alpha(q - 2.0 * e, e, u1 - u2, p)?
                / (beta(q, e, u - u1, p)? * beta(q - 2.0 * e, e, u1 - u2, p)?))
        * th(u21 + e, p)
        * th(q - 5.0 * e, p)
        * th(q - e, p)
        / d21;
    let d12 = th_den(u12 - e, "theta(u1 - u2 - eta)", p)?;
    let l4 = (alpha(q, e, u - u1, p)? * alpha(q + 2.0 * e, e, u1 - u2, p)?
        / (beta(q, e, u - u1, p)? * y_fn(q, u - u1, p)? * beta(q - 2.0 * e, e, u1 - u2, p)?))
        * th(u12 + e, p)
        * th(q - 5.0 * e, p)
        * th(q - e, p)
        / d12;
    let dqp = th_den(q + e, "theta(q + eta)", p)?;
    let l5 = (alpha(q, e, u - u1, p)? / beta(e, -q, u - u1, p)?)
        * (z_fn(q, u - u1, p)? / (omega_closed(u - u1, p)? * y_fn(q, u - u2, p)?)
            - alpha(e, -q, u - u1, p)? / (beta(q, e, u - u1, p)? * y_fn(q, u1 - u2, p)?))
        * th(u12 + e, p)
        * q3
        * th(q - e, p)
        * th(q - e, p)
        / (d12 * dqp);
    let terms = [l1, l2, l3, l4, l5];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0f64, f64::max);
    let sum: Complex64 = terms.iter().sum();
    Ok(sum.norm() / scale.max(f64::MIN_POSITIVE))
}

/// Residual of the operator identity expanding `A_1(u) Phi_n` into wanted and
/// `D`/`E`-type unwanted terms; validated for `n <= 3`.
pub fn a1_action_residual(
    module: &EvaluationModule,
    us: &[Complex64],
    u: Complex64,
    q: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let n = us.len();
    let pp = *p;
    let a1g = |uu| generator(module, 1, 1, uu, p);
    let lhs = a1g(u)?.compose(&phi(module, us, p)?)?;

    let us_own: Vec<Complex64> = us.to_vec();
    let wanted = {
        let us_own = us_own.clone();
        move |qq: Complex64| -> Result<Complex64> {
            let mut v = Complex64::new(1.0, 0.0);
            for &uk in &us_own {
                v *= z_fn(qq, uk - u, &pp)?;
            }
            Ok(v)
        }
    };
    let mut rhs = phi(module, us, p)?.compose(&a1g(u)?)?.scale(wanted);

    let omega_pref = |hi: usize, skip: Option<usize>| -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for k in 1..hi {
            if Some(k) == skip {
                continue;
            }
            v *= omega_closed(us[hi - 1] - us[k - 1], p)?;
        }
        Ok(v)
    };

    for j in 1..=n {
        let rest: Vec<Complex64> = (1..=n).filter(|&k| k != j).map(|k| us[k - 1]).collect();
        let pref = omega_pref(j, None)?;
        let us_own = us_own.clone();
        let coeff = move |qq: Complex64| -> Result<Complex64> {
            Ok(d_coef(j, u, qq, &us_own, &pp)? * pref)
        };
        let term = generator(module, 1, 2, u, p)?
            .compose(&phi(module, &rest, p)?)?
            .compose(&a1g(us[j - 1])?)?
            .scale(coeff);
        rhs = rhs.add(&term)?;
    }
    for l in 1..=n {
        for j in l + 1..=n {
            let rest: Vec<Complex64> = (1..=n)
                .filter(|&k| k != l && k != j)
                .map(|k| us[k - 1])
                .collect();
            let pref = omega_pref(l, None)? * omega_pref(j, Some(l))?;
            let us_own = us_own.clone();
            let coeff = move |qq: Complex64| -> Result<Complex64> {
                Ok(e_coef(l, j, u, qq, &us_own, &pp)? * pref)
            };
            let term = generator(module, 1, 3, u, p)?
                .compose(&phi(module, &rest, p)?)?
                .compose(&a1g(us[l - 1])?)?
                .compose(&a1g(us[j - 1])?)?
                .scale(coeff);
            rhs = rhs.add(&term)?;
        }
    }
    op_residual(&lhs, &rhs, q)
}

// ---------------------------------------------------------------------------
// Bethe equations and solver
// ---------------------------------------------------------------------------

/// Left-minus-right of the Bethe equations at candidate roots `us`, one
/// entry per root.
pub fn bethe_residual(
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Vec<Complex64>> {
    let e = p.eta;
    let n = us.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut lhs = Complex64::new(1.0, 0.0);
        for &zk in z {
            let den = th_den(us[j] - zk, "theta(u_j - z_k)", p)?;
            lhs *= th(us[j] - zk - 2.0 * e, p) / den;
        }
        let mut rhs = (2.0 * c * e).exp();
        for k in 0..n {
            if k != j {
                let den = th_den(us[j] - us[k] + e, "theta(u_j - u_k + eta)", p)?;
                rhs *= th(us[j] - us[k] - e, p) / den;
            }
        }
        out.push(lhs - rhs);
    }
    Ok(out)
}

fn residual_norm(us: &[Complex64], z: &[Complex64], c: Complex64, p: &ModularParams) -> f64 {
    match bethe_residual(us, z, c, p) {
        Ok(r) => r.iter().fold(0.0f64, |acc, v| acc.max(v.norm())),
        Err(_) => f64::INFINITY,
    }
}

/// Options controlling [`solve_bethe`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence threshold on the max-norm of the residual vector.
    pub tol: f64,
    /// Maximum damped-Newton iterations per restart.
    pub max_iterations: usize,
    /// Number of multistart restarts.
    pub restarts: usize,
    /// Half-width of the uniform jitter applied to the seed per restart.
    pub jitter: f64,
    /// RNG seed for the jitter stream.
    pub seed: u64,
    /// Finite-difference step for the Jacobian.
    pub fd_step: f64,
    /// Optional starting roots; defaults to `z_j + eta`.
    pub initial_guess: Option<Vec<Complex64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iterations: 60,
            restarts: 20,
            jitter: 0.05,
            seed: 42,
            fd_step: 1e-6,
            initial_guess: None,
        }
    }
}

/// A solved Bethe system.
#[derive(Debug, Clone)]
pub struct BetheSystem {
    /// Number of roots (equals the number of sites).
    pub n: usize,
    /// Evaluation points of the module.
    pub z: Vec<Complex64>,
    /// Twist parameter of the vacuum weight.
    pub c: Complex64,
    /// Bethe roots, reduced to the fundamental cell where possible and
    /// sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    /// Max-norm of the Bethe residual at the returned roots.
    pub residual_norm: f64,
    /// Newton iterations used by the successful restart.
    pub newton_iterations: usize,
    /// Index of the restart that produced the returned roots.
    pub restart: usize,
    /// Whether every root lies in the fundamental cell.
    pub in_cell: bool,
}

fn newton(
    start: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    opts: &SolveOptions,
    p: &ModularParams,
) -> (Vec<Complex64>, f64, usize) {
    let n = start.len();
    let mut us = start.to_vec();
    for it in 0..opts.max_iterations {
        let r = match bethe_residual(&us, z, c, p) {
            Ok(r) => r,
            Err(_) => return (us, f64::INFINITY, it),
        };
        let base = r.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        if base < opts.tol {
            return (us, base, it);
        }
        // complex Jacobian by central differences (the residual is holomorphic)
        let h = opts.fd_step;
        let mut jac = vec![Complex64::new(0.0, 0.0); n * n];
        let mut ok = true;
        for k in 0..n {
            let mut up = us.clone();
            let mut dn = us.clone();
            up[k] += h;
            dn[k] -= h;
            match (bethe_residual(&up, z, c, p), bethe_residual(&dn, z, c, p)) {
                (Ok(rp), Ok(rm)) => {
                    for i in 0..n {
                        jac[i * n + k] = (rp[i] - rm[i]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            return (us, base, it);
        }
        let step = match solve_dense(jac, r) {
            Ok(s) => s,
            Err(_) => return (us, base, it),
        };
        let mut lambda = 1.0f64;
        let mut accepted = false;
        for _ in 0..20 {
            let cand: Vec<Complex64> = us
                .iter()
                .zip(&step)
                .map(|(&u, &s)| u - lambda * s)
                .collect();
            if residual_norm(&cand, z, c, p) < base {
                us = cand;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            return (us, base, it);
        }
    }
    let res = residual_norm(&us, z, c, p);
    (us, res, opts.max_iterations)
}

/// Lattice coordinates `(s, t)` with `u = s + t * tau`.
fn lattice_coords(u: Complex64, p: &ModularParams) -> (f64, f64) {
    let t = u.im / p.tau.im;
    let s = u.re - t * p.tau.re;
    (s, t)
}

/// Reduces roots into the fundamental cell: the period-1 reduction always
/// applies (it leaves the Bethe system invariant); the period-tau reduction
/// is kept only if the reduced set still satisfies the equations.
fn canonicalize(
    roots: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    tol: f64,
    p: &ModularParams,
) -> (Vec<Complex64>, f64, bool) {
    let mod_one = |u: Complex64| {
        let (s, _) = lattice_coords(u, p);
        u - s.floor()
    };
    let base: Vec<Complex64> = roots.iter().map(|&u| mod_one(u)).collect();
    let reduced: Vec<Complex64> = base
        .iter()
        .map(|&u| {
            let (_, t) = lattice_coords(u, p);
            mod_one(u - t.floor() * p.tau)
        })
        .collect();
    let res_reduced = residual_norm(&reduced, z, c, p);
    let (mut out, res) = if res_reduced < tol {
        (reduced, res_reduced)
    } else {
        let r = residual_norm(&base, z, c, p);
        (base, r)
    };
    out.sort_by(|a, b| {
        let ka = ((a.re * 1e9).round(), (a.im * 1e9).round());
        let kb = ((b.re * 1e9).round(), (b.im * 1e9).round());
        ka.partial_cmp(&kb).unwrap()
    });
    let in_cell = out.iter().all(|&u| {
        let (s, t) = lattice_coords(u, p);
        (0.0..1.0).contains(&s) && (0.0..1.0).contains(&t)
    });
    (out, res, in_cell)
}

fn same_solution(a: &[Complex64], b: &[Complex64], p: &ModularParams) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&x, &y)| lattice_dist(x, y, p) < 1e-7)
}

/// Solves the Bethe equations by damped Newton iteration with deterministic
/// multistart seeding.
///
/// Restart 0 starts from `z_j + eta` (or the supplied guess) unjittered;
/// later restarts add a uniform jitter. Converged root sets are reduced to
/// the fundamental cell, sorted, deduplicated, and ranked: sets fully inside
/// the cell first, then by residual, then lexicographically.
pub fn solve_bethe(
    z: &[Complex64],
    c: Complex64,
    opts: &SolveOptions,
    p: &ModularParams,
) -> Result<BetheSystem> {
    if z.is_empty() {
        return Err(Error::EmptyModule);
    }
    let n = z.len();
    let base_guess: Vec<Complex64> = match &opts.initial_guess {
        Some(g) => {
            if g.len() != n {
                return Err(Error::InvalidParams(format!(
                    "initial guess has {} roots, expected {n}",
                    g.len()
                )));
            }
            g.clone()
        }
        None => z.iter().map(|&zk| zk + p.eta).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    struct Candidate {
        roots: Vec<Complex64>,
        residual: f64,
        iterations: usize,
        restart: usize,
        in_cell: bool,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut best_fail: (f64, Vec<Complex64>) = (f64::INFINITY, base_guess.clone());
    let mut degenerate_seen = false;

    for restart in 0..opts.restarts.max(1) {
        let scale = if restart == 0 { 0.0 } else { opts.jitter };
        let start: Vec<Complex64> = base_guess
            .iter()
            .map(|&g| {
                let dre = rng.gen::<f64>() * 2.0 - 1.0;
                let dim = rng.gen::<f64>() * 2.0 - 1.0;
                g + scale * Complex64::new(dre, dim)
            })
            .collect();
        let (roots, res, iters) = newton(&start, z, c, opts, p);
        if res >= opts.tol {
            if res < best_fail.0 {
                best_fail = (res, roots);
            }
            continue;
        }
        let (croots, cres, in_cell) = canonicalize(&roots, z, c, opts.tol, p);
        if check_distinct(&croots, p).is_err() {
            degenerate_seen = true;
            continue;
        }
        if candidates
            .iter()
            .any(|cand| same_solution(&cand.roots, &croots, p))
        {
            continue;
        }
        candidates.push(Candidate {
            roots: croots,
            residual: cres,
            iterations: iters,
            restart,
            in_cell,
        });
    }

    if candidates.is_empty() {
        if degenerate_seen {
            return Err(Error::DegenerateRoots);
        }
        return Err(Error::NoConvergence {
            best_residual: best_fail.0,
            best_roots: best_fail.1,
            restarts: opts.restarts,
        });
    }

    candidates.sort_by(|a, b| {
        b.in_cell
            .cmp(&a.in_cell)
            .then(a.residual.partial_cmp(&b.residual).unwrap())
            .then_with(|| {
                let key = |r: &[Complex64]| {
                    r.iter()
                        .map(|v| ((v.re * 1e9).round(), (v.im * 1e9).round()))
                        .collect::<Vec<_>>()
                };
                key(&a.roots).partial_cmp(&key(&b.roots)).unwrap()
            })
    });
    let best = &candidates[0];
    Ok(BetheSystem {
        n,
        z: z.to_vec(),
        c,
        roots: best.roots.clone(),
        residual_norm: best.residual,
        newton_iterations: best.iterations,
        restart: best.restart,
        in_cell: best.in_cell,
    })
}

// ---------------------------------------------------------------------------
// eigenvalue and eigenvector verification
// ---------------------------------------------------------------------------

/// The transfer-matrix eigenvalue at Bethe roots `us`: the q-independent
/// three-term closed form
///
/// ```text
/// Lambda(u) = exp(-2 eta c) prod_k th(u-z_k-eta) th(u-z_k-2eta) th(u-u_k+2eta)
///                                  / (th(eta) th(2eta) th(u-u_k))
///   + prod_k th(u-z_k-eta) th(u-z_k) th(u-u_k-eta) th(u-u_k+2eta)
///            / (th(eta) th(2eta) th(u-u_k) th(u-u_k+eta))
///   + exp(2 eta c) prod_k th(u-z_k) th(u-z_k+eta) th(u-u_k-eta)
///                         / (th(eta) th(2eta) th(u-u_k+eta))
/// ```
pub fn eigenvalue_lambda(
    u: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    if us.len() != z.len() {
        return Err(Error::InvalidParams(format!(
            "{} roots for {} sites",
            us.len(),
            z.len()
        )));
    }
    let e = p.eta;
    let de = th_den(e, "theta(eta)", p)?;
    let d2e = th_den(2.0 * e, "theta(2 eta)", p)?;
    let mut t1 = (-2.0 * e * c).exp();
    let mut t2 = Complex64::new(1.0, 0.0);
    let mut t3 = (2.0 * e * c).exp();
    for k in 0..z.len() {
        let (zk, uk) = (z[k], us[k]);
        let duk = th_den(u - uk, "theta(u - u_k)", p)?;
        let dukp = th_den(u - uk + e, "theta(u - u_k + eta)", p)?;
        t1 *= th(u - zk - e, p) * th(u - zk - 2.0 * e, p) * th(u - uk + 2.0 * e, p)
            / (de * d2e * duk);
        t2 *= th(u - zk - e, p) * th(u - zk, p) * th(u - uk - e, p) * th(u - uk + 2.0 * e, p)
            / (de * d2e * duk * dukp);
        t3 *= th(u - zk, p) * th(u - zk + e, p) * th(u - uk - e, p) / (de * d2e * dukp);
    }
    Ok(t1 + t2 + t3)
}

/// The eigenvalue assembled from the general wanted-term coefficients at a
/// dynamical parameter `q`; agrees with [`eigenvalue_lambda`] at Bethe roots
/// for every `q`.
pub fn lambda_general(
    u: Complex64,
    q: Complex64,
    us: &[Complex64],
    z: &[Complex64],
    c: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    let e = p.eta;
    let n = z.len();
    let f = |qq: Complex64| vacuum_prefactor(qq, n, c, p);
    let fq = f(q);
    if fq.norm() < p.pole_tol {
        return Err(Error::ZeroVector { norm: fq.norm() });
    }
    let mut w1 = Complex64::new(1.0, 0.0);
    for &uk in us {
        w1 *= z_fn(q, uk - u, p)?;
    }
    let t1 = w1 * vacuum_eigenvalue(1, q, u, z, p)? * f(q - 2.0 * e) / fq;
    let mut w2 = Complex64::new(1.0, 0.0);
    for (k, &uk) in us.iter().enumerate() {
        w2 *= z_fn(q - 2.0 * e * k as f64, u - uk, p)? / omega_closed(u - uk, p)?;
    }
    let t2 = w2 * vacuum_eigenvalue(2, q, u, z, p)?;
    let mut w3 = Complex64::new(1.0, 0.0);
    for (k, &uk) in us.iter().enumerate() {
        let x = q - 2.0 * e * k as f64;
        w3 *= beta(e, -q, u - uk, p)? / gamma(x, -x, u - uk, p)?;
    }
    let t3 = w3 * vacuum_eigenvalue(3, q, u, z, p)? * f(q + 2.0 * e) / fq;
    Ok(t1 + t2 + t3)
}

/// Worst relative eigenvector residual
/// `max_q |t(u) Psi(q) - Lambda Psi(q)| / (|Lambda| |Psi(q)|)` over the given
/// dynamical-parameter samples.
pub fn eigencheck(
    module: &EvaluationModule,
    roots: &[Complex64],
    c: Complex64,
    u: Complex64,
    q_samples: &[Complex64],
    p: &ModularParams,
) -> Result<f64> {
    let phi_op = phi(module, roots, p)?;
    let omega_fn = vacuum_state(module, c, p);
    let psi = {
        let phi_op = phi_op.clone();
        let omega_fn = omega_fn.clone();
        move |q: Complex64| phi_op.apply(&omega_fn, q)
    };
    let t = transfer_matrix(module, u, p)?;
    let lam = eigenvalue_lambda(u, roots, &module.z, c, p)?;
    let mut worst = 0.0f64;
    for &q in q_samples {
        let pv = psi(q)?;
        let norm = max_abs_vec(&pv.view());
        if norm < p.pole_tol {
            return Err(Error::ZeroVector { norm });
        }
        let tv = t.apply(&psi, q)?;
        let dev = max_abs_vec(&(&tv - &(&pv * lam)).view());
        worst = worst.max(dev / (lam.norm() * norm));
    }
    Ok(worst)
}

/// All unwanted-term coefficients `K1_j`, `K3_j` (`j = 1..n`) and `K2_{lj}`
/// (`l < j`) at the given roots, as `(label, magnitude)` pairs normalized by
/// `|a_1(u)|`.
pub fn k_residuals(
    module: &EvaluationModule,
    roots: &[Complex64],
    c: Complex64,
    u: Complex64,
    q: Complex64,
    p: &ModularParams,
) -> Result<Vec<(String, f64)>> {
    let z = &module.z;
    let n = roots.len();
    let scale = vacuum_eigenvalue(1, q, u, z, p)?.norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for j in 1..=n {
        let k1 = k1_coef(j, u, q, roots, z, c, p)?;
        out.push((format!("K1[{j}]"), k1.norm() / scale));
        let k3 = k3_coef(j, u, q, roots, z, c, p)?;
        out.push((format!("K3[{j}]"), k3.norm() / scale));
    }
    for l in 1..=n {
        for j in l + 1..=n {
            let k2 = k2_coef(l, j, u, q, roots, z, c, p)?;
            out.push((format!("K2[{l},{j}]"), k2.norm() / scale));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::build_module;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const QS: Complex64 = Complex64::new(0.31, 0.2);
    const UF: Complex64 = Complex64::new(0.37, 0.21);
    const UU1: Complex64 = Complex64::new(0.27, 0.11);
    const UU2: Complex64 = Complex64::new(-0.08, 0.19);
    const UU3: Complex64 = Complex64::new(0.51, -0.05);
    const C0: Complex64 = Complex64::new(0.0, 0.0);

    fn z_sites(n: usize) -> Vec<Complex64> {
        match n {
            1 => vec![c64(0.3, 0.0)],
            2 => vec![c64(0.1, 0.0), c64(0.45, 0.0)],
            _ => vec![c64(0.1, 0.0), c64(0.45, 0.0), c64(0.75, 0.0)],
        }
    }

    #[test]
    fn annihilators_kill_the_vacuum() {
        let p = ModularParams::default();
        for n in 1..=3 {
            let m = build_module(&z_sites(n)).unwrap();
            for i in 1..=3 {
                let r = annihilation_residual(&m, i, UF, QS, C0, &p).unwrap();
                assert!(r < 1e-12, "annihilator {i} residual {r:.3e} at n={n}");
            }
        }
    }

    #[test]
    fn diagonal_actions_match_formulas() {
        let p = ModularParams::default();
        for n in 1..=3 {
            let m = build_module(&z_sites(n)).unwrap();
            for i in 1..=3 {
                let r = vacuum_action_residual(&m, i, UF, QS, C0, &p).unwrap();
                assert!(r < 1e-10, "diagonal {i} residual {r:.3e} at n={n}");
            }
        }
    }

    #[test]
    fn two_root_phi_matches_direct_form() {
        let p = ModularParams::default();
        let m = build_module(&z_sites(2)).unwrap();
        let ph = phi(&m, &[UU1, UU2], &p).unwrap();
        let b1 = |u| generator(&m, 1, 2, u, &p).unwrap();
        let b2 = |u| generator(&m, 1, 3, u, &p).unwrap();
        let a1 = |u| generator(&m, 1, 1, u, &p).unwrap();
        let pp = p;
        let direct = b1(UU1)
            .compose(&b1(UU2))
            .unwrap()
            .sub(
                &b2(UU1)
                    .compose(&a1(UU2))
                    .unwrap()
                    .scale(move |q| Ok(1.0 / y_fn(q, UU1 - UU2, &pp)?)),
            )
            .unwrap();
        assert!(op_residual(&ph, &direct, QS).unwrap() < 1e-12);
    }

    #[test]
    fn three_root_phi_matches_expanded_form() {
        let p = ModularParams::default();
        let m = build_module(&z_sites(2)).unwrap();
        let ph = phi(&m, &[UU1, UU2, UU3], &p).unwrap();
        let b1 = |u| generator(&m, 1, 2, u, &p).unwrap();
        let b2 = |u| generator(&m, 1, 3, u, &p).unwrap();
        let a1 = |u| generator(&m, 1, 1, u, &p).unwrap();
        let pp = p;
        let om32 = omega_closed(UU3 - UU2, &p).unwrap();
        let mut direct = b1(UU1).compose(&b1(UU2)).unwrap().compose(&b1(UU3)).unwrap();
        direct = direct
            .sub(
                &b1(UU1)
                    .compose(&b2(UU2))
                    .unwrap()
                    .compose(&a1(UU3))
                    .unwrap()
                    .scale(move |q| Ok(1.0 / y_fn(q, UU2 - UU3, &pp)?)),
            )
            .unwrap();
        direct = direct
            .sub(
                &b2(UU1)
                    .compose(&b1(UU3))
                    .unwrap()
                    .compose(&a1(UU2))
                    .unwrap()
                    .scale(move |q| {
                        Ok(z_fn(q + 2.0 * pp.eta, UU3 - UU2, &pp)? / y_fn(q, UU1 - UU2, &pp)?)
                    }),
            )
            .unwrap();
        direct = direct
            .sub(
                &b2(UU1)
                    .compose(&b1(UU2))
                    .unwrap()
                    .compose(&a1(UU3))
                    .unwrap()
                    .scale(move |q| {
                        Ok(om32 * z_fn(q + 2.0 * pp.eta, UU2 - UU3, &pp)?
                            / y_fn(q, UU1 - UU3, &pp)?)
                    }),
            )
            .unwrap();
        assert!(op_residual(&ph, &direct, QS).unwrap() < 1e-10);
    }

    #[test]
    fn phi_rejects_duplicate_roots() {
        let p = ModularParams::default();
        let m = build_module(&z_sites(2)).unwrap();
        assert!(matches!(
            phi(&m, &[UU1, UU1 + 1.0], &p),
            Err(Error::DuplicateRoots { .. })
        ));
    }

    #[test]
    fn phi_exchange_symmetry() {
        let p = ModularParams::default();
        let m = build_module(&z_sites(2)).unwrap();
        let r = phi_symmetry_residual(&m, &[UU1, UU2], 1, QS, &p).unwrap();
        assert!(r < 1e-9, "swap residual {r:.3e}");
        for i in 1..=2 {
            let r = phi_symmetry_residual(&m, &[UU1, UU2, UU3], i, QS, &p).unwrap();
            assert!(r < 1e-9, "three-root swap {i} residual {r:.3e}");
        }
    }

    #[test]
    fn f1_substitution_matches_closed_form() {
        let p = ModularParams::default();
        let us3 = [UU1, UU2, UU3];
        for l in 1..=3 {
            let a = f1_coef(l, UF, QS, &us3, &p).unwrap();
            let b = f1_closed(l, UF, QS, &us3, &p).unwrap();
            assert!(
                (a - b).norm() / b.norm() < 1e-10,
                "F1[{l}] mismatch: {a} vs {b}"
            );
        }
    }

    #[test]
    fn coefficient_validates_indices() {
        let p = ModularParams::default();
        let us = [UU1, UU2];
        let z = z_sites(2);
        let bad = coefficient(CoefficientName::D, &[1, 2], UF, QS, &us, &z, C0, &p);
        assert!(matches!(bad, Err(Error::IndexError(_))));
        let bad = coefficient(CoefficientName::E, &[2, 2], UF, QS, &us, &z, C0, &p);
        assert!(matches!(bad, Err(Error::IndexError(_))));
        let bad = coefficient(CoefficientName::K1, &[3], UF, QS, &us, &z, C0, &p);
        assert!(matches!(bad, Err(Error::IndexError(_))));
        coefficient(CoefficientName::K2, &[1, 2], UF, QS, &us, &z, C0, &p).unwrap();
    }

    #[test]
    fn reflection_identity_holds() {
        let p = ModularParams::default();
        let r = alpha_beta_identity_residual(QS, c64(0.17, -0.05), &p).unwrap();
        assert!(r < 1e-11);
    }

    #[test]
    fn five_line_identity_sums_to_zero() {
        let p = ModularParams::default();
        let r = sixline_identity_residual(QS, UF, UU1, UU2, &p).unwrap();
        assert!(r < 1e-9, "identity residual {r:.3e}");
    }

    #[test]
    fn a1_action_expands_correctly() {
        let p = ModularParams::default();
        let m = build_module(&z_sites(2)).unwrap();
        let r = a1_action_residual(&m, &[UU1, UU2], UF, QS, &p).unwrap();
        assert!(r < 1e-8, "two-root action residual {r:.3e}");
        let r = a1_action_residual(&m, &[UU1, UU2, UU3], UF, QS, &p).unwrap();
        assert!(r < 1e-8, "three-root action residual {r:.3e}");
    }

    #[test]
    fn single_site_system_has_explicit_root() {
        let p = ModularParams::default();
        let root = c64(0.3, 0.0) + p.eta + 0.5;
        let r = bethe_residual(&[root], &z_sites(1), C0, &p).unwrap();
        assert!(r[0].norm() < 1e-13);
    }

    #[test]
    fn solver_finds_single_site_root() {
        let p = ModularParams::default();
        let sys = solve_bethe(&z_sites(1), C0, &SolveOptions::default(), &p).unwrap();
        assert!(sys.residual_norm < 1e-11);
        assert!(sys.in_cell, "roots {:?} not reduced into the cell", sys.roots);
        let ks = k_residuals(
            &build_module(&z_sites(1)).unwrap(),
            &sys.roots,
            C0,
            UF,
            QS,
            &p,
        )
        .unwrap();
        for (label, v) in ks {
            assert!(v < 1e-9, "{label} = {v:.3e}");
        }
    }

    #[test]
    fn solver_pipeline_two_sites() {
        let p = ModularParams::default();
        let z = z_sites(2);
        let sys = solve_bethe(&z, C0, &SolveOptions::default(), &p).unwrap();
        assert_eq!(sys.roots.len(), 2);
        assert!(sys.residual_norm < 1e-11);
        let m = build_module(&z).unwrap();
        let r = eigencheck(&m, &sys.roots, C0, UF, &[QS, c64(0.11, 0.31)], &p).unwrap();
        assert!(r < 1e-7, "eigencheck residual {r:.3e}");
        let lam = eigenvalue_lambda(UF, &sys.roots, &z, C0, &p).unwrap();
        let lg = lambda_general(UF, QS, &sys.roots, &z, C0, &p).unwrap();
        assert!((lam - lg).norm() / lam.norm() < 1e-9);
    }

    #[test]
    fn solver_reports_failure_modes() {
        let p = ModularParams::default();
        assert!(matches!(
            solve_bethe(&[], C0, &SolveOptions::default(), &p),
            Err(Error::EmptyModule)
        ));
        let opts = SolveOptions {
            restarts: 1,
            max_iterations: 0,
            ..SolveOptions::default()
        };
        assert!(matches!(
            solve_bethe(&z_sites(1), C0, &opts, &p),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn twisted_pipeline_single_site() {
        let p = ModularParams::default();
        let ct = c64(0.25, 0.0);
        let sys = solve_bethe(&z_sites(1), ct, &SolveOptions::default(), &p).unwrap();
        assert!(sys.residual_norm < 1e-11);
        let m = build_module(&z_sites(1)).unwrap();
        let r = eigencheck(&m, &sys.roots, ct, UF, &[QS, c64(0.11, 0.31)], &p).unwrap();
        assert!(r < 1e-8, "twisted eigencheck residual {r:.3e}");
    }

    #[test]
    fn lambda_is_symmetric_under_root_swap() {
        let p = ModularParams::default();
        let z = z_sites(2);
        let sys = solve_bethe(&z, C0, &SolveOptions::default(), &p).unwrap();
        let swapped = vec![sys.roots[1], sys.roots[0]];
        let a = eigenvalue_lambda(UF, &sys.roots, &z, C0, &p).unwrap();
        let b = eigenvalue_lambda(UF, &swapped, &z, C0, &p).unwrap();
        assert!((a - b).norm() / a.norm() < 1e-12);
    }

    #[test]
    fn lambda_has_finite_limit_at_apparent_poles() {
        // The first two terms of the closed form each have a pole at u = u_k
        // that cancels in the sum; probe the two-sided limit numerically. The
        // cancellation is only as accurate as the pole proximity allows, so
        // the tolerance here is loose.
        let p = ModularParams::default();
        let z = z_sites(1);
        let sys = solve_bethe(&z, C0, &SolveOptions::default(), &p).unwrap();
        let uk = sys.roots[0];
        let a = eigenvalue_lambda(uk + 1e-5, &sys.roots, &z, C0, &p).unwrap();
        let b = eigenvalue_lambda(uk - 1e-5, &sys.roots, &z, C0, &p).unwrap();
        assert!((a - b).norm() / a.norm() < 1e-3, "two-sided gap {:.3e}", (a - b).norm() / a.norm());
    }

    #[test]
    fn eigencheck_rejects_perturbed_roots() {
        let p = ModularParams::default();
        let z = z_sites(1);
        let sys = solve_bethe(&z, C0, &SolveOptions::default(), &p).unwrap();
        let fake: Vec<Complex64> = sys.roots.iter().map(|&r| r + 0.137).collect();
        let m = build_module(&z).unwrap();
        let r = eigencheck(&m, &fake, C0, UF, &[QS], &p).unwrap();
        assert!(r > 1e-2, "perturbed roots should fail, residual {r:.3e}");
    }
}
