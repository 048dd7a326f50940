//! The 9x9 dynamical R-matrix of `E_{tau,eta}(so3)` and its identities.
//!
//! The R-matrix acts on `C^3 (x) C^3` and depends on a dynamical parameter
//! `q` and a spectral parameter `u`. Its entries are built from a small set
//! of elliptic coefficient functions (`g`, `alpha`, `beta`, `epsilon`,
//! `gamma`, `delta`, ...) defined here; the conserved weight is
//! `h = diag(1, 0, -1)` on each factor.
//!
//! Tensor-leg conventions: basis index `i1 i2 ... in` (each `0..3`) is
//! flattened row-major with leg 0 the slowest, so a matrix entry
//! `E_{ab} (x) E_{cd}` lands at row `(a-1)*3 + (c-1)`, column
//! `(b-1)*3 + (d-1)` in 1-based component labels.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::ModularParams;
use crate::theta::{th, th_den};
use crate::util::max_abs;

/// Single-factor weight of each `C^3` basis vector.
pub const WEIGHTS: [i64; 3] = [1, 0, -1];

/// The scalar coefficient functions appearing in the R-matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentName {
    /// `g(u)`, the unitarity scale; no extra parameters.
    G,
    /// `alpha(q1, q2; u)`; two parameters.
    Alpha,
    /// `beta(q1, q2; u)`; two parameters.
    Beta,
    /// `epsilon(q; u)`, the middle-weight diagonal entry; one parameter.
    Epsilon,
    /// `gamma(q1, q2; u)`; two parameters.
    Gamma,
    /// `delta(q; u)`; one parameter.
    Delta,
    /// `omega(q; u)` in its defining quotient form; one parameter.
    Omega,
    /// `y(q; u) = gamma(q, -q; u) / gamma(q, eta; u)`; one parameter.
    Y,
    /// `z(q; u) = g(u) / beta(q, eta; u)`; one parameter.
    Z,
}

/// `g(u) = theta(u-eta) theta(u-2eta) / (theta(eta) theta(2eta))`.
pub fn g_fn(u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let d1 = th_den(e, "theta(eta)", p)?;
    let d2 = th_den(2.0 * e, "theta(2 eta)", p)?;
    Ok(th(u - e, p) * th(u - 2.0 * e, p) / (d1 * d2))
}

/// `alpha(q1, q2; u) = theta(eta-u) theta(q12-u) / (theta(eta) theta(q12))`
/// with `q12 = q1 - q2`.
pub fn alpha(q1: Complex64, q2: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let q12 = q1 - q2;
    let d1 = th_den(e, "theta(eta)", p)?;
    let d2 = th_den(q12, "theta(q1 - q2)", p)?;
    Ok(th(e - u, p) * th(q12 - u, p) / (d1 * d2))
}

/// `beta(q1, q2; u) = theta(eta-u) theta(u) theta(q12-2eta)
///  / (theta(-2eta) theta(eta) theta(q12))` with `q12 = q1 - q2`.
pub fn beta(q1: Complex64, q2: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let q12 = q1 - q2;
    let d1 = th_den(-2.0 * e, "theta(-2 eta)", p)?;
    let d2 = th_den(e, "theta(eta)", p)?;
    let d3 = th_den(q12, "theta(q1 - q2)", p)?;
    Ok(th(e - u, p) * th(u, p) * th(q12 - 2.0 * e, p) / (d1 * d2 * d3))
}

/// `epsilon(q; u)`, the weight-zero diagonal entry.
pub fn epsilon(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let de = th_den(e, "theta(eta)", p)?;
    let d2e = th_den(2.0 * e, "theta(2 eta)", p)?;
    let dqm = th_den(q - e, "theta(q - eta)", p)?;
    let dq = th_den(q, "theta(q)", p)?;
    let dqp = th_den(q + e, "theta(q + eta)", p)?;
    let t1 = th(e + u, p) * th(2.0 * e - u, p) / (de * d2e);
    let t2 = th(u, p) * th(e - u, p) / (de * d2e);
    let br = th(q + e, p) * th(q - 2.0 * e, p) / (dqm * dq)
        + th(q - e, p) * th(q + 2.0 * e, p) / (dqp * dq);
    Ok(t1 - t2 * br)
}

/// `gamma(q1, q2; u) = theta(u) theta(q1+q2-eta-u) theta(q1-2eta) theta(q2+eta)
///  / (theta(eta) theta(q1+q2-2eta) theta(q1+eta) theta(q2))`.
pub fn gamma(q1: Complex64, q2: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let d1 = th_den(e, "theta(eta)", p)?;
    let d2 = th_den(q1 + q2 - 2.0 * e, "theta(q1 + q2 - 2 eta)", p)?;
    let d3 = th_den(q1 + e, "theta(q1 + eta)", p)?;
    let d4 = th_den(q2, "theta(q2)", p)?;
    Ok(th(u, p) * th(q1 + q2 - e - u, p) * th(q1 - 2.0 * e, p) * th(q2 + e, p)
        / (d1 * d2 * d3 * d4))
}

/// `delta(q; u) = theta(u-q) theta(u-q+eta) / (theta(q) theta(q-eta))`.
pub fn delta(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let d1 = th_den(q, "theta(q)", p)?;
    let d2 = th_den(q - e, "theta(q - eta)", p)?;
    Ok(th(u - q, p) * th(u - q + e, p) / (d1 * d2))
}

/// `omega(q; u)` in its defining quotient form
/// `g gamma(q,-q) / (epsilon gamma(q,-q) + gamma(q,eta) gamma(eta,-q))`;
/// independent of `q` and equal to [`omega_closed`].
pub fn omega_quotient(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let den = epsilon(q, u, p)? * gamma(q, -q, u, p)?
        + gamma(q, e, u, p)? * gamma(e, -q, u, p)?;
    if den.norm() < p.pole_tol {
        return Err(Error::Pole {
            label: "epsilon gamma(q,-q) + gamma(q,eta) gamma(eta,-q)".into(),
            magnitude: den.norm(),
            tolerance: p.pole_tol,
        });
    }
    Ok(g_fn(u, p)? * gamma(q, -q, u, p)? / den)
}

/// Closed form `omega(u) = theta(u+eta) theta(u-2eta)
///  / (theta(u-eta) theta(u+2eta))`.
pub fn omega_closed(u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let d1 = th_den(u - e, "theta(u - eta)", p)?;
    let d2 = th_den(u + 2.0 * e, "theta(u + 2 eta)", p)?;
    Ok(th(u + e, p) * th(u - 2.0 * e, p) / (d1 * d2))
}

/// `y(q; u) = gamma(q, -q; u) / gamma(q, eta; u)`.
pub fn y_fn(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let den = gamma(q, e, u, p)?;
    if den.norm() < p.pole_tol {
        return Err(Error::Pole {
            label: "gamma(q, eta; u)".into(),
            magnitude: den.norm(),
            tolerance: p.pole_tol,
        });
    }
    Ok(gamma(q, -q, u, p)? / den)
}

/// `z(q; u) = g(u) / beta(q, eta; u)
///  = theta(u-2eta) theta(q-eta) / (theta(u) theta(q-3eta))`.
pub fn z_fn(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Complex64> {
    let e = p.eta;
    let d1 = th_den(u, "theta(u)", p)?;
    let d2 = th_den(q - 3.0 * e, "theta(q - 3 eta)", p)?;
    Ok(th(u - 2.0 * e, p) * th(q - e, p) / (d1 * d2))
}

/// Evaluates a named coefficient function at parameters `args` and spectral
/// parameter `u`. The required `args` lengths are: `G` none; `Epsilon`,
/// `Delta`, `Omega`, `Y`, `Z` one; `Alpha`, `Beta`, `Gamma` two.
pub fn component(
    name: ComponentName,
    args: &[Complex64],
    u: Complex64,
    p: &ModularParams,
) -> Result<Complex64> {
    let need = match name {
        ComponentName::G => 0,
        ComponentName::Epsilon
        | ComponentName::Delta
        | ComponentName::Omega
        | ComponentName::Y
        | ComponentName::Z => 1,
        ComponentName::Alpha | ComponentName::Beta | ComponentName::Gamma => 2,
    };
    if args.len() != need {
        return Err(Error::InvalidParams(format!(
            "component {name:?} takes {need} parameter(s), got {}",
            args.len()
        )));
    }
    match name {
        ComponentName::G => g_fn(u, p),
        ComponentName::Alpha => alpha(args[0], args[1], u, p),
        ComponentName::Beta => beta(args[0], args[1], u, p),
        ComponentName::Epsilon => epsilon(args[0], u, p),
        ComponentName::Gamma => gamma(args[0], args[1], u, p),
        ComponentName::Delta => delta(args[0], u, p),
        ComponentName::Omega => omega_quotient(args[0], u, p),
        ComponentName::Y => y_fn(args[0], u, p),
        ComponentName::Z => z_fn(args[0], u, p),
    }
}

/// One structurally nonzero entry `coefficient * E_{ab} (x) E_{cd}`, in
/// 1-based component labels.
type RTerm = (Complex64, usize, usize, usize, usize);

/// The `(coefficient, a, b, c, d)` placements of the 19 structurally nonzero
/// entries.
fn r_terms(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Vec<RTerm>> {
    let e = p.eta;
    Ok(vec![
        (g_fn(u, p)?, 1, 1, 1, 1),
        (g_fn(u, p)?, 3, 3, 3, 3),
        (epsilon(q, u, p)?, 2, 2, 2, 2),
        (alpha(e, q, u, p)?, 1, 2, 2, 1),
        (alpha(q, e, u, p)?, 2, 1, 1, 2),
        (alpha(-q, e, u, p)?, 2, 3, 3, 2),
        (alpha(e, -q, u, p)?, 3, 2, 2, 3),
        (beta(e, q, u, p)?, 1, 1, 2, 2),
        (beta(q, e, u, p)?, 2, 2, 1, 1),
        (beta(-q, e, u, p)?, 2, 2, 3, 3),
        (beta(e, -q, u, p)?, 3, 3, 2, 2),
        (gamma(-q, q, u, p)?, 1, 1, 3, 3),
        (gamma(-q, e, u, p)?, 1, 2, 3, 2),
        (-gamma(e, q, u, p)?, 2, 1, 2, 3),
        (gamma(q, -q, u, p)?, 3, 3, 1, 1),
        (gamma(q, e, u, p)?, 3, 2, 1, 2),
        (-gamma(e, -q, u, p)?, 2, 3, 2, 1),
        (delta(q, u, p)?, 3, 1, 1, 3),
        (delta(-q, u, p)?, 1, 3, 3, 1),
    ])
}

/// Builds the 9x9 dynamical R-matrix `R(q, u)`.
pub fn build_r(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Array2<Complex64>> {
    let mut r = Array2::zeros((9, 9));
    for (coeff, a, b, c, d) in r_terms(q, u, p)? {
        r[[(a - 1) * 3 + (c - 1), (b - 1) * 3 + (d - 1)]] += coeff;
    }
    Ok(r)
}

/// The flip operator `P(v (x) w) = w (x) v` on `C^3 (x) C^3`.
pub fn perm_matrix() -> Array2<Complex64> {
    let mut m = Array2::zeros((9, 9));
    for i in 0..3 {
        for j in 0..3 {
            m[[i * 3 + j, j * 3 + i]] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Applies `R_{ab}(q - 2 eta sum_{c in shift_legs} h_c, u)` on `(C^3)^(x n_legs)`.
///
/// Legs are 0-based; `a`, `b`, and every shift leg must be distinct and
/// within range.
pub fn r_dyn_shifted(
    a: usize,
    b: usize,
    shift_legs: &[usize],
    q: Complex64,
    u: Complex64,
    n_legs: usize,
    p: &ModularParams,
) -> Result<Array2<Complex64>> {
    if a >= n_legs || b >= n_legs || a == b {
        return Err(Error::IndexError(format!(
            "acting legs ({a}, {b}) must be distinct and below {n_legs}"
        )));
    }
    let mut seen = vec![false; n_legs];
    seen[a] = true;
    seen[b] = true;
    for &c in shift_legs {
        if c >= n_legs || seen[c] {
            return Err(Error::IndexError(format!(
                "shift leg {c} out of range or overlapping the acting legs"
            )));
        }
        seen[c] = true;
    }

    let dim = 3usize.pow(n_legs as u32);
    let mut m = Array2::zeros((dim, dim));
    let mut cache: HashMap<i64, Array2<Complex64>> = HashMap::new();
    let mut idx = vec![0usize; n_legs];
    for col in 0..dim {
        let mut rem = col;
        for leg in (0..n_legs).rev() {
            idx[leg] = rem % 3;
            rem /= 3;
        }
        let lam: i64 = shift_legs.iter().map(|&c| WEIGHTS[idx[c]]).sum();
        if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(lam) {
            let shifted_q = q - 2.0 * p.eta * lam as f64;
            slot.insert(build_r(shifted_q, u, p)?);
        }
        let rl = &cache[&lam];
        let (ja, jb) = (idx[a], idx[b]);
        for ia in 0..3 {
            for ib in 0..3 {
                let v = rl[[ia * 3 + ib, ja * 3 + jb]];
                if v != Complex64::new(0.0, 0.0) {
                    let mut row = 0usize;
                    for (leg, &digit) in idx.iter().enumerate() {
                        let d = if leg == a {
                            ia
                        } else if leg == b {
                            ib
                        } else {
                            digit
                        };
                        row = row * 3 + d;
                    }
                    m[[row, col]] += v;
                }
            }
        }
    }
    Ok(m)
}

/// Residual of `R(q, 0) = P` in max norm.
pub fn r_at_zero_residual(q: Complex64, p: &ModularParams) -> Result<f64> {
    let r = build_r(q, Complex64::new(0.0, 0.0), p)?;
    Ok(max_abs(&(&r - &perm_matrix()).view()))
}

/// Residual of the unitarity relation
/// `R_12(q, u) R_21(q, -u) = g(u) g(-u) Id`, relative to `|g(u) g(-u)|`.
pub fn unitarity_residual(q: Complex64, u: Complex64, p: &ModularParams) -> Result<f64> {
    let r12 = build_r(q, u, p)?;
    let pm = perm_matrix();
    let r21 = pm.dot(&build_r(q, -u, p)?).dot(&pm);
    let scale = g_fn(u, p)? * g_fn(-u, p)?;
    let mut prod = r12.dot(&r21);
    for i in 0..9 {
        prod[[i, i]] -= scale;
    }
    Ok(max_abs(&prod.view()) / scale.norm())
}

/// Largest entry violating the zero-weight structure: entries outside the 19
/// listed cells, plus the commutator with the total weight operator. Both are
/// structural, so the result is exactly zero.
pub fn zero_weight_violation(q: Complex64, u: Complex64, p: &ModularParams) -> Result<f64> {
    let r = build_r(q, u, p)?;
    let mut allowed = [[false; 9]; 9];
    for (_, a, b, c, d) in r_terms(q, u, p)? {
        allowed[(a - 1) * 3 + (c - 1)][(b - 1) * 3 + (d - 1)] = true;
    }
    let mut worst = 0.0f64;
    for row in 0..9 {
        for col in 0..9 {
            // total weight of a two-leg basis index
            let w_row = WEIGHTS[row / 3] + WEIGHTS[row % 3];
            let w_col = WEIGHTS[col / 3] + WEIGHTS[col % 3];
            if !allowed[row][col] {
                worst = worst.max(r[[row, col]].norm());
            }
            if w_row != w_col {
                worst = worst.max(r[[row, col]].norm());
            }
        }
    }
    Ok(worst)
}

/// Residual of the dynamical Yang-Baxter equation on three legs,
/// relative to the largest entry of the left-hand side.
pub fn dybe_residual(
    q: Complex64,
    u1: Complex64,
    u2: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let u12 = u1 - u2;
    let lhs = r_dyn_shifted(0, 1, &[2], q, u12, 3, p)?
        .dot(&r_dyn_shifted(0, 2, &[], q, u1, 3, p)?)
        .dot(&r_dyn_shifted(1, 2, &[0], q, u2, 3, p)?);
    let rhs = r_dyn_shifted(1, 2, &[], q, u2, 3, p)?
        .dot(&r_dyn_shifted(0, 2, &[1], q, u1, 3, p)?)
        .dot(&r_dyn_shifted(0, 1, &[], q, u12, 3, p)?);
    Ok(max_abs(&(&lhs - &rhs).view()) / max_abs(&lhs.view()))
}

/// Draws a point from the fundamental cell `[0,1) + [0,1) tau` with a margin
/// keeping it away from the lattice zeros of theta.
pub fn random_cell_point<R: Rng + ?Sized>(rng: &mut R, p: &ModularParams) -> Complex64 {
    let x = 0.05 + 0.9 * rng.gen::<f64>();
    let y = 0.05 + 0.9 * rng.gen::<f64>();
    Complex64::new(x, 0.0) + p.tau * y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const QS: Complex64 = Complex64::new(0.31, 0.2);
    const US: Complex64 = Complex64::new(0.17, -0.05);

    #[test]
    fn reduces_to_flip_at_zero() {
        let p = ModularParams::default();
        assert!(r_at_zero_residual(QS, &p).unwrap() < 1e-12);
    }

    #[test]
    fn unitarity_holds() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let q = random_cell_point(&mut rng, &p);
            let u = random_cell_point(&mut rng, &p);
            let r = unitarity_residual(q, u, &p).unwrap();
            assert!(r < 1e-10, "residual {r:.3e} at q={q}, u={u}");
        }
    }

    #[test]
    fn zero_weight_structure_is_exact() {
        let p = ModularParams::default();
        assert_eq!(zero_weight_violation(QS, US, &p).unwrap(), 0.0);
        let nonzero = build_r(QS, US, &p)
            .unwrap()
            .iter()
            .filter(|v| v.norm() > 0.0)
            .count();
        assert_eq!(nonzero, 19);
    }

    #[test]
    fn dynamical_yang_baxter_holds() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let q = random_cell_point(&mut rng, &p);
            let u1 = random_cell_point(&mut rng, &p);
            let u2 = random_cell_point(&mut rng, &p);
            let r = dybe_residual(q, u1, u2, &p).unwrap();
            assert!(r < 1e-9, "residual {r:.3e} at q={q}");
        }
    }

    #[test]
    fn omega_is_q_independent_and_closed() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let reference = omega_quotient(QS, US, &p).unwrap();
        for _ in 0..10 {
            let q = c(
                0.05 + 0.55 * rng.gen::<f64>(),
                0.05 + 0.55 * rng.gen::<f64>(),
            );
            let v = omega_quotient(q, US, &p).unwrap();
            assert!((v - reference).norm() / reference.norm() < 1e-11);
        }
        let closed = omega_closed(US, &p).unwrap();
        assert!((closed - reference).norm() / reference.norm() < 1e-11);
        let inv = omega_closed(-US, &p).unwrap();
        assert!((closed * inv - 1.0).norm() < 1e-11);
    }

    #[test]
    fn z_matches_quotient_form() {
        let p = ModularParams::default();
        let direct = z_fn(QS, US, &p).unwrap();
        let quotient = g_fn(US, &p).unwrap() / beta(QS, p.eta, US, &p).unwrap();
        assert!((direct - quotient).norm() < 1e-12);
    }

    #[test]
    fn g_is_one_at_zero() {
        let p = ModularParams::default();
        let v = g_fn(c(0.0, 0.0), &p).unwrap();
        assert!((v - 1.0).norm() < 1e-13);
    }

    #[test]
    fn component_checks_parameter_count() {
        let p = ModularParams::default();
        let err = component(ComponentName::Alpha, &[QS], US, &p);
        assert!(matches!(err, Err(Error::InvalidParams(_))));
        let ok = component(ComponentName::Alpha, &[p.eta, QS], US, &p).unwrap();
        assert!((ok - alpha(p.eta, QS, US, &p).unwrap()).norm() == 0.0);
        let omega_v = component(ComponentName::Omega, &[QS], US, &p).unwrap();
        assert!((omega_v - omega_closed(US, &p).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn alpha_rejects_coinciding_parameters() {
        let p = ModularParams::default();
        let err = alpha(QS, QS, US, &p).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }

    #[test]
    fn r_dyn_validates_legs() {
        let p = ModularParams::default();
        assert!(matches!(
            r_dyn_shifted(0, 0, &[], QS, US, 2, &p),
            Err(Error::IndexError(_))
        ));
        assert!(matches!(
            r_dyn_shifted(0, 1, &[1], QS, US, 3, &p),
            Err(Error::IndexError(_))
        ));
        assert!(matches!(
            r_dyn_shifted(0, 1, &[3], QS, US, 3, &p),
            Err(Error::IndexError(_))
        ));
    }

    #[test]
    fn r_dyn_without_shift_matches_plain_r() {
        let p = ModularParams::default();
        let direct = build_r(QS, US, &p).unwrap();
        let dynamic = r_dyn_shifted(0, 1, &[], QS, US, 2, &p).unwrap();
        assert!(max_abs(&(&direct - &dynamic).view()) < 1e-15);
    }
}
