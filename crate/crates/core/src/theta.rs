//! The odd Jacobi theta function and its defining identities.
//!
//! The function evaluated here is
//!
//! ```text
//! theta(u) = -sum_{j in Z} exp( pi*i*tau*(j+1/2)^2 + 2*pi*i*(j+1/2)*(u+1/2) )
//! ```
//!
//! an odd entire function with zeros exactly on the lattice `Z + tau*Z` and
//! quasi-periods `theta(u+1) = -theta(u)` and
//! `theta(u+tau) = -exp(-pi*i*tau - 2*pi*i*u) * theta(u)`.
//!
//! Arguments are first reduced into a fundamental cell around the origin and
//! the quasi-period multiplier is restored in log-space, so evaluation stays
//! accurate for arguments far from the cell. The reduced series is summed in
//! symmetric pairs `(j, -1-j)` whose terms decay like
//! `exp(-pi*Im(tau)*(j+1/2)^2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModularParams;

/// Hard cap on the number of `(j, -1-j)` term pairs summed per evaluation.
const MAX_PAIRS: usize = 64;

/// A theta evaluation together with the truncation point actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    /// Value of the theta function.
    pub value: Complex64,
    /// Total number of series terms summed (two per symmetric pair).
    pub terms_used: usize,
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const PI: f64 = std::f64::consts::PI;

/// Sums the series at an argument already reduced near the fundamental cell.
///
/// Returns the signed sum and the number of terms used; `converged` reports
/// whether the tail dropped below `series_tol` before the term cap.
fn series(u: Complex64, p: &ModularParams) -> (Complex64, usize, bool) {
    let mut s = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    for j in 0..MAX_PAIRS {
        let jp = j as f64 + 0.5; // j + 1/2
        let jm = -(j as f64) - 0.5; // -1-j + 1/2
        let half = u + 0.5;
        let t1 = (I * PI * p.tau * jp * jp + 2.0 * I * PI * jp * half).exp();
        let t2 = (I * PI * p.tau * jm * jm + 2.0 * I * PI * jm * half).exp();
        s += t1 + t2;
        terms += 2;
        if t1.norm() + t2.norm() < p.series_tol * (s.norm() + 1.0) {
            return (-s, terms, true);
        }
    }
    (-s, terms, false)
}

/// Reduces `u` to `u' + m + n*tau` with `u'` near the origin and returns
/// `(u', multiplier)` where `theta(u) = multiplier * theta(u')`.
fn reduce(u: Complex64, p: &ModularParams) -> (Complex64, Complex64) {
    let n = (u.im / p.tau.im).round();
    let u1 = u - n * p.tau;
    let m = u1.re.round();
    let up = u1 - m;
    // theta(u' + m + n*tau) = (-1)^(m+n) exp(-pi*i*tau*n^2 - 2*pi*i*n*u') theta(u')
    // The parity sign is applied exactly so lattice translations along the
    // real axis (n = 0) cost no accuracy at all.
    let sign = if ((m + n) as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let mult = if n == 0.0 {
        Complex64::new(sign, 0.0)
    } else {
        sign * (-I * PI * p.tau * n * n - 2.0 * I * PI * n * up).exp()
    };
    (up, mult)
}

/// Evaluates the theta function with full error reporting.
pub fn theta(u: Complex64, p: &ModularParams) -> Result<ThetaValue> {
    p.validate()?;
    if !u.re.is_finite() || !u.im.is_finite() {
        return Err(Error::InvalidParams("theta argument must be finite".into()));
    }
    let (up, mult) = reduce(u, p);
    let (s, terms_used, converged) = series(up, p);
    if !converged {
        return Err(Error::SeriesDivergence { terms: MAX_PAIRS });
    }
    Ok(ThetaValue {
        value: mult * s,
        terms_used,
    })
}

/// Fast internal evaluation for validated parameters.
///
/// Uses the same reduction and summation as [`theta`] but skips revalidation;
/// the term cap is generous enough that every validated parameter set
/// converges long before reaching it.
pub(crate) fn th(u: Complex64, p: &ModularParams) -> Complex64 {
    let (up, mult) = reduce(u, p);
    mult * series(up, p).0
}

/// Evaluates a theta value destined for a denominator, rejecting near-poles.
///
/// `label` names the denominator in the error message, e.g. `"theta(q - eta)"`.
pub(crate) fn th_den(u: Complex64, label: &str, p: &ModularParams) -> Result<Complex64> {
    let v = th(u, p);
    if v.norm() < p.pole_tol {
        return Err(Error::Pole {
            label: label.to_string(),
            magnitude: v.norm(),
            tolerance: p.pole_tol,
        });
    }
    Ok(v)
}

/// Residual of the two quasi-periodicity relations at `u`, each normalized
/// by the magnitude of the terms being compared (the period-`tau` relation
/// involves an exponential factor that dominates `theta(u)` itself far from
/// the fundamental cell).
pub fn quasiperiodicity_residual(u: Complex64, p: &ModularParams) -> Result<f64> {
    let t = theta(u, p)?.value;
    let t1 = theta(u + 1.0, p)?.value;
    let tt = theta(u + p.tau, p)?.value;
    let r1 = (t1 + t).norm() / t1.norm().max(t.norm()).max(1.0);
    let ft = (-I * PI * p.tau - 2.0 * I * PI * u).exp() * t;
    let r2 = (tt + ft).norm() / tt.norm().max(ft.norm()).max(1.0);
    Ok(r1.max(r2))
}

/// Residual of the three-term product identity
///
/// ```text
/// theta(u+x) theta(u-x) theta(v+y) theta(v-y)
///   = theta(u+y) theta(u-y) theta(v+x) theta(v-x)
///   + theta(u+v) theta(u-v) theta(x+y) theta(x-y)
/// ```
///
/// normalized by the largest magnitude among the three products.
pub fn three_term_residual(
    u: Complex64,
    v: Complex64,
    x: Complex64,
    y: Complex64,
    p: &ModularParams,
) -> Result<f64> {
    let quad = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| -> Result<Complex64> {
        Ok(theta(a, p)?.value * theta(b, p)?.value * theta(c, p)?.value * theta(d, p)?.value)
    };
    let p0 = quad(u + x, u - x, v + y, v - y)?;
    let p1 = quad(u + y, u - y, v + x, v - x)?;
    let p2 = quad(u + v, u - v, x + y, x - y)?;
    let scale = p0.norm().max(p1.norm()).max(p2.norm()).max(f64::MIN_POSITIVE);
    Ok((p0 - p1 - p2).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independently computed reference value at tau = 0.8i.
    #[test]
    #[allow(clippy::excessive_precision)]
    fn matches_reference_value() {
        let p = ModularParams::default();
        let t = theta(c(0.31, 0.12), &p).unwrap();
        let want = c(0.94331764741382100511, 0.24096956512310014145);
        assert!(
            (t.value - want).norm() < 1e-15,
            "theta(0.31+0.12i) = {}, want {}",
            t.value,
            want
        );
        assert!(t.terms_used >= 4 && t.terms_used <= 2 * MAX_PAIRS);
    }

    #[test]
    fn vanishes_on_lattice() {
        let p = ModularParams::default();
        for u in [
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(-3.0, 0.0),
            c(0.0, 0.8),
            c(2.0, 1.6),
        ] {
            // Far lattice points carry a large quasi-period multiplier, so the
            // zero is exact only relative to that scale.
            let scale = reduce(u, &p).1.norm().max(1.0);
            assert!(
                theta(u, &p).unwrap().value.norm() < 1e-14 * scale,
                "u = {u}"
            );
        }
    }

    #[test]
    fn odd_and_reflection_symmetric() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 1.6 - 0.8);
            let t = theta(u, &p).unwrap().value;
            let tm = theta(-u, &p).unwrap().value;
            assert!((t + tm).norm() < 1e-13 * (1.0 + t.norm()));
            // theta(1 - u) = theta(u) follows from oddness and antiperiodicity.
            let tr = theta(Complex64::new(1.0, 0.0) - u, &p).unwrap().value;
            assert!((tr - t).norm() < 1e-13 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn quasiperiodicity_in_cell_and_far_field() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..100 {
            let base = c(rng.gen::<f64>(), rng.gen::<f64>() * 0.8);
            // Alternate between in-cell points and points shifted far away.
            let u = if k % 2 == 0 {
                base
            } else {
                base + c(
                    (rng.gen::<f64>() * 12.0 - 6.0).round(),
                    (rng.gen::<f64>() * 8.0 - 4.0).round() * p.tau.im,
                )
            };
            let r = quasiperiodicity_residual(u, &p).unwrap();
            assert!(r < 1e-10, "residual {r:.3e} at u = {u}");
        }
    }

    #[test]
    fn three_term_identity_holds() {
        let p = ModularParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let mut pt = || c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 0.8 - 0.4);
            let r = three_term_residual(pt(), pt(), pt(), pt(), &p).unwrap();
            assert!(r < 1e-10, "residual {r:.3e}");
        }
    }

    #[test]
    fn complex_tau_reduction_agrees_with_raw_series() {
        // At a tau with nonzero real part the reduction must still agree with
        // direct summation at a moderate argument.
        let p = ModularParams::new(c(0.3, 0.7), c(0.12, 0.03)).unwrap();
        let u = c(0.41, 0.29);
        let direct = series(u, &p).0;
        let reduced = theta(u, &p).unwrap().value;
        assert!((direct - reduced).norm() < 1e-13);
        let r = quasiperiodicity_residual(u + 3.0 * p.tau - 2.0, &p).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = ModularParams::default();
        assert!(matches!(
            theta(c(f64::NAN, 0.0), &p),
            Err(Error::InvalidParams(_))
        ));
        let bad = ModularParams {
            tau: c(0.0, -0.8),
            ..ModularParams::default()
        };
        assert!(matches!(
            theta(c(0.3, 0.0), &bad),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn pole_guard_reports_label() {
        let p = ModularParams::default();
        let err = th_den(c(0.0, 0.0), "theta(q)", &p).unwrap_err();
        match err {
            Error::Pole { label, magnitude, .. } => {
                assert_eq!(label, "theta(q)");
                assert!(magnitude < 1e-14);
            }
            other => panic!("expected Pole, got {other:?}"),
        }
    }
}
