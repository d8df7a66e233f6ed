//! Simultaneous root finding for sampled polynomials.
//!
//! The primary method is Aberth–Ehrlich iteration: all roots are refined at
//! once from initial guesses placed on circles whose radii come from the
//! upper convex hull of `(k, log|c_k|)`. Iteration cost is quadratic in the
//! degree, which keeps degrees in the thousands tractable; an independent
//! eigenvalue-based cross-check lives in [`crate::companion`].

use num_complex::Complex64;

use crate::ensembles::SampledPolynomial;
use crate::{Error, Result};

/// Default convergence tolerance for [`find_roots`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Iteration cap per Aberth run; one restart from perturbed guesses is
/// attempted before giving up.
const MAX_SWEEPS: usize = 200;

/// A root whose normalized residual sits at this rounding level cannot be
/// improved in double precision and counts as converged even when its
/// correction stalls (ill-conditioned clusters).
const RESIDUAL_FLOOR: f64 = 4.0 * f64::EPSILON;

/// All zeros of one sampled polynomial, with residual statistics.
#[derive(Clone, Debug)]
pub struct RootSet {
    roots: Vec<Complex64>,
    max_residual: f64,
    median_residual: f64,
}

impl RootSet {
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Root count with multiplicity; equals the trimmed degree.
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn median_residual(&self) -> f64 {
        self.median_residual
    }
}

/// Computes all complex zeros of `poly`.
///
/// Coefficients are materialized from log space after max-normalization.
/// Zero coefficients at the low end contribute exact zero roots; the rest are
/// found by Aberth–Ehrlich iteration run until every correction falls below
/// `tol * (1 + |z|)`. Non-convergence after the iteration cap triggers one
/// restart from perturbed guesses and then an error carrying per-root flags.
pub fn find_roots(poly: &SampledPolynomial, tol: f64) -> Result<RootSet> {
    if poly.degree() == 0 {
        return Err(Error::DegreeZero);
    }
    let coeffs = poly.materialize_normalized();
    if coeffs.last().is_none_or(|c| c.norm() == 0.0) {
        return Err(Error::InvalidParameter(
            "leading coefficient vanished during materialization".into(),
        ));
    }

    // Trailing zero coefficients at the constant end are exact roots at 0.
    let zero_roots = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zero_roots..];

    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
    let mut flags = vec![true; zero_roots];
    if reduced.len() > 1 {
        let (found, converged) = aberth(reduced, tol)?;
        roots.extend(found);
        flags.extend(converged);
    }

    let failed = flags.iter().filter(|ok| !**ok).count();
    if failed > 0 {
        return Err(Error::NonConvergence {
            failed,
            total: flags.len(),
            converged: flags,
        });
    }

    let mut residuals: Vec<f64> = roots.iter().map(|&z| residual(&coeffs, z)).collect();
    residuals.sort_by(|a, b| a.total_cmp(b));
    let max_residual = residuals.last().copied().unwrap_or(0.0);
    let median_residual = residuals[residuals.len() / 2];
    if max_residual > tol {
        let converged: Vec<bool> = roots.iter().map(|&z| residual(&coeffs, z) <= tol).collect();
        let failed = converged.iter().filter(|ok| !**ok).count();
        return Err(Error::NonConvergence {
            failed,
            total: converged.len(),
            converged,
        });
    }

    Ok(RootSet {
        roots,
        max_residual,
        median_residual,
    })
}

/// Normalized backward-error proxy `|p(z)| / Σ_k |c_k| |z|^k`.
///
/// Zero only at exact roots; the polynomial is evaluated through its
/// reversal for `|z| > 1` so the quotient never overflows.
pub fn root_residual(poly: &SampledPolynomial, z: Complex64) -> f64 {
    residual(&poly.materialize_normalized(), z)
}

fn residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (value, scale) = eval_with_scale(coeffs, z);
    if scale == 0.0 {
        if value.norm() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        value.norm() / scale
    }
}

/// Horner evaluation with compensated summation, returning the value and
/// `Σ |c_k||z|^k`. For `|z| > 1` the reversed polynomial at `1/z` is used,
/// which multiplies both returns by `|z|^-d` and leaves their quotient (the
/// normalized residual) unchanged.
fn eval_with_scale(coeffs: &[Complex64], z: Complex64) -> (Complex64, f64) {
    if z.norm() <= 1.0 {
        horner_compensated(coeffs.iter().rev(), z)
    } else {
        let w = z.finv();
        horner_compensated(coeffs.iter(), w)
    }
}

fn horner_compensated<'a>(
    coeffs: impl Iterator<Item = &'a Complex64>,
    x: Complex64,
) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    let xn = x.norm();
    for &c in coeffs {
        let prod = acc * x;
        comp *= x;
        // Kahan step: add c to prod, tracking the rounding error.
        let sum = prod + c;
        let err = if prod.norm() >= c.norm() {
            (prod - sum) + c
        } else {
            (c - sum) + prod
        };
        acc = sum;
        comp += err;
        scale = scale * xn + c.norm();
    }
    (acc + comp, scale)
}

/// Newton ratio `p(z)/p'(z)` and the normalized residual `|p|/Σ|c||z|^k`,
/// both computed through the reversed polynomial for `|z| > 1`.
fn newton_ratio(coeffs: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let d = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let zn = z.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            scale = scale * zn + c.norm();
        }
        let res = if scale == 0.0 { 0.0 } else { p.norm() / scale };
        (ratio_guarded(p, dp, z), res)
    } else {
        // p(z) = z^d q(1/z) with q the reversed polynomial, so
        // p/p' = z q(u) / (d q(u) - u q'(u)) at u = 1/z.
        let u = z.finv();
        let un = u.norm();
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for &c in coeffs.iter() {
            dq = dq * u + q;
            q = q * u + c;
            scale = scale * un + c.norm();
        }
        let denom = q * d as f64 - u * dq;
        let res = if scale == 0.0 { 0.0 } else { q.norm() / scale };
        (ratio_guarded(z * q, denom, z), res)
    }
}

/// Complex division that stays finite when both operands live near the
/// bottom of the double range (the plain formula squares the denominator's
/// magnitude, which underflows to zero for `|den| < ~1e-154`).
fn robust_div(num: Complex64, den: Complex64) -> Complex64 {
    let m = den.re.abs().max(den.im.abs());
    if m == 0.0 || !m.is_finite() {
        return num / den;
    }
    (num / m) / (den / m)
}

fn ratio_guarded(num: Complex64, denom: Complex64, z: Complex64) -> Complex64 {
    if denom.norm() == 0.0 {
        if num.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            // Stationary point that is not a root: kick away deterministically.
            Complex64::new(1e-3 * (1.0 + z.norm()), 1e-3)
        }
    } else {
        robust_div(num, denom)
    }
}

/// Initial guesses on circles given by the upper convex hull of
/// `(k, log |c_k|)`: a hull segment of horizontal span `m` contributes `m`
/// guesses at the radius determined by its slope.
fn initial_guesses(coeffs: &[Complex64], radius_factor: f64, angle_offset: f64) -> Vec<Complex64> {
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k as f64, c.norm().ln()))
        .collect();

    // Monotone-chain upper hull over ascending k.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let degree = coeffs.len() - 1;
    let mut guesses = Vec::with_capacity(degree);
    // Golden-ratio phase per segment spreads the circles' starting angles
    // evenly over the full turn even when every segment holds one guess.
    const SEGMENT_PHASE: f64 = 0.381_966_011_250_105_1;
    for (seg, w) in hull.windows(2).enumerate() {
        let (k0, y0) = w[0];
        let (k1, y1) = w[1];
        let count = (k1 - k0).round() as usize;
        let radius = radius_factor * ((y0 - y1) / (k1 - k0)).exp();
        for j in 0..count {
            let angle = std::f64::consts::TAU
                * (j as f64 / count as f64 + seg as f64 * SEGMENT_PHASE)
                + 0.7
                + angle_offset;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    debug_assert_eq!(guesses.len(), degree);
    guesses
}

/// One Aberth–Ehrlich run (with a single perturbed restart). Returns the
/// roots and a per-root convergence flag.
fn aberth(coeffs: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, Vec<bool>)> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let first = aberth_once(coeffs, tol, 1.0, 0.0);
    if first.1.iter().all(|ok| *ok) {
        return Ok(first);
    }
    // Restart once from slightly expanded, rotated circles.
    let second = aberth_once(coeffs, tol, 1.0 + 1e-3, 0.17);
    Ok(second)
}

fn aberth_once(
    coeffs: &[Complex64],
    tol: f64,
    radius_factor: f64,
    angle_offset: f64,
) -> (Vec<Complex64>, Vec<bool>) {
    let degree = coeffs.len() - 1;
    let mut z = initial_guesses(coeffs, radius_factor, angle_offset);
    let mut converged = vec![false; degree];

    for _sweep in 0..MAX_SWEEPS {
        // Jacobi-style update: every correction reads the previous sweep.
        let mut next = z.clone();
        let mut all_done = true;
        for i in 0..degree {
            if converged[i] {
                continue;
            }
            let (w, res) = newton_ratio(coeffs, z[i]);
            if res <= RESIDUAL_FLOOR {
                // The value is at rounding level; no double-precision
                // correction can improve this root.
                converged[i] = true;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if j == i {
                    continue;
                }
                let mut diff = z[i] - z[j];
                if diff.norm() < 1e-150 {
                    diff = Complex64::new(tol * (1.0 + z[i].norm()) * (j + 1) as f64, tol);
                }
                repulsion += diff.finv();
            }
            let denom = Complex64::new(1.0, 0.0) - w * repulsion;
            let delta = if denom.norm() == 0.0 {
                w
            } else {
                robust_div(w, denom)
            };
            let candidate = z[i] - delta;
            if candidate.is_finite() && delta.is_finite() {
                next[i] = candidate;
                if delta.norm() <= tol * (1.0 + candidate.norm()) {
                    converged[i] = true;
                } else {
                    all_done = false;
                }
            } else {
                // Numerical breakdown: nudge and keep iterating.
                next[i] = z[i] * Complex64::new(1.0 + 1e-2, 1e-2);
                all_done = false;
            }
        }
        z = next;
        if all_done {
            break;
        }
    }
    (z, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{make_log_coeffs, sample_polynomial, EnsembleKind, SamplerSpec};

    fn poly_from_complex(coeffs: &[Complex64]) -> SampledPolynomial {
        SampledPolynomial::from_parts(vec![0.0; coeffs.len()], coeffs.to_vec(), (0, 0)).unwrap()
    }

    fn poly_from_real(coeffs: &[f64]) -> SampledPolynomial {
        poly_from_complex(
            &coeffs
                .iter()
                .map(|&c| Complex64::new(c, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    fn sort_by_re(mut roots: Vec<Complex64>) -> Vec<Complex64> {
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        roots
    }

    #[test]
    fn quadratic_with_unit_roots() {
        // z^2 - 1
        let rs = find_roots(&poly_from_real(&[-1.0, 0.0, 1.0]), DEFAULT_ROOT_TOL).unwrap();
        let roots = sort_by_re(rs.roots().to_vec());
        assert!((roots[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((roots[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quadratic_with_integer_roots() {
        // z^2 - 5z + 6 = (z-2)(z-3)
        let rs = find_roots(&poly_from_real(&[6.0, -5.0, 1.0]), DEFAULT_ROOT_TOL).unwrap();
        let roots = sort_by_re(rs.roots().to_vec());
        assert!((roots[0] - Complex64::new(2.0, 0.0)).norm() < 1e-11);
        assert!((roots[1] - Complex64::new(3.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn residual_examples() {
        let p = poly_from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(root_residual(&p, Complex64::new(1.0, 0.0)), 0.0);
        assert!((root_residual(&p, Complex64::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
        let q = poly_from_real(&[6.0, -5.0, 1.0]);
        assert!(root_residual(&q, Complex64::new(2.0, 0.0)) < 1e-15);
    }

    #[test]
    fn degree_zero_errors() {
        let p = poly_from_real(&[3.0]);
        assert!(matches!(find_roots(&p, 1e-12), Err(Error::DegreeZero)));
    }

    #[test]
    fn zero_constant_term_yields_zero_roots() {
        // z^3 + z^2 = z^2 (z + 1)
        let rs = find_roots(&poly_from_real(&[0.0, 0.0, 1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(rs.degree(), 3);
        let zeros = rs.roots().iter().filter(|z| z.norm() == 0.0).count();
        assert_eq!(zeros, 2);
        assert!(rs
            .roots()
            .iter()
            .any(|z| (z - Complex64::new(-1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn root_count_matches_degree_and_residuals_pass() {
        let coeffs = make_log_coeffs(&EnsembleKind::Kac, 50).unwrap();
        let poly = sample_polynomial(&coeffs, SamplerSpec::Rademacher, 3, 0);
        let rs = find_roots(&poly, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(rs.degree(), 50);
        assert!(rs.max_residual() <= DEFAULT_ROOT_TOL);
        assert!(rs.median_residual() <= rs.max_residual());
    }

    #[test]
    fn real_coefficients_give_conjugate_closed_root_sets() {
        let coeffs = make_log_coeffs(&EnsembleKind::Kac, 40).unwrap();
        for trial in 0..3u64 {
            let poly = sample_polynomial(&coeffs, SamplerSpec::RealGaussian, 17, trial);
            let rs = find_roots(&poly, DEFAULT_ROOT_TOL).unwrap();
            for z in rs.roots() {
                let conj = z.conj();
                let nearest = rs
                    .roots()
                    .iter()
                    .map(|w| (w - conj).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-8, "conjugate of {z} missing ({nearest:.2e})");
            }
        }
    }

    #[test]
    fn rescaled_coefficients_scale_the_roots() {
        use crate::calculus::rescale;
        let coeffs = make_log_coeffs(&EnsembleKind::Elliptic, 24).unwrap();
        for &h in &[2.0f64, 10.0] {
            let base = sample_polynomial(&coeffs, SamplerSpec::ComplexGaussian, 9, 4);
            let scaled_coeffs = rescale(&coeffs, h.ln());
            let scaled = SampledPolynomial::from_parts(
                scaled_coeffs.log_mag().to_vec(),
                base.xi().to_vec(),
                base.seed_record(),
            )
            .unwrap();
            let r1 = find_roots(&base, DEFAULT_ROOT_TOL).unwrap();
            let r2 = find_roots(&scaled, DEFAULT_ROOT_TOL).unwrap();
            for z in r1.roots() {
                let target = z * h;
                let nearest = r2
                    .roots()
                    .iter()
                    .map(|w| (w - target).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-8 * h, "h = {h}: {nearest:.2e}");
            }
        }
    }

    #[test]
    fn wilkinson_style_clustered_roots_converge() {
        // (z-1)(z-2)...(z-12) expanded; ill conditioned but modest degree.
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in 1..=12 {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r as f64;
            }
            c = next;
        }
        let rs = find_roots(&poly_from_complex(&c), 1e-10).unwrap();
        for r in 1..=12 {
            let target = Complex64::new(r as f64, 0.0);
            let nearest = rs
                .roots()
                .iter()
                .map(|w| (w - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-5, "root {r}: {nearest:.2e}");
        }
    }

    proptest::proptest! {
        /// Polynomials expanded from known, well-separated roots are
        /// recovered to far better than the generous bound here.
        #[test]
        fn reconstructed_polynomials_recover_their_roots(
            polar in proptest::collection::vec(
                (0.2f64..2.0, 0.0f64..std::f64::consts::TAU),
                1..8,
            )
        ) {
            let pts: Vec<Complex64> = polar
                .iter()
                .map(|&(r, a)| Complex64::from_polar(r, a))
                .collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    proptest::prop_assume!((pts[i] - pts[j]).norm() >= 0.1);
                }
            }
            let mut c = vec![Complex64::new(1.0, 0.0)];
            for root in &pts {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (i, &ci) in c.iter().enumerate() {
                    next[i + 1] += ci;
                    next[i] -= ci * root;
                }
                c = next;
            }
            let rs = find_roots(&poly_from_complex(&c), DEFAULT_ROOT_TOL).unwrap();
            proptest::prop_assert_eq!(rs.degree(), pts.len());
            for want in &pts {
                let best = rs
                    .roots()
                    .iter()
                    .map(|z| (z - want).norm())
                    .fold(f64::INFINITY, f64::min);
                proptest::prop_assert!(best < 1e-6, "missing {}: {:.2e}", want, best);
            }
        }
    }
}
