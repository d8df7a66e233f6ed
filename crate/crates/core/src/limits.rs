//! Theoretical limit measures for the zeros of repeatedly differentiated
//! random polynomials.
//!
//! The general route: the limiting radial mass of the zeros is the left
//! derivative, in `log r`, of the convex conjugate
//! `I(s) = sup_t (s t + log p(t))` of the negated coefficient profile.
//! [`legendre_fenchel`] computes `I` numerically on an `s`-grid;
//! [`TransformResult::left_derivative_cdf`] turns it into a radial CDF. The
//! in-scope closed forms are provided alongside for verification, as are the
//! fixed-remaining-degree limit polynomials.

use num_complex::Complex64;

use crate::calculus::LimitFamily;
use crate::ensembles::{CoefficientProfile, SampledPolynomial};
use crate::measures::RadialCdf;
use crate::special::{ln_gamma, t_ln_t, LOG_ZERO};
use crate::{Error, Result};

/// Golden-section refinement iterations after the discrete argmax.
const REFINE_ITERS: usize = 40;

/// Default `s`-grid: 2001 uniform points on `[-8, 8]`.
pub fn default_s_grid() -> Vec<f64> {
    let n = 2001;
    (0..n)
        .map(|i| -8.0 + 16.0 * i as f64 / (n - 1) as f64)
        .collect()
}

/// Default `t`-grid resolution for the transform.
pub const DEFAULT_T_RESOLUTION: usize = 4001;

/// The convex conjugate `I` tabulated on an `s`-grid.
#[derive(Clone, Debug)]
pub struct TransformResult {
    s_grid: Vec<f64>,
    values: Vec<f64>,
    profile_label: String,
}

impl TransformResult {
    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile_label(&self) -> &str {
        &self.profile_label
    }

    /// Largest backward-difference slope over the grid.
    pub fn sup_slope(&self) -> f64 {
        self.s_grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| (v[1] - v[0]) / (s[1] - s[0]))
            .fold(0.0f64, f64::max)
    }

    /// Radial CDF of the limit measure: the left derivative of `I` at
    /// `log r`, computed as a backward difference with the grid spacing,
    /// divided by `mass_norm`.
    ///
    /// Errors when `log r` falls outside the tabulated grid.
    pub fn left_derivative_cdf(&self, r: f64, mass_norm: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "radius must be positive, got {r}"
            )));
        }
        if mass_norm.is_nan() || mass_norm <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass normalization must be positive, got {mass_norm}"
            )));
        }
        let s = r.ln();
        let j = self.s_grid.partition_point(|&g| g < s);
        if j == 0 || j >= self.s_grid.len() {
            return Err(Error::OutOfRange(format!(
                "log r = {s} outside the tabulated range [{}, {}]",
                self.s_grid[0],
                self.s_grid[self.s_grid.len() - 1]
            )));
        }
        let slope = (self.values[j] - self.values[j - 1]) / (self.s_grid[j] - self.s_grid[j - 1]);
        Ok((slope / mass_norm).clamp(0.0, self.sup_slope() / mass_norm))
    }

    /// Wraps the limit CDF as a comparison curve, saturating at the grid
    /// edges so it is defined for every radius.
    pub fn radial_cdf(&self, mass_norm: f64) -> RadialCdf {
        let tr = self.clone();
        let top = (tr.sup_slope() / mass_norm).min(1.0);
        RadialCdf::theoretical(move |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let s = r.ln();
            if s <= tr.s_grid[0] {
                0.0
            } else if s >= tr.s_grid[tr.s_grid.len() - 1] {
                top
            } else {
                tr.left_derivative_cdf(r, mass_norm).unwrap_or(0.0)
            }
        })
    }
}

/// Numerically computes `I(s) = sup_{t ≥ 0} (s t + log p(t))` on the given
/// `s`-grid.
///
/// For each `s` the maximum is taken over a uniform `t`-grid on the
/// profile's support, then sharpened by one golden-section pass around the
/// discrete argmax.
pub fn legendre_fenchel(
    profile: &CoefficientProfile,
    s_grid: &[f64],
    t_resolution: usize,
) -> Result<TransformResult> {
    if t_resolution < 1000 {
        return Err(Error::InvalidParameter(format!(
            "t resolution must be at least 1000, got {t_resolution}"
        )));
    }
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("empty s grid".into()));
    }
    let t0 = profile.support_end();
    let ts: Vec<f64> = (0..t_resolution)
        .map(|j| t0 * j as f64 / (t_resolution - 1) as f64)
        .collect();
    let log_p: Vec<f64> = ts.iter().map(|&t| profile.log_p(t)).collect();
    if log_p.iter().all(|v| !v.is_finite()) {
        return Err(Error::EmptySupport);
    }

    let values = s_grid
        .iter()
        .map(|&s| {
            let mut best = f64::NEG_INFINITY;
            let mut best_j = 0usize;
            for (j, (&t, &lp)) in ts.iter().zip(&log_p).enumerate() {
                if !lp.is_finite() {
                    continue;
                }
                let v = s * t + lp;
                if v > best {
                    best = v;
                    best_j = j;
                }
            }
            let spacing = t0 / (t_resolution - 1) as f64;
            let lo = (ts[best_j] - spacing).max(0.0);
            let hi = (ts[best_j] + spacing).min(t0);
            let refined = golden_section_max(
                |t| {
                    let lp = profile.log_p(t);
                    if lp.is_finite() {
                        s * t + lp
                    } else {
                        f64::NEG_INFINITY
                    }
                },
                lo,
                hi,
            );
            best.max(refined)
        })
        .collect();

    Ok(TransformResult {
        s_grid: s_grid.to_vec(),
        values,
        profile_label: profile.label().to_string(),
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..REFINE_ITERS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.max(f2)
}

/// The profile driving the zeros of the order-`⌊a n⌋` derivative when the
/// base ensemble follows `profile`:
/// `log u_a(t) = log p(t+a) + (t+a) log(t+a) - t log t + (1-a) log(1-a)` on
/// `[0, 1-a]`.
pub fn derived_profile_u_a(profile: &CoefficientProfile, a: f64) -> Result<CoefficientProfile> {
    if !(0.0 < a && a < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative order ratio must lie in (0, 1), got {a}"
        )));
    }
    let support_end = 1.0 - a;
    // The base profile must be finite on [a, 1]. The clamp to 1 only guards
    // the endpoint against an upward rounding of a + (1-a).
    for j in 0..=1000 {
        let t = (a + (1.0 - a) * j as f64 / 1000.0).min(1.0);
        if !profile.log_p(t).is_finite() {
            return Err(Error::InvalidParameter(format!(
                "base profile '{}' is not finite at t = {t}",
                profile.label()
            )));
        }
    }
    let base = profile.clone();
    let base_end = profile.support_end();
    let label = format!("u_a({}, a={a})", profile.label());
    CoefficientProfile::new(label, support_end, move |t| {
        if !(0.0..=1.0 - a).contains(&t) {
            return LOG_ZERO;
        }
        let shifted = (t + a).min(base_end);
        base.log_p(shifted) + (t + a) * (t + a).ln() - t_ln_t(t) + (1.0 - a) * (1.0 - a).ln()
    })
}

/// The closed-form limit radial CDFs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedFormCdf {
    /// Uniform probability measure on the unit circle (mass only at `r = 1`).
    KacUnitCircle,
    /// Flat coefficients, derivative order ratio `a ∈ (0, 1)`:
    /// `a r / ((1-a)(1-r))` inside `r < 1-a`.
    KacRatio(f64),
    /// Flat coefficients, near-maximal order, zoomed by the degree quotient:
    /// `min(r, 1)`.
    KacRescaled,
    /// Square-root-binomial coefficients, near-maximal order, square-root
    /// zoom: `r (√(4+r²) - r) / 2`.
    EllipticRescaled,
}

impl ClosedFormCdf {
    pub fn parse(label: &str) -> Result<Self> {
        if label == "kac-unit-circle" {
            return Ok(ClosedFormCdf::KacUnitCircle);
        }
        if label == "kac-rescaled" {
            return Ok(ClosedFormCdf::KacRescaled);
        }
        if label == "elliptic-rescaled" {
            return Ok(ClosedFormCdf::EllipticRescaled);
        }
        if let Some(rest) = label.strip_prefix("kac-a:") {
            let a: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad ratio in target '{label}'")))?;
            return Ok(ClosedFormCdf::KacRatio(a));
        }
        Err(Error::InvalidParameter(format!(
            "unknown closed-form target '{label}'"
        )))
    }
}

/// Evaluates a closed-form limit CDF at radius `r`.
pub fn closed_form_cdf(case: &ClosedFormCdf, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::OutOfRange(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    match case {
        ClosedFormCdf::KacUnitCircle => Ok(if r > 1.0 { 1.0 } else { 0.0 }),
        ClosedFormCdf::KacRatio(a) => {
            let a = *a;
            if !(0.0 < a && a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "ratio must lie in (0, 1), got {a}"
                )));
            }
            if r >= 1.0 - a {
                Ok(1.0)
            } else {
                Ok(a * r / ((1.0 - a) * (1.0 - r)))
            }
        }
        ClosedFormCdf::KacRescaled => Ok(r.min(1.0)),
        ClosedFormCdf::EllipticRescaled => {
            if r <= 1e6 {
                Ok(r * ((4.0 + r * r).sqrt() - r) / 2.0)
            } else {
                // Conjugate form; the direct difference cancels at large r.
                Ok(2.0 * r / ((4.0 + r * r).sqrt() + r))
            }
        }
    }
}

/// Wraps a closed form as a comparison curve.
pub fn closed_form_radial_cdf(case: ClosedFormCdf) -> RadialCdf {
    RadialCdf::theoretical(move |r| closed_form_cdf(&case, r.max(0.0)).unwrap_or(0.0))
}

/// Radial density of [`ClosedFormCdf::KacRescaled`]: `1/(2π|z|)` inside the
/// unit disk.
pub fn kac_rescaled_density(modulus: f64) -> f64 {
    if modulus > 0.0 && modulus <= 1.0 {
        1.0 / (std::f64::consts::TAU * modulus)
    } else {
        0.0
    }
}

/// The closed-form convex conjugates matching the four in-scope profiles.
#[derive(Clone, Copy, Debug)]
pub enum ClosedFormTransform {
    /// Flat profile: `I(s) = s ∨ 0`.
    Kac,
    /// Composed derivative profile at ratio `a`.
    KacCase2(f64),
    /// Flat, near-maximal order, rescaled: `e^s - 1` below zero, `s` above.
    KacCase3,
    /// Square-root binomial, near-maximal order, rescaled.
    EllipticRescaled,
}

/// Evaluates a closed-form conjugate at `s`.
pub fn closed_form_transform(which: &ClosedFormTransform, s: f64) -> f64 {
    match which {
        ClosedFormTransform::Kac => s.max(0.0),
        ClosedFormTransform::KacCase2(a) => {
            let a = *a;
            let edge = (1.0 - a).ln();
            if s < edge {
                a * (a / ((-s).exp() - 1.0) + a).ln() + (1.0 - a) * (1.0 - a).ln()
            } else {
                s * (1.0 - a)
            }
        }
        ClosedFormTransform::KacCase3 => {
            if s < 0.0 {
                s.exp() - 1.0
            } else {
                s
            }
        }
        ClosedFormTransform::EllipticRescaled => {
            // argmax t_s = 2 / (1 + √(1+4u)) with u = e^{-2s}; both t_s and
            // log(1 - t_s) are evaluated in cancellation-free form.
            let u = (-2.0 * s).exp();
            let sq = (1.0 + 4.0 * u).sqrt();
            let t_s = 2.0 / (1.0 + sq);
            let ln_one_minus_t = (4.0f64).ln() - 2.0 * s - 2.0 * (1.0 + sq).ln();
            0.5 * (t_s - 1.0) - 0.5 * ln_one_minus_t
        }
    }
}

/// Deterministic log-magnitudes of the fixed-remaining-degree limit
/// polynomials, paired with the supplied random factors: `1/k!` for the flat
/// family and `1/(k! √((m-k)!))` for the square-root-binomial family.
pub fn fixed_degree_limit_poly(
    family: LimitFamily,
    m: usize,
    xi: &[Complex64],
) -> Result<SampledPolynomial> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "fixed remaining degree must be at least 1".into(),
        ));
    }
    if xi.len() != m + 1 {
        return Err(Error::DegreeMismatch {
            expected: m + 1,
            actual: xi.len(),
        });
    }
    let log_mag: Vec<f64> = (0..=m)
        .map(|k| match family {
            LimitFamily::Kac => -ln_gamma(k as f64 + 1.0),
            LimitFamily::Elliptic => {
                -ln_gamma(k as f64 + 1.0) - 0.5 * ln_gamma((m - k) as f64 + 1.0)
            }
        })
        .collect();
    SampledPolynomial::from_parts(log_mag, xi.to_vec(), (0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{make_profile, ProfileKind};
    use crate::rootfind::{find_roots, DEFAULT_ROOT_TOL};
    use approx::assert_relative_eq;

    fn transform_of(kind: &ProfileKind) -> TransformResult {
        let profile = make_profile(kind).unwrap();
        legendre_fenchel(&profile, &default_s_grid(), 2001).unwrap()
    }

    /// Value at the grid point nearest to `s`, with its actual abscissa.
    fn value_at(tr: &TransformResult, s: f64) -> f64 {
        let (j, _) = tr
            .s_grid()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - s).abs().total_cmp(&(*b - s).abs()))
            .unwrap();
        assert!((tr.s_grid()[j] - s).abs() < 1e-9, "s = {s} not on grid");
        tr.values()[j]
    }

    #[test]
    fn kac_transform_is_positive_part() {
        let tr = transform_of(&ProfileKind::Kac);
        assert_relative_eq!(value_at(&tr, -1.0), 0.0, epsilon = 1e-9);
        for (j, &s) in tr.s_grid().iter().enumerate() {
            assert_relative_eq!(tr.values()[j], s.max(0.0), epsilon = 1e-9);
        }
    }

    #[test]
    fn case3_transform_value() {
        let tr = transform_of(&ProfileKind::KacCase3Rescaled);
        assert_relative_eq!(value_at(&tr, -1.0), (-1.0f64).exp() - 1.0, epsilon = 1e-6);
    }

    #[test]
    fn elliptic_rescaled_transform_value_at_zero() {
        // (t0-1)/2 - log(1-t0)/2 with t0 = (√5-1)/2.
        let tr = transform_of(&ProfileKind::EllipticRescaled);
        let t0 = (5.0f64.sqrt() - 1.0) / 2.0;
        let expected = 0.5 * (t0 - 1.0) - 0.5 * (1.0 - t0).ln();
        assert_relative_eq!(value_at(&tr, 0.0), expected, epsilon = 1e-6);
        assert_relative_eq!(expected, 0.290_229, epsilon = 1e-6);
    }

    #[test]
    fn numeric_transform_matches_every_closed_form() {
        let cases: Vec<(ProfileKind, ClosedFormTransform)> = vec![
            (ProfileKind::Kac, ClosedFormTransform::Kac),
            (
                ProfileKind::KacCase2 { a: 0.5 },
                ClosedFormTransform::KacCase2(0.5),
            ),
            (ProfileKind::KacCase3Rescaled, ClosedFormTransform::KacCase3),
            (
                ProfileKind::EllipticRescaled,
                ClosedFormTransform::EllipticRescaled,
            ),
        ];
        for (kind, closed) in cases {
            let tr = transform_of(&kind);
            let mut worst = 0.0f64;
            for (j, &s) in tr.s_grid().iter().enumerate() {
                let err = (tr.values()[j] - closed_form_transform(&closed, s)).abs();
                worst = worst.max(err);
            }
            assert!(worst <= 1e-3, "{kind:?}: worst {worst:.2e}");
        }
    }

    #[test]
    fn transform_is_convex_on_the_grid() {
        for kind in [
            ProfileKind::Kac,
            ProfileKind::Elliptic,
            ProfileKind::KacCase2 { a: 0.25 },
            ProfileKind::KacCase3Rescaled,
            ProfileKind::EllipticRescaled,
        ] {
            let tr = transform_of(&kind);
            let v = tr.values();
            for j in 1..v.len() - 1 {
                let second = v[j + 1] - 2.0 * v[j] + v[j - 1];
                assert!(second >= -1e-9, "{kind:?}: concave kink at {j}");
            }
        }
    }

    #[test]
    fn transform_dominates_every_support_line() {
        // I(s) >= s t + log p(t) at spot-checked s for every grid t.
        let profile = make_profile(&ProfileKind::Elliptic).unwrap();
        let tr = legendre_fenchel(&profile, &default_s_grid(), 2001).unwrap();
        for &s in &[-3.0, -0.8, 0.0, 0.8, 3.0] {
            let i_s = value_at(&tr, s);
            for j in 0..=100 {
                let t = j as f64 / 100.0;
                assert!(i_s + 1e-9 >= s * t + profile.log_p(t));
            }
        }
    }

    #[test]
    fn case2_closed_form_is_continuous_at_the_edge() {
        for &a in &[0.25f64, 0.5, 0.75] {
            let edge = (1.0 - a).ln();
            let c = ClosedFormTransform::KacCase2(a);
            let left = closed_form_transform(&c, edge - 1e-9);
            let right = closed_form_transform(&c, edge);
            assert_relative_eq!(left, right, epsilon = 1e-7);
            assert_relative_eq!(right, (1.0 - a) * (1.0 - a).ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn kac_limit_cdf_jumps_at_unit_radius() {
        let tr = transform_of(&ProfileKind::Kac);
        assert!(tr.left_derivative_cdf(0.5, 1.0).unwrap() < 1e-9);
        assert!((tr.left_derivative_cdf(2.0, 1.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn composed_u_half_limit_cdf_matches_ratio_formula() {
        let kac = make_profile(&ProfileKind::Kac).unwrap();
        let u = derived_profile_u_a(&kac, 0.5).unwrap();
        let tr = legendre_fenchel(&u, &default_s_grid(), 4001).unwrap();
        let got = tr.left_derivative_cdf(0.25, 0.5).unwrap();
        assert!((got - 1.0 / 3.0).abs() <= 1e-3, "got {got}");
    }

    #[test]
    fn case3_limit_cdf_is_identity_inside() {
        let tr = transform_of(&ProfileKind::KacCase3Rescaled);
        let got = tr.left_derivative_cdf(0.5, 1.0).unwrap();
        assert!((got - 0.5).abs() <= 1e-3, "got {got}");
    }

    #[test]
    fn limit_cdf_rejects_out_of_grid_radius() {
        let tr = transform_of(&ProfileKind::Kac);
        assert!(tr.left_derivative_cdf(1e-9, 1.0).is_err());
        assert!(tr.left_derivative_cdf(1e9, 1.0).is_err());
    }

    #[test]
    fn derived_profile_kac_values() {
        let kac = make_profile(&ProfileKind::Kac).unwrap();
        let u = derived_profile_u_a(&kac, 0.5).unwrap();
        assert_relative_eq!(u.log_p(0.0), 0.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(u.log_p(0.5), 0.0, epsilon = 1e-12);
        assert_eq!(u.log_p(0.6), LOG_ZERO);
        assert_relative_eq!(u.support_end(), 0.5);
        assert!(derived_profile_u_a(&kac, 1.5).is_err());
    }

    #[test]
    fn derived_profile_rejects_short_support() {
        // Base support [0, 0.6] does not cover [a, 1].
        let short = make_profile(&ProfileKind::Custom {
            table: vec![(0.0, 0.0), (0.6, -0.5)],
        })
        .unwrap();
        assert!(derived_profile_u_a(&short, 0.25).is_err());
    }

    #[test]
    fn derived_profile_specializes_to_case2() {
        let kac = make_profile(&ProfileKind::Kac).unwrap();
        for &a in &[0.25f64, 0.5] {
            let composed = derived_profile_u_a(&kac, a).unwrap();
            let named = make_profile(&ProfileKind::KacCase2 { a }).unwrap();
            for j in 0..=1000 {
                let t = (1.0 - a) * j as f64 / 1000.0;
                assert!(
                    (composed.log_p(t) - named.log_p(t)).abs() <= 1e-12,
                    "a = {a}, t = {t}"
                );
            }
        }
    }

    #[test]
    fn closed_form_cdf_values() {
        assert_relative_eq!(
            closed_form_cdf(&ClosedFormCdf::KacRatio(0.5), 0.25).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            closed_form_cdf(&ClosedFormCdf::EllipticRescaled, 1.0).unwrap(),
            (5.0f64.sqrt() - 1.0) / 2.0,
            epsilon = 1e-15
        );
        assert_eq!(
            closed_form_cdf(&ClosedFormCdf::KacRescaled, 0.4).unwrap(),
            0.4
        );
        assert_eq!(
            closed_form_cdf(&ClosedFormCdf::KacRescaled, 3.0).unwrap(),
            1.0
        );
        assert_eq!(
            closed_form_cdf(&ClosedFormCdf::KacUnitCircle, 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            closed_form_cdf(&ClosedFormCdf::KacRatio(0.5), 0.6).unwrap(),
            1.0
        );
        assert_relative_eq!(
            kac_rescaled_density(0.5),
            1.0 / std::f64::consts::PI,
            epsilon = 1e-15
        );
        assert_eq!(kac_rescaled_density(1.5), 0.0);
    }

    #[test]
    fn elliptic_rescaled_cdf_tends_to_one() {
        let mut prev = 0.0;
        for &r in &[0.5f64, 1.0, 2.0, 5.0, 20.0, 100.0] {
            let v = closed_form_cdf(&ClosedFormCdf::EllipticRescaled, r).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!((prev - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kac_rescaled_cdf_integrates_its_density() {
        // ∫_0^r (2πρ)^-1 · 2πρ dρ = r for r <= 1, via simple quadrature.
        for &r in &[0.3f64, 0.7, 1.0] {
            let steps = 20_000;
            let mut integral = 0.0;
            for i in 0..steps {
                let rho = r * (i as f64 + 0.5) / steps as f64;
                integral +=
                    kac_rescaled_density(rho) * std::f64::consts::TAU * rho * (r / steps as f64);
            }
            assert_relative_eq!(
                integral,
                closed_form_cdf(&ClosedFormCdf::KacRescaled, r).unwrap(),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn limit_measures_are_probability_normalized() {
        // Mass after the stated normalization reaches 1 at large radius.
        let kac = make_profile(&ProfileKind::Kac).unwrap();
        let u = derived_profile_u_a(&kac, 0.5).unwrap();
        let tr_u = legendre_fenchel(&u, &default_s_grid(), 2001).unwrap();
        assert!((tr_u.left_derivative_cdf(900.0, 0.5).unwrap() - 1.0).abs() < 1e-6);
        let tr3 = transform_of(&ProfileKind::KacCase3Rescaled);
        assert!((tr3.left_derivative_cdf(900.0, 1.0).unwrap() - 1.0).abs() < 1e-6);
        let tre = transform_of(&ProfileKind::EllipticRescaled);
        assert!((tre.left_derivative_cdf(900.0, 1.0).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn limit_cdf_is_nondecreasing_in_r() {
        let tr = transform_of(&ProfileKind::EllipticRescaled);
        let mut prev = -1.0;
        for i in 0..200 {
            let r = 0.05 + i as f64 * 0.05;
            let v = tr.left_derivative_cdf(r, 1.0).unwrap();
            assert!(v + 1e-12 >= prev, "decrease at r = {r}");
            prev = v;
        }
    }

    #[test]
    fn fixed_degree_kac_quadratic_roots() {
        // 1 + z + z²/2 has roots -1 ± i.
        let xi = vec![Complex64::new(1.0, 0.0); 3];
        let poly = fixed_degree_limit_poly(LimitFamily::Kac, 2, &xi).unwrap();
        let rs = find_roots(&poly, DEFAULT_ROOT_TOL).unwrap();
        for want in [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)] {
            let best = rs
                .roots()
                .iter()
                .map(|z| (z - want).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "missing root {want}");
        }
    }

    #[test]
    fn fixed_degree_kac_linear_root() {
        let xi = vec![Complex64::new(1.0, 0.0); 2];
        let poly = fixed_degree_limit_poly(LimitFamily::Kac, 1, &xi).unwrap();
        let rs = find_roots(&poly, DEFAULT_ROOT_TOL).unwrap();
        assert!((rs.roots()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fixed_degree_elliptic_magnitudes() {
        // 1/(k! √((m-k)!)) at m = 2: (1/√2, 1, 1/2).
        let xi = vec![Complex64::new(1.0, 0.0); 3];
        let poly = fixed_degree_limit_poly(LimitFamily::Elliptic, 2, &xi).unwrap();
        let mags: Vec<f64> = poly.log_mag().iter().map(|v| v.exp()).collect();
        assert_relative_eq!(mags[0], 1.0 / 2.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(mags[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(mags[2], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn fixed_degree_elliptic_quadratic_roots() {
        // z²/2 + z + 1/√2 = 0 gives z = -1 ± i√(√2 - 1) by the quadratic
        // formula.
        let xi = vec![Complex64::new(1.0, 0.0); 3];
        let poly = fixed_degree_limit_poly(LimitFamily::Elliptic, 2, &xi).unwrap();
        let rs = find_roots(&poly, DEFAULT_ROOT_TOL).unwrap();
        let imag = (2.0f64.sqrt() - 1.0).sqrt();
        for want in [Complex64::new(-1.0, imag), Complex64::new(-1.0, -imag)] {
            let best = rs
                .roots()
                .iter()
                .map(|z| (z - want).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "missing root {want}");
        }
    }

    #[test]
    fn fixed_degree_rejects_length_mismatch() {
        let xi = vec![Complex64::new(1.0, 0.0); 3];
        assert!(fixed_degree_limit_poly(LimitFamily::Kac, 5, &xi).is_err());
    }
}
