//! Normalized differentiation and rescaling operators on coefficient
//! log-magnitudes.
//!
//! Taking the order-`N` derivative of a degree-`n` polynomial multiplies
//! coefficient `k + N` by a falling-factorial weight and shifts it down to
//! slot `k`. All weights are handled in log space through
//! [`log_derivative_weight`], normalized so the weight of the new leading
//! coefficient is one.

use crate::ensembles::LogCoefficients;
use crate::special::ln_factorial;
use crate::{Error, Result};

/// Degree/order bookkeeping for one differentiation: original degree `n`,
/// order `N`, remaining degree `D = n - N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivativePlan {
    degree: usize,
    order: usize,
}

impl DerivativePlan {
    pub fn new(degree: usize, order: usize) -> Result<Self> {
        if order > degree {
            return Err(Error::OutOfRange(format!(
                "differentiation order {order} exceeds degree {degree}"
            )));
        }
        Ok(DerivativePlan { degree, order })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Degree of the derivative.
    pub fn remaining_degree(&self) -> usize {
        self.degree - self.order
    }

    /// `N/n`.
    pub fn order_ratio(&self) -> f64 {
        self.order as f64 / self.degree as f64
    }

    /// Degree quotient `n/D`, the natural zoom factor when most of the
    /// polynomial has been differentiated away.
    pub fn degree_quotient(&self) -> Result<f64> {
        if self.remaining_degree() == 0 {
            return Err(Error::InvalidParameter(
                "degree quotient undefined when the derivative is constant".into(),
            ));
        }
        Ok(self.degree as f64 / self.remaining_degree() as f64)
    }
}

/// Log of the normalized derivative weight `(k+N)! D! / (k! n!)` attached to
/// slot `k` of the derivative.
///
/// Always `<= 0`, strictly increasing in `k`, and exactly `0` at `k = D`.
pub fn log_derivative_weight(k: usize, plan: &DerivativePlan) -> Result<f64> {
    let d = plan.remaining_degree();
    if k > d {
        return Err(Error::OutOfRange(format!(
            "slot {k} exceeds derivative degree {d}"
        )));
    }
    Ok(
        ln_factorial(k + plan.order) + ln_factorial(d)
            - ln_factorial(k)
            - ln_factorial(plan.degree),
    )
}

/// Applies the order-`N` derivative to the deterministic log-magnitudes.
///
/// Slot `k` of the result is `log_mag[k + N] + log_derivative_weight(k)`,
/// shifted so the largest entry is zero (the zero multiset is dilation
/// invariant, so a `k`-independent factor is immaterial and the shift keeps
/// the root finder well conditioned). An order-zero plan is the identity.
/// The index shift of the random factors is not tracked; callers draw fresh
/// factors for the derivative, which has the same distribution.
pub fn differentiate(coeffs: &LogCoefficients, plan: &DerivativePlan) -> Result<LogCoefficients> {
    if coeffs.degree() != plan.degree() {
        return Err(Error::DegreeMismatch {
            expected: plan.degree(),
            actual: coeffs.degree(),
        });
    }
    if plan.order() == 0 {
        return Ok(coeffs.clone());
    }
    let d = plan.remaining_degree();
    let mut log_mag: Vec<f64> = (0..=d)
        .map(|k| coeffs.log_mag()[k + plan.order()] + log_derivative_weight(k, plan).unwrap())
        .collect();
    let max = log_mag
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    for v in &mut log_mag {
        *v -= max;
    }
    LogCoefficients::from_parts(log_mag, format!("{}^(d{})", coeffs.label(), plan.order()))
}

/// Adds `(D - k) log h` to slot `k`: the coefficients of `h^D q(z/h)`, whose
/// zeros are those of `q` multiplied by `h`.
pub fn rescale(coeffs: &LogCoefficients, log_h: f64) -> LogCoefficients {
    let d = coeffs.degree();
    let log_mag = coeffs
        .log_mag()
        .iter()
        .enumerate()
        .map(|(k, &v)| v + (d - k) as f64 * log_h)
        .collect();
    LogCoefficients::from_parts(log_mag, coeffs.label().to_string())
        .expect("rescale keeps the leading entry finite")
}

/// The two coefficient families with explicit rescaled limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitFamily {
    Kac,
    Elliptic,
}

impl LimitFamily {
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "kac" => Ok(LimitFamily::Kac),
            "elliptic" => Ok(LimitFamily::Elliptic),
            other => Err(Error::InvalidParameter(format!(
                "unknown limit family '{other}' (expected kac or elliptic)"
            ))),
        }
    }
}

/// Log of the zoom factor that brings the derivative zeros to unit scale:
/// `log(n/D)` for flat coefficients and half that for square-root-binomial
/// ones; with a fixed remaining degree the factor is `n` (resp. `√n`).
///
/// Found roots are multiplied by `exp` of this value.
pub fn recommended_rescale(
    family: LimitFamily,
    plan: &DerivativePlan,
    fixed_degree: bool,
) -> Result<f64> {
    if plan.remaining_degree() == 0 {
        return Err(Error::InvalidParameter(
            "cannot rescale a constant derivative".into(),
        ));
    }
    let log_zoom = if fixed_degree {
        (plan.degree() as f64).ln()
    } else {
        plan.degree_quotient()?.ln()
    };
    Ok(match family {
        LimitFamily::Kac => log_zoom,
        LimitFamily::Elliptic => 0.5 * log_zoom,
    })
}
