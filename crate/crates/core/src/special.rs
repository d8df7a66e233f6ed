//! Log-space special functions.
//!
//! Every factorial or binomial magnitude in the crate goes through
//! [`ln_gamma`]; raw factorials are never materialized because the degrees in
//! play (up to several thousand) overflow any fixed-width float.

/// Log-space representation of zero: the additive identity's image under
/// `ln`, used as an absorbing sentinel for vanished coefficients and for
/// profile values outside their support.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// Natural logarithm of the gamma function for positive arguments.
///
/// Uses Stirling's series with Bernoulli-number coefficients evaluated at an
/// argument shifted above 10, where the truncated series is accurate to full
/// double precision; the shift is undone through the recurrence
/// `ln Γ(x) = ln Γ(x+1) - ln x`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(
        x > 0.0 && x.is_finite(),
        "ln_gamma requires a positive finite argument, got {x}"
    );
    // B_{2k} / (2k (2k - 1)) for k = 1..=7.
    const STIRLING: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

    let mut shift = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift += y.ln();
        y += 1.0;
    }
    let inv_sq = 1.0 / (y * y);
    let mut series = 0.0;
    let mut power = 1.0 / y;
    for c in STIRLING {
        series += c * power;
        power *= inv_sq;
    }
    (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI + series - shift
}

/// `ln(n!)` via [`ln_gamma`].
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `t ln t` extended continuously by `0` at `t = 0`.
pub fn t_ln_t(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact integer factorials, the independent reference for `ln_gamma`.
    fn exact_factorial(n: u32) -> u128 {
        (1..=n as u128).product::<u128>().max(1)
    }

    #[test]
    fn matches_exact_factorials_to_1e12_relative() {
        for n in 0..=20u32 {
            let exact = (exact_factorial(n) as f64).ln();
            let got = ln_factorial(n as usize);
            if n <= 1 {
                assert!(got.abs() < 1e-14, "ln {n}! = {got}");
            } else {
                assert_relative_eq!(got, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn half_integer_value() {
        // Γ(1/2) = √π.
        let expected = std::f64::consts::PI.sqrt().ln();
        assert_relative_eq!(ln_gamma(0.5), expected, max_relative = 1e-13);
    }

    #[test]
    fn large_argument_against_direct_stirling() {
        // At 5000 the unshifted series is itself fully accurate.
        let x: f64 = 5000.0;
        let direct = (x - 0.5) * x.ln() - x + 0.918_938_533_204_672_7 + 1.0 / (12.0 * x);
        assert_relative_eq!(ln_gamma(x), direct, max_relative = 1e-12);
    }

    #[test]
    fn t_ln_t_is_continuous_at_zero() {
        assert_eq!(t_ln_t(0.0), 0.0);
        assert!(t_ln_t(1e-300).abs() < 1e-295);
    }

    #[test]
    #[should_panic]
    fn rejects_nonpositive_argument() {
        ln_gamma(0.0);
    }
}
