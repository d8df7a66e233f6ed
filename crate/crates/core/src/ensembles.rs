//! Coefficient profiles, deterministic coefficient sequences, and random
//! coefficient samplers.
//!
//! A [`CoefficientProfile`] is the exponential-scale envelope `t ↦ log p(t)`
//! of a coefficient family: entry `k` of a degree-`n` sequence is roughly
//! `exp(n log p(k/n))`. [`check_profile_fit`] measures how well a concrete
//! sequence tracks its profile, and [`ensemble_diagnostics`] reports the
//! deviation and magnitude of the top coefficient block, which govern the
//! behavior under near-maximal differentiation orders.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::special::{ln_factorial, t_ln_t, LOG_ZERO};
use crate::{Error, Result};

/// Grid size used to validate profile continuity at construction time.
const CONTINUITY_GRID: usize = 10_000;

/// Magnitude cap (in log space) for the heavy-tailed sampler, keeping draws
/// inside the double range. Hit with probability ~1/501 per draw.
const HEAVY_TAIL_LOG_CAP: f64 = 500.0;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The function `t ↦ log p(t)` together with its support endpoint `T0`.
///
/// `log p` is finite on `[0, T0]` and [`LOG_ZERO`] beyond; values are queried
/// through [`log_p`](Self::log_p). Profiles are immutable and cheap to clone.
#[derive(Clone)]
pub struct CoefficientProfile {
    log_p: ProfileFn,
    support_end: f64,
    label: String,
}

impl std::fmt::Debug for CoefficientProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientProfile")
            .field("label", &self.label)
            .field("support_end", &self.support_end)
            .finish()
    }
}

impl CoefficientProfile {
    /// Wraps an arbitrary log-profile function after validating that it is
    /// finite on `[0, T0]` and continuous there (adjacent-sample jumps on a
    /// uniform grid shrink when the grid is refined).
    pub fn new(
        label: impl Into<String>,
        support_end: f64,
        log_p: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support_end.is_finite() && support_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "profile support endpoint must be positive and finite, got {support_end}"
            )));
        }
        let profile = CoefficientProfile {
            log_p: Arc::new(log_p),
            support_end,
            label: label.into(),
        };
        profile.validate_continuity()?;
        Ok(profile)
    }

    /// Evaluates `log p(t)`; [`LOG_ZERO`] encodes `p(t) = 0`.
    pub fn log_p(&self, t: f64) -> f64 {
        (self.log_p)(t)
    }

    /// Support endpoint `T0`.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest jump between adjacent samples on a uniform grid over
    /// `[0, T0]` with `points` samples.
    pub fn max_adjacent_jump(&self, points: usize) -> f64 {
        let mut worst = 0.0f64;
        let mut prev = self.log_p(0.0);
        for j in 1..points {
            let t = self.support_end * j as f64 / (points - 1) as f64;
            let v = self.log_p(t.min(self.support_end));
            worst = worst.max((v - prev).abs());
            prev = v;
        }
        worst
    }

    fn validate_continuity(&self) -> Result<()> {
        let mut samples = 0usize;
        for j in 0..=CONTINUITY_GRID {
            let t = self.support_end * j as f64 / CONTINUITY_GRID as f64;
            let v = self.log_p(t);
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "profile '{}' is not finite at t = {t}",
                    self.label
                )));
            }
            samples += 1;
        }
        debug_assert_eq!(samples, CONTINUITY_GRID + 1);
        let coarse = self.max_adjacent_jump(CONTINUITY_GRID);
        let fine = self.max_adjacent_jump(2 * CONTINUITY_GRID);
        if fine > 0.75 * coarse + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "profile '{}' looks discontinuous: refining the grid did not shrink \
                 the largest jump ({coarse:.3e} -> {fine:.3e})",
                self.label
            )));
        }
        Ok(())
    }
}

/// `log f_1(t) = (t+a) log(t+a) - t log t + (1-a) log(1-a)`, the profile of
/// the order-`a·n` derivative of a flat coefficient sequence.
pub fn log_case2_profile(a: f64, t: f64) -> f64 {
    (t + a) * (t + a).ln() - t_ln_t(t) + (1.0 - a) * (1.0 - a).ln()
}

/// Named profile constructors.
#[derive(Clone, Debug)]
pub enum ProfileKind {
    /// Flat: `log p = 0` on `[0, 1]`.
    Kac,
    /// `-t/2 · log t - (1-t)/2 · log(1-t)` on `[0, 1]`.
    Elliptic,
    /// The composed derivative profile of the flat sequence at order ratio
    /// `a`, supported on `[0, 1-a]`.
    KacCase2 { a: f64 },
    /// `t - 1 - t log t` on `[0, 1]`: flat sequence, near-maximal order,
    /// arguments rescaled by the degree quotient.
    KacCase3Rescaled,
    /// `(t-1)/2 - (1-t)/2 · log(1-t) - t log t` on `[0, 1]`: square-root
    /// binomial sequence, near-maximal order, square-root rescaling.
    EllipticRescaled,
    /// Piecewise-linear interpolation of `(t, log p(t))` pairs; support ends
    /// at the last tabulated `t`.
    Custom { table: Vec<(f64, f64)> },
}

/// Builds one of the named coefficient profiles.
pub fn make_profile(kind: &ProfileKind) -> Result<CoefficientProfile> {
    match kind {
        ProfileKind::Kac => CoefficientProfile::new("kac", 1.0, |t| {
            if (0.0..=1.0).contains(&t) {
                0.0
            } else {
                LOG_ZERO
            }
        }),
        ProfileKind::Elliptic => CoefficientProfile::new("elliptic", 1.0, |t| {
            if (0.0..=1.0).contains(&t) {
                -0.5 * t_ln_t(t) - 0.5 * t_ln_t(1.0 - t)
            } else {
                LOG_ZERO
            }
        }),
        ProfileKind::KacCase2 { a } => {
            let a = *a;
            if !(0.0 < a && a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "derivative order ratio must lie in (0, 1), got {a}"
                )));
            }
            CoefficientProfile::new(format!("kac-case2(a={a})"), 1.0 - a, move |t| {
                if t >= 0.0 && t <= 1.0 - a {
                    log_case2_profile(a, t)
                } else {
                    LOG_ZERO
                }
            })
        }
        ProfileKind::KacCase3Rescaled => CoefficientProfile::new("kac-case3-rescaled", 1.0, |t| {
            if (0.0..=1.0).contains(&t) {
                t - 1.0 - t_ln_t(t)
            } else {
                LOG_ZERO
            }
        }),
        ProfileKind::EllipticRescaled => CoefficientProfile::new("elliptic-rescaled", 1.0, |t| {
            if (0.0..=1.0).contains(&t) {
                0.5 * (t - 1.0) - 0.5 * t_ln_t(1.0 - t) - t_ln_t(t)
            } else {
                LOG_ZERO
            }
        }),
        ProfileKind::Custom { table } => {
            if table.len() < 2 {
                return Err(Error::InvalidParameter(
                    "custom profile table needs at least two rows".into(),
                ));
            }
            if table[0].0 != 0.0 {
                return Err(Error::InvalidParameter(
                    "custom profile table must start at t = 0".into(),
                ));
            }
            for w in table.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::InvalidParameter(
                        "custom profile table must be strictly increasing in t".into(),
                    ));
                }
            }
            if table.iter().any(|&(_, v)| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "custom profile table values must be finite".into(),
                ));
            }
            let support_end = table.last().unwrap().0;
            let table = table.clone();
            CoefficientProfile::new("custom", support_end, move |t| {
                if t < 0.0 || t > table.last().unwrap().0 {
                    return LOG_ZERO;
                }
                let idx = table.partition_point(|&(x, _)| x <= t);
                if idx == table.len() {
                    return table.last().unwrap().1;
                }
                let (x0, y0) = table[idx - 1];
                let (x1, y1) = table[idx];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            })
        }
    }
}

/// Reads a two-column whitespace-separated `(t, log p(t))` table; `#` starts
/// a comment line.
pub fn profile_from_table_file(path: &Path) -> Result<CoefficientProfile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut table = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |raw: Option<&str>| -> Result<f64> {
            raw.and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{}:{}: expected two numeric columns",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        let t = parse(cols.next())?;
        let v = parse(cols.next())?;
        table.push((t, v));
    }
    make_profile(&ProfileKind::Custom { table })
}

/// Deterministic coefficient log-magnitudes of one degree-`n` ensemble
/// instance; entry `k` is `log p_{k,n}`.
#[derive(Clone, Debug)]
pub struct LogCoefficients {
    log_mag: Vec<f64>,
    label: String,
}

impl LogCoefficients {
    /// Validates the length/leading-entry invariants and wraps the values.
    pub fn from_parts(log_mag: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if log_mag.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient sequence must not be empty".into(),
            ));
        }
        if !log_mag.last().unwrap().is_finite() {
            return Err(Error::InvalidParameter(
                "leading coefficient magnitude must be finite (genuine degree)".into(),
            ));
        }
        Ok(LogCoefficients {
            log_mag,
            label: label.into(),
        })
    }

    pub fn degree(&self) -> usize {
        self.log_mag.len() - 1
    }

    pub fn log_mag(&self) -> &[f64] {
        &self.log_mag
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The deterministic coefficient families with named constructions.
#[derive(Clone, Debug)]
pub enum EnsembleKind {
    /// All coefficients equal to one.
    Kac,
    /// Square roots of binomial coefficients.
    Elliptic,
    /// Flat up to `N_n = n - ⌊log n⌋`, then decaying so that the order-`N_n`
    /// derivative is again flat; shows that near-maximal differentiation
    /// need not collapse the zeros to the origin.
    Counterexample,
    /// `log p_{k,n} = n · log p(k/n)` for a given profile.
    ProfileDriven(CoefficientProfile),
}

impl EnsembleKind {
    pub fn label(&self) -> String {
        match self {
            EnsembleKind::Kac => "kac".into(),
            EnsembleKind::Elliptic => "elliptic".into(),
            EnsembleKind::Counterexample => "counterexample".into(),
            EnsembleKind::ProfileDriven(p) => format!("profile:{}", p.label()),
        }
    }
}

/// Differentiation parameters intrinsic to the counterexample ensemble:
/// `D_n = ⌊log n⌋` and `N_n = n - D_n`.
pub fn counterexample_orders(n: usize) -> Result<(usize, usize)> {
    let d = (n as f64).ln().floor() as usize;
    if d < 1 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "counterexample needs floor(log n) >= 1, got n = {n}"
        )));
    }
    Ok((n - d, d))
}

/// Builds the deterministic log-magnitudes of a degree-`n` instance.
pub fn make_log_coeffs(kind: &EnsembleKind, n: usize) -> Result<LogCoefficients> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "ensemble degree must be at least 1".into(),
        ));
    }
    let log_mag = match kind {
        EnsembleKind::Kac => vec![0.0; n + 1],
        EnsembleKind::Elliptic => {
            let ln_n = ln_factorial(n);
            (0..=n)
                .map(|k| 0.5 * (ln_n - (ln_factorial(k) + ln_factorial(n - k))))
                .collect()
        }
        EnsembleKind::Counterexample => {
            let (order, d) = counterexample_orders(n)?;
            let ln_n = ln_factorial(n);
            let ln_d = ln_factorial(d);
            (0..=n)
                .map(|k| {
                    if k < order {
                        0.0
                    } else {
                        ln_n + ln_factorial(k - order) - ln_factorial(k) - ln_d
                    }
                })
                .collect()
        }
        EnsembleKind::ProfileDriven(profile) => (0..=n)
            .map(|k| n as f64 * profile.log_p(k as f64 / n as f64))
            .collect(),
    };
    LogCoefficients::from_parts(log_mag, kind.label())
}

/// Distribution of the i.i.d. random coefficient factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerSpec {
    /// Independent standard normal real and imaginary parts.
    ComplexGaussian,
    /// Standard normal real part, zero imaginary part.
    RealGaussian,
    /// Uniform on the closed unit disk.
    UniformUnitDisk,
    /// `±1` with equal probability.
    Rademacher,
    /// `exp(1/U - 1)` magnitude with uniform phase. The log magnitude has an
    /// infinite mean, so the usual moment condition on `log(1 + |ξ|)` fails;
    /// only meant as a negative control. The magnitude is truncated at
    /// `exp(500)` to stay inside the double range.
    HeavyTailLog,
}

impl SamplerSpec {
    /// Whether `E log(1 + |ξ|) < ∞` holds by construction.
    pub fn has_finite_log_moment(&self) -> bool {
        !matches!(self, SamplerSpec::HeavyTailLog)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SamplerSpec::ComplexGaussian => "complex-gaussian",
            SamplerSpec::RealGaussian => "real-gaussian",
            SamplerSpec::UniformUnitDisk => "uniform-unit-disk",
            SamplerSpec::Rademacher => "rademacher",
            SamplerSpec::HeavyTailLog => "heavy-tail-log",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "complex-gaussian" => Ok(SamplerSpec::ComplexGaussian),
            "real-gaussian" => Ok(SamplerSpec::RealGaussian),
            "uniform-unit-disk" => Ok(SamplerSpec::UniformUnitDisk),
            "rademacher" => Ok(SamplerSpec::Rademacher),
            "heavy-tail-log" => Ok(SamplerSpec::HeavyTailLog),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampler '{other}'"
            ))),
        }
    }

    /// Whether draws have zero imaginary part, making root multisets closed
    /// under conjugation.
    pub fn is_real(&self) -> bool {
        matches!(self, SamplerSpec::RealGaussian | SamplerSpec::Rademacher)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        // Every arm consumes a fixed number of uniforms so that draw k is a
        // pure function of (seed, trial, k).
        match self {
            SamplerSpec::ComplexGaussian => {
                let (u1, u2) = (unit_open(rng), unit_halfopen(rng));
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * (TAU * u2).cos(), r * (TAU * u2).sin())
            }
            SamplerSpec::RealGaussian => {
                let (u1, u2) = (unit_open(rng), unit_halfopen(rng));
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * (TAU * u2).cos(), 0.0)
            }
            SamplerSpec::UniformUnitDisk => {
                let (u1, u2) = (unit_open(rng), unit_halfopen(rng));
                Complex64::from_polar(u1.sqrt(), TAU * u2)
            }
            SamplerSpec::Rademacher => {
                let (u1, _) = (unit_halfopen(rng), unit_halfopen(rng));
                Complex64::new(if u1 < 0.5 { -1.0 } else { 1.0 }, 0.0)
            }
            SamplerSpec::HeavyTailLog => {
                let (u1, u2) = (unit_open(rng), unit_halfopen(rng));
                let log_mag = (1.0 / u1 - 1.0).min(HEAVY_TAIL_LOG_CAP);
                Complex64::from_polar(log_mag.exp(), TAU * u2)
            }
        }
    }
}

/// Uniform in `(0, 1]`; never exactly zero.
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[0, 1)`.
fn unit_halfopen(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Expands `(master_seed, trial)` into an independent 256-bit stream key.
fn stream_key(master_seed: u64, trial: u64) -> [u8; 32] {
    let mut state = master_seed;
    let first = splitmix64(&mut state);
    let mut state = first ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// One random draw from an ensemble: deterministic log-magnitudes paired
/// with sampled unit factors.
#[derive(Clone, Debug)]
pub struct SampledPolynomial {
    log_mag: Vec<f64>,
    xi: Vec<Complex64>,
    seed_record: (u64, u64),
}

impl SampledPolynomial {
    /// Pairs explicit log-magnitudes with explicit factors (used for the
    /// fixed-degree limit polynomials and in tests).
    pub fn from_parts(
        log_mag: Vec<f64>,
        xi: Vec<Complex64>,
        seed_record: (u64, u64),
    ) -> Result<Self> {
        if log_mag.len() != xi.len() {
            return Err(Error::DegreeMismatch {
                expected: log_mag.len(),
                actual: xi.len(),
            });
        }
        if log_mag.is_empty() {
            return Err(Error::InvalidParameter("empty polynomial".into()));
        }
        Ok(SampledPolynomial {
            log_mag,
            xi,
            seed_record,
        })
    }

    pub fn degree(&self) -> usize {
        self.log_mag.len() - 1
    }

    pub fn log_mag(&self) -> &[f64] {
        &self.log_mag
    }

    pub fn xi(&self) -> &[Complex64] {
        &self.xi
    }

    pub fn seed_record(&self) -> (u64, u64) {
        self.seed_record
    }

    /// Materializes the coefficients `ξ_k exp(log_mag[k] - max log_mag)`.
    ///
    /// The max-normalization keeps the largest deterministic magnitude at 1;
    /// the zero multiset is unchanged because it is dilation invariant.
    pub fn materialize_normalized(&self) -> Vec<Complex64> {
        let max_log = self
            .log_mag
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        self.log_mag
            .iter()
            .zip(&self.xi)
            .map(|(&lm, &xi)| xi * (lm - max_log).exp())
            .collect()
    }
}

/// Draws the random factors for one trial.
///
/// The stream is a pure function of `(master_seed, trial)`, and each draw
/// consumes a fixed number of words, so trials are order-independent and the
/// whole draw is reproducible.
pub fn sample_polynomial(
    coeffs: &LogCoefficients,
    sampler: SamplerSpec,
    master_seed: u64,
    trial: u64,
) -> SampledPolynomial {
    let mut rng = ChaCha8Rng::from_seed(stream_key(master_seed, trial));
    let xi = (0..coeffs.log_mag.len())
        .map(|_| sampler.draw(&mut rng))
        .collect();
    SampledPolynomial {
        log_mag: coeffs.log_mag.clone(),
        xi,
        seed_record: (master_seed, trial),
    }
}

/// Deviation suprema `sup_k |log_mag[k]/L_n - log p((k/L_n) ∧ T0)|` over
/// `0 ≤ k ≤ (T0 - δ_n) L_n`, one value per supplied instance.
///
/// For a family that fits the profile the sequence tends to zero.
pub fn check_profile_fit(
    coeffs_sequence: &[LogCoefficients],
    profile: &CoefficientProfile,
    l_n: &[usize],
    delta_n: &[f64],
) -> Result<Vec<f64>> {
    if coeffs_sequence.len() != l_n.len() || coeffs_sequence.len() != delta_n.len() {
        return Err(Error::InvalidParameter(
            "coefficient sequence, L_n and delta_n must have equal lengths".into(),
        ));
    }
    let t0 = profile.support_end();
    coeffs_sequence
        .iter()
        .zip(l_n.iter().zip(delta_n))
        .map(|(coeffs, (&l, &delta))| {
            let l_f = l as f64;
            let k_max_real = (t0 - delta) * l_f;
            let k_max = k_max_real.round();
            if (k_max_real - k_max).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "(T0 - delta_n) * L_n = {k_max_real} is not an integer"
                )));
            }
            if k_max < 0.0 {
                return Err(Error::OutOfRange("index range empty".into()));
            }
            let k_max = k_max as usize;
            if k_max > coeffs.degree() {
                return Err(Error::OutOfRange(format!(
                    "(T0 - delta_n) * L_n = {k_max} exceeds degree {}",
                    coeffs.degree()
                )));
            }
            let sup = (0..=k_max)
                .map(|k| {
                    let t = (k as f64 / l_f).min(t0);
                    (coeffs.log_mag[k] / l_f - profile.log_p(t)).abs()
                })
                .fold(0.0f64, f64::max);
            Ok(sup)
        })
        .collect()
}

/// Profile-fit deviation and largest coefficient magnitude over the top
/// coefficient block `N_n ≤ k ≤ n`.
///
/// Returns `(eta_n, log b_n)`; the magnitude is reported in log space to
/// avoid overflow.
pub fn ensemble_diagnostics(
    coeffs: &LogCoefficients,
    order: usize,
    profile: &CoefficientProfile,
) -> Result<(f64, f64)> {
    let n = coeffs.degree();
    if order > n {
        return Err(Error::OutOfRange(format!(
            "differentiation order {order} exceeds degree {n}"
        )));
    }
    let n_f = n as f64;
    let mut eta = 0.0f64;
    let mut log_b = f64::NEG_INFINITY;
    for k in order..=n {
        let dev = (coeffs.log_mag[k] / n_f - profile.log_p(k as f64 / n_f)).abs();
        eta = eta.max(dev);
        log_b = log_b.max(coeffs.log_mag[k]);
    }
    Ok((eta, log_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kac_profile_values() {
        let p = make_profile(&ProfileKind::Kac).unwrap();
        assert_eq!(p.log_p(0.5), 0.0);
        assert_eq!(p.log_p(1.5), LOG_ZERO);
        assert_eq!(p.support_end(), 1.0);
    }

    #[test]
    fn elliptic_profile_midpoint_is_half_log_two() {
        // -t/2 log t - (1-t)/2 log(1-t) at t = 1/2 is -1/2 log(1/2).
        let p = make_profile(&ProfileKind::Elliptic).unwrap();
        assert_relative_eq!(p.log_p(0.5), 0.5 * 2.0f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn case3_profile_endpoint() {
        let p = make_profile(&ProfileKind::KacCase3Rescaled).unwrap();
        assert_eq!(p.log_p(1.0), 0.0);
    }

    #[test]
    fn case2_support_is_one_minus_a() {
        let p = make_profile(&ProfileKind::KacCase2 { a: 0.25 }).unwrap();
        assert_relative_eq!(p.support_end(), 0.75);
        assert!(p.log_p(0.8) == LOG_ZERO);
        // f_1(0) = a log a + (1-a) log(1-a)
        let a = 0.25f64;
        assert_relative_eq!(
            p.log_p(0.0),
            a * a.ln() + (1.0 - a) * (1.0 - a).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn case2_rejects_bad_ratio() {
        assert!(make_profile(&ProfileKind::KacCase2 { a: 1.0 }).is_err());
        assert!(make_profile(&ProfileKind::KacCase2 { a: 0.0 }).is_err());
    }

    #[test]
    fn discontinuous_custom_table_is_rejected_by_refinement_check() {
        // A numerical step: huge slope concentrated between two nearby knots.
        let table = vec![(0.0, 0.0), (0.5, 0.0), (0.5 + 1e-12, 5.0), (1.0, 5.0)];
        let err = make_profile(&ProfileKind::Custom { table });
        assert!(err.is_err());
    }

    #[test]
    fn custom_table_interpolates() {
        let table = vec![(0.0, 0.0), (1.0, -1.0), (2.0, -3.0)];
        let p = make_profile(&ProfileKind::Custom { table }).unwrap();
        assert_relative_eq!(p.log_p(0.5), -0.5);
        assert_relative_eq!(p.log_p(1.5), -2.0);
        assert_eq!(p.log_p(2.5), LOG_ZERO);
        assert_eq!(p.support_end(), 2.0);
    }

    #[test]
    fn kac_coeffs_are_flat() {
        let c = make_log_coeffs(&EnsembleKind::Kac, 5).unwrap();
        assert_eq!(c.log_mag(), &[0.0; 6]);
    }

    #[test]
    fn elliptic_center_matches_hand_binomial() {
        // C(4, 2) = 6 by hand.
        let c = make_log_coeffs(&EnsembleKind::Elliptic, 4).unwrap();
        assert_relative_eq!(c.log_mag()[2], 0.5 * 6.0f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn elliptic_symmetry_is_exact() {
        let c = make_log_coeffs(&EnsembleKind::Elliptic, 301).unwrap();
        for k in 0..=301 {
            assert_eq!(c.log_mag()[k], c.log_mag()[301 - k], "k = {k}");
        }
    }

    #[test]
    fn counterexample_top_block_hand_values() {
        // n = 10: D_n = floor(log 10) = 2, N_n = 8; top entries are
        // n!(k-N)!/(k! D!) = 45, 5, 1 for k = 8, 9, 10.
        let c = make_log_coeffs(&EnsembleKind::Counterexample, 10).unwrap();
        assert_eq!(c.log_mag()[7], 0.0);
        assert_relative_eq!(c.log_mag()[8], 45.0f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(c.log_mag()[9], 5.0f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(c.log_mag()[10], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn counterexample_top_block_is_nonincreasing() {
        let n = 200;
        let c = make_log_coeffs(&EnsembleKind::Counterexample, n).unwrap();
        let (order, _) = counterexample_orders(n).unwrap();
        for k in order..n {
            assert!(
                c.log_mag()[k + 1] <= c.log_mag()[k] + 1e-10,
                "k = {k}: {} -> {}",
                c.log_mag()[k],
                c.log_mag()[k + 1]
            );
        }
    }

    #[test]
    fn counterexample_needs_large_enough_degree() {
        assert!(make_log_coeffs(&EnsembleKind::Counterexample, 2).is_err());
        assert!(make_log_coeffs(&EnsembleKind::Counterexample, 3).is_ok());
    }

    #[test]
    fn degree_zero_is_rejected() {
        assert!(make_log_coeffs(&EnsembleKind::Kac, 0).is_err());
    }

    #[test]
    fn profile_driven_matches_profile() {
        let p = make_profile(&ProfileKind::Elliptic).unwrap();
        let c = make_log_coeffs(&EnsembleKind::ProfileDriven(p.clone()), 40).unwrap();
        for k in 0..=40 {
            assert_relative_eq!(
                c.log_mag()[k],
                40.0 * p.log_p(k as f64 / 40.0),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn rademacher_draws_have_unit_modulus() {
        let c = make_log_coeffs(&EnsembleKind::Kac, 64).unwrap();
        let poly = sample_polynomial(&c, SamplerSpec::Rademacher, 7, 3);
        for xi in poly.xi() {
            assert_eq!(xi.norm(), 1.0);
            assert_eq!(xi.im, 0.0);
        }
    }

    #[test]
    fn same_seed_and_trial_reproduces_the_draw() {
        let c = make_log_coeffs(&EnsembleKind::Kac, 100).unwrap();
        let a = sample_polynomial(&c, SamplerSpec::ComplexGaussian, 42, 11);
        let b = sample_polynomial(&c, SamplerSpec::ComplexGaussian, 42, 11);
        assert_eq!(a.xi(), b.xi());
        let other = sample_polynomial(&c, SamplerSpec::ComplexGaussian, 42, 12);
        assert_ne!(a.xi(), other.xi());
    }

    #[test]
    fn complex_gaussian_mean_is_near_zero() {
        // CLT: |mean| <= 3/sqrt(N) with N = 10^4 draws, in each coordinate.
        let c = make_log_coeffs(&EnsembleKind::Kac, 9_999).unwrap();
        let poly = sample_polynomial(&c, SamplerSpec::ComplexGaussian, 123, 0);
        let n = poly.xi().len() as f64;
        let mean = poly.xi().iter().sum::<Complex64>() / n;
        assert!(mean.re.abs() < 0.05, "re mean {}", mean.re);
        assert!(mean.im.abs() < 0.05, "im mean {}", mean.im);
    }

    #[test]
    fn continuous_samplers_never_draw_zero() {
        let c = make_log_coeffs(&EnsembleKind::Kac, 2_000).unwrap();
        for sampler in [
            SamplerSpec::ComplexGaussian,
            SamplerSpec::RealGaussian,
            SamplerSpec::UniformUnitDisk,
            SamplerSpec::HeavyTailLog,
        ] {
            let poly = sample_polynomial(&c, sampler, 5, 0);
            assert!(poly.xi().iter().all(|x| x.norm() > 0.0));
        }
    }

    #[test]
    fn heavy_tail_is_flagged() {
        assert!(!SamplerSpec::HeavyTailLog.has_finite_log_moment());
        assert!(SamplerSpec::Rademacher.has_finite_log_moment());
    }

    #[test]
    fn kac_fit_against_kac_profile_is_exactly_zero() {
        let profile = make_profile(&ProfileKind::Kac).unwrap();
        let seq: Vec<_> = [50usize, 100, 200]
            .iter()
            .map(|&n| make_log_coeffs(&EnsembleKind::Kac, n).unwrap())
            .collect();
        let sups = check_profile_fit(&seq, &profile, &[50, 100, 200], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(sups, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn kac_fit_with_shifted_cutoff_is_zero() {
        // L_n = n with delta_n = N/n restricts the sup to the first n - N
        // slots; for flat coefficients it is still exactly zero.
        let profile = make_profile(&ProfileKind::Kac).unwrap();
        let n = 240;
        let order = 60;
        let seq = vec![make_log_coeffs(&EnsembleKind::Kac, n).unwrap()];
        let sups = check_profile_fit(&seq, &profile, &[n], &[order as f64 / n as f64]).unwrap();
        assert_eq!(sups, vec![0.0]);
    }

    #[test]
    fn elliptic_fit_decreases_and_stays_small() {
        let profile = make_profile(&ProfileKind::Elliptic).unwrap();
        let ns = [100usize, 400, 1600];
        let seq: Vec<_> = ns
            .iter()
            .map(|&n| make_log_coeffs(&EnsembleKind::Elliptic, n).unwrap())
            .collect();
        let sups = check_profile_fit(&seq, &profile, &ns, &[0.0; 3]).unwrap();
        assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
        for s in &sups {
            assert!(*s <= 0.05, "{sups:?}");
        }
    }

    #[test]
    fn counterexample_fit_respects_log_squared_bound() {
        let profile = make_profile(&ProfileKind::Kac).unwrap();
        let n = 1000;
        let seq = vec![make_log_coeffs(&EnsembleKind::Counterexample, n).unwrap()];
        let sups = check_profile_fit(&seq, &profile, &[n], &[0.0]).unwrap();
        let bound = (n as f64).ln().powi(2) / n as f64;
        assert!(sups[0] <= bound, "sup {} > bound {}", sups[0], bound);
    }

    #[test]
    fn fit_rejects_non_integer_cutoff() {
        let profile = make_profile(&ProfileKind::Kac).unwrap();
        let seq = vec![make_log_coeffs(&EnsembleKind::Kac, 10).unwrap()];
        assert!(check_profile_fit(&seq, &profile, &[10], &[0.05]).is_err());
    }

    #[test]
    fn kac_diagnostics_vanish() {
        let profile = make_profile(&ProfileKind::Kac).unwrap();
        for n in [10usize, 100, 1000] {
            let c = make_log_coeffs(&EnsembleKind::Kac, n).unwrap();
            let (eta, log_b) = ensemble_diagnostics(&c, n / 2, &profile).unwrap();
            assert_eq!(eta, 0.0);
            assert_eq!(log_b, 0.0);
        }
    }

    #[test]
    fn elliptic_eta_tracks_quarter_log_ratio() {
        // eta_n ~ log(D_n)/(4n) for the square-root-binomial family.
        let profile = make_profile(&ProfileKind::Elliptic).unwrap();
        let n = 2000;
        let d = 100;
        let c = make_log_coeffs(&EnsembleKind::Elliptic, n).unwrap();
        let (eta, _) = ensemble_diagnostics(&c, n - d, &profile).unwrap();
        let predicted = (d as f64).ln() / (4.0 * n as f64);
        assert!(
            eta <= 2.0 * predicted && eta >= predicted / 2.0,
            "eta {eta} vs predicted {predicted}"
        );
    }

    #[test]
    fn stream_keys_differ_across_trials() {
        let a = stream_key(1, 0);
        let b = stream_key(1, 1);
        let c = stream_key(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
