//! Seeded Monte Carlo experiment orchestration and report persistence.
//!
//! [`run_trials`] drives the full empirical pipeline — sample, differentiate,
//! optionally rescale, find roots, summarize — for a reproducible
//! [`ExperimentConfig`]. Every statistic in the resulting [`Report`] can be
//! recomputed from the persisted per-root CSV.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{differentiate, recommended_rescale, DerivativePlan, LimitFamily};
use crate::ensembles::{
    make_log_coeffs, profile_from_table_file, sample_polynomial, EnsembleKind, SamplerSpec,
};
use crate::limits::{
    closed_form_radial_cdf, default_s_grid, derived_profile_u_a, fixed_degree_limit_poly,
    legendre_fenchel, ClosedFormCdf, DEFAULT_T_RESOLUTION,
};
use crate::measures::{angular_discrepancy, ks_distance, EmpiricalMeasure, RadialCdf};
use crate::rootfind::{find_roots, DEFAULT_ROOT_TOL};
use crate::{Error, Result};

/// How the differentiation order is chosen from the degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeRule {
    /// Use this order as given.
    Explicit { order: usize },
    /// Order is `round(ratio * n)`.
    Ratio { ratio: f64 },
    /// Order is `n - floor(log n)`, the counterexample scaling.
    LogDrop,
    /// Order is `n - m`, leaving a fixed remaining degree `m`.
    FixedDegree { m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescaleMode {
    /// Keep the zeros of the derivative as found.
    None,
    /// Multiply the zeros by the family's recommended zoom factor.
    Auto,
}

/// Full description of one experiment; `(config, master_seed)` fixes every
/// persisted statistic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `kac | elliptic | counterexample | profile:<file>`.
    pub ensemble: String,
    pub sampler: SamplerSpec,
    pub n: usize,
    pub derivative: DerivativeRule,
    pub rescale: RescaleMode,
    pub trials: usize,
    pub master_seed: u64,
    /// Optional comparison curve, e.g. `kac-a:0.5` or `profile:elliptic-rescaled`.
    pub target: Option<String>,
    /// Mass normalization applied to numeric-profile targets.
    pub mass_norm: f64,
    /// `(center, halfwidth)` annuli whose mean mass fraction is reported.
    pub annuli: Vec<(f64, f64)>,
}

impl ExperimentConfig {
    pub fn new(ensemble: impl Into<String>, n: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            ensemble: ensemble.into(),
            sampler: SamplerSpec::ComplexGaussian,
            n,
            derivative: DerivativeRule::Explicit { order: 0 },
            rescale: RescaleMode::None,
            trials,
            master_seed,
            target: None,
            mass_norm: 1.0,
            annuli: vec![(1.0, 0.1)],
        }
    }

    fn resolve_ensemble(&self) -> Result<EnsembleKind> {
        resolve_ensemble(&self.ensemble)
    }

    fn resolve_order(&self) -> Result<usize> {
        let n = self.n;
        let order = match self.derivative {
            DerivativeRule::Explicit { order } => order,
            DerivativeRule::Ratio { ratio } => {
                if !(0.0..1.0).contains(&ratio) {
                    return Err(Error::InvalidParameter(format!(
                        "derivative ratio must lie in [0, 1), got {ratio}"
                    )));
                }
                (ratio * n as f64).round() as usize
            }
            DerivativeRule::LogDrop => {
                let drop = (n as f64).ln().floor() as usize;
                if drop < 1 {
                    return Err(Error::InvalidParameter(format!(
                        "degree {n} too small for the log-drop rule"
                    )));
                }
                n - drop
            }
            DerivativeRule::FixedDegree { m } => {
                if m == 0 || m >= n {
                    return Err(Error::InvalidParameter(format!(
                        "fixed remaining degree {m} must lie in [1, n)"
                    )));
                }
                n - m
            }
        };
        if order >= n {
            return Err(Error::InvalidParameter(format!(
                "resolved order {order} must be below the degree {n}"
            )));
        }
        Ok(order)
    }

    fn limit_family(&self) -> Result<LimitFamily> {
        match self.ensemble.as_str() {
            "kac" | "counterexample" => Ok(LimitFamily::Kac),
            "elliptic" => Ok(LimitFamily::Elliptic),
            other => Err(Error::InvalidParameter(format!(
                "no recommended rescale for ensemble '{other}'"
            ))),
        }
    }
}

/// Parses an ensemble label: `kac | elliptic | counterexample | profile:<file>`.
pub fn resolve_ensemble(label: &str) -> Result<EnsembleKind> {
    match label {
        "kac" => Ok(EnsembleKind::Kac),
        "elliptic" => Ok(EnsembleKind::Elliptic),
        "counterexample" => Ok(EnsembleKind::Counterexample),
        other => {
            if let Some(path) = other.strip_prefix("profile:") {
                let profile = profile_from_table_file(Path::new(path))?;
                Ok(EnsembleKind::ProfileDriven(profile))
            } else {
                Err(Error::InvalidParameter(format!(
                    "unknown ensemble '{other}'"
                )))
            }
        }
    }
}

/// Parses a comparison-target label into a radial CDF.
///
/// Closed forms: `kac-unit-circle | kac-a:<a> | kac-rescaled |
/// elliptic-rescaled`. Numeric route: `profile:<kind>` where `<kind>` is
/// `kac | elliptic | kac-case2:<a> | kac-case3-rescaled | elliptic-rescaled |
/// u_a:<base>:<a>` or a table file path; the profile goes through the
/// numerical transform and `mass_norm` scales the left derivative.
pub fn resolve_target(label: &str, mass_norm: f64) -> Result<RadialCdf> {
    if let Some(kind) = label.strip_prefix("profile:") {
        let profile = resolve_profile(kind)?;
        let tr = legendre_fenchel(&profile, &default_s_grid(), DEFAULT_T_RESOLUTION)?;
        return Ok(tr.radial_cdf(mass_norm));
    }
    Ok(closed_form_radial_cdf(ClosedFormCdf::parse(label)?))
}

/// Parses a profile label used by targets and the `limit` verb.
pub fn resolve_profile(kind: &str) -> Result<crate::ensembles::CoefficientProfile> {
    use crate::ensembles::{make_profile, ProfileKind};
    match kind {
        "kac" => make_profile(&ProfileKind::Kac),
        "elliptic" => make_profile(&ProfileKind::Elliptic),
        "kac-case3-rescaled" => make_profile(&ProfileKind::KacCase3Rescaled),
        "elliptic-rescaled" => make_profile(&ProfileKind::EllipticRescaled),
        other => {
            if let Some(rest) = other.strip_prefix("kac-case2:") {
                let a: f64 = rest.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad ratio in profile '{other}'"))
                })?;
                return make_profile(&ProfileKind::KacCase2 { a });
            }
            if let Some(rest) = other.strip_prefix("u_a:") {
                let (base, a) = rest.rsplit_once(':').ok_or_else(|| {
                    Error::InvalidParameter(format!("expected u_a:<base>:<a>, got '{other}'"))
                })?;
                let a: f64 = a.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad ratio in profile '{other}'"))
                })?;
                return derived_profile_u_a(&resolve_profile(base)?, a);
            }
            let path = Path::new(other);
            if path.exists() {
                return profile_from_table_file(path);
            }
            Err(Error::InvalidParameter(format!(
                "unknown profile '{other}'"
            )))
        }
    }
}

/// Outcome of one successful trial; roots are kept post-rescale.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub roots: Vec<Complex64>,
    pub ks: Option<f64>,
    pub max_residual: f64,
    pub median_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusStat {
    pub center: f64,
    pub halfwidth: f64,
    pub mean_fraction: f64,
}

/// Aggregated experiment outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub pooled_ks: Option<f64>,
    pub per_trial_ks: Vec<f64>,
    pub angular_discrepancy: f64,
    pub failed_trials: Vec<usize>,
    pub runtime_seconds: f64,
    pub root_counts: Vec<usize>,
    pub annulus_fractions: Vec<AnnulusStat>,
    pub residual_max: f64,
    pub residual_median: f64,
    /// Per-trial root data; persisted to CSV rather than JSON.
    #[serde(skip)]
    pub trials: Vec<TrialRecord>,
}

impl Report {
    /// Pooled measure over all successful trials, merged by trial index.
    pub fn pooled_measure(&self) -> Result<EmpiricalMeasure> {
        let parts: Vec<EmpiricalMeasure> = self
            .trials
            .iter()
            .map(|t| EmpiricalMeasure::from_roots(&t.roots))
            .collect::<Result<_>>()?;
        EmpiricalMeasure::pooled(parts.iter())
    }
}

/// Runs the full pipeline for each trial and aggregates the statistics.
///
/// Trials are independent streams keyed by `(master_seed, trial)`, so the
/// outcome does not depend on execution order; failed trials are excluded
/// from pooled statistics but reported.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let kind = cfg.resolve_ensemble()?;
    let order = cfg.resolve_order()?;
    let base = make_log_coeffs(&kind, cfg.n)?;
    let plan = DerivativePlan::new(cfg.n, order)?;
    let dcoeffs = differentiate(&base, &plan)?;
    let scale = match cfg.rescale {
        RescaleMode::None => 1.0,
        RescaleMode::Auto => {
            let fixed = matches!(cfg.derivative, DerivativeRule::FixedDegree { .. });
            recommended_rescale(cfg.limit_family()?, &plan, fixed)?.exp()
        }
    };
    let target = cfg
        .target
        .as_deref()
        .map(|t| resolve_target(t, cfg.mass_norm))
        .transpose()?;

    let outcomes: Vec<(usize, Result<TrialRecord>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let poly = sample_polynomial(&dcoeffs, cfg.sampler, cfg.master_seed, trial as u64);
            let record = find_roots(&poly, DEFAULT_ROOT_TOL).and_then(|rs| {
                let roots: Vec<Complex64> = rs.roots().iter().map(|z| z * scale).collect();
                let ks = match &target {
                    Some(t) => {
                        let m = EmpiricalMeasure::from_roots(&roots)?;
                        Some(ks_distance(&m.radial_cdf(), t))
                    }
                    None => None,
                };
                Ok(TrialRecord {
                    trial,
                    roots,
                    ks,
                    max_residual: rs.max_residual(),
                    median_residual: rs.median_residual(),
                })
            });
            (trial, record)
        })
        .collect();

    let mut trials = Vec::new();
    let mut failed_trials = Vec::new();
    for (trial, outcome) in outcomes {
        match outcome {
            Ok(rec) => trials.push(rec),
            Err(_) => failed_trials.push(trial),
        }
    }
    if trials.is_empty() {
        return Err(Error::EmptyReport);
    }

    let measures: Vec<EmpiricalMeasure> = trials
        .iter()
        .map(|t| EmpiricalMeasure::from_roots(&t.roots))
        .collect::<Result<_>>()?;
    let pooled = EmpiricalMeasure::pooled(measures.iter())?;
    let pooled_ks = target
        .as_ref()
        .map(|t| ks_distance(&pooled.radial_cdf(), t));
    let per_trial_ks: Vec<f64> = trials.iter().filter_map(|t| t.ks).collect();
    let angular = if pooled.count() >= 2 {
        angular_discrepancy(&pooled)?
    } else {
        0.0
    };
    let annulus_fractions = cfg
        .annuli
        .iter()
        .map(|&(center, halfwidth)| {
            let mean = measures
                .iter()
                .map(|m| m.annulus_fraction(center, halfwidth))
                .sum::<f64>()
                / measures.len() as f64;
            AnnulusStat {
                center,
                halfwidth,
                mean_fraction: mean,
            }
        })
        .collect();
    let root_counts = trials.iter().map(|t| t.roots.len()).collect();
    let mut trial_max_residuals: Vec<f64> = trials.iter().map(|t| t.max_residual).collect();
    trial_max_residuals.sort_by(|a, b| a.total_cmp(b));
    let residual_max = trial_max_residuals.last().copied().unwrap_or(0.0);
    let residual_median = trial_max_residuals[trial_max_residuals.len() / 2];

    Ok(Report {
        config: cfg.clone(),
        pooled_ks,
        per_trial_ks,
        angular_discrepancy: angular,
        failed_trials,
        runtime_seconds: start.elapsed().as_secs_f64(),
        root_counts,
        annulus_fractions,
        residual_max,
        residual_median,
        trials,
    })
}

/// Fixed-remaining-degree convergence check: for one frozen draw of random
/// factors, the zoomed zeros of the order-`(n-m)` derivative are paired
/// against the zeros of the limit polynomial; returns the max pairing
/// distance per `n` (minimized over pairings).
pub fn fixed_degree_convergence(
    family: LimitFamily,
    m: usize,
    n_list: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    let kind = match family {
        LimitFamily::Kac => EnsembleKind::Kac,
        LimitFamily::Elliptic => EnsembleKind::Elliptic,
    };
    let xi_source = make_log_coeffs(&EnsembleKind::Kac, m)?;
    let xi = sample_polynomial(&xi_source, SamplerSpec::ComplexGaussian, seed, 0)
        .xi()
        .to_vec();
    let limit_poly = fixed_degree_limit_poly(family, m, &xi)?;
    let limit_roots = find_roots(&limit_poly, DEFAULT_ROOT_TOL)?.roots().to_vec();

    n_list
        .iter()
        .map(|&n| {
            if n <= m {
                return Err(Error::InvalidParameter(format!(
                    "degree {n} must exceed the fixed remaining degree {m}"
                )));
            }
            let coeffs = make_log_coeffs(&kind, n)?;
            let plan = DerivativePlan::new(n, n - m)?;
            let dcoeffs = differentiate(&coeffs, &plan)?;
            let poly = crate::ensembles::SampledPolynomial::from_parts(
                dcoeffs.log_mag().to_vec(),
                xi.clone(),
                (seed, 0),
            )?;
            let zoom = recommended_rescale(family, &plan, true)?.exp();
            let roots: Vec<Complex64> = find_roots(&poly, DEFAULT_ROOT_TOL)?
                .roots()
                .iter()
                .map(|z| z * zoom)
                .collect();
            bottleneck_pairing_distance(&roots, &limit_roots)
        })
        .collect()
}

/// Smallest achievable maximum pairing distance between two equal-size point
/// sets (exact bottleneck assignment by bitmask dynamic programming; sizes up
/// to ~20).
pub fn bottleneck_pairing_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DegreeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    if n > 20 {
        return Err(Error::InvalidParameter(format!(
            "bottleneck pairing limited to 20 points, got {n}"
        )));
    }
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; 1 << n];
    dp[0] = 0.0;
    for mask in 0..full {
        if dp[mask].is_infinite() {
            continue;
        }
        let i = mask.count_ones() as usize;
        for (j, bj) in b.iter().enumerate() {
            if mask & (1 << j) == 0 {
                let cost = dp[mask].max((a[i] - bj).norm());
                let next = mask | (1 << j);
                if cost < dp[next] {
                    dp[next] = cost;
                }
            }
        }
    }
    Ok(dp[full])
}

/// Greedy matching of two nearly coincident point sets: pairs globally
/// closest points first and returns the largest matched distance. Used for
/// cross-checking two root finders on the same polynomial.
pub fn matched_max_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DegreeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            pairs.push(((ai - bj).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut matched = 0usize;
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == n {
                break;
            }
        }
    }
    Ok(worst)
}

/// Output locations for [`write_report`].
#[derive(Clone, Debug)]
pub struct ReportPaths {
    pub roots_csv: PathBuf,
    pub summary_json: PathBuf,
}

impl ReportPaths {
    /// `roots.csv` and `summary.json` under one directory.
    pub fn in_dir(dir: &Path) -> Self {
        ReportPaths {
            roots_csv: dir.join("roots.csv"),
            summary_json: dir.join("summary.json"),
        }
    }
}

/// Serializes every float with 17 significant digits so values round-trip
/// exactly.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{}", fmt_float(value))
        } else {
            write!(writer, "null")
        }
    }
}

/// Persists the per-root CSV (`trial,re,im,modulus,angle`) and the summary
/// JSON. Floats carry 17 significant digits.
pub fn write_report(report: &Report, paths: &ReportPaths) -> Result<()> {
    if report.trials.is_empty() {
        return Err(Error::EmptyReport);
    }
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| Error::Io { path, source }
    };

    for path in [&paths.roots_csv, &paths.summary_json] {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
        }
    }

    let mut csv = String::from("trial,re,im,modulus,angle\n");
    for rec in &report.trials {
        for z in &rec.roots {
            let angle = {
                let a = z.arg();
                if a < 0.0 {
                    a + std::f64::consts::TAU
                } else {
                    a
                }
            };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                rec.trial,
                fmt_float(z.re),
                fmt_float(z.im),
                fmt_float(z.norm()),
                fmt_float(angle)
            ));
        }
    }
    std::fs::write(&paths.roots_csv, csv).map_err(io_err(&paths.roots_csv))?;

    let file = std::fs::File::create(&paths.summary_json).map_err(io_err(&paths.summary_json))?;
    let mut writer = std::io::BufWriter::new(file);
    let mut ser = serde_json::Serializer::with_formatter(&mut writer, SigDigitFormatter);
    report.serialize(&mut ser).map_err(|e| Error::Io {
        path: paths.summary_json.clone(),
        source: std::io::Error::other(e),
    })?;
    writer
        .write_all(b"\n")
        .and_then(|_| writer.flush())
        .map_err(io_err(&paths.summary_json))?;
    Ok(())
}

/// Reads back a roots CSV written by [`write_report`] as
/// `(trial, root, modulus, angle)` rows.
pub fn read_roots_csv(path: &Path) -> Result<Vec<(usize, Complex64, f64, f64)>> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "trial,re,im,modulus,angle" {
                return Err(Error::InvalidParameter(format!(
                    "{}: unexpected CSV header '{line}'",
                    path.display()
                )));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::InvalidParameter(format!(
                "{}:{}: expected 5 columns",
                path.display(),
                i + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::InvalidParameter(format!("{}:{}: bad float '{s}'", path.display(), i + 1))
            })
        };
        let trial: usize = cols[0].parse().map_err(|_| {
            Error::InvalidParameter(format!("{}:{}: bad trial index", path.display(), i + 1))
        })?;
        rows.push((
            trial,
            Complex64::new(parse(cols[1])?, parse(cols[2])?),
            parse(cols[3])?,
            parse(cols[4])?,
        ));
    }
    Ok(rows)
}
