//! Empirical measures of root multisets and their radial/angular statistics.
//!
//! A root multiset becomes an [`EmpiricalMeasure`] (sorted moduli plus
//! arguments), which can be pushed forward under `z ↦ h z`, turned into a
//! [`RadialCdf`], and compared against a reference curve with the
//! Kolmogorov–Smirnov distance. Angular uniformity is measured by the Kuiper
//! statistic, which is invariant under global rotations of the circle.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::rootfind::RootSet;
use crate::{Error, Result};

/// Log-spaced refinement grid used when one side of a KS comparison is a
/// continuous curve: `GRID_POINTS` points on `[GRID_LO, GRID_HI]`.
const GRID_POINTS: usize = 10_000;
const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 1e3;

/// Moduli and arguments of a root multiset.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    moduli: Vec<f64>,
    angles: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Extracts moduli (sorted ascending) and arguments in `[0, 2π)`.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::EmptyRootSet);
        }
        let mut moduli: Vec<f64> = roots.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| a.total_cmp(b));
        let angles = roots
            .iter()
            .map(|z| {
                let a = z.arg();
                if a < 0.0 {
                    a + TAU
                } else {
                    a
                }
            })
            .collect();
        Ok(EmpiricalMeasure { moduli, angles })
    }

    pub fn from_root_set(rs: &RootSet) -> Result<Self> {
        Self::from_roots(rs.roots())
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn count(&self) -> usize {
        self.moduli.len()
    }

    /// Push-forward under `z ↦ h z`: moduli scale, angles are unchanged.
    pub fn scale(&self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {h}"
            )));
        }
        Ok(EmpiricalMeasure {
            moduli: self.moduli.iter().map(|m| m * h).collect(),
            angles: self.angles.clone(),
        })
    }

    /// Right-continuous step function `r ↦ #{|z| ≤ r} / count`.
    pub fn radial_cdf(&self) -> RadialCdf {
        RadialCdf::Empirical {
            moduli: Arc::new(self.moduli.clone()),
        }
    }

    /// Fraction of mass with `|modulus - center| ≤ halfwidth`.
    pub fn annulus_fraction(&self, center: f64, halfwidth: f64) -> f64 {
        let lo = center - halfwidth;
        let hi = center + halfwidth;
        let below = self.moduli.partition_point(|m| *m < lo);
        let upto = self.moduli.partition_point(|m| *m <= hi);
        (upto - below) as f64 / self.count() as f64
    }

    /// Merges several measures (e.g. trials) into one pooled measure.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a EmpiricalMeasure>) -> Result<Self> {
        let mut moduli = Vec::new();
        let mut angles = Vec::new();
        for p in parts {
            moduli.extend_from_slice(&p.moduli);
            angles.extend_from_slice(&p.angles);
        }
        if moduli.is_empty() {
            return Err(Error::EmptyRootSet);
        }
        moduli.sort_by(|a, b| a.total_cmp(b));
        Ok(EmpiricalMeasure { moduli, angles })
    }
}

/// Monotone map `r ↦ mass of the closed disk of radius r`, either an
/// empirical step function or a continuous reference curve.
#[derive(Clone)]
pub enum RadialCdf {
    Empirical {
        moduli: Arc<Vec<f64>>,
    },
    Theoretical {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for RadialCdf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialCdf::Empirical { moduli } => {
                write!(f, "RadialCdf::Empirical({} atoms)", moduli.len())
            }
            RadialCdf::Theoretical { .. } => write!(f, "RadialCdf::Theoretical"),
        }
    }
}

impl RadialCdf {
    /// Wraps a continuous reference curve.
    pub fn theoretical(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialCdf::Theoretical { f: Arc::new(f) }
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        match self {
            RadialCdf::Empirical { moduli } => {
                moduli.partition_point(|m| *m <= r) as f64 / moduli.len() as f64
            }
            RadialCdf::Theoretical { f } => f(r),
        }
    }

    /// Left limit at `r`; differs from `evaluate` only at empirical atoms.
    fn left_limit(&self, r: f64) -> f64 {
        match self {
            RadialCdf::Empirical { moduli } => {
                moduli.partition_point(|m| *m < r) as f64 / moduli.len() as f64
            }
            RadialCdf::Theoretical { f } => f(r),
        }
    }

    fn step_points(&self) -> Option<&[f64]> {
        match self {
            RadialCdf::Empirical { moduli } => Some(moduli),
            RadialCdf::Theoretical { .. } => None,
        }
    }
}

/// `sup_r |F(r) - G(r)|`.
///
/// The supremum is evaluated at every step point of each empirical argument
/// (from both sides of the jump) plus, when a continuous curve is involved, a
/// log-spaced refinement grid on `[10^-3, 10^3]`.
pub fn ks_distance(f: &RadialCdf, g: &RadialCdf) -> f64 {
    let mut sup = 0.0f64;
    let mut consider = |r: f64| {
        let d = (f.evaluate(r) - g.evaluate(r))
            .abs()
            .max((f.left_limit(r) - g.left_limit(r)).abs());
        if d > sup {
            sup = d;
        }
    };
    let mut any_steps = false;
    for side in [f, g] {
        if let Some(steps) = side.step_points() {
            any_steps = true;
            for &r in steps.iter() {
                consider(r);
            }
        }
    }
    let theoretical_involved =
        matches!(f, RadialCdf::Theoretical { .. }) || matches!(g, RadialCdf::Theoretical { .. });
    if theoretical_involved || !any_steps {
        let ratio = (GRID_HI / GRID_LO).ln() / (GRID_POINTS - 1) as f64;
        for i in 0..GRID_POINTS {
            consider(GRID_LO * (ratio * i as f64).exp());
        }
    }
    sup
}

/// Kuiper statistic of the angles (as fractions of the full turn) against
/// the uniform law on the circle: `D⁺ + D⁻` of the empirical CDF.
///
/// Small for uniform angle sets; invariant under global rotation.
pub fn angular_discrepancy(m: &EmpiricalMeasure) -> Result<f64> {
    if m.count() < 2 {
        return Err(Error::InvalidParameter(
            "angular discrepancy needs at least two points".into(),
        ));
    }
    let mut u: Vec<f64> = m.angles.iter().map(|a| a / TAU).collect();
    u.sort_by(|a, b| a.total_cmp(b));
    let n = u.len() as f64;
    let mut d_plus = 0.0f64;
    let mut d_minus = 0.0f64;
    for (i, &ui) in u.iter().enumerate() {
        d_plus = d_plus.max((i + 1) as f64 / n - ui);
        d_minus = d_minus.max(ui - i as f64 / n);
    }
    Ok(d_plus + d_minus)
}
