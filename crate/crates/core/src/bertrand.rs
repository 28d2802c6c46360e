//! Apsidal angle and radial period by quadrature, the near-circular
//! analysis, the width law of the effective well, and the exponent scan that
//! isolates the potentials with energy-independent apsidal angle.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{effective_minimum, energy_ceiling, turning_points, TurningPoints};
use crate::error::{ConeError, Result};
use crate::phase::Params;
use crate::potential::PotentialSpec;
use crate::quadrature::{integrate_refined, QuadratureEstimate, QuadratureOptions};

/// What is integrated against the radial motion between the turning points.
#[derive(Debug, Clone, Copy)]
pub(crate) enum RadialIntegrand {
    /// `∫ (λ/mr²) dr / √((2/m)(E − U))`, equal to `s·Δφ`.
    Angle,
    /// `∫ dr / √((2/m)(E − U))`, half the radial period.
    HalfPeriod,
    /// `∫ √(2m(E − U)) dr`, `π` times the radial action.
    Action,
}

/// Integral over `[r_min, r_max]` with `r = r̄ + ρ cos θ`, which turns the
/// inverse-square-root endpoint singularities into a smooth integrand in `θ`.
pub(crate) fn radial_quadrature(
    params: &Params,
    j: f64,
    tp: &TurningPoints,
    integrand: RadialIntegrand,
    opts: &QuadratureOptions,
) -> Result<QuadratureEstimate> {
    let m = params.mass;
    let lambda = j.abs() / params.s();
    let half = 0.5 * (tp.r_max - tp.r_min);
    let f = |theta: f64| {
        let sin = theta.sin();
        // offset from the nearer turning point, free of cancellation
        let (r_a, d) = if theta <= 0.5 * PI {
            let h = (0.5 * theta).sin();
            (tp.r_max, -2.0 * half * h * h)
        } else {
            let h = (0.5 * theta).cos();
            (tp.r_min, 2.0 * half * h * h)
        };
        let r = r_a + d;
        let kinetic = kinetic_drop(params, j, r_a, d).max(0.0);
        let jac = half * sin;
        match integrand {
            RadialIntegrand::Angle => {
                if kinetic == 0.0 {
                    return 0.0;
                }
                lambda / (m * r * r) * jac / (2.0 * kinetic / m).sqrt()
            }
            RadialIntegrand::HalfPeriod => {
                if kinetic == 0.0 {
                    return 0.0;
                }
                jac / (2.0 * kinetic / m).sqrt()
            }
            RadialIntegrand::Action => (2.0 * m * kinetic).sqrt() * jac,
        }
    };
    integrate_refined(f, 0.0, PI, opts)
}

/// `U_eff(r_a) − U_eff(r_a + d)`; equals `E − U_eff(r)` when `r_a` is a turning point.
fn kinetic_drop(params: &Params, j: f64, r_a: f64, d: f64) -> f64 {
    let s = params.s();
    let c = j * j / (2.0 * params.mass * s * s);
    let r = r_a + d;
    c * d * (2.0 * r_a + d) / (r_a * r_a * r * r) + params.potential.drop(params.mass, r_a, d)
}

fn bounded_noncircular(params: &Params, e: f64, j: f64) -> Result<TurningPoints> {
    let tp = turning_points(params, e, j)?;
    if tp.is_circular() {
        return Err(ConeError::Degenerate(format!(
            "E = {e} is the circular-orbit energy for J = {j}; use small_oscillation_freq"
        )));
    }
    Ok(tp)
}

/// Perigee-to-apogee angle `Δφ` of a bound orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApsidalResult {
    pub delta_phi: f64,
    /// `λ = J/s`
    pub lambda: f64,
    pub energy: f64,
    pub quadrature_error_estimate: f64,
}

pub fn apsidal_angle(params: &Params, e: f64, j: f64) -> Result<ApsidalResult> {
    apsidal_angle_with(params, e, j, &QuadratureOptions::default())
}

pub fn apsidal_angle_with(params: &Params, e: f64, j: f64, opts: &QuadratureOptions) -> Result<ApsidalResult> {
    if j == 0.0 {
        return Err(ConeError::InvalidParameter("apsidal angle needs J ≠ 0".into()));
    }
    let tp = bounded_noncircular(params, e, j)?;
    let est = radial_quadrature(params, j, &tp, RadialIntegrand::Angle, opts)?;
    Ok(ApsidalResult {
        delta_phi: est.value / params.s(),
        lambda: j / params.s(),
        energy: e,
        quadrature_error_estimate: est.relative_change,
    })
}

/// Full radial period `T` (perigee to perigee).
pub fn radial_period(params: &Params, e: f64, j: f64) -> Result<f64> {
    radial_period_with(params, e, j, &QuadratureOptions::default())
}

pub fn radial_period_with(params: &Params, e: f64, j: f64, opts: &QuadratureOptions) -> Result<f64> {
    let tp = bounded_noncircular(params, e, j)?;
    Ok(2.0 * radial_quadrature(params, j, &tp, RadialIntegrand::HalfPeriod, opts)?.value)
}

/// Radius and energy of the circular orbit with angular momentum `J`.
pub fn circular_orbit(params: &Params, j: f64) -> Result<(f64, f64)> {
    if j == 0.0 {
        return Err(ConeError::InvalidParameter("circular orbit needs J ≠ 0".into()));
    }
    effective_minimum(params, j)
}

/// Harmonic approximation about the circular orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallOscillation {
    /// Dimensionless `ω² = 3 + r V″/V′` at the circular radius.
    pub omega_sq: f64,
    /// Near-circular apsidal angle `π / (s √ω²)`.
    pub apsidal_limit: f64,
    /// Physical radial angular frequency `√(U_eff″(r_c)/m)`.
    pub radial_frequency: f64,
    pub r_c: f64,
}

pub fn small_oscillation_freq(params: &Params, j: f64) -> Result<SmallOscillation> {
    let (r_c, _) = circular_orbit(params, j)?;
    let m = params.mass;
    let d1 = params.potential.dv(m, r_c);
    let d2 = params.potential.d2v(m, r_c);
    if d1 == 0.0 {
        return Err(ConeError::Degenerate(format!("V′ vanishes at r_c = {r_c}")));
    }
    let omega_sq = 3.0 + r_c * d2 / d1;
    if !(omega_sq > 0.0) {
        return Err(ConeError::Degenerate(format!(
            "non-positive curvature ω² = {omega_sq} at the circular orbit"
        )));
    }
    Ok(SmallOscillation {
        omega_sq,
        apsidal_limit: PI / (params.s() * omega_sq.sqrt()),
        radial_frequency: (d1 / (m * r_c) * omega_sq).sqrt(),
        r_c,
    })
}

/// Fit of the well width against `a √(U − U₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthLawFit {
    pub a_fit: f64,
    pub max_residual: f64,
    pub u0: f64,
    pub u_cap: f64,
}

/// Samples `n_levels` energies above the well bottom of `U(x; λ) = m x²/2 +
/// V(λ/mx)`, measures the width `x₂ − x₁` at each and fits `a √(U − U₀)` by
/// least squares. Returns the coefficient and the largest relative residual.
///
/// The turning points in `x = λ/(mr)` are the images of the radial turning
/// points. Levels stop at `U₀ + 10|U₀|` (`U₀ + 10` when `U₀ = 0`), or at 90%
/// of the way to the escape energy when the potential has a finite limit at
/// infinity.
pub fn width_law_check(params: &Params, j: f64, n_levels: usize) -> Result<WidthLawFit> {
    if j == 0.0 {
        return Err(ConeError::InvalidParameter("width law needs J ≠ 0".into()));
    }
    if n_levels < 2 {
        return Err(ConeError::InvalidParameter("width law needs at least two levels".into()));
    }
    let (_, u0) = effective_minimum(params, j)?;
    let u_cap = energy_ceiling(&params.potential, u0);
    let scale = j.abs() / params.s() / params.mass;

    let mut samples = Vec::with_capacity(n_levels);
    for i in 1..=n_levels {
        let level = u0 + (u_cap - u0) * i as f64 / n_levels as f64;
        let tp = turning_points(params, level, j)?;
        let width = scale * (1.0 / tp.r_min - 1.0 / tp.r_max);
        samples.push(((level - u0).sqrt(), width));
    }
    let num: f64 = samples.iter().map(|(root, w)| root * w).sum();
    let den: f64 = samples.iter().map(|(root, _)| root * root).sum();
    let a_fit = num / den;
    let max_residual = samples
        .iter()
        .map(|(root, w)| (w - a_fit * root).abs() / w.abs())
        .fold(0.0, f64::max);
    Ok(WidthLawFit {
        a_fit,
        max_residual,
        u0,
        u_cap,
    })
}

/// Energies of a scan grid, either absolute or as fractions `ε ∈ (0, 1)` of
/// the bound range `[U₀, ceiling]` for each `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyGrid {
    Absolute(Vec<f64>),
    Relative(Vec<f64>),
}

impl EnergyGrid {
    fn len(&self) -> usize {
        match self {
            EnergyGrid::Absolute(v) | EnergyGrid::Relative(v) => v.len(),
        }
    }
}

/// Power laws `A r^α` with `A = strength·sign(α)`, so every member is attractive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFamily {
    pub strength: f64,
    pub exponents: Vec<f64>,
}

impl PowerLawFamily {
    pub fn member(&self, alpha: f64) -> PotentialSpec {
        PotentialSpec::PowerLaw {
            a: self.strength * alpha.signum(),
            alpha,
        }
    }
}

/// Flatness below which a family member counts as having a constant apsidal angle.
pub const FLATNESS_PASS: f64 = 1e-6;
/// Flatness above which the apsidal angle is declared energy dependent.
pub const FLATNESS_FAIL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ClosedOrbitCandidate,
    NotClosed,
    Inconclusive,
    NoFeasibleCells,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub energy: f64,
    pub lambda: f64,
    pub s_delta_phi: Option<f64>,
    /// `"ok"` or the reason the cell was skipped.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub family: String,
    pub exponent: f64,
    pub cells: Vec<ScanCell>,
    pub flatness: f64,
    pub mean: f64,
    /// `π/√(α+2)`, the near-circular value of `s·Δφ`.
    pub near_circular: f64,
    pub verdict: Verdict,
}

impl ScanReport {
    pub fn feasible(&self) -> usize {
        self.cells.iter().filter(|c| c.s_delta_phi.is_some()).count()
    }
}

/// Evaluates `s·Δφ` over the `(E, λ)` grid for each exponent and classifies
/// each family member by how flat the result is.
pub fn bertrand_scan(
    family: &PowerLawFamily,
    base: &Params,
    energies: &EnergyGrid,
    lambdas: &[f64],
    opts: &QuadratureOptions,
) -> Vec<ScanReport> {
    family
        .exponents
        .iter()
        .map(|&alpha| scan_member(family, alpha, base, energies, lambdas, opts))
        .collect()
}

fn scan_member(
    family: &PowerLawFamily,
    alpha: f64,
    base: &Params,
    energies: &EnergyGrid,
    lambdas: &[f64],
    opts: &QuadratureOptions,
) -> ScanReport {
    let potential = family.member(alpha);
    let label = format!("power_law(alpha={alpha})");
    let params = match Params::new(base.mass, base.geometry, potential) {
        Ok(p) => p,
        Err(e) => {
            return ScanReport {
                family: label,
                exponent: alpha,
                cells: vec![ScanCell {
                    energy: f64::NAN,
                    lambda: f64::NAN,
                    s_delta_phi: None,
                    status: format!("invalid: {e}"),
                }],
                flatness: f64::NAN,
                mean: f64::NAN,
                near_circular: f64::NAN,
                verdict: Verdict::NoFeasibleCells,
            }
        }
    };
    let s = params.s();
    let grid: Vec<(usize, f64)> = lambdas
        .iter()
        .flat_map(|&l| (0..energies.len()).map(move |i| (i, l)))
        .collect();
    let cells: Vec<ScanCell> = grid
        .par_iter()
        .map(|&(i, lambda)| {
            let j = lambda * s;
            let energy = match energies {
                EnergyGrid::Absolute(v) => Ok(v[i]),
                EnergyGrid::Relative(v) => effective_minimum(&params, j)
                    .map(|(_, u0)| u0 + v[i] * (energy_ceiling(&params.potential, u0) - u0)),
            };
            let result = energy.and_then(|e| apsidal_angle_with(&params, e, j, opts).map(|a| (e, a)));
            match result {
                Ok((e, a)) => ScanCell {
                    energy: e,
                    lambda,
                    s_delta_phi: Some(s * a.delta_phi),
                    status: "ok".into(),
                },
                Err(err) => ScanCell {
                    energy: match energies {
                        EnergyGrid::Absolute(v) => v[i],
                        EnergyGrid::Relative(_) => f64::NAN,
                    },
                    lambda,
                    s_delta_phi: None,
                    status: format!("infeasible: {err}"),
                },
            }
        })
        .collect();

    let values: Vec<f64> = cells.iter().filter_map(|c| c.s_delta_phi).collect();
    let near_circular = PI / (alpha + 2.0).sqrt();
    if values.is_empty() {
        return ScanReport {
            family: label,
            exponent: alpha,
            cells,
            flatness: f64::NAN,
            mean: f64::NAN,
            near_circular,
            verdict: Verdict::NoFeasibleCells,
        };
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let flatness = max - min;
    let verdict = if flatness < FLATNESS_PASS && (mean - near_circular).abs() < FLATNESS_PASS {
        Verdict::ClosedOrbitCandidate
    } else if flatness > FLATNESS_FAIL {
        Verdict::NotClosed
    } else {
        Verdict::Inconclusive
    };
    ScanReport {
        family: label,
        exponent: alpha,
        cells,
        flatness,
        mean,
        near_circular,
        verdict,
    }
}
