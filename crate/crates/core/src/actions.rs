//! Action variables, closed-form `H(I)` for the Kepler and oscillator
//! cases, frequencies and the rational frequency ratio that predicts orbit
//! closure.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bertrand::{
    apsidal_angle_with, radial_period_with, radial_quadrature, small_oscillation_freq, RadialIntegrand,
};
use crate::dynamics::{effective_minimum, turning_points};
use crate::error::{ConeError, Result};
use crate::phase::Params;
use crate::potential::PotentialSpec;
use crate::quadrature::QuadratureOptions;
use crate::rational::{rational_approximation, RationalApprox};
use crate::roots::brent;

/// Actions, frequencies and frequency ratio on one `(E, J)` torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionData {
    pub energy: f64,
    /// `I₁ = J` (signed).
    #[serde(rename = "I1")]
    pub i1: f64,
    /// Radial action `I₂ = (1/2π)∮ p_r dr ≥ 0`.
    #[serde(rename = "I2")]
    pub i2: f64,
    /// Angular frequency, signed like `J`.
    pub omega1: f64,
    /// Radial frequency `2π/T`.
    pub omega2: f64,
    pub ratio: f64,
    pub rational_approx: Option<RationalApprox>,
}

/// Thresholds that operationalize "the frequency ratio is rational".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RationalityOptions {
    pub q_max: u64,
    pub tolerance: f64,
}

impl Default for RationalityOptions {
    fn default() -> Self {
        Self {
            q_max: 64,
            tolerance: 1e-9,
        }
    }
}

/// `I₂ = (1/π) ∫ √(2m(E − U_eff)) dr` between the turning points.
pub fn action_i2(params: &Params, e: f64, j: f64) -> Result<f64> {
    action_i2_with(params, e, j, &QuadratureOptions::default())
}

pub fn action_i2_with(params: &Params, e: f64, j: f64, opts: &QuadratureOptions) -> Result<f64> {
    let tp = turning_points(params, e, j)?;
    if tp.is_circular() {
        return Ok(0.0);
    }
    Ok(radial_quadrature(params, j, &tp, RadialIntegrand::Action, opts)?.value / PI)
}

/// Closed-form energy as a function of the actions:
/// Kepler `−mκ²/(2(|I₁|/s + I₂)²)`, oscillator `ω(|I₁|/s + 2I₂)`.
pub fn hamiltonian_from_actions(params: &Params, i1: f64, i2: f64) -> Result<f64> {
    if !(i2 >= 0.0) {
        return Err(ConeError::InvalidParameter(format!("radial action must be ≥ 0, got {i2}")));
    }
    let s = params.s();
    match params.potential {
        PotentialSpec::Kepler { kappa } => {
            let n = i1.abs() / s + i2;
            if n == 0.0 {
                return Err(ConeError::Domain("Kepler H(I) is singular at I₁ = I₂ = 0".into()));
            }
            Ok(-params.mass * kappa * kappa / (2.0 * n * n))
        }
        PotentialSpec::Oscillator { omega } => Ok(omega * (i1.abs() / s + 2.0 * i2)),
        other => Err(ConeError::Structural(format!(
            "no closed-form H(I) for {other:?}"
        ))),
    }
}

/// Energy of the torus with actions `(J, I₂)`, found by inverting
/// [`action_i2`] numerically. Works for any potential with a bound well.
pub fn energy_for_actions(params: &Params, j: f64, i2: f64, opts: &QuadratureOptions) -> Result<f64> {
    if !(i2 >= 0.0) {
        return Err(ConeError::InvalidParameter(format!("radial action must be ≥ 0, got {i2}")));
    }
    let (_, u0) = effective_minimum(params, j)?;
    if i2 == 0.0 {
        return Ok(u0);
    }
    let limit = params.potential.value_at_infinity();
    let mut width = u0.abs().max(1.0);
    let mut hi = u0 + width;
    if let Some(v) = limit {
        hi = hi.min(u0 + 0.5 * (v - u0));
    }
    let residual = |e: f64| action_i2_with(params, e, j, opts).map(|a| a - i2).unwrap_or(f64::NAN);
    let mut tries = 0;
    while residual(hi) < 0.0 {
        tries += 1;
        if tries > 200 {
            return Err(ConeError::RootNotFound(format!("no torus with I₂ = {i2}")));
        }
        hi = match limit {
            Some(v) => hi + 0.5 * (v - hi),
            None => {
                width *= 2.0;
                u0 + width
            }
        };
    }
    brent(
        |e| if e <= u0 { -i2 } else { residual(e) },
        u0,
        hi,
        1e-14,
    )
}

/// Frequencies from the quadratures: `ω₂ = 2π/T`, `ω₁ = ω₂ Δφ/π` (the
/// angle advances `2Δφ` per radial period), and the ratio `ω₁/ω₂` with its
/// continued-fraction approximation. Circular levels use the
/// small-oscillation limit.
pub fn frequencies(params: &Params, e: f64, j: f64) -> Result<ActionData> {
    frequencies_with(params, e, j, &QuadratureOptions::default(), &RationalityOptions::default())
}

pub fn frequencies_with(
    params: &Params,
    e: f64,
    j: f64,
    quad: &QuadratureOptions,
    rational: &RationalityOptions,
) -> Result<ActionData> {
    if j == 0.0 {
        return Err(ConeError::InvalidParameter("frequencies need J ≠ 0".into()));
    }
    let tp = turning_points(params, e, j)?;
    let sign = j.signum();
    let (i2, omega2, ratio) = if tp.is_circular() {
        let small = small_oscillation_freq(params, j)?;
        (0.0, small.radial_frequency, sign * small.apsidal_limit / PI)
    } else {
        let period = radial_period_with(params, e, j, quad)?;
        let apsidal = apsidal_angle_with(params, e, j, quad)?;
        let i2 = radial_quadrature(params, j, &tp, RadialIntegrand::Action, quad)?.value / PI;
        (i2, 2.0 * PI / period, sign * apsidal.delta_phi / PI)
    };
    Ok(ActionData {
        energy: e,
        i1: j,
        i2,
        omega1: ratio * omega2,
        omega2,
        ratio,
        rational_approx: rational_approximation(ratio, rational.q_max, rational.tolerance),
    })
}

/// Winding numbers of a closed orbit: the angle makes `n1` turns while the
/// radius completes `n2` periods. `None` when the frequency ratio is not
/// accepted as rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingNumbers {
    pub n1: u64,
    pub n2: u64,
}

pub fn predict_closure(params: &Params, e: f64, j: f64) -> Result<Option<WindingNumbers>> {
    predict_closure_with(params, e, j, &QuadratureOptions::default(), &RationalityOptions::default())
}

pub fn predict_closure_with(
    params: &Params,
    e: f64,
    j: f64,
    quad: &QuadratureOptions,
    rational: &RationalityOptions,
) -> Result<Option<WindingNumbers>> {
    let data = frequencies_with(params, e, j, quad, rational)?;
    Ok(data.rational_approx.map(|r| WindingNumbers {
        n1: r.p.unsigned_abs(),
        n2: r.q,
    }))
}
