//! Canonical phase-space points, the Cartesian chart of the unrolled cone,
//! and the bundled system parameters.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};
use crate::geometry::ConeGeometry;
use crate::potential::PotentialSpec;

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can return exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Canonical state `(r, φ, p_r, J)` of the reduced system. `J` is the
/// signed momentum conjugate to the rescaled angle, `J = m r² s² φ̇`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhasePointRepr")]
pub struct PhasePoint {
    pub(crate) r: f64,
    pub(crate) phi: f64,
    pub(crate) p_r: f64,
    #[serde(rename = "J")]
    pub(crate) j: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhasePointRepr {
    r: f64,
    phi: f64,
    p_r: f64,
    #[serde(rename = "J")]
    j: f64,
}

impl TryFrom<PhasePointRepr> for PhasePoint {
    type Error = ConeError;

    fn try_from(p: PhasePointRepr) -> Result<Self> {
        PhasePoint::new(p.r, p.phi, p.p_r, p.j)
    }
}

impl PhasePoint {
    /// Builds a point, reducing `phi` to `[0, 2π)`. The tip `r = 0` is excluded.
    pub fn new(r: f64, phi: f64, p_r: f64, j: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(ConeError::Domain(format!("r must be positive, got {r}")));
        }
        if !(phi.is_finite() && p_r.is_finite() && j.is_finite()) {
            return Err(ConeError::Domain(format!(
                "non-finite phase coordinates (phi={phi}, p_r={p_r}, J={j})"
            )));
        }
        Ok(Self {
            r,
            phi: wrap_angle(phi),
            p_r,
            j,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn p_r(&self) -> f64 {
        self.p_r
    }

    pub fn j(&self) -> f64 {
        self.j
    }
}

/// Point in the flat chart `x = r(cos φ, sin φ)` with conjugate momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Positions from the polar angle; momenta are the unique pair with
/// `x·p = r p_r` and `x × p = J`.
pub fn to_cartesian(pt: &PhasePoint) -> CartesianPoint {
    let (sin, cos) = pt.phi.sin_cos();
    let p_t = pt.j / pt.r;
    CartesianPoint {
        x1: pt.r * cos,
        x2: pt.r * sin,
        p1: pt.p_r * cos - p_t * sin,
        p2: pt.p_r * sin + p_t * cos,
    }
}

pub fn from_cartesian(c: &CartesianPoint) -> Result<PhasePoint> {
    let r = c.x1.hypot(c.x2);
    if !(r > 0.0) {
        return Err(ConeError::Domain("the tip r = 0 has no polar chart".into()));
    }
    let p_r = (c.x1 * c.p1 + c.x2 * c.p2) / r;
    let j = c.x1 * c.p2 - c.x2 * c.p1;
    PhasePoint::new(r, c.x2.atan2(c.x1), p_r, j)
}

/// Mass, cone geometry and potential: everything that defines `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr")]
pub struct Params {
    pub mass: f64,
    pub geometry: ConeGeometry,
    pub potential: PotentialSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    mass: f64,
    geometry: ConeGeometry,
    potential: PotentialSpec,
}

impl TryFrom<ParamsRepr> for Params {
    type Error = ConeError;

    fn try_from(p: ParamsRepr) -> Result<Self> {
        Params::new(p.mass, p.geometry, p.potential)
    }
}

impl Params {
    pub fn new(mass: f64, geometry: ConeGeometry, potential: PotentialSpec) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ConeError::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        potential.validate()?;
        Ok(Self {
            mass,
            geometry,
            potential,
        })
    }

    pub fn s(&self) -> f64 {
        self.geometry.s()
    }

    /// Same mass and potential on a different cone.
    pub fn with_geometry(&self, geometry: ConeGeometry) -> Self {
        Self { geometry, ..*self }
    }
}
