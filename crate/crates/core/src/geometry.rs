//! Cone geometry: the scale factor `s` relating the cone's angular range
//! `2πs` to the full turn of the rescaled polar angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};

/// Reduced rational form `k/n` of the scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub k: u32,
    pub n: u32,
}

/// The single geometric parameter of the system.
///
/// `s = 1` is the plane; `0 < s < 1` is a cone with deficit angle
/// `2π(1 − s)`. Values `s > 1` (excess angle) are accepted and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryRepr")]
pub struct ConeGeometry {
    s: f64,
    rational: Option<Ratio>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryRepr {
    s: f64,
    rational: Option<Ratio>,
}

impl TryFrom<GeometryRepr> for ConeGeometry {
    type Error = ConeError;

    fn try_from(repr: GeometryRepr) -> Result<Self> {
        match repr.rational {
            Some(Ratio { k, n }) => {
                let g = ConeGeometry::rational(k, n)?;
                if g.s != repr.s {
                    return Err(ConeError::InvalidParameter(format!(
                        "s = {} disagrees with rational form {k}/{n}",
                        repr.s
                    )));
                }
                Ok(g)
            }
            None => ConeGeometry::new(repr.s),
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl ConeGeometry {
    /// A cone with a real scale factor and no rational form.
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(ConeError::InvalidParameter(format!(
                "scale factor must be finite and positive, got {s}"
            )));
        }
        Ok(Self { s, rational: None })
    }

    /// A cone with `s = k/n`, `gcd(k, n) = 1`. The float value is computed
    /// from the pair.
    pub fn rational(k: u32, n: u32) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(ConeError::InvalidParameter(format!(
                "rational scale factor needs positive k and n, got {k}/{n}"
            )));
        }
        if gcd(k as u64, n as u64) != 1 {
            return Err(ConeError::InvalidParameter(format!(
                "rational scale factor {k}/{n} is not in lowest terms"
            )));
        }
        Ok(Self {
            s: k as f64 / n as f64,
            rational: Some(Ratio { k, n }),
        })
    }

    /// The plane, `s = 1/1`.
    pub fn plane() -> Self {
        Self {
            s: 1.0,
            rational: Some(Ratio { k: 1, n: 1 }),
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rational_form(&self) -> Option<Ratio> {
        self.rational
    }

    /// True when `s` is a positive integer (known exactly from the rational form).
    pub fn is_integer(&self) -> bool {
        matches!(self.rational, Some(Ratio { n: 1, .. }))
    }

    /// `s > 1`: an excess-angle cone. Formulas stay defined but the
    /// configuration does not correspond to a cut-and-glued plane.
    pub fn is_excess_angle(&self) -> bool {
        self.s > 1.0
    }

    /// Deficit angle `δ = 2π(1 − s)`; negative for excess-angle cones.
    pub fn deficit_angle(&self) -> f64 {
        2.0 * PI * (1.0 - self.s)
    }

    /// Half-opening angle `α = arcsin(s)`, defined only for `s ≤ 1`.
    pub fn half_angle(&self) -> Option<f64> {
        (self.s <= 1.0).then(|| self.s.asin())
    }
}
