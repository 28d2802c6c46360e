//! Central potentials `V(r)` and their radial derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};

/// A central potential. The oscillator is parametrized by its angular
/// frequency; the spring constant `β = mω²` needs the particle mass, so all
/// evaluations take `mass` explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = −κ/r`
    Kepler { kappa: f64 },
    /// `V = mω²r²/2`
    Oscillator { omega: f64 },
    /// `V = A r^α`, `α > −2` (`A = 0` is the free particle)
    PowerLaw { a: f64, alpha: f64 },
    /// `V = B ln(r/r₀)`
    Log { b: f64, r0: f64 },
}

/// Which of the two superintegrable families a potential belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFamily {
    Kepler,
    Oscillator,
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(ConeError::Domain(format!("radius must be positive, got {r}")))
    }
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PotentialSpec::Kepler { kappa } => kappa.is_finite() && kappa > 0.0,
            PotentialSpec::Oscillator { omega } => omega.is_finite() && omega > 0.0,
            PotentialSpec::PowerLaw { a, alpha } => {
                a.is_finite() && alpha.is_finite() && alpha > -2.0
            }
            PotentialSpec::Log { b, r0 } => b.is_finite() && b > 0.0 && r0.is_finite() && r0 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ConeError::InvalidParameter(format!(
                "potential coefficients out of range: {self:?}"
            )))
        }
    }

    /// The equivalent power law `A r^α`, where one exists.
    /// Kepler maps to `(−κ, −1)` and the oscillator to `(mω²/2, 2)`.
    pub fn to_power_law(&self, mass: f64) -> Option<PotentialSpec> {
        match *self {
            PotentialSpec::Kepler { kappa } => Some(PotentialSpec::PowerLaw {
                a: -kappa,
                alpha: -1.0,
            }),
            PotentialSpec::Oscillator { omega } => Some(PotentialSpec::PowerLaw {
                a: 0.5 * mass * omega * omega,
                alpha: 2.0,
            }),
            p @ PotentialSpec::PowerLaw { .. } => Some(p),
            PotentialSpec::Log { .. } => None,
        }
    }

    pub fn closed_family(&self) -> Option<ClosedFamily> {
        match self {
            PotentialSpec::Kepler { .. } => Some(ClosedFamily::Kepler),
            PotentialSpec::Oscillator { .. } => Some(ClosedFamily::Oscillator),
            _ => None,
        }
    }

    /// Power-law exponent governing the near-circular analysis
    /// (`None` for the logarithm).
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Kepler { .. } => Some(-1.0),
            PotentialSpec::Oscillator { .. } => Some(2.0),
            PotentialSpec::PowerLaw { alpha, .. } => Some(alpha),
            PotentialSpec::Log { .. } => None,
        }
    }

    /// Limit of `V(r)` as `r → ∞` when it is finite.
    pub fn value_at_infinity(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Kepler { .. } => Some(0.0),
            PotentialSpec::PowerLaw { alpha, .. } if alpha < 0.0 => Some(0.0),
            _ => None,
        }
    }

    pub(crate) fn v(&self, mass: f64, r: f64) -> f64 {
        match *self {
            PotentialSpec::Kepler { kappa } => -kappa / r,
            PotentialSpec::Oscillator { omega } => 0.5 * mass * omega * omega * r * r,
            PotentialSpec::PowerLaw { a, alpha } => a * r.powf(alpha),
            PotentialSpec::Log { b, r0 } => b * (r / r0).ln(),
        }
    }

    /// `V(r_a) − V(r_a + d)` without cancellation for small `d`.
    pub(crate) fn drop(&self, mass: f64, r_a: f64, d: f64) -> f64 {
        let r = r_a + d;
        match *self {
            PotentialSpec::Kepler { kappa } => -kappa * d / (r_a * r),
            PotentialSpec::Oscillator { omega } => -0.5 * mass * omega * omega * d * (2.0 * r_a + d),
            PotentialSpec::PowerLaw { a, alpha } => {
                -a * r_a.powf(alpha) * (alpha * (d / r_a).ln_1p()).exp_m1()
            }
            PotentialSpec::Log { b, .. } => -b * (d / r_a).ln_1p(),
        }
    }

    pub(crate) fn dv(&self, mass: f64, r: f64) -> f64 {
        match *self {
            PotentialSpec::Kepler { kappa } => kappa / (r * r),
            PotentialSpec::Oscillator { omega } => mass * omega * omega * r,
            PotentialSpec::PowerLaw { a, alpha } => a * alpha * r.powf(alpha - 1.0),
            PotentialSpec::Log { b, .. } => b / r,
        }
    }

    pub(crate) fn d2v(&self, mass: f64, r: f64) -> f64 {
        match *self {
            PotentialSpec::Kepler { kappa } => -2.0 * kappa / (r * r * r),
            PotentialSpec::Oscillator { omega } => mass * omega * omega,
            PotentialSpec::PowerLaw { a, alpha } => a * alpha * (alpha - 1.0) * r.powf(alpha - 2.0),
            PotentialSpec::Log { b, .. } => -b / (r * r),
        }
    }
}

/// `V(r)`.
pub fn potential_value(pot: &PotentialSpec, mass: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(pot.v(mass, r))
}

/// `V′(r)`.
pub fn potential_d1(pot: &PotentialSpec, mass: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(pot.dv(mass, r))
}

/// `V″(r)`.
pub fn potential_d2(pot: &PotentialSpec, mass: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(pot.d2v(mass, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn direct_values() {
        let kep = PotentialSpec::Kepler { kappa: 1.0 };
        assert_eq!(potential_value(&kep, 1.0, 2.0).unwrap(), -0.5);
        let osc = PotentialSpec::Oscillator { omega: 1.0 };
        assert_eq!(potential_value(&osc, 1.0, 2.0).unwrap(), 2.0);
        let log = PotentialSpec::Log { b: 1.0, r0: 1.0 };
        assert!((potential_value(&log, 1.0, E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_positive_radius_is_domain_error() {
        let kep = PotentialSpec::Kepler { kappa: 1.0 };
        for r in [0.0, -1.0, f64::NAN] {
            assert!(matches!(potential_value(&kep, 1.0, r), Err(ConeError::Domain(_))));
            assert!(potential_d1(&kep, 1.0, r).is_err());
            assert!(potential_d2(&kep, 1.0, r).is_err());
        }
    }

    #[test]
    fn validation() {
        assert!(PotentialSpec::PowerLaw { a: 1.0, alpha: -2.0 }.validate().is_err());
        assert!(PotentialSpec::PowerLaw { a: f64::NAN, alpha: 1.0 }.validate().is_err());
        assert!(PotentialSpec::PowerLaw { a: 0.0, alpha: 1.0 }.validate().is_ok());
        assert!(PotentialSpec::Kepler { kappa: -1.0 }.validate().is_err());
        assert!(PotentialSpec::Log { b: 1.0, r0: 0.0 }.validate().is_err());
        assert!(PotentialSpec::PowerLaw { a: -1.0, alpha: -1.5 }.validate().is_ok());
    }

    #[test]
    fn closed_forms_map_to_power_laws() {
        let m = 1.7;
        assert_eq!(
            PotentialSpec::Kepler { kappa: 2.0 }.to_power_law(m),
            Some(PotentialSpec::PowerLaw { a: -2.0, alpha: -1.0 })
        );
        assert_eq!(
            PotentialSpec::Oscillator { omega: 3.0 }.to_power_law(m),
            Some(PotentialSpec::PowerLaw { a: 0.5 * m * 9.0, alpha: 2.0 })
        );
        assert_eq!(PotentialSpec::Log { b: 1.0, r0: 1.0 }.to_power_law(m), None);
    }

    #[test]
    fn drop_matches_direct_difference() {
        let pots = [
            PotentialSpec::Kepler { kappa: 1.3 },
            PotentialSpec::Oscillator { omega: 0.7 },
            PotentialSpec::PowerLaw { a: -2.0, alpha: -0.5 },
            PotentialSpec::PowerLaw { a: 1.5, alpha: 3.0 },
            PotentialSpec::Log { b: 0.4, r0: 2.0 },
        ];
        for pot in pots {
            for (r_a, d) in [(1.0, 0.3), (2.5, -1.2), (0.7, 1e-3)] {
                let direct = pot.v(1.1, r_a) - pot.v(1.1, r_a + d);
                let got = pot.drop(1.1, r_a, d);
                assert!((got - direct).abs() < 1e-13 * (1.0 + direct.abs()), "{pot:?}");
            }
        }
    }

    #[test]
    fn serde_tagging() {
        let json = r#"{"kind":"power_law","a":-1.0,"alpha":-0.5}"#;
        let p: PotentialSpec = serde_json::from_str(json).unwrap();
        assert_eq!(p, PotentialSpec::PowerLaw { a: -1.0, alpha: -0.5 });
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"kepler","kappa":1,"x":2}"#).is_err());
    }
}
