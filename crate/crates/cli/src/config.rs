//! The JSON run configuration. One document describes a whole experiment;
//! unknown keys are rejected everywhere.

use std::path::Path;

use cone_orbits::actions::RationalityOptions;
use cone_orbits::bertrand::EnergyGrid;
use cone_orbits::dynamics::DEFAULT_CLOSURE_TOL;
use cone_orbits::quadrature::QuadratureOptions;
use cone_orbits::symmetry::DEFAULT_BRACKET_STEP;
use cone_orbits::{ConeGeometry, Params, PhasePoint, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub quadrature: QuadratureOptions,
    #[serde(default)]
    pub rationality: RationalityOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "unit_mass")]
    pub mass: f64,
    pub geometry: GeometryConfig,
    pub potential: PotentialSpec,
}

fn unit_mass() -> f64 {
    1.0
}

/// `{"s": 0.75}` or the exact `{"k": 3, "n": 4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GeometryConfig {
    Rational { k: u32, n: u32 },
    Scale { s: f64 },
}

/// Either a full phase point (`r`, `p_r`, `J`, optional `phi`) or a level
/// (`E`, `J`) started at its inner turning point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_r: Option<f64>,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub sample_every: usize,
    #[serde(default)]
    pub detect_closure: bool,
    #[serde(default = "closure_tol")]
    pub closure_tol: f64,
}

fn one() -> usize {
    1
}

fn closure_tol() -> f64 {
    DEFAULT_CLOSURE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub exponents: Vec<f64>,
    #[serde(default = "unit_mass")]
    pub strength: f64,
    pub energies: EnergyGrid,
    pub lambdas: Vec<f64>,
    /// Also run the width-law test on this log potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_potential: Option<LogPotential>,
    #[serde(default = "width_levels")]
    pub width_levels: usize,
}

fn width_levels() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogPotential {
    pub b: f64,
    pub r0: f64,
    #[serde(rename = "J", default = "unit_mass")]
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    #[serde(default = "hundred")]
    pub points: usize,
    #[serde(default = "bracket_step")]
    pub h: f64,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            points: hundred(),
            h: bracket_step(),
        }
    }
}

fn hundred() -> usize {
    100
}

fn bracket_step() -> f64 {
    DEFAULT_BRACKET_STEP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.params()?;
        if let Some(init) = &cfg.initial {
            init.check()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn params(&self) -> Result<Params, CliError> {
        let p = &self.params;
        let geometry = match p.geometry {
            GeometryConfig::Rational { k, n } => ConeGeometry::rational(k, n),
            GeometryConfig::Scale { s } => ConeGeometry::new(s),
        }
        .map_err(|e| CliError::Config(format!("params.geometry: {e}")))?;
        p.potential
            .validate()
            .map_err(|e| CliError::Config(format!("params.potential: {e}")))?;
        Params::new(p.mass, geometry, p.potential).map_err(|e| CliError::Config(format!("params: {e}")))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Where the run starts.
pub enum Start {
    Point(PhasePoint),
    Level { e: f64, j: f64 },
}

impl InitialConfig {
    fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("initial.{field}: {msg}")));
        match (self.r, self.p_r, self.e) {
            (Some(r), Some(_), None) => {
                if !(r > 0.0 && r.is_finite()) {
                    return bad("r", format!("must be positive, got {r}"));
                }
            }
            (None, None, Some(e)) => {
                if !e.is_finite() {
                    return bad("E", format!("must be finite, got {e}"));
                }
                if self.phi.is_some() {
                    return bad("phi", "a level start begins at periapsis with phi = 0".into());
                }
            }
            _ => return bad("", "give either r and p_r (phi optional) or E alone, with J".into()),
        }
        if !self.j.is_finite() {
            return bad("J", format!("must be finite, got {}", self.j));
        }
        Ok(())
    }

    pub fn start(&self) -> Result<Start, CliError> {
        self.check()?;
        match (self.r, self.p_r, self.e) {
            (Some(r), Some(p_r), None) => PhasePoint::new(r, self.phi.unwrap_or(0.0), p_r, self.j)
                .map(Start::Point)
                .map_err(|e| CliError::Config(format!("initial: {e}"))),
            (_, _, Some(e)) => Ok(Start::Level { e, j: self.j }),
            _ => unreachable!("checked above"),
        }
    }
}
