//! The four experiments. Each returns the command-specific part of the run
//! summary after writing its output file.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cone_orbits::actions::{energy_for_actions, frequencies_with, hamiltonian_from_actions, ActionData};
use cone_orbits::bertrand::{bertrand_scan, width_law_check, PowerLawFamily, Verdict};
use cone_orbits::dynamics::{bound_energy, detect_closure, integrate, periapsis_state, point_on_level};
use cone_orbits::symmetry::{global_z, verify_w_algebra, BracketReport};
use cone_orbits::{ConeError, Params, PhasePoint, PotentialSpec};
use log::{debug, info, warn};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, Start};
use crate::error::CliError;
use crate::output::{num, opt_num, write_csv, write_jsonl, write_records, Row};

/// Richardson agreement required to accept a differenced bracket.
const RICHARDSON_ACCEPT: f64 = 1e-6;

pub struct Target<'a> {
    pub path: &'a str,
    pub format: Format,
}

fn config_err(field: &str) -> impl Fn(ConeError) -> CliError + '_ {
    move |e| CliError::Config(format!("{field}: {e}"))
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    r: f64,
    phi: f64,
    p_r: f64,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "Z_re", skip_serializing_if = "Option::is_none")]
    z_re: Option<f64>,
    #[serde(rename = "Z_im", skip_serializing_if = "Option::is_none")]
    z_im: Option<f64>,
}

impl Row for Sample {
    fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["t", "r", "phi", "p_r", "J", "H"];
        if self.z_re.is_some() {
            h.extend(["Z_re", "Z_im"]);
        }
        h
    }

    fn cells(&self) -> Vec<String> {
        let mut c = vec![num(self.t), num(self.r), num(self.phi), num(self.p_r), num(self.j), num(self.h)];
        if let (Some(re), Some(im)) = (self.z_re, self.z_im) {
            c.extend([num(re), num(im)]);
        }
        c
    }
}

fn has_z(params: &Params) -> bool {
    params.potential.closed_family().is_some() && params.geometry.rational_form().is_some()
}

pub fn simulate(cfg: &RunConfig, out: &Target) -> Result<Value, CliError> {
    let params = cfg.params()?;
    let init = cfg
        .initial
        .as_ref()
        .ok_or_else(|| CliError::Config("initial: required by simulate".into()))?;
    let integ = cfg
        .integrator
        .ok_or_else(|| CliError::Config("integrator: required by simulate".into()))?;
    let start = match init.start()? {
        Start::Point(pt) => pt,
        Start::Level { e, j } => periapsis_state(&params, e, j).map_err(config_err("initial"))?,
    };
    let traj = integrate(&params, &start, integ.dt, integ.n_steps, integ.sample_every).map_err(|e| match e {
        ConeError::TipCollision { step, r } => {
            CliError::Dynamics(format!("tip collision at step {step} (r would become {r})"))
        }
        ConeError::InvalidParameter(m) => CliError::Config(format!("integrator: {m}")),
        other => CliError::Dynamics(other.to_string()),
    })?;
    info!("integrated {} steps, {} samples", integ.n_steps, traj.len());

    let with_z = has_z(&params);
    let samples: Vec<Sample> = traj
        .points
        .iter()
        .zip(&traj.times)
        .zip(&traj.series_h)
        .map(|((pt, &t), &h)| {
            let z = with_z.then(|| global_z(&params, pt).expect("closed family with rational s").value());
            Sample {
                t,
                r: pt.r(),
                phi: pt.phi(),
                p_r: pt.p_r(),
                j: pt.j(),
                h,
                z_re: z.map(|z| z.re),
                z_im: z.map(|z| z.im),
            }
        })
        .collect();
    write_records(out.path, out.format, &samples)?;

    let j_drift = traj.series_j.iter().map(|j| (j - start.j()).abs()).fold(0.0, f64::max);
    let z_drift = with_z.then(|| {
        let z0 = samples[0].z_re.unwrap().hypot(samples[0].z_im.unwrap());
        let (re0, im0) = (samples[0].z_re.unwrap(), samples[0].z_im.unwrap());
        samples
            .iter()
            .map(|s| (s.z_re.unwrap() - re0).hypot(s.z_im.unwrap() - im0))
            .fold(0.0, f64::max)
            / z0.max(1e-12)
    });
    let closure = if integ.detect_closure {
        Some(match detect_closure(&traj, integ.closure_tol) {
            Ok(Some(c)) => format!(
                "closed after {} radial periods (t = {}, mismatch {:.2e})",
                c.radial_periods, c.closure_time, c.mismatch
            ),
            Ok(None) => "no closure within the run".to_string(),
            Err(e) => format!("closure undefined: {e}"),
        })
    } else {
        None
    };
    if let Some(c) = &closure {
        info!("{c}");
    }
    Ok(json!({
        "samples": samples.len(),
        "max_relative_energy_drift": traj.max_relative_energy_drift(),
        "max_J_drift": j_drift,
        "max_relative_Z_drift": z_drift,
        "closure": closure,
    }))
}

#[derive(Serialize)]
struct CellRecord {
    family_param: f64,
    #[serde(rename = "E")]
    e: f64,
    lambda: f64,
    s_delta_phi: Option<f64>,
    status: String,
}

impl Row for CellRecord {
    fn header(&self) -> Vec<&'static str> {
        vec!["family_param", "E", "lambda", "s_delta_phi", "status"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.family_param),
            num(self.e),
            num(self.lambda),
            opt_num(self.s_delta_phi),
            self.status.clone(),
        ]
    }
}

pub fn bertrand(cfg: &RunConfig, out: &Target) -> Result<Value, CliError> {
    let base = cfg.params()?;
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("scan: required by bertrand".into()))?;
    if scan.exponents.is_empty() || scan.lambdas.is_empty() {
        return Err(CliError::Config("scan: exponent and lambda grids must be non-empty".into()));
    }
    let family = PowerLawFamily {
        strength: scan.strength,
        exponents: scan.exponents.clone(),
    };
    let reports = bertrand_scan(&family, &base, &scan.energies, &scan.lambdas, &cfg.quadrature);
    let records: Vec<CellRecord> = reports
        .iter()
        .flat_map(|r| {
            r.cells.iter().map(|c| CellRecord {
                family_param: r.exponent,
                e: c.energy,
                lambda: c.lambda,
                s_delta_phi: c.s_delta_phi,
                status: c.status.clone(),
            })
        })
        .collect();
    write_records(out.path, out.format, &records)?;

    for r in &reports {
        debug!("alpha = {}: flatness {:.3e}, verdict {:?}", r.exponent, r.flatness, r.verdict);
    }
    let width_law = match scan.log_potential {
        Some(log) => {
            let pot = PotentialSpec::Log { b: log.b, r0: log.r0 };
            let params = Params::new(base.mass, base.geometry, pot).map_err(config_err("scan.log_potential"))?;
            let fit = width_law_check(&params, log.j, scan.width_levels).map_err(config_err("scan.log_potential"))?;
            Some(json!({"b": log.b, "r0": log.r0, "max_residual": fit.max_residual, "a_fit": fit.a_fit}))
        }
        None => None,
    };
    if reports.iter().all(|r| r.feasible() == 0) {
        return Err(CliError::ScanInfeasible("every scan cell is infeasible".into()));
    }
    let passing: Vec<f64> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::ClosedOrbitCandidate)
        .map(|r| r.exponent)
        .collect();
    let members: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "exponent": r.exponent,
                "flatness": r.flatness,
                "mean_s_delta_phi": r.mean,
                "near_circular": r.near_circular,
                "feasible_cells": r.feasible(),
                "verdict": r.verdict,
            })
        })
        .collect();
    Ok(json!({
        "passing_exponents": passing,
        "members": members,
        "log_width_law": width_law,
    }))
}

#[derive(Serialize)]
struct ActionRecord {
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "J")]
    j: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    data: Option<ActionData>,
    #[serde(rename = "H_from_actions", skip_serializing_if = "Option::is_none")]
    h_from_actions: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    round_trip_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl Row for ActionRecord {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "E", "J", "I1", "I2", "omega1", "omega2", "ratio", "rational_p", "rational_q", "H_from_actions",
            "round_trip_error", "error",
        ]
    }

    fn cells(&self) -> Vec<String> {
        let d = self.data.as_ref();
        let rational = d.and_then(|d| d.rational_approx);
        vec![
            num(self.e),
            num(self.j),
            opt_num(d.map(|d| d.i1)),
            opt_num(d.map(|d| d.i2)),
            opt_num(d.map(|d| d.omega1)),
            opt_num(d.map(|d| d.omega2)),
            opt_num(d.map(|d| d.ratio)),
            rational.map(|r| r.p.to_string()).unwrap_or_default(),
            rational.map(|r| r.q.to_string()).unwrap_or_default(),
            opt_num(self.h_from_actions),
            opt_num(self.round_trip_error),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

pub fn actions(cfg: &RunConfig, out: &Target) -> Result<Value, CliError> {
    let params = cfg.params()?;
    if cfg.levels.is_empty() {
        return Err(CliError::Config("levels: actions needs at least one (E, J) level".into()));
    }
    let closed = params.potential.closed_family().is_some();
    let records: Vec<ActionRecord> = cfg
        .levels
        .par_iter()
        .map(|level| {
            let result = frequencies_with(&params, level.e, level.j, &cfg.quadrature, &cfg.rationality).and_then(|d| {
                let h = if closed {
                    hamiltonian_from_actions(&params, d.i1, d.i2)?
                } else {
                    energy_for_actions(&params, d.i1, d.i2, &cfg.quadrature)?
                };
                Ok((d, h))
            });
            match result {
                Ok((d, h)) => ActionRecord {
                    e: level.e,
                    j: level.j,
                    data: Some(d),
                    h_from_actions: Some(h),
                    round_trip_error: Some((h - level.e).abs() / level.e.abs().max(f64::MIN_POSITIVE)),
                    error: None,
                },
                Err(err) => ActionRecord {
                    e: level.e,
                    j: level.j,
                    data: None,
                    h_from_actions: None,
                    round_trip_error: None,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    write_records(out.path, out.format, &records)?;

    let ok = records.iter().filter(|r| r.data.is_some()).count();
    for r in records.iter().filter(|r| r.error.is_some()) {
        warn!("level E = {}, J = {}: {}", r.e, r.j, r.error.as_deref().unwrap_or(""));
    }
    if ok == 0 {
        return Err(CliError::Dynamics("no level produced action data".into()));
    }
    let per_level: Vec<Value> = records
        .iter()
        .map(|r| match &r.data {
            Some(d) => json!({
                "E": r.e,
                "J": r.j,
                "ratio": d.ratio,
                "rational": d.rational_approx.map(|a| format!("{}/{}", a.p, a.q)),
                "round_trip_error": r.round_trip_error,
            }),
            None => json!({"E": r.e, "J": r.j, "error": r.error}),
        })
        .collect();
    Ok(json!({"succeeded": ok, "failed": records.len() - ok, "levels": per_level}))
}

#[derive(Serialize)]
struct PointReport {
    index: usize,
    point: PhasePoint,
    report: BracketReport,
}

/// CSV form of a bracket report: one row per entry.
#[derive(Serialize)]
struct EntryRow {
    point: usize,
    bracket: String,
    value_re: f64,
    value_im: f64,
    expected_re: f64,
    expected_im: f64,
    abs_err: f64,
    rel_err: f64,
    h: f64,
}

impl Row for EntryRow {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "point", "bracket", "value_re", "value_im", "expected_re", "expected_im", "abs_err", "rel_err", "h",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.point.to_string(),
            self.bracket.clone(),
            num(self.value_re),
            num(self.value_im),
            num(self.expected_re),
            num(self.expected_im),
            num(self.abs_err),
            num(self.rel_err),
            num(self.h),
        ]
    }
}

/// Random bound points: `λ = |J|/s ∈ [0.5, 1.5]`, energy between 5% and
/// 90% of the sampling range, uniform radius between the turning points.
fn sample_points(params: &Params, count: usize, seed: u64) -> Result<Vec<PhasePoint>, ConeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let j = sign * rng.gen_range(0.5..1.5) * params.s();
            let e = bound_energy(params, j, rng.gen_range(0.05..0.9))?;
            point_on_level(params, e, j, rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI), rng.gen_bool(0.5))
        })
        .collect()
}

pub fn verify_algebra(cfg: &RunConfig, seed: u64, out: &Target) -> Result<Value, CliError> {
    let params = cfg.params()?;
    if params.potential.closed_family().is_none() {
        return Err(CliError::Config(
            "params.potential: verify-algebra needs the Kepler or oscillator potential".into(),
        ));
    }
    if params.geometry.rational_form().is_none() {
        return Err(CliError::IrrationalScale(format!(
            "s = {} has no rational form k/n: C = (A - iB)e^(i s phi) is not single-valued, \
             no power Z = C^n is, and the brackets of H, J, Z, Zbar are undefined",
            params.s()
        )));
    }
    let algebra = cfg.algebra.unwrap_or_default();
    let points = sample_points(&params, algebra.points, seed).map_err(|e| CliError::Dynamics(e.to_string()))?;
    let reports: Vec<PointReport> = points
        .par_iter()
        .enumerate()
        .map(|(index, pt)| {
            verify_w_algebra(&params, pt, algebra.h).map(|report| PointReport {
                index,
                point: *pt,
                report,
            })
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Dynamics(e.to_string()))?;

    match out.format {
        Format::Jsonl => write_jsonl(out.path, &reports)?,
        Format::Csv => {
            let rows: Vec<EntryRow> = reports
                .iter()
                .flat_map(|p| {
                    p.report.entries.iter().map(move |e| EntryRow {
                        point: p.index,
                        bracket: e.bracket.clone(),
                        value_re: e.value_re,
                        value_im: e.value_im,
                        expected_re: e.expected_re,
                        expected_im: e.expected_im,
                        abs_err: e.abs_err,
                        rel_err: e.rel_err,
                        h: e.h,
                    })
                })
                .collect();
            write_csv(out.path, &rows)?;
        }
    }

    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    let mut disagreement = 0.0f64;
    for p in &reports {
        for e in &p.report.entries {
            match worst.iter_mut().find(|(name, _)| *name == e.bracket) {
                Some((_, w)) => *w = w.max(e.rel_err),
                None => worst.push((e.bracket.clone(), e.rel_err)),
            }
        }
        let verdict = serde_json::to_value(p.report.z_zbar_match).expect("plain enum");
        *tally.entry(verdict.as_str().unwrap_or_default().to_string()).or_default() += 1;
        disagreement = disagreement.max(p.report.richardson_disagreement);
    }
    let ratio = params.geometry.rational_form().expect("checked");
    Ok(json!({
        "k": ratio.k,
        "n": ratio.n,
        "points": reports.len(),
        "h": algebra.h,
        "worst_relative_error": worst.into_iter().map(|(n, w)| json!({"bracket": n, "rel_err": w})).collect::<Vec<_>>(),
        "z_zbar_match": tally,
        "max_richardson_disagreement": disagreement,
        "richardson_accepted": disagreement < RICHARDSON_ACCEPT,
    }))
}
