//! Reduced radial dynamics: energy, effective potential, turning points,
//! the split-step leapfrog and orbit-closure detection.
//!
//! The flow is integrated in `(r, p_r)` with `J` held fixed and the polar
//! angle reconstructed from `φ̇ = J/(m s² r²)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};
use crate::phase::{wrap_angle, Params, PhasePoint};
use crate::potential::PotentialSpec;
use crate::roots::{brent, minimum_brackets};

/// Radial range scanned for the effective-potential minimum.
pub const MINIMUM_SCAN_RANGE: (f64, f64) = (1e-6, 1e6);
const MINIMUM_SCAN_POINTS: usize = 1201;
const ROOT_REL_TOL: f64 = 1e-14;

/// `H = p_r²/2m + J²/(2ms²r²) + V(r)`.
pub fn energy(params: &Params, pt: &PhasePoint) -> f64 {
    let m = params.mass;
    pt.p_r * pt.p_r / (2.0 * m) + centrifugal(params, pt.j, pt.r) + params.potential.v(m, pt.r)
}

fn centrifugal(params: &Params, j: f64, r: f64) -> f64 {
    let s = params.s();
    j * j / (2.0 * params.mass * s * s * r * r)
}

/// `U_eff(r) = J²/(2ms²r²) + V(r)`.
pub fn effective_potential(params: &Params, j: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(ConeError::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(u_eff(params, j, r))
}

pub(crate) fn u_eff(params: &Params, j: f64, r: f64) -> f64 {
    centrifugal(params, j, r) + params.potential.v(params.mass, r)
}

/// `dU_eff/dr = −J²/(ms²r³) + V′(r)`.
pub(crate) fn u_eff_d1(params: &Params, j: f64, r: f64) -> f64 {
    let s = params.s();
    -j * j / (params.mass * s * s * r * r * r) + params.potential.dv(params.mass, r)
}

/// Location and value of the unique minimum of `U_eff` for the given `J`.
pub fn effective_minimum(params: &Params, j: f64) -> Result<(f64, f64)> {
    let (from, to) = MINIMUM_SCAN_RANGE;
    let brackets = minimum_brackets(|r| u_eff_d1(params, j, r), from, to, MINIMUM_SCAN_POINTS);
    match brackets.as_slice() {
        [] => Err(ConeError::Structural(format!(
            "effective potential has no minimum in r ∈ [{from:e}, {to:e}] for J = {j}"
        ))),
        [(lo, hi)] => {
            let rc = brent(|r| u_eff_d1(params, j, r), *lo, *hi, ROOT_REL_TOL)?;
            Ok((rc, u_eff(params, j, rc)))
        }
        many => Err(ConeError::NonUniqueMinimum { count: many.len() }),
    }
}

/// Perigee and apogee radii of a bound level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub r_min: f64,
    pub r_max: f64,
}

impl TurningPoints {
    pub fn is_circular(&self) -> bool {
        self.r_max - self.r_min <= 1e-12 * self.r_max
    }
}

/// Roots of `U_eff(r) = E` on either side of the minimum.
pub fn turning_points(params: &Params, e: f64, j: f64) -> Result<TurningPoints> {
    if !e.is_finite() {
        return Err(ConeError::InvalidParameter(format!("energy must be finite, got {e}")));
    }
    let (rc, u0) = effective_minimum(params, j)?;
    let slack = 1e-12 * (u0.abs().max(e.abs())) + f64::MIN_POSITIVE;
    if e < u0 - slack {
        return Err(ConeError::Forbidden { energy: e, minimum: u0 });
    }
    if e <= u0 + slack {
        return Ok(TurningPoints { r_min: rc, r_max: rc });
    }
    if let Some(v_inf) = params.potential.value_at_infinity() {
        if e >= v_inf {
            return Err(ConeError::Unbounded(format!(
                "E = {e} is at or above the asymptotic potential {v_inf}"
            )));
        }
    }
    let g = |r: f64| u_eff(params, j, r) - e;

    let mut lo = 0.5 * rc;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-280 {
            return Err(ConeError::Unbounded(format!(
                "no inner turning point: the orbit reaches the tip (J = {j})"
            )));
        }
    }
    let mut hi = 2.0 * rc;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e280 || !hi.is_finite() {
            return Err(ConeError::Unbounded(format!(
                "no outer turning point for E = {e}"
            )));
        }
    }
    let r_min = brent(g, lo, rc, ROOT_REL_TOL)?;
    let r_max = brent(g, rc, hi, ROOT_REL_TOL)?;
    Ok(TurningPoints { r_min, r_max })
}

/// Highest energy used when sampling bound levels above the well bottom
/// `u0`: `u0 + 10|u0|` (`u0 + 10` when `u0 = 0`), capped at 90% of the way to
/// the escape energy when `V` has a finite limit at infinity.
pub fn energy_ceiling(potential: &PotentialSpec, u0: f64) -> f64 {
    let default = if u0 == 0.0 { u0 + 10.0 } else { u0 + 10.0 * u0.abs() };
    match potential.value_at_infinity() {
        Some(v_inf) => default.min(u0 + 0.9 * (v_inf - u0)),
        None => default,
    }
}

/// Outer radius, in units of the circular radius, bounding sampled levels.
pub const SAMPLING_RADIUS_FACTOR: f64 = 10.0;

/// Energy a fraction `ε ∈ [0, 1]` of the way from the well bottom to the
/// lower of [`energy_ceiling`] and `U_eff(10 r_c)`. The second cap keeps
/// levels of slowly growing potentials from reaching astronomical radii.
pub fn bound_energy(params: &Params, j: f64, fraction: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(ConeError::InvalidParameter(format!(
            "energy fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let (rc, u0) = effective_minimum(params, j)?;
    let top = energy_ceiling(&params.potential, u0).min(u_eff(params, j, SAMPLING_RADIUS_FACTOR * rc));
    Ok(u0 + fraction * (top - u0))
}

/// Phase point on the `(E, J)` orbit at radius `r_min + u (r_max − r_min)`,
/// `u ∈ [0, 1]`, moving outward or inward.
pub fn point_on_level(params: &Params, e: f64, j: f64, u: f64, phi: f64, outward: bool) -> Result<PhasePoint> {
    let tp = turning_points(params, e, j)?;
    let r = tp.r_min + u.clamp(0.0, 1.0) * (tp.r_max - tp.r_min);
    let kinetic = (e - u_eff(params, j, r)).max(0.0);
    let p = (2.0 * params.mass * kinetic).sqrt();
    PhasePoint::new(r, phi, if outward { p } else { -p }, j)
}

/// State at the inner turning point of the `(E, J)` orbit, with `φ = 0`.
pub fn periapsis_state(params: &Params, e: f64, j: f64) -> Result<PhasePoint> {
    let tp = turning_points(params, e, j)?;
    PhasePoint::new(tp.r_min, 0.0, 0.0, j)
}

/// One leapfrog step; returns the new `(r, p_r)` and the unwrapped angle increment.
fn advance(params: &Params, r: f64, p_r: f64, j: f64, dt: f64) -> Option<(f64, f64, f64)> {
    let m = params.mass;
    let s = params.s();
    let p_half = p_r - 0.5 * dt * u_eff_d1(params, j, r);
    let r_mid = r + 0.5 * dt * p_half / m;
    let r_new = r + dt * p_half / m;
    if !(r_new > 0.0 && r_mid > 0.0) {
        return None;
    }
    let dphi = dt * j / (m * s * s * r_mid * r_mid);
    let p_new = p_half - 0.5 * dt * u_eff_d1(params, j, r_new);
    Some((r_new, p_new, dphi))
}

/// One Strang-split step: half kick, drift (with midpoint angle advance), half kick.
pub fn step(params: &Params, pt: &PhasePoint, dt: f64) -> Result<PhasePoint> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(ConeError::InvalidParameter(format!("dt must be non-zero and finite, got {dt}")));
    }
    let (r, p_r, dphi) = advance(params, pt.r, pt.p_r, pt.j, dt).ok_or(ConeError::TipCollision {
        step: 0,
        r: pt.r + dt * pt.p_r / params.mass,
    })?;
    Ok(PhasePoint {
        r,
        phi: wrap_angle(pt.phi + dphi),
        p_r,
        j: pt.j,
    })
}

/// Sampled solution of the reduced flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    pub dt: f64,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub phi_unwrapped: Vec<f64>,
    pub series_h: Vec<f64>,
    pub series_j: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|H(t) − H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub fn max_relative_energy_drift(&self) -> f64 {
        let h0 = self.series_h[0];
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.series_h
            .iter()
            .map(|h| (h - h0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Runs `n_steps` leapfrog steps, recording every `sample_every`-th state
/// (the initial state is always sample 0).
pub fn integrate(
    params: &Params,
    pt0: &PhasePoint,
    dt: f64,
    n_steps: usize,
    sample_every: usize,
) -> Result<Trajectory> {
    if n_steps == 0 || sample_every == 0 {
        return Err(ConeError::InvalidParameter(
            "n_steps and sample_every must be at least 1".into(),
        ));
    }
    if dt == 0.0 || !dt.is_finite() {
        return Err(ConeError::InvalidParameter(format!("dt must be non-zero and finite, got {dt}")));
    }
    let capacity = n_steps / sample_every + 1;
    let mut traj = Trajectory {
        params: *params,
        dt,
        times: Vec::with_capacity(capacity),
        points: Vec::with_capacity(capacity),
        phi_unwrapped: Vec::with_capacity(capacity),
        series_h: Vec::with_capacity(capacity),
        series_j: Vec::with_capacity(capacity),
    };
    let j = pt0.j;
    let (mut r, mut p_r, mut phi) = (pt0.r, pt0.p_r, pt0.phi);
    let record = |traj: &mut Trajectory, i: usize, r: f64, p_r: f64, phi: f64| {
        let pt = PhasePoint {
            r,
            phi: wrap_angle(phi),
            p_r,
            j,
        };
        traj.times.push(i as f64 * dt);
        traj.series_h.push(energy(params, &pt));
        traj.series_j.push(pt.j);
        traj.points.push(pt);
        traj.phi_unwrapped.push(phi);
    };
    record(&mut traj, 0, r, p_r, phi);
    for i in 1..=n_steps {
        let (r_new, p_new, dphi) = advance(params, r, p_r, j, dt).ok_or(ConeError::TipCollision {
            step: i,
            r: r + dt * p_r / params.mass,
        })?;
        r = r_new;
        p_r = p_new;
        phi += dphi;
        if i % sample_every == 0 {
            record(&mut traj, i, r, p_r, phi);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApsisKind {
    Periapsis,
    Apoapsis,
}

/// A turning-point passage located on a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Apsis {
    pub kind: ApsisKind,
    pub t: f64,
    pub r: f64,
    pub phi_unwrapped: f64,
}

/// Sign changes of `p_r` along the samples, interpolated quadratically.
/// `p_r` going from negative to positive marks a periapsis.
pub fn apsides(traj: &Trajectory) -> Vec<Apsis> {
    let n = traj.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for i in 0..n - 1 {
        let (a, b) = (traj.points[i].p_r, traj.points[i + 1].p_r);
        let kind = if a < 0.0 && b >= 0.0 {
            ApsisKind::Periapsis
        } else if a > 0.0 && b <= 0.0 {
            ApsisKind::Apoapsis
        } else {
            continue;
        };
        let direction = if kind == ApsisKind::Periapsis { 1.0 } else { -1.0 };
        let c = interpolate_crossing(traj, i, a * direction, b * direction, &|m| traj.points[m].p_r, direction);
        out.push(Apsis {
            kind,
            t: c.t,
            r: c.r,
            phi_unwrapped: c.phi,
        });
    }
    out
}

/// First return of an orbit to its initial phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub closure_time: f64,
    pub radial_periods: usize,
    /// Amplitude-normalized distance of the return point from the start.
    pub mismatch: f64,
}

/// Default closure tolerance in amplitude-normalized phase-space distance.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-6;

/// Crossing of the Poincaré section fixed at the initial state.
#[derive(Debug, Clone, Copy)]
struct SectionCrossing {
    t: f64,
    r: f64,
    p_r: f64,
    phi: f64,
}

/// Quadratic Lagrange interpolation through three samples at `t`.
fn lagrange3(ts: [f64; 3], ys: [f64; 3], t: f64) -> f64 {
    let [t0, t1, t2] = ts;
    let l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    ys[0] * l0 + ys[1] * l1 + ys[2] * l2
}

/// Returns of `(r, p_r)` to the starting values with the unwrapped angle
/// advanced by a multiple of `2π`. Each radial period is one crossing of a
/// section through the initial point; at each crossing the state is
/// interpolated quadratically and compared with the start, coordinates
/// scaled by the orbit's radial and momentum amplitudes and the angle by `2π`.
pub fn detect_closure(traj: &Trajectory, tol: f64) -> Result<Option<Closure>> {
    let n = traj.len();
    if n < 4 {
        return Err(ConeError::InvalidParameter(
            "trajectory too short for closure detection".into(),
        ));
    }
    let p0 = traj.points[0];
    if p0.j == 0.0 {
        return Err(ConeError::InvalidParameter(
            "closure detection needs J ≠ 0".into(),
        ));
    }
    let (r_lo, r_hi) = traj
        .points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.r), hi.max(p.r)));
    let r_mid = 0.5 * (r_lo + r_hi);
    let amp_r = 0.5 * (r_hi - r_lo);
    let amp_p = traj.points.iter().map(|p| p.p_r.abs()).fold(0.0, f64::max);
    if amp_r <= 1e-12 * r_mid || amp_p == 0.0 {
        return Err(ConeError::Degenerate(
            "circular orbit: radial periods are undefined".into(),
        ));
    }

    // Section through the start: p_r = p_r0 near a turning point, r = r0 elsewhere.
    let u0 = (p0.r - r_mid) / amp_r;
    let v0 = p0.p_r / amp_p;
    let use_momentum = v0.abs() < u0.abs();
    let sigma = |i: usize| -> f64 {
        let p = &traj.points[i];
        if use_momentum {
            p.p_r - p0.p_r
        } else {
            p.r - p0.r
        }
    };
    let direction = if use_momentum {
        // p_r increases near the inner turning point
        if u0 < 0.0 { 1.0 } else { -1.0 }
    } else if p0.p_r >= 0.0 {
        1.0
    } else {
        -1.0
    };

    let mut periods = 0;
    let mut i = 1;
    // skip samples sitting on the section at the start
    while i < n && sigma(i) * direction <= 0.0 && sigma(i).abs() == 0.0 {
        i += 1;
    }
    while i + 1 < n {
        let (a, b) = (sigma(i) * direction, sigma(i + 1) * direction);
        if a < 0.0 && b >= 0.0 {
            periods += 1;
            let crossing = interpolate_crossing(traj, i, a, b, &sigma, direction);
            let dr = (crossing.r - p0.r) / amp_r;
            let dp = (crossing.p_r - p0.p_r) / amp_p;
            let turns = (crossing.phi - traj.phi_unwrapped[0]) / TAU;
            let dphi = turns - turns.round();
            let mismatch = (dr * dr + dp * dp + dphi * dphi).sqrt();
            if mismatch < tol && turns.round() != 0.0 {
                return Ok(Some(Closure {
                    closure_time: crossing.t - traj.times[0],
                    radial_periods: periods,
                    mismatch,
                }));
            }
        }
        i += 1;
    }
    Ok(None)
}

fn interpolate_crossing<S: Fn(usize) -> f64>(
    traj: &Trajectory,
    i: usize,
    a: f64,
    b: f64,
    sigma: &S,
    direction: f64,
) -> SectionCrossing {
    let t_lin = traj.times[i] + (traj.times[i + 1] - traj.times[i]) * a / (a - b);
    let n = traj.len();
    // three-sample stencil containing the bracket
    let k = if i + 2 < n { i } else { i - 1 };
    let ts = [traj.times[k], traj.times[k + 1], traj.times[k + 2]];
    let pick = |f: &dyn Fn(usize) -> f64| [f(k), f(k + 1), f(k + 2)];
    let sig = pick(&|m| sigma(m) * direction);
    // polish the linear estimate on the quadratic interpolant
    let mut t = t_lin;
    for _ in 0..3 {
        let h = 1e-3 * (ts[2] - ts[0]);
        let f = lagrange3(ts, sig, t);
        let df = (lagrange3(ts, sig, t + h) - lagrange3(ts, sig, t - h)) / (2.0 * h);
        if df == 0.0 {
            break;
        }
        let next = t - f / df;
        if !(next >= traj.times[i] && next <= traj.times[i + 1]) {
            break;
        }
        t = next;
    }
    let r = lagrange3(ts, pick(&|m| traj.points[m].r), t);
    let p_r = lagrange3(ts, pick(&|m| traj.points[m].p_r), t);
    let phi = lagrange3(ts, pick(&|m| traj.phi_unwrapped[m]), t);
    SectionCrossing { t, r, p_r, phi }
}
