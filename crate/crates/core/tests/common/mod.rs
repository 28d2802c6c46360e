#![allow(dead_code)]

use cone_orbits::dynamics::{bound_energy, point_on_level};
use cone_orbits::{ConeGeometry, Params, PhasePoint, PotentialSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Reduced scale factors `k/n` exercised throughout.
pub const RATIONAL_S: [(u32, u32); 4] = [(1, 1), (1, 2), (2, 3), (3, 4)];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn kepler(geometry: ConeGeometry) -> Params {
    Params::new(1.0, geometry, PotentialSpec::Kepler { kappa: 1.0 }).unwrap()
}

pub fn oscillator(geometry: ConeGeometry) -> Params {
    Params::new(1.0, geometry, PotentialSpec::Oscillator { omega: 1.0 }).unwrap()
}

pub fn rational(k: u32, n: u32) -> ConeGeometry {
    ConeGeometry::rational(k, n).unwrap()
}

/// Both closed families at every rational scale factor.
pub fn closed_systems() -> Vec<(String, Params)> {
    let mut out = Vec::new();
    for (k, n) in RATIONAL_S {
        out.push((format!("kepler s={k}/{n}"), kepler(rational(k, n))));
        out.push((format!("oscillator s={k}/{n}"), oscillator(rational(k, n))));
    }
    out
}

/// Random bound level: `|J| ∈ [0.5, 1.5]` with random sign, energy a
/// fraction in `[lo, hi]` of the way up the well.
pub fn random_level(rng: &mut impl Rng, params: &Params, lo: f64, hi: f64) -> (f64, f64) {
    let j = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let e = bound_energy(params, j, rng.gen_range(lo..hi)).unwrap();
    (e, j)
}

/// Random non-circular bound phase point.
pub fn random_point(rng: &mut impl Rng, params: &Params) -> PhasePoint {
    let (e, j) = random_level(rng, params, 0.05, 0.9);
    point_on_level(
        params,
        e,
        j,
        rng.gen_range(0.0..1.0),
        rng.gen_range(-PI..PI),
        rng.gen_bool(0.5),
    )
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Apsidal angle and radial period read off an integrated trajectory that
/// starts at periapsis: `Δφ` from the first apoapsis to the next periapsis,
/// `T` between the periapses at `T` and `2T`.
pub fn measured_orbit(params: &Params, e: f64, j: f64, steps_per_period: usize) -> (f64, f64) {
    use cone_orbits::bertrand::radial_period;
    use cone_orbits::dynamics::{apsides, integrate, periapsis_state, ApsisKind};
    let period = radial_period(params, e, j).unwrap();
    let dt = period / steps_per_period as f64;
    let start = periapsis_state(params, e, j).unwrap();
    let n = (2.3 * steps_per_period as f64) as usize;
    let traj = integrate(params, &start, dt, n, 1).unwrap();
    let marks = apsides(&traj);
    let apo = marks.iter().find(|a| a.kind == ApsisKind::Apoapsis).unwrap();
    let peris: Vec<_> = marks.iter().filter(|a| a.kind == ApsisKind::Periapsis).collect();
    assert!(peris.len() >= 2, "expected two periapsis passages");
    let dphi = (peris[0].phi_unwrapped - apo.phi_unwrapped).abs();
    (dphi, peris[1].t - peris[0].t)
}
