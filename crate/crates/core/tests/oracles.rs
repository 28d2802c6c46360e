//! Cross-checks of each numerical result against an independent route to
//! the same quantity.

mod common;

use common::*;
use cone_orbits::actions::{action_i2, energy_for_actions, frequencies, predict_closure};
use cone_orbits::bertrand::{apsidal_angle, radial_period, small_oscillation_freq};
use cone_orbits::dynamics::{
    bound_energy, detect_closure, effective_minimum, energy, integrate, periapsis_state, point_on_level,
    DEFAULT_CLOSURE_TOL,
};
use cone_orbits::quadrature::QuadratureOptions;
use cone_orbits::symmetry::{global_z, poisson_bracket, verify_w_algebra, DEFAULT_BRACKET_STEP};
use cone_orbits::{ConeGeometry, Params, PhasePoint, PotentialSpec};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[test]
fn kepler_period_from_semi_major_axis() {
    // E = −1/8 with m = κ = 1: a = κ/2|E| = 4 and T = 2π√(ma³/κ) = 16π
    for (k, n) in RATIONAL_S {
        for lambda in [0.5, 1.0, 1.5] {
            let j = lambda * k as f64 / n as f64;
            let t = radial_period(&kepler(rational(k, n)), -0.125, j).unwrap();
            assert!(rel(t, 16.0 * PI) < 1e-10, "s={k}/{n} J={j}: {t}");
        }
    }
}

#[test]
fn oscillator_period_is_half_the_plane_period() {
    let mut rng = rng(11);
    for (k, n) in RATIONAL_S {
        let p = oscillator(rational(k, n));
        let (e, j) = random_level(&mut rng, &p, 0.05, 0.9);
        assert!(rel(radial_period(&p, e, j).unwrap(), PI) < 1e-10);
    }
}

#[test]
fn quadrature_matches_trajectory_apsides_and_period() {
    let mut rng = rng(2024);
    for case in 0..20 {
        let (k, n) = RATIONAL_S[rng.gen_range(0..RATIONAL_S.len())];
        let p = if case % 2 == 0 { kepler(rational(k, n)) } else { oscillator(rational(k, n)) };
        let (e, j) = random_level(&mut rng, &p, 0.05, 0.9);
        let quad = apsidal_angle(&p, e, j).unwrap().delta_phi;
        let period = radial_period(&p, e, j).unwrap();
        let (dphi, t) = measured_orbit(&p, e, j, 100_000);
        assert!((dphi - quad).abs() < 1e-6, "case {case}: {dphi} vs {quad}");
        assert!(rel(t, period) < 1e-6, "case {case}: {t} vs {period}");
    }
}

#[test]
fn non_closed_potentials_match_trajectory_too() {
    let pots = [
        PotentialSpec::PowerLaw { a: 1.0, alpha: 0.5 },
        PotentialSpec::PowerLaw { a: -1.0, alpha: -0.5 },
        PotentialSpec::Log { b: 1.0, r0: 1.0 },
    ];
    for pot in pots {
        let p = Params::new(1.0, ConeGeometry::new(0.8).unwrap(), pot).unwrap();
        let e = bound_energy(&p, 1.0, 0.4).unwrap();
        let quad = apsidal_angle(&p, e, 1.0).unwrap().delta_phi;
        let (dphi, t) = measured_orbit(&p, e, 1.0, 100_000);
        assert!((dphi - quad).abs() < 1e-6, "{pot:?}");
        assert!(rel(t, radial_period(&p, e, 1.0).unwrap()) < 1e-6, "{pot:?}");
    }
}

fn drift_and_slope(params: &Params, pt: &PhasePoint, dt: f64, steps: usize) -> (f64, f64, f64, f64) {
    let traj = integrate(params, pt, dt, steps, 1).unwrap();
    let h0 = traj.series_h[0];
    let dev: Vec<f64> = traj.series_h.iter().map(|h| (h - h0).abs() / h0.abs()).collect();
    let n = dev.len() as f64;
    let mt = traj.times.iter().sum::<f64>() / n;
    let my = dev.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in traj.times.iter().zip(&dev) {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    let half = dev.len() / 2;
    let first = dev[..half].iter().cloned().fold(0.0, f64::max);
    let second = dev[half..].iter().cloned().fold(0.0, f64::max);
    (traj.max_relative_energy_drift(), sxy / sxx, first, second)
}

fn symplectic_samples() -> Vec<(Params, PhasePoint)> {
    let mut rng = rng(5);
    (0..10)
        .map(|i| {
            let (k, n) = RATIONAL_S[rng.gen_range(0..RATIONAL_S.len())];
            let p = if i % 2 == 0 { kepler(rational(k, n)) } else { oscillator(rational(k, n)) };
            let pt = random_point(&mut rng, &p);
            (p, pt)
        })
        .collect()
}

/// Energy error at the fixed step `dt = 1e-3` over 10⁵ steps, with the
/// thresholds `1e-7` for the drift and `1e-12` per unit time for the fitted
/// slope. Leapfrog error scales as `(dt/τ)²` with `τ` the periapsis time
/// scale, so eccentric orbits exceed both.
#[test]
fn energy_error_at_fixed_step() {
    let mut worst = (0.0f64, 0.0f64);
    for (p, pt) in symplectic_samples() {
        let (drift, slope, _, _) = drift_and_slope(&p, &pt, 1e-3, 100_000);
        worst = (worst.0.max(drift), worst.1.max(slope.abs()));
    }
    println!("max drift {:.3e}, max |slope| {:.3e}", worst.0, worst.1);
    assert!(worst.0 < 1e-7, "max relative drift {:.3e}", worst.0);
    assert!(worst.1 < 1e-12, "max |slope| {:.3e}", worst.1);
}

#[test]
fn energy_error_is_bounded_and_second_order() {
    // twenty radial periods at 2000 and 4000 steps per period
    for (p, pt) in symplectic_samples() {
        let period = radial_period(&p, energy(&p, &pt), pt.j()).unwrap();
        let dt = period / 2000.0;
        let (coarse, slope, first, second) = drift_and_slope(&p, &pt, dt, 40_000);
        let (fine, _, _, _) = drift_and_slope(&p, &pt, 0.5 * dt, 80_000);
        // no growth between the two halves of the run
        assert!(second < 1.25 * first, "first half {first:.3e}, second half {second:.3e}");
        // a secular trend would explain a sizable share of the amplitude
        assert!(slope.abs() * 20.0 * period < 0.1 * coarse, "slope {slope:.3e} vs drift {coarse:.3e}");
        let order = (coarse / fine).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }
}

#[test]
fn energy_derivative_along_actions_is_radial_frequency() {
    let opts = QuadratureOptions::default();
    let pots = [
        PotentialSpec::Kepler { kappa: 1.0 },
        PotentialSpec::Oscillator { omega: 1.0 },
        PotentialSpec::PowerLaw { a: 1.0, alpha: 0.5 },
        PotentialSpec::Log { b: 1.0, r0: 1.0 },
    ];
    for pot in pots {
        for s in [1.0, 0.5, 0.77] {
            let p = Params::new(1.0, ConeGeometry::new(s).unwrap(), pot).unwrap();
            let e = bound_energy(&p, 0.8, 0.3).unwrap();
            let data = frequencies(&p, e, 0.8).unwrap();
            let d = 1e-4 * data.i2;
            let up = energy_for_actions(&p, 0.8, data.i2 + d, &opts).unwrap();
            let down = energy_for_actions(&p, 0.8, data.i2 - d, &opts).unwrap();
            let fd = (up - down) / (2.0 * d);
            assert!(rel(fd, data.omega2) < 1e-5, "{pot:?} s={s}: {fd} vs {}", data.omega2);
        }
    }
}

#[test]
fn period_times_radial_frequency_is_two_pi() {
    let mut rng = rng(3);
    for (name, p) in closed_systems() {
        let (e, j) = random_level(&mut rng, &p, 0.05, 0.9);
        let product = radial_period(&p, e, j).unwrap() * frequencies(&p, e, j).unwrap().omega2;
        assert!(rel(product, 2.0 * PI) < 1e-12, "{name}");
    }
}

#[test]
fn frequency_ratio_is_constant_on_closed_families() {
    let mut rng = rng(4);
    for s in [1.0, 0.5, 2.0 / 3.0, 0.75, 0.77] {
        for kepler_like in [true, false] {
            let g = ConeGeometry::new(s).unwrap();
            let p = if kepler_like { kepler(g) } else { oscillator(g) };
            let ratios: Vec<f64> = (0..10)
                .map(|_| {
                    let (e, j) = random_level(&mut rng, &p, 0.05, 0.9);
                    frequencies(&p, e, j).unwrap().ratio.abs()
                })
                .collect();
            for r in &ratios {
                assert!((r - ratios[0]).abs() < 1e-8, "s={s}: {r} vs {}", ratios[0]);
            }
        }
    }
}

#[test]
fn predicted_and_detected_closure_agree() {
    let mut rng = rng(99);
    let scales = [
        ConeGeometry::plane(),
        rational(1, 2),
        rational(2, 3),
        rational(3, 4),
        ConeGeometry::new(0.77).unwrap(),
        ConeGeometry::new(FRAC_1_SQRT_2).unwrap(),
    ];
    for case in 0..20 {
        let g = scales[case % scales.len()];
        let p = if case % 2 == 0 { kepler(g) } else { oscillator(g) };
        let (e, j) = random_level(&mut rng, &p, 0.05, 0.9);
        let predicted = predict_closure(&p, e, j).unwrap();
        let period = radial_period(&p, e, j).unwrap();
        let dt = period / 40_000.0;
        let periods = predicted.map_or(30.0, |w| w.n2 as f64 + 1.5);
        let start = point_on_level(&p, e, j, rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI), true).unwrap();
        let traj = integrate(&p, &start, dt, (periods * 40_000.0) as usize, 1).unwrap();
        let detected = detect_closure(&traj, DEFAULT_CLOSURE_TOL).unwrap();
        assert_eq!(
            predicted.map(|w| w.n2 as usize),
            detected.map(|c| c.radial_periods),
            "case {case} s={}",
            g.s()
        );
    }
}

#[test]
fn apsidal_angle_tends_to_small_oscillation_limit_linearly() {
    let pots = [
        PotentialSpec::PowerLaw { a: 1.0, alpha: 0.5 },
        PotentialSpec::PowerLaw { a: -1.0, alpha: -0.5 },
        PotentialSpec::Log { b: 1.0, r0: 1.0 },
    ];
    for pot in pots {
        let p = Params::new(1.0, ConeGeometry::new(0.6).unwrap(), pot).unwrap();
        let (_, u0) = effective_minimum(&p, 1.0).unwrap();
        let limit = small_oscillation_freq(&p, 1.0).unwrap().apsidal_limit;
        let err = |d: f64| apsidal_angle(&p, u0 + d, 1.0).unwrap().delta_phi - limit;
        let scale = u0.abs().max(1.0);
        let (a, b) = (err(1e-3 * scale), err(5e-4 * scale));
        assert!(a.abs() < 1e-2);
        let ratio = a / b;
        assert!((ratio - 2.0).abs() < 0.05, "{pot:?}: ratio {ratio}");
    }
}

#[test]
fn z_is_conserved_along_trajectories() {
    let mut rng = rng(8);
    for (name, p) in closed_systems() {
        let pt = random_point(&mut rng, &p);
        let period = radial_period(&p, energy(&p, &pt), pt.j()).unwrap();
        let traj = integrate(&p, &pt, period / 100_000.0, 100_000, 10).unwrap();
        let z0 = global_z(&p, &pt).unwrap().value();
        let worst = traj
            .points
            .iter()
            .map(|q| (global_z(&p, q).unwrap().value() - z0).norm())
            .fold(0.0, f64::max);
        assert!(worst / z0.norm().max(1e-12) < 1e-6, "{name}: {worst}");
    }
}

#[test]
fn z_vanishes_on_circular_orbits() {
    for (name, p) in closed_systems() {
        let pt = periapsis_state(&p, effective_minimum(&p, 1.0).unwrap().1, 1.0).unwrap();
        assert!(global_z(&p, &pt).unwrap().value().norm() < 1e-12, "{name}");
    }
}

#[test]
fn j_z_bracket_converges_at_second_order() {
    // {J, Z} = −∂Z/∂φ, so the differencing error is (σkh)²/6 relative
    let mut rng = rng(21);
    for (name, p) in closed_systems() {
        for _ in 0..10 {
            let pt = random_point(&mut rng, &p);
            let r = p.geometry.rational_form().unwrap();
            let sigma = if name.starts_with("kepler") { 1.0 } else { 2.0 };
            let z = |q: &PhasePoint| global_z(&p, q).unwrap().value();
            let j = |q: &PhasePoint| Complex64::new(q.j(), 0.0);
            let exact = -Complex64::i() * sigma * r.k as f64 * z(&pt);
            let err = |h: f64| (poisson_bracket(j, z, &pt, h).unwrap() - exact).norm();
            let ratio = err(1e-3) / err(5e-4);
            assert!((ratio - 4.0).abs() < 0.05, "{name}: ratio {ratio}");
        }
    }
}

#[test]
fn z_zbar_is_linear_in_j_at_fixed_energy_only_for_integer_s() {
    // at n = 1 the bracket over J·H (Kepler) or J (oscillator) is a constant
    let spread = |p: &Params, per: &dyn Fn(&PhasePoint) -> f64| {
        let mut values = Vec::new();
        for j in [0.6, 0.8, 1.0, 1.2] {
            let e = match p.potential {
                PotentialSpec::Kepler { .. } => -0.05,
                _ => 3.0,
            };
            let pt = point_on_level(p, e, j, 0.3, 0.4, true).unwrap();
            let report = verify_w_algebra(p, &pt, DEFAULT_BRACKET_STEP).unwrap();
            let zz = report.entries.iter().find(|x| x.bracket.starts_with("{Z,Zbar}")).unwrap().value();
            values.push(zz / per(&pt));
        }
        values.iter().map(|v| (v - values[0]).norm() / values[0].norm()).fold(0.0, f64::max)
    };
    let k1 = kepler(ConeGeometry::plane());
    let o1 = oscillator(ConeGeometry::plane());
    let k2 = kepler(rational(1, 2));
    let o2 = oscillator(rational(1, 2));
    assert!(spread(&k1, &|q| q.j() * energy(&k1, q)) < 1e-6);
    assert!(spread(&o1, &|q| q.j()) < 1e-6);
    assert!(spread(&k2, &|q| q.j() * energy(&k2, q)) > 1e-2);
    assert!(spread(&o2, &|q| q.j()) > 1e-2);
}

#[test]
fn action_round_trip_across_scales() {
    let mut rng = rng(6);
    for s in [1.0, 0.5, 2.0 / 3.0, 0.75, 0.77] {
        for p in [kepler(ConeGeometry::new(s).unwrap()), oscillator(ConeGeometry::new(s).unwrap())] {
            for _ in 0..20 {
                let (e, j) = random_level(&mut rng, &p, 0.0, 0.95);
                let i2 = action_i2(&p, e, j).unwrap();
                let back = cone_orbits::actions::hamiltonian_from_actions(&p, j, i2).unwrap();
                assert!(rel(back, e) < 1e-8, "s={s} {:?}: {back} vs {e}", p.potential);
            }
        }
    }
}
