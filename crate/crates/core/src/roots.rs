//! Derivative-free bracketing root finder and a grid scan for local minima.

use crate::error::{ConeError, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Terminates when the bracket is narrower than `rel_tol·|x|` (plus a few
/// ulps) or an exact zero is hit.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(ConeError::RootNotFound(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs();
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }
    Err(ConeError::RootNotFound(
        "Brent iteration limit exceeded".into(),
    ))
}

/// Brackets `[lo, hi]` on a geometric grid over `[from, to]` where the
/// derivative `df` changes sign from negative to positive, i.e. local minima
/// of the underlying function.
pub fn minimum_brackets<F: Fn(f64) -> f64>(df: F, from: f64, to: f64, points: usize) -> Vec<(f64, f64)> {
    let ratio = (to / from).powf(1.0 / (points - 1) as f64);
    let mut out = Vec::new();
    let mut x_prev = from;
    let mut d_prev = df(from);
    for i in 1..points {
        let x = if i == points - 1 { to } else { from * ratio.powi(i as i32) };
        let d = df(x);
        if d_prev < 0.0 && d >= 0.0 {
            out.push((x_prev, x));
        }
        x_prev = x;
        d_prev = d;
    }
    out
}
