//! Continued-fraction rational approximation with a bounded denominator.

use serde::{Deserialize, Serialize};

/// `p/q` approximating a real number, with `error = |x − p/q|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub p: i64,
    pub q: u64,
    pub error: f64,
}

/// The first continued-fraction convergent of `x` within `tol`, searching
/// denominators up to `q_max`. `None` when every admissible convergent
/// misses.
pub fn rational_approximation(x: f64, q_max: u64, tol: f64) -> Option<RationalApprox> {
    if !x.is_finite() || q_max == 0 {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let target = x.abs();
    let (mut h_prev, mut h) = (1i64, target.floor() as i64);
    let (mut k_prev, mut k) = (0u64, 1u64);
    let mut rem = target - target.floor();
    loop {
        let err = (target - h as f64 / k as f64).abs();
        if err <= tol {
            return Some(RationalApprox {
                p: sign * h,
                q: k,
                error: err,
            });
        }
        if rem < 1e-300 {
            return None;
        }
        let inv = 1.0 / rem;
        let a = inv.floor();
        rem = inv - a;
        if a > (q_max as f64) {
            return None;
        }
        let a = a as u64;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > q_max {
            return None;
        }
        let h_next = (a as i64).checked_mul(h)?.checked_add(h_prev)?;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
}
