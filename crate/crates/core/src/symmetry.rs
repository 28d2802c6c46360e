//! Complex integrals `C = (A − iB)e^{iσsφ}` and `Z = Cⁿ`, their norm
//! identities, and numerical Poisson brackets for the algebra generated by
//! `H`, `J`, `Z` and `Z̄`.
//!
//! `σ = 1` for the Kepler problem and `σ = 2` for the oscillator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::energy;
use crate::error::{ConeError, Result};
use crate::phase::{Params, PhasePoint};
use crate::potential::{ClosedFamily, PotentialSpec};

/// Value of `C` or `Z` at a phase point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexIntegral {
    pub re: f64,
    pub im: f64,
    pub kind: ClosedFamily,
    /// Power applied to `C` (1 for the local integral).
    pub n: u32,
    /// Numerator of `s = k/n`, when known.
    pub k: Option<u32>,
    /// False for the local `C` whenever `e^{iσsφ}` is not `2π`-periodic.
    pub single_valued: bool,
}

impl ComplexIntegral {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn family(params: &Params) -> Result<ClosedFamily> {
    params.potential.closed_family().ok_or_else(|| {
        ConeError::Structural(format!(
            "complex integrals exist only for Kepler and oscillator potentials, got {:?}",
            params.potential
        ))
    })
}

fn phase_multiplier(kind: ClosedFamily) -> u32 {
    match kind {
        ClosedFamily::Kepler => 1,
        ClosedFamily::Oscillator => 2,
    }
}

/// `A = J²/(ms²r) − κ`, `B = J p_r/(ms)`.
pub fn kepler_ab(params: &Params, pt: &PhasePoint) -> Result<(f64, f64)> {
    let PotentialSpec::Kepler { kappa } = params.potential else {
        return Err(ConeError::Structural("kepler_ab needs the Kepler potential".into()));
    };
    let (m, s) = (params.mass, params.s());
    let a = pt.j * pt.j / (m * s * s * pt.r) - kappa;
    let b = pt.j * pt.p_r / (m * s);
    Ok((a, b))
}

/// `A = J²/(ms²r²) − H`, `B = p_r J/(msr)`.
pub fn oscillator_ab(params: &Params, pt: &PhasePoint) -> Result<(f64, f64)> {
    if !matches!(params.potential, PotentialSpec::Oscillator { .. }) {
        return Err(ConeError::Structural("oscillator_ab needs the oscillator potential".into()));
    }
    let (m, s) = (params.mass, params.s());
    let a = pt.j * pt.j / (m * s * s * pt.r * pt.r) - energy(params, pt);
    let b = pt.p_r * pt.j / (m * s * pt.r);
    Ok((a, b))
}

fn ab(params: &Params, pt: &PhasePoint) -> Result<(ClosedFamily, f64, f64)> {
    let kind = family(params)?;
    let (a, b) = match kind {
        ClosedFamily::Kepler => kepler_ab(params, pt)?,
        ClosedFamily::Oscillator => oscillator_ab(params, pt)?,
    };
    Ok((kind, a, b))
}

/// The locally defined integral `C = (A − iB) e^{iσsφ}`, built on the
/// stored reduced angle. Multi-valued unless `σs` is an integer.
pub fn local_c(params: &Params, pt: &PhasePoint) -> Result<ComplexIntegral> {
    let (kind, a, b) = ab(params, pt)?;
    let sigma = phase_multiplier(kind);
    let c = Complex64::new(a, -b) * Complex64::from_polar(1.0, sigma as f64 * params.s() * pt.phi);
    let single_valued = params
        .geometry
        .rational_form()
        .is_some_and(|r| (sigma * r.k).is_multiple_of(r.n));
    Ok(ComplexIntegral {
        re: c.re,
        im: c.im,
        kind,
        n: 1,
        k: params.geometry.rational_form().map(|r| r.k),
        single_valued,
    })
}

/// The global integral `Z = Cⁿ = (A − iB)ⁿ e^{iσkφ}` for `s = k/n`.
pub fn global_z(params: &Params, pt: &PhasePoint) -> Result<ComplexIntegral> {
    let (kind, a, b) = ab(params, pt)?;
    let ratio = params.geometry.rational_form().ok_or(ConeError::IrrationalScale)?;
    let z = z_value(kind, ratio.k, ratio.n, a, b, pt.phi);
    Ok(ComplexIntegral {
        re: z.re,
        im: z.im,
        kind,
        n: ratio.n,
        k: Some(ratio.k),
        single_valued: true,
    })
}

fn z_value(kind: ClosedFamily, k: u32, n: u32, a: f64, b: f64, phi: f64) -> Complex64 {
    let sigma = phase_multiplier(kind) as f64;
    // reduce the phase exactly: e^{iσkφ} with integer σk
    Complex64::new(a, -b).powu(n) * Complex64::from_polar(1.0, sigma * k as f64 * phi)
}

/// Relative residual of `A² + B² = 2HJ²/(ms²) + κ²` (Kepler) or
/// `A² + B² = H² − ω²J²/s²` (oscillator).
pub fn norm_identity_residual(params: &Params, pt: &PhasePoint) -> Result<f64> {
    let (kind, a, b) = ab(params, pt)?;
    let (m, s) = (params.mass, params.s());
    let h = energy(params, pt);
    let lhs = a * a + b * b;
    let rhs = match (kind, params.potential) {
        (ClosedFamily::Kepler, PotentialSpec::Kepler { kappa }) => {
            2.0 * h * pt.j * pt.j / (m * s * s) + kappa * kappa
        }
        (ClosedFamily::Oscillator, PotentialSpec::Oscillator { omega }) => {
            h * h - omega * omega * pt.j * pt.j / (s * s)
        }
        _ => unreachable!("family matches potential"),
    };
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}

/// Canonical partial derivatives `(∂_r, ∂_φ, ∂_{p_r}, ∂_J)` of `f`.
#[derive(Debug, Clone, Copy)]
struct Gradient([Complex64; 4]);

fn shifted(pt: &PhasePoint, axis: usize, delta: f64) -> Result<PhasePoint> {
    let mut c = [pt.r, pt.phi, pt.p_r, pt.j];
    c[axis] += delta;
    if axis == 0 && !(c[0] > 0.0) {
        return Err(ConeError::Domain(format!(
            "finite difference reaches r = {} ≤ 0",
            c[0]
        )));
    }
    PhasePoint::new(c[0], c[1], c[2], c[3])
}

fn central_gradient<F>(f: &F, pt: &PhasePoint, h: f64) -> Result<Gradient>
where
    F: Fn(&PhasePoint) -> Complex64,
{
    let coords = [pt.r, pt.phi, pt.p_r, pt.j];
    let mut g = [Complex64::new(0.0, 0.0); 4];
    for axis in 0..4 {
        let step = h * coords[axis].abs().max(1.0);
        let plus = f(&shifted(pt, axis, step)?);
        let minus = f(&shifted(pt, axis, -step)?);
        g[axis] = (plus - minus) / (2.0 * step);
    }
    Ok(Gradient(g))
}

fn bracket_of(a: &Gradient, b: &Gradient) -> Complex64 {
    let [fr, fphi, fp, fj] = a.0;
    let [gr, gphi, gp, gj] = b.0;
    fr * gp - fp * gr + fphi * gj - fj * gphi
}

/// `{f, g} = ∂_r f ∂_{p_r} g − ∂_{p_r} f ∂_r g + ∂_φ f ∂_J g − ∂_J f ∂_φ g`
/// with central differences of step `h·max(1, |coordinate|)`.
///
/// `f` and `g` must be single-valued in `φ`: perturbed points are built
/// with the reduced angle.
pub fn poisson_bracket<F, G>(f: F, g: G, pt: &PhasePoint, h: f64) -> Result<Complex64>
where
    F: Fn(&PhasePoint) -> Complex64,
    G: Fn(&PhasePoint) -> Complex64,
{
    check_step(h)?;
    Ok(bracket_of(&central_gradient(&f, pt, h)?, &central_gradient(&g, pt, h)?))
}

/// Bracket from central differences at `h` and `h/2`, combined by one
/// Richardson step. Returns `(raw at h/2, extrapolated)`.
pub fn poisson_bracket_extrapolated<F, G>(f: F, g: G, pt: &PhasePoint, h: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(&PhasePoint) -> Complex64,
    G: Fn(&PhasePoint) -> Complex64,
{
    check_step(h)?;
    let richardson = |fun: &dyn Fn(&PhasePoint) -> Complex64| -> Result<(Gradient, Gradient)> {
        let coarse = central_gradient(&fun, pt, h)?;
        let fine = central_gradient(&fun, pt, 0.5 * h)?;
        let mut ex = fine.0;
        for (e, c) in ex.iter_mut().zip(coarse.0) {
            *e = (4.0 * *e - c) / 3.0;
        }
        Ok((fine, Gradient(ex)))
    };
    let (f_fine, f_ex) = richardson(&f)?;
    let (g_fine, g_ex) = richardson(&g)?;
    Ok((bracket_of(&f_fine, &g_fine), bracket_of(&f_ex, &g_ex)))
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(ConeError::InvalidParameter(format!("finite-difference step must be positive, got {h}")))
    }
}

/// Default finite-difference step for bracket verification.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-5;

/// One numerically evaluated bracket against a candidate right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub bracket: String,
    pub value_re: f64,
    pub value_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub h: f64,
}

impl BracketEntry {
    fn new(bracket: impl Into<String>, value: Complex64, expected: Complex64, scale: f64, h: f64) -> Self {
        let abs_err = (value - expected).norm();
        Self {
            bracket: bracket.into(),
            value_re: value.re,
            value_im: value.im,
            expected_re: expected.re,
            expected_im: expected.im,
            abs_err,
            rel_err: abs_err / scale.max(ZERO_FLOOR),
            h,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }

    pub fn expected(&self) -> Complex64 {
        Complex64::new(self.expected_re, self.expected_im)
    }
}

/// Floor for relative errors where the reference value vanishes (circular orbits).
pub const ZERO_FLOOR: f64 = 1e-12;

/// Bracket names used in [`BracketReport`].
pub mod names {
    /// `{J, Z} = σkZ` (real coefficient).
    pub const J_Z_REAL: &str = "{J,Z} = s_k Z";
    /// `{J, Z} = −iσkZ`, the value implied by `Z ∝ e^{iσkφ}` and `{φ, J} = 1`.
    pub const J_Z_PHASE: &str = "{J,Z} = -i s_k Z";
    pub const J_ZBAR_REAL: &str = "{J,Zbar} = -s_k Zbar";
    pub const J_ZBAR_PHASE: &str = "{J,Zbar} = i s_k Zbar";
    /// Kepler: base `2n²J²/(mk²) + κ²`; oscillator: base `H² − ω²n²J²/k²`.
    pub const Z_ZBAR_ENERGY_FREE: &str = "{Z,Zbar} base 2n^2J^2/mk^2 + kappa^2";
    /// Kepler: base `|C|² = 2n²J²H/(mk²) + κ²`.
    pub const Z_ZBAR_NORM: &str = "{Z,Zbar} base 2n^2J^2H/mk^2 + kappa^2";
    pub const Z_ZBAR_OSCILLATOR: &str = "{Z,Zbar} base H^2 - w^2n^2J^2/k^2";
    pub const H_Z: &str = "{H,Z} = 0";
    pub const H_J: &str = "{H,J} = 0";
}

/// Which closed form of `{Z, Z̄}` agrees with the differenced bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZZbarMatch {
    /// Both candidate bases coincide (`n = 1`) and match.
    Both,
    EnergyFreeBase,
    NormBase,
    Neither,
}

/// Numerical brackets of `H`, `J`, `Z`, `Z̄` at one phase point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub kind: ClosedFamily,
    pub k: u32,
    pub n: u32,
    pub h: f64,
    pub entries: Vec<BracketEntry>,
    /// Largest relative gap between the raw and Richardson-extrapolated brackets.
    pub richardson_disagreement: f64,
    pub z_zbar_match: ZZbarMatch,
}

impl BracketReport {
    pub fn entry(&self, name: &str) -> Option<&BracketEntry> {
        self.entries.iter().find(|e| e.bracket == name)
    }
}

/// Agreement level for deciding which `{Z, Z̄}` closed form matches.
pub const Z_ZBAR_MATCH_TOL: f64 = 1e-5;

/// Evaluates `{J,Z}`, `{J,Z̄}`, `{Z,Z̄}`, `{H,Z}` and `{H,J}` by Richardson
/// extrapolated central differences and compares each with its candidate
/// closed forms. The differenced value is the reference; candidates are
/// reported side by side.
pub fn verify_w_algebra(params: &Params, pt: &PhasePoint, h: f64) -> Result<BracketReport> {
    let kind = family(params)?;
    let ratio = params.geometry.rational_form().ok_or(ConeError::IrrationalScale)?;
    let (k, n) = (ratio.k, ratio.n);
    let z_at = |q: &PhasePoint| -> Complex64 {
        let (_, a, b) = ab(params, q).expect("family checked");
        z_value(kind, k, n, a, b, q.phi)
    };
    let zbar_at = |q: &PhasePoint| z_at(q).conj();
    let j_at = |q: &PhasePoint| Complex64::new(q.j, 0.0);
    let h_at = |q: &PhasePoint| Complex64::new(energy(params, q), 0.0);

    let mut disagreement = 0.0f64;
    let mut bracket = |f: &dyn Fn(&PhasePoint) -> Complex64,
                       g: &dyn Fn(&PhasePoint) -> Complex64,
                       scale: f64|
     -> Result<Complex64> {
        let (raw, ex) = poisson_bracket_extrapolated(f, g, pt, h)?;
        disagreement = disagreement.max((raw - ex).norm() / scale.max(ZERO_FLOOR));
        Ok(ex)
    };

    let z = z_at(pt);
    let zn = z.norm();
    let sk = (phase_multiplier(kind) * k) as f64;
    let i = Complex64::i();
    let jz = bracket(&j_at, &z_at, sk * zn)?;
    let jzb = bracket(&j_at, &zbar_at, sk * zn)?;
    let hz = bracket(&h_at, &z_at, zn)?;
    let hj = bracket(&h_at, &j_at, pt.j.abs())?;

    let (m, s_k, s_n) = (params.mass, k as f64, n as f64);
    let j = pt.j;
    let e = energy(params, pt);
    let mut entries = vec![
        BracketEntry::new(names::J_Z_REAL, jz, sk * z, sk * zn, h),
        BracketEntry::new(names::J_Z_PHASE, jz, -i * sk * z, sk * zn, h),
        BracketEntry::new(names::J_ZBAR_REAL, jzb, -sk * z.conj(), sk * zn, h),
        BracketEntry::new(names::J_ZBAR_PHASE, jzb, i * sk * z.conj(), sk * zn, h),
    ];

    let z_match = match params.potential {
        PotentialSpec::Kepler { kappa } => {
            let prefactor = i * (4.0 * s_n.powi(3) / (m * s_k)) * j * e;
            let energy_free = prefactor * (2.0 * s_n * s_n * j * j / (m * s_k * s_k) + kappa * kappa).powi(n as i32 - 1);
            let norm = prefactor * (2.0 * s_n * s_n * j * j * e / (m * s_k * s_k) + kappa * kappa).powi(n as i32 - 1);
            let scale = energy_free.norm().max(norm.norm());
            let zz = bracket(&z_at, &zbar_at, scale)?;
            let a = BracketEntry::new(names::Z_ZBAR_ENERGY_FREE, zz, energy_free, energy_free.norm(), h);
            let b = BracketEntry::new(names::Z_ZBAR_NORM, zz, norm, norm.norm(), h);
            let verdict = match (a.rel_err < Z_ZBAR_MATCH_TOL, b.rel_err < Z_ZBAR_MATCH_TOL) {
                (true, true) => ZZbarMatch::Both,
                (true, false) => ZZbarMatch::EnergyFreeBase,
                (false, true) => ZZbarMatch::NormBase,
                (false, false) => ZZbarMatch::Neither,
            };
            entries.push(a);
            entries.push(b);
            verdict
        }
        PotentialSpec::Oscillator { omega } => {
            let w2 = omega * omega;
            let expected = -i * (4.0 * s_n.powi(3) / s_k) * w2 * j
                * (e * e - w2 * s_n * s_n * j * j / (s_k * s_k)).powi(n as i32 - 1);
            let zz = bracket(&z_at, &zbar_at, expected.norm())?;
            let entry = BracketEntry::new(names::Z_ZBAR_OSCILLATOR, zz, expected, expected.norm(), h);
            let verdict = if entry.rel_err < Z_ZBAR_MATCH_TOL {
                ZZbarMatch::Both
            } else {
                ZZbarMatch::Neither
            };
            entries.push(entry);
            verdict
        }
        _ => unreachable!("family checked"),
    };

    entries.push(BracketEntry::new(names::H_Z, hz, Complex64::new(0.0, 0.0), zn, h));
    entries.push(BracketEntry::new(names::H_J, hj, Complex64::new(0.0, 0.0), j.abs(), h));

    Ok(BracketReport {
        kind,
        k,
        n,
        h,
        entries,
        richardson_disagreement: disagreement,
        z_zbar_match: z_match,
    })
}
