//! Closed-form scalar objects: the heteroclinic profile, the double well,
//! comparison functions, the auxiliary profiles rho/rho1 and coordinate maps.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::ScalarError;

/// Minimum gap `ỹ − z̃` accepted by [`subsolution_defect`].
pub const DIAGONAL_GUARD: f64 = 1e-6;

/// Factor dimension `m`, ambient dimension `n = 2m` and drift coefficient `m − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionParams {
    pub m: usize,
    pub n: usize,
    pub drift: f64,
}

impl DimensionParams {
    pub fn new(m: usize) -> Result<Self, ScalarError> {
        if m == 0 {
            return Err(ScalarError::Domain("factor dimension m must be >= 1".into()));
        }
        Ok(DimensionParams { m, n: 2 * m, drift: (m - 1) as f64 })
    }

    pub fn from_ambient(n: usize) -> Result<Self, ScalarError> {
        if n % 2 != 0 {
            return Err(ScalarError::Domain(format!("ambient dimension {n} is odd")));
        }
        Self::new(n / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordST {
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordYZ {
    pub y: f64,
    pub z: f64,
}

impl CoordST {
    pub fn to_yz(self) -> CoordYZ {
        CoordYZ { y: (self.s + self.t) * FRAC_1_SQRT_2, z: (self.s - self.t) * FRAC_1_SQRT_2 }
    }

    /// Membership in `{s > t > 0}`.
    pub fn in_omega(self) -> bool {
        self.s > self.t && self.t > 0.0
    }
}

impl CoordYZ {
    pub fn to_st(self) -> CoordST {
        CoordST { s: (self.y + self.z) * FRAC_1_SQRT_2, t: (self.y - self.z) * FRAC_1_SQRT_2 }
    }

    pub fn in_omega(self) -> bool {
        self.y > 0.0 && self.z > 0.0 && self.z < self.y
    }
}

fn sech2(v: f64) -> f64 {
    let c = v.cosh();
    1.0 / (c * c)
}

/// `H(x) = tanh(x/√2)` and its first two derivatives.
///
/// `order` outside `0..=2` panics.
pub fn heteroclinic(x: f64, order: u8) -> f64 {
    let v = x * FRAC_1_SQRT_2;
    match order {
        0 => v.tanh(),
        // sech² keeps full relative accuracy in the tails where 1 − H² cancels
        1 => sech2(v) * FRAC_1_SQRT_2,
        2 => -v.tanh() * sech2(v),
        _ => panic!("heteroclinic: unsupported derivative order {order}"),
    }
}

pub fn double_well(u: f64) -> f64 {
    let w = 1.0 - u * u;
    0.25 * w * w
}

/// `H(y)H(z)`.
pub fn hh_supersolution(y: f64, z: f64) -> f64 {
    heteroclinic(y, 0) * heteroclinic(z, 0)
}

/// `g(z) = ½(H(z) + zH'(z))`.
pub fn g_profile(z: f64) -> f64 {
    0.5 * (heteroclinic(z, 0) + z * heteroclinic(z, 1))
}

/// `−Δη − η + η³` for `η = H(ay)H(az)`, written in `(ỹ, z̃) = (ay, az)`.
///
/// Requires `ỹ > z̃ + DIAGONAL_GUARD` and `z̃ ≥ 0`.
pub fn subsolution_defect(a: f64, yt: f64, zt: f64, params: DimensionParams) -> Result<f64, ScalarError> {
    if yt == 0.0 && zt == 0.0 {
        return Err(ScalarError::Degenerate);
    }
    if !(a > 0.0) || zt < 0.0 {
        return Err(ScalarError::Domain(format!("a={a}, z̃={zt}")));
    }
    if !(yt > zt + DIAGONAL_GUARD) {
        return Err(ScalarError::NearDiagonal { gap: yt - zt });
    }
    let hy = heteroclinic(yt, 0);
    let hz = heteroclinic(zt, 0);
    let a2 = a * a;
    let potential = hy * hz * (2.0 * a2 - 1.0 - a2 * hy * hy - a2 * hz * hz + hy * hy * hz * hz);
    let bracket = yt * hz - zt * hy + hy * hz * (zt * hz - yt * hy);
    let drift = SQRT_2 * params.drift * a2 / (yt * yt - zt * zt) * bracket;
    Ok(potential - drift)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoKind {
    /// Solves `ρ'' − (3H² − 1)ρ = −H'`.
    Rho,
    /// Solves `−ρ₁'' + (3H² − 1)ρ₁ = zH'`.
    Rho1,
}

/// Outer-integral tolerance for [`rho`].
pub const RHO_QUAD_TOL: f64 = 1e-10;

/// `∫ₛ^∞ H'(r)² dr`, closed form through the sech⁴ antiderivative.
pub fn tail_h1_sq(s: f64) -> f64 {
    let v = s * FRAC_1_SQRT_2;
    let th = v.tanh();
    let one_minus = one_minus_tanh(v);
    FRAC_1_SQRT_2 * one_minus * one_minus * (2.0 + th) / 3.0
}

/// `∫ₛ^∞ r H'(r)² dr`, by parts from [`tail_h1_sq`].
pub fn tail_r_h1_sq(s: f64) -> f64 {
    s * tail_h1_sq(s) + tail_integral_of_tail(s * FRAC_1_SQRT_2)
}

/// `1 − tanh v` without cancellation for `v ≥ 0`.
fn one_minus_tanh(v: f64) -> f64 {
    let q = (-2.0 * v).exp();
    2.0 * q / (1.0 + q)
}

/// `(2/3)·log(1 + e^{−2v}) − sech²(v)/6`, i.e. `∫_{v√2}^∞ ∫ₓ^∞ H'²`.
fn tail_integral_of_tail(v: f64) -> f64 {
    let q = (-2.0 * v).exp();
    if q < 0.1 {
        q * q * tail_series(q)
    } else {
        2.0 / 3.0 * q.ln_1p() - 2.0 / 3.0 * q / ((1.0 + q) * (1.0 + q))
    }
}

/// `K(q)/q² = (2/3) Σ_{k≥2} (−1)^k (k − 1/k) q^{k−2}`, alternating; `q < 0.1`.
fn tail_series(q: f64) -> f64 {
    let mut sum = 0.0;
    let mut qk = 1.0;
    for k in 2..40 {
        let kf = k as f64;
        let term = (kf - 1.0 / kf) * qk;
        sum += if k % 2 == 0 { term } else { -term };
        qk *= q;
        if qk < 1e-18 {
            break;
        }
    }
    2.0 / 3.0 * sum
}

/// Integrand `H'(r)^{-2} ∫_r^∞ w(x) H'(x)² dx` of the outer integral, in
/// cancellation-free form.
fn rho_integrand(r: f64, which: RhoKind) -> f64 {
    let v = r * FRAC_1_SQRT_2;
    let q = (-2.0 * v).exp();
    let th = v.tanh();
    let base = (1.0 + q) * (1.0 + q) * (2.0 + th) / (6.0 * SQRT_2);
    match which {
        RhoKind::Rho => base,
        RhoKind::Rho1 => {
            let k_over = if q < 0.1 {
                // (1+q)^4/(8q²)·K with K = q²·series
                (1.0 + q).powi(4) / 8.0 * tail_series(q)
            } else {
                let c = v.cosh();
                2.0 * c * c * c * c * tail_integral_of_tail(v)
            };
            r * base + k_over
        }
    }
}

/// `ρ(z)` or `ρ₁(z)` for `z ≥ 0`.
pub fn rho(z: f64, which: RhoKind) -> Result<f64, ScalarError> {
    if !(z >= 0.0) {
        return Err(ScalarError::Domain(format!("rho needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let outer = adaptive_simpson(|r| rho_integrand(r, which), 0.0, z, RHO_QUAD_TOL);
    Ok(heteroclinic(z, 1) * outer)
}

/// Adaptive Simpson quadrature with Richardson correction. The first
/// `MIN_SIMPSON_LEVELS` bisections are unconditional so that integrands
/// vanishing at the initial sample points are not accepted early.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_SIMPSON_DEPTH)
}

const MAX_SIMPSON_DEPTH: u32 = 50;
const MIN_SIMPSON_LEVELS: u32 = 5;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let settled = depth + MIN_SIMPSON_LEVELS <= MAX_SIMPSON_DEPTH;
    if depth == 0 || (settled && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heteroclinic_values() {
        assert_eq!(heteroclinic(0.0, 0), 0.0);
        assert!((heteroclinic(0.0, 1) - 0.7071067811865475).abs() < 1e-15);
        assert_eq!(heteroclinic(0.0, 2), 0.0);
    }

    #[test]
    fn double_well_values() {
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(0.0), 0.25);
        for k in 0..50 {
            let u = -2.0 + 0.08 * k as f64;
            assert_eq!(double_well(-u), double_well(u));
        }
    }

    #[test]
    fn hh_values() {
        for k in 0..20 {
            assert_eq!(hh_supersolution(0.5 * k as f64, 0.0), 0.0);
        }
        let v = hh_supersolution(0.1, 0.1);
        assert!((v / (0.5 * 0.01) - 1.0).abs() < 0.05);
        // two-term tail expansion: H(10)² = 1 − 4e^{−10√2} + O(e^{−20√2})
        let expansion = 1.0 - 4.0 * (-10.0 * SQRT_2).exp();
        assert!((hh_supersolution(10.0, 10.0) - expansion).abs() < 1e-11);
        assert!((hh_supersolution(10.0, 10.0) - 1.0).abs() < 3e-6);
    }

    #[test]
    fn defect_guards() {
        let p = DimensionParams::new(4).unwrap();
        assert!(matches!(subsolution_defect(0.3, 0.0, 0.0, p), Err(ScalarError::Degenerate)));
        assert!(matches!(subsolution_defect(0.3, 1.0, 1.0, p), Err(ScalarError::NearDiagonal { .. })));
        assert!(subsolution_defect(0.45, 2.0, 1.0, p).unwrap() < 0.0);
    }

    #[test]
    fn g_limits() {
        assert_eq!(g_profile(0.0), 0.0);
        assert!((g_profile(40.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tail_at_zero() {
        // ∫₀^∞ H'² = √2/3
        assert!((tail_h1_sq(0.0) - SQRT_2 / 3.0).abs() < 1e-15);
        // ∫₀^∞ rH'² = (2/3)ln 2 − 1/6
        assert!((tail_r_h1_sq(0.0) - (2.0 / 3.0 * 2f64.ln() - 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn coordinate_round_trip() {
        let p = CoordST { s: 3.0, t: 1.25 };
        let q = p.to_yz().to_st();
        assert!((q.s - p.s).abs() <= 2.0 * f64::EPSILON * 3.0);
        assert!((q.t - p.t).abs() <= 2.0 * f64::EPSILON * 3.0);
        assert!(p.in_omega() && p.to_yz().in_omega());
    }
}
