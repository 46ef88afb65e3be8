use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddlecheck::scalar_forms::*;

// Frozen 40-digit quadrature / symbolic values.
const DEFECT_03_3_05_M4: f64 = -0.24979676763189356972;
const RHO_1: f64 = 0.28703216866881164293;
const RHO_3: f64 = 0.056519038783942695801;
const RHO1_1: f64 = 0.27607282087086047971;
const RHO1_3: f64 = 0.097056503278599245237;

fn m4() -> DimensionParams {
    DimensionParams::new(4).unwrap()
}

#[test]
fn modica_identity_is_exact_for_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(-40.0..40.0);
        let h = heteroclinic(x, 0);
        let h1 = heteroclinic(x, 1);
        worst = worst.max((0.5 * h1 * h1 - double_well(h)).abs());
    }
    assert!(worst < 1e-14, "worst {worst:e}");
}

#[test]
fn h_is_odd_increasing_and_bounded() {
    let mut xs: Vec<f64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        (0..10_000).map(|_| rng.random_range(-30.0..30.0)).collect()
    };
    xs.sort_by(f64::total_cmp);
    for w in xs.windows(2) {
        let (a, b) = (heteroclinic(w[0], 0), heteroclinic(w[1], 0));
        assert!(a <= b);
        assert!(a.abs() <= 1.0);
        assert_eq!(heteroclinic(-w[0], 0), -a);
    }
    // strict increase where it is resolvable in double precision
    for k in 0..200 {
        let x = -10.0 + 0.1 * k as f64;
        assert!(heteroclinic(x + 0.1, 0) > heteroclinic(x, 0));
        assert!(heteroclinic(x, 0).abs() < 1.0);
    }
}

#[test]
fn derivative_identities() {
    for k in 0..400 {
        let x = -10.0 + 0.05 * k as f64;
        let h = heteroclinic(x, 0);
        assert!((SQRT_2 * heteroclinic(x, 1) - (1.0 - h * h)).abs() < 1e-15);
        assert!((heteroclinic(x, 2) - (h * h * h - h)).abs() < 1e-15);
    }
}

use std::f64::consts::SQRT_2;

#[test]
fn coordinate_round_trip_two_ulps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let s: f64 = rng.random_range(0.0..50.0);
        let t: f64 = rng.random_range(0.0..50.0);
        let p = CoordST { s, t };
        let q = p.to_yz().to_st();
        let scale = s.max(t);
        assert!((q.s - s).abs() <= 2.0 * f64::EPSILON * scale, "{s} {t}");
        assert!((q.t - t).abs() <= 2.0 * f64::EPSILON * scale, "{s} {t}");
        assert_eq!(p.in_omega(), s > t && t > 0.0);
    }
}

#[test]
fn omega_membership_agrees_between_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let s: f64 = rng.random_range(0.01..20.0);
        let t: f64 = rng.random_range(0.01..20.0);
        if (s - t).abs() < 1e-9 {
            continue;
        }
        let p = CoordST { s, t };
        assert_eq!(p.in_omega(), p.to_yz().in_omega());
    }
}

#[test]
fn subsolution_defect_matches_frozen_oracle() {
    let v = subsolution_defect(0.3, 3.0, 0.5, m4()).unwrap();
    assert!((v - DEFECT_03_3_05_M4).abs() < 1e-14, "{v}");
}

#[test]
fn subsolution_defect_matches_direct_operator() {
    // −Δη − η + η³ for η = H(ay)H(az), by finite differences in (s, t) with the
    // reduced operator; second-order accurate.
    let p = m4();
    let a = 0.4;
    let eta = |s: f64, t: f64| {
        let y = (s + t) / SQRT_2;
        let z = (s - t) / SQRT_2;
        heteroclinic(a * y, 0) * heteroclinic(a * z, 0)
    };
    for &(s, t) in &[(3.0, 1.0), (5.0, 2.5), (2.0, 0.4), (7.0, 6.0)] {
        let k = 1e-3;
        let c = eta(s, t);
        let uss = (eta(s + k, t) - 2.0 * c + eta(s - k, t)) / (k * k);
        let utt = (eta(s, t + k) - 2.0 * c + eta(s, t - k)) / (k * k);
        let us = (eta(s + k, t) - eta(s - k, t)) / (2.0 * k);
        let ut = (eta(s, t + k) - eta(s, t - k)) / (2.0 * k);
        let direct = -uss - utt - p.drift / s * us - p.drift / t * ut - c + c * c * c;
        let y = a * (s + t) / SQRT_2;
        let z = a * (s - t) / SQRT_2;
        let v = subsolution_defect(a, y, z, p).unwrap();
        assert!((v - direct).abs() < 1e-5, "({s},{t}): {v} vs {direct}");
    }
}

#[test]
fn subsolution_defect_negative_example() {
    assert!(subsolution_defect(0.45, 2.0, 1.0, m4()).unwrap() < 0.0);
}

#[test]
fn subsolution_drift_term_vanishes_along_offset_diagonal() {
    // the drift part is the defect minus the potential part
    let p = m4();
    let a = 0.45;
    let drift = |y: f64| {
        let z = y - 1.0;
        let hy = heteroclinic(y, 0);
        let hz = heteroclinic(z, 0);
        let a2 = a * a;
        let pot = hy * hz * (2.0 * a2 - 1.0 - a2 * hy * hy - a2 * hz * hz + hy * hy * hz * hz);
        subsolution_defect(a, y, z, p).unwrap() - pot
    };
    let mut prev = drift(3.0).abs();
    for k in 1..8 {
        let cur = drift(3.0 + 3.0 * k as f64).abs();
        assert!(cur < prev);
        prev = cur;
    }
    assert!(prev < 1e-8, "{prev:e}");
}

#[test]
fn rho_values_against_frozen_quadrature() {
    assert_eq!(rho(0.0, RhoKind::Rho).unwrap(), 0.0);
    assert_eq!(rho(0.0, RhoKind::Rho1).unwrap(), 0.0);
    for (z, kind, expect) in [
        (1.0, RhoKind::Rho, RHO_1),
        (3.0, RhoKind::Rho, RHO_3),
        (1.0, RhoKind::Rho1, RHO1_1),
        (3.0, RhoKind::Rho1, RHO1_3),
    ] {
        let v = rho(z, kind).unwrap();
        assert!((v - expect).abs() < 1e-8, "{kind:?}({z}) = {v}, expected {expect}");
    }
    assert!(rho(-1.0, RhoKind::Rho).is_err());
}

#[test]
fn rho_slope_at_origin() {
    // ρ'(0) = H'(0)⁻¹ ∫₀^∞ H'² = (√2/3)/(1/√2) = 2/3
    let k = 1e-4;
    let slope = (-rho(2.0 * k, RhoKind::Rho).unwrap() + 4.0 * rho(k, RhoKind::Rho).unwrap()
        - 3.0 * rho(0.0, RhoKind::Rho).unwrap())
        / (2.0 * k);
    assert!((slope - 2.0 / 3.0).abs() < 1e-6, "{slope}");
}

fn ode_residuals(kind: RhoKind) -> f64 {
    let k = 0.01;
    let mut worst: f64 = 0.0;
    for i in 2..=800 {
        let z = 0.01 * i as f64;
        let f = |x: f64| rho(x, kind).unwrap();
        let d2 = (-f(z + 2.0 * k) + 16.0 * f(z + k) - 30.0 * f(z) + 16.0 * f(z - k) - f(z - 2.0 * k)) / (12.0 * k * k);
        let h = heteroclinic(z, 0);
        let pot = (3.0 * h * h - 1.0) * f(z);
        let r = match kind {
            RhoKind::Rho => d2 - pot + heteroclinic(z, 1),
            RhoKind::Rho1 => -d2 + pot - z * heteroclinic(z, 1),
        };
        worst = worst.max(r.abs());
    }
    worst
}

#[test]
fn rho_ode_residual() {
    let w = ode_residuals(RhoKind::Rho);
    assert!(w < 1e-6, "{w:e}");
}

#[test]
fn rho1_ode_residual() {
    let w = ode_residuals(RhoKind::Rho1);
    assert!(w < 1e-6, "{w:e}");
}

#[test]
fn rho_profiles_nonnegative() {
    for i in 0..=160 {
        let z = 0.05 * i as f64;
        assert!(rho(z, RhoKind::Rho).unwrap() >= 0.0);
        assert!(rho(z, RhoKind::Rho1).unwrap() >= 0.0);
    }
}

#[test]
fn inner_tails_match_quadrature() {
    for &s in &[0.0, 0.5, 2.0, 6.0] {
        let q = adaptive_simpson(|r| heteroclinic(r, 1).powi(2), s, s + 60.0, 1e-14);
        assert!((tail_h1_sq(s) - q).abs() < 1e-12, "{s}: {} vs {q}", tail_h1_sq(s));
        let q1 = adaptive_simpson(|r| r * heteroclinic(r, 1).powi(2), s, s + 60.0, 1e-14);
        assert!((tail_r_h1_sq(s) - q1).abs() < 1e-12, "{s}: {} vs {q1}", tail_r_h1_sq(s));
    }
}

proptest! {
    #[test]
    fn double_well_is_even(u in -3.0f64..3.0) {
        prop_assert_eq!(double_well(u), double_well(-u));
    }

    #[test]
    fn modica_pointwise(x in -50.0f64..50.0) {
        let h = heteroclinic(x, 0);
        prop_assert!((0.5 * heteroclinic(x, 1).powi(2) - double_well(h)).abs() < 1e-14);
    }

    #[test]
    fn g_profile_nonnegative(z in 0.0f64..60.0) {
        prop_assert!(g_profile(z) >= 0.0);
    }

    #[test]
    fn defect_sign_for_admissible_a(a in 0.01f64..0.45, zt in 0.01f64..10.0, gap in 0.01f64..5.0) {
        let v = subsolution_defect(a, zt + gap, zt, DimensionParams::new(4).unwrap()).unwrap();
        prop_assert!(v <= 0.0, "a={} z={} gap={} -> {}", a, zt, gap, v);
    }
}
