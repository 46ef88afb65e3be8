use saddlecheck::candidate::CandidateParams;
use saddlecheck::saddle_solver::{build_grid, newton_solve, Field, SaddleSolution, SolverConfig};
use saddlecheck::scalar_forms::DimensionParams;
use saddlecheck::spectral::*;
use saddlecheck::verifier_grid::verify_supersolution;
use saddlecheck::CertificateError;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn solve(m: usize, r: f64, h: f64) -> SaddleSolution {
    let grid = build_grid(r, h).unwrap();
    newton_solve(DimensionParams::new(m).unwrap(), SolverConfig::default(), &grid).unwrap()
}

type Key = (usize, u64, u64);

/// Solutions and eigen estimates shared across tests.
fn estimate(m: usize, r: f64, h: f64) -> (QuadraticFormAssembly, EigEstimate) {
    static CACHE: OnceLock<Mutex<HashMap<Key, (QuadraticFormAssembly, EigEstimate)>>> = OnceLock::new();
    let key = (m, r.to_bits(), h.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let asm = assemble(&solve(m, r, h));
    let est = min_eigenvalue(&asm, &EigConfig::default()).unwrap();
    cache.lock().unwrap().insert(key, (asm.clone(), est.clone()));
    (asm, est)
}

#[test]
fn stiffness_exactly_symmetric_and_mass_positive() {
    for m in [1, 4] {
        let (a, _) = estimate(m, 8.0, 0.2);
        assert_eq!(a.stiffness.asymmetry(), 0.0);
        assert!(a.mass.iter().all(|&b| b > 0.0));
        // 40 × 40 nodes below R, minus the axes when the weight vanishes there
        assert_eq!(a.len(), if m == 1 { 1600 } else { 39 * 39 });
        assert_eq!(a.nodes.iter().any(|&(i, j)| i == 0 || j == 0), m == 1);
    }
}

#[test]
fn constant_patch_reproduces_potential_sum() {
    let sol = solve(4, 8.0, 0.2);
    let a = assemble(&sol);
    let (lo, hi) = (5usize, 15usize);
    let v: Vec<f64> = a
        .nodes
        .iter()
        .map(|&(i, j)| if (lo..=hi).contains(&i) && (lo..=hi).contains(&j) { 1.0 } else { 0.0 })
        .collect();
    let h = 0.2;
    let w = |s: f64, t: f64| (s * t).powi(3);
    let mut potential = 0.0;
    for i in lo..=hi {
        for j in lo..=hi {
            let (s, t) = (i as f64 * h, j as f64 * h);
            let u = sol.u.get(i, j);
            potential += h * h * w(s, t) * (3.0 * u * u - 1.0);
        }
    }
    // only the edges leaving the patch carry gradient
    let mut boundary = 0.0;
    for k in lo..=hi {
        let x = k as f64 * h;
        boundary += w((lo as f64 - 0.5) * h, x) + w((hi as f64 + 0.5) * h, x);
        boundary += w(x, (lo as f64 - 0.5) * h) + w(x, (hi as f64 + 0.5) * h);
    }
    let e = a.energy(&v);
    assert!(
        (e - potential - boundary).abs() <= 1e-12 * (potential.abs() + boundary),
        "{e} vs {}",
        potential + boundary
    );
}

#[test]
fn unstable_for_m_up_to_three() {
    for m in 1..=3 {
        let (_, e) = estimate(m, 16.0, 0.1);
        assert!(e.lambda_min < -0.001, "m = {m}: {}", e.lambda_min);
    }
}

#[test]
fn nonnegative_indicator_for_m_four_to_six() {
    for m in 4..=6 {
        let (_, e) = estimate(m, 16.0, 0.1);
        assert!(e.lambda_min > -0.01, "m = {m}: {}", e.lambda_min);
    }
}

#[test]
fn residual_bound_at_return() {
    for m in [1, 4] {
        let (a, e) = estimate(m, 16.0, 0.1);
        let mut kv = vec![0.0; a.len()];
        a.stiffness.matvec(&e.eigenvector, &mut kv);
        let bv: Vec<f64> = e.eigenvector.iter().zip(&a.mass).map(|(v, b)| v * b).collect();
        let r: f64 = kv.iter().zip(&bv).map(|(k, b)| (k - e.lambda_min * b).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = bv.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(r <= EigConfig::default().tol * nb * (1.0 + 1e-6));
        assert!((a.rayleigh_quotient(&e.eigenvector) - e.lambda_min).abs() < 1e-10);
    }
}

#[test]
fn dense_oracle_agrees_on_coarse_grid() {
    for m in 1..=6 {
        let (a, e) = estimate(m, 8.0, 0.2);
        let d = dense_eigenvalues(&a).unwrap();
        assert!((e.lambda_min - d[0]).abs() <= 1e-8 * d[0].abs().max(1.0), "m = {m}: {} vs {}", e.lambda_min, d[0]);
        for (r, x) in e.ritz_values.iter().zip(&d).take(2) {
            assert!((r - x).abs() < 1e-4);
        }
    }
}

#[test]
fn monotone_in_domain_size() {
    for m in [2, 4] {
        let l: Vec<f64> = [8.0, 12.0, 16.0].iter().map(|&r| estimate(m, r, 0.1).1.lambda_min).collect();
        assert!(l[1] <= l[0] && l[2] <= l[1], "m = {m}: {l:?}");
    }
}

#[test]
fn negative_eigenvalue_persists_under_refinement() {
    for m in 1..=3 {
        let a = estimate(m, 16.0, 0.1).1.lambda_min;
        let b = estimate(m, 16.0, 0.05).1.lambda_min;
        assert!(b < 0.0 && ((a - b) / b).abs() < 0.1, "m = {m}: {a} vs {b}");
    }
}

#[test]
fn ground_state_even_across_cone() {
    for m in 1..=3 {
        let (a, e) = estimate(m, 16.0, 0.1);
        assert!(cone_symmetry_defect(&a, &e.eigenvector) < 1e-6);
        assert!(e.eigenvector.iter().all(|&v| v > -1e-10), "ground state has one sign");
    }
}

#[test]
fn deterministic_estimates() {
    let a = assemble(&solve(2, 8.0, 0.2));
    let x = min_eigenvalue(&a, &EigConfig::default()).unwrap();
    let y = min_eigenvalue(&a, &EigConfig::default()).unwrap();
    assert_eq!(x, y);
    assert_eq!(eigenvector_csv(&a, &x), eigenvector_csv(&a, &y));
    assert!(eigenvector_csv(&a, &x).starts_with("s,t,value\n0.2,0.2,"));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let (a, _) = estimate(4, 8.0, 0.2);
    let cfg = EigConfig { max_iterations: 2, ..EigConfig::default() };
    assert!(matches!(min_eigenvalue(&a, &cfg), Err(saddlecheck::EigenError::NotConverged { iterations: 2, .. })));
}

#[test]
fn shift_above_spectrum_bottom_breaks_factorization() {
    let (a, _) = estimate(1, 8.0, 0.2);
    let cfg = EigConfig { shift: 0.0, ..EigConfig::default() };
    assert!(matches!(min_eigenvalue(&a, &cfg), Err(saddlecheck::EigenError::Factorization(_))));
}

#[test]
fn rayleigh_quotient_of_us_plus_ut_nonnegative_m4() {
    let sol = solve(4, 16.0, 0.1);
    let a = assemble(&sol);
    let eta = Field::from_fn(&sol.grid, |i, j| {
        let (p, q) = (i.max(j), i.min(j));
        if p + 1 >= sol.grid.n {
            0.0
        } else {
            sol.u_s.get(p, q) + sol.u_t.get(p, q)
        }
    });
    let q = a.rayleigh_quotient(&a.restrict(&eta));
    assert!(q >= -1e-3, "{q}");
}

fn sealed(n: usize, sol: &SaddleSolution) -> SealedReport {
    let p = CandidateParams::new(n).unwrap();
    SealedReport::seal(verify_supersolution(sol, &p).unwrap())
}

fn m4() -> &'static SaddleSolution {
    static S: OnceLock<SaddleSolution> = OnceLock::new();
    S.get_or_init(|| solve(4, 12.0, 0.05))
}

#[test]
fn certificate_issued_for_n8() {
    let sol = m4();
    let s = sealed(8, sol);
    let c = stability_certificate(sol, &CandidateParams::new(8).unwrap(), &s).unwrap();
    assert_eq!((c.n, c.m, c.schema_version), (8, 4, 1));
    assert!(c.phi_min > 0.0 && c.max_l_phi <= 1e-8);
    assert_eq!(c.report_sha256, s.sha256);
    assert_eq!(c.solution_sha256.len(), 64);
    let again = stability_certificate(sol, &CandidateParams::new(8).unwrap(), &s).unwrap();
    assert_eq!(serde_json::to_string(&c).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn tampered_report_refused() {
    let sol = m4();
    let mut s = sealed(8, sol);
    s.report.report.worst_margin += 1e-3;
    assert_eq!(
        stability_certificate(sol, &CandidateParams::new(8).unwrap(), &s),
        Err(CertificateError::TamperedReport)
    );
}

#[test]
fn failed_report_refused() {
    let sol = m4();
    let mut r = sealed(8, sol).report;
    r.report.pass = false;
    r.report.worst_margin = -1.0;
    let s = SealedReport::seal(r);
    assert!(matches!(
        stability_certificate(sol, &CandidateParams::new(8).unwrap(), &s),
        Err(CertificateError::PrerequisiteFailed(_))
    ));
    let mut r = sealed(8, sol).report;
    r.phi_positive = false;
    assert!(matches!(
        stability_certificate(sol, &CandidateParams::new(8).unwrap(), &SealedReport::seal(r)),
        Err(CertificateError::PrerequisiteFailed(_))
    ));
}

#[test]
fn report_for_other_candidate_refused() {
    let sol = m4();
    let s = sealed(8, sol);
    let p = CandidateParams::new(8).unwrap().without_phi0();
    assert!(matches!(stability_certificate(sol, &p, &s), Err(CertificateError::InputMismatch(_))));
    let p10 = CandidateParams::new(10).unwrap();
    assert!(matches!(stability_certificate(sol, &p10, &s), Err(CertificateError::InputMismatch(_))));
}

#[test]
#[ignore = "Φ₀-free candidate still has LΦ ≤ 0 on the truncated domain; see the decisions ledger"]
fn certificate_refused_without_phi0() {
    let sol = solve(4, 20.0, 0.05);
    let p = CandidateParams::new(8).unwrap().without_phi0();
    let s = SealedReport::seal(verify_supersolution(&sol, &p).unwrap());
    assert!(stability_certificate(&sol, &p, &s).is_err());
}
