use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use saddlecheck::candidate::{coefficients, CandidateParams};
use saddlecheck::rigor::{builtin_expressions, run_claim, standard_claims, Interval, ProverConfig};
use saddlecheck::saddle_solver::{apply_operator, build_grid, newton_solve, SolverConfig};
use saddlecheck::scalar_forms::{rho, DimensionParams, RhoKind};
use saddlecheck::spectral::{assemble, min_eigenvalue, EigConfig};
use saddlecheck::verifier_grid::{run_inequality_suite, verify_supersolution};

fn scalar(c: &mut Criterion) {
    let p = CandidateParams::new(8).unwrap();
    c.bench_function("coefficients_n8", |b| b.iter(|| coefficients(black_box(5.0), black_box(3.0), &p)));
    c.bench_function("rho_z3", |b| b.iter(|| rho(black_box(3.0), RhoKind::Rho)));
}

fn grid(c: &mut Criterion) {
    let g = build_grid(8.0, 0.1).unwrap();
    let params = DimensionParams::new(4).unwrap();
    let sol = newton_solve(params, SolverConfig::default(), &g).unwrap();
    c.bench_function("apply_operator_r8_h01", |b| b.iter(|| apply_operator(black_box(&sol.u), params, &g)));

    let mut group = c.benchmark_group("coarse");
    group.sample_size(10);
    group.bench_function("newton_solve_m4_r8_h01", |b| b.iter(|| newton_solve(params, SolverConfig::default(), &g)));
    group.bench_function("inequality_suite_m4_r8_h01", |b| b.iter(|| run_inequality_suite(&sol)));
    let p = CandidateParams::new(8).unwrap();
    group.bench_function("supersolution_n8_r8_h01", |b| b.iter(|| verify_supersolution(&sol, &p)));
    let asm = assemble(&sol);
    group.bench_function("min_eigenvalue_m4_r8_h01", |b| b.iter(|| min_eigenvalue(&asm, &EigConfig::default())));
    group.finish();
}

fn rigor(c: &mut Criterion) {
    let mut cat = builtin_expressions(&CandidateParams::new(8).unwrap()).unwrap();
    let e = cat.get("C_s").unwrap().expr.clone();
    let bx = [Interval::new(4.0, 4.1), Interval::new(2.0, 2.1)];
    c.bench_function("interval_eval_c_s", |b| b.iter(|| e.eval(black_box(&bx))));
    let spec = standard_claims(8).into_iter().find(|s| s.entry == "C_ss").unwrap();
    let mut group = c.benchmark_group("prover");
    group.sample_size(10);
    group.bench_function("claim_c_ss_n8", |b| b.iter(|| run_claim(&mut cat, &spec, &ProverConfig::default())));
    group.finish();
}

criterion_group!(kernels, scalar, grid, rigor);
criterion_main!(kernels);
