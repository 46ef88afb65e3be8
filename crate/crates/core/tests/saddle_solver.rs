use saddlecheck::saddle_solver::*;
use saddlecheck::scalar_forms::{double_well, heteroclinic, hh_supersolution, DimensionParams};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

fn solve(m: usize, r: f64, h: f64) -> SaddleSolution {
    let grid = build_grid(r, h).unwrap();
    newton_solve(DimensionParams::new(m).unwrap(), SolverConfig::default(), &grid).unwrap()
}

fn m4_r12_h01() -> &'static SaddleSolution {
    static SOL: OnceLock<SaddleSolution> = OnceLock::new();
    SOL.get_or_init(|| solve(4, 12.0, 0.1))
}

fn yz(g: &Grid, i: usize, j: usize) -> (f64, f64) {
    let (s, t) = (g.coord(i), g.coord(j));
    ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2)
}

#[test]
fn converges_with_small_residual() {
    let sol = m4_r12_h01();
    assert!(sol.residual_norm <= 1e-10);
    assert!(sol.newton_iterations >= 1 && sol.newton_iterations < 20);
    // independent recomputation of the residual
    let r = apply_operator(&sol.u, sol.params, &sol.grid);
    assert!(r.max_abs() <= 1e-10);
}

#[test]
fn solution_invariants() {
    let sol = m4_r12_h01();
    let g = sol.grid;
    for i in 0..=g.n {
        assert_eq!(sol.u.get(i, i), 0.0);
        for j in 0..i {
            assert_eq!(sol.u.get(j, i), -sol.u.get(i, j));
            if i < g.n && j > 0 {
                let u = sol.u.get(i, j);
                assert!(u > 0.0 && u < 1.0, "u({i},{j}) = {u}");
                assert!(sol.u_s.get(i, j) > 0.0, "u_s({i},{j})");
                assert!(sol.u_t.get(i, j) < 0.0, "u_t({i},{j})");
            }
        }
    }
}

#[test]
fn deterministic_bitwise() {
    let a = solve(4, 8.0, 0.2);
    let b = solve(4, 8.0, 0.2);
    assert_eq!(a.u.data, b.u.data);
    assert_eq!(a.u_st.data, b.u_st.data);
}

#[test]
fn zero_boundary_gives_zero_fixed_point() {
    let grid = build_grid(8.0, 0.2).unwrap();
    let problem = Problem {
        params: DimensionParams::new(4).unwrap(),
        nonlinearity: Nonlinearity::AllenCahn,
        boundary: &|_, _| 0.0,
        guess: &|_, _| 0.0,
    };
    let (u, res, its) = solve_problem(&problem, SolverConfig::default(), &grid).unwrap();
    assert_eq!(its, 0);
    assert_eq!(res, 0.0);
    assert_eq!(u.max_abs(), 0.0);
}

#[test]
fn axis_derivative_vanishes() {
    let sol = m4_r12_h01();
    for i in 0..=sol.grid.n {
        assert_eq!(sol.u_t.get(i, 0), 0.0);
    }
}

#[test]
fn rotated_stencils_agree_with_chain_rule() {
    let sol = m4_r12_h01();
    let g = sol.grid;
    let mut worst: f64 = 0.0;
    for i in 1..g.n - 1 {
        for j in 1..i {
            let us = (sol.u_y.get(i, j) + sol.u_z.get(i, j)) * FRAC_1_SQRT_2;
            let ut = (sol.u_y.get(i, j) - sol.u_z.get(i, j)) * FRAC_1_SQRT_2;
            worst = worst.max((us - sol.u_s.get(i, j)).abs()).max((ut - sol.u_t.get(i, j)).abs());
        }
    }
    // O(h²) with an O(1) third-derivative constant
    assert!(worst < 0.5 * g.h * g.h, "{worst:e}");
}

#[test]
fn modica_estimate_on_solution() {
    for m in [1, 2, 4, 6] {
        let sol = solve(m, 8.0, 0.1);
        let g = sol.grid;
        let tau = 10.0 * g.h * g.h;
        for i in 1..g.n - 1 {
            for j in 1..i {
                let (us, ut, u) = (sol.u_s.get(i, j), sol.u_t.get(i, j), sol.u.get(i, j));
                let margin = double_well(u) - 0.5 * (us * us + ut * ut);
                assert!(margin >= -tau * 0.25, "m={m} ({i},{j}) {margin:e}");
            }
        }
    }
}

#[test]
fn below_hh_and_above_subsolution() {
    let sol = m4_r12_h01();
    let g = sol.grid;
    for i in 1..g.n {
        for j in 1..i {
            let (y, z) = yz(&g, i, j);
            let u = sol.u.get(i, j);
            assert!(u <= hh_supersolution(y, z) + 1e-12);
            assert!(u >= heteroclinic(0.45 * y, 0) * heteroclinic(0.45 * z, 0) - 1e-3);
        }
    }
}

#[test]
fn yz_form_consistent() {
    let sol = m4_r12_h01();
    let r = residual_yz_form(&sol, 1e-9);
    // axis nodes are flagged (y² − z² = 2st = 0)
    assert!(r.flagged[5 * sol.grid.side()]);
    let g = sol.grid;
    let mut worst: f64 = 0.0;
    for i in 2..g.n - 1 {
        for j in 2..g.n - 1 {
            worst = worst.max(r.field.get(i, j).abs());
        }
    }
    println!("yz residual h=0.1: {worst:e} (all {:e})", r.max_norm);
    assert!(worst <= 10.0 * 1e-10 + 2.0 * g.h * g.h, "{worst:e}");
}

#[test]
fn yz_residual_odd_symmetric() {
    let sol = m4_r12_h01();
    let r = residual_yz_form(&sol, 1e-9);
    let g = sol.grid;
    for i in 1..g.n - 1 {
        for j in 1..g.n - 1 {
            let a = r.field.get(i, j);
            let b = r.field.get(j, i);
            assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()), "({i},{j}) {a} {b}");
        }
    }
}

#[test]
fn sine_gordon_rate() {
    let rep = validate_exact(&Grid::new(12.0, 0.1).unwrap()).unwrap();
    println!("{rep:?}");
    assert!((rep.rate - 2.0).abs() <= 0.2, "{}", rep.rate);
    assert!(rep.residual_coarse < 0.1 * 0.1);
    let er = rep.error_rate.expect("sine-Gordon solve ran");
    assert!((er - 2.0).abs() <= 0.3, "{er}");
}

#[test]
fn refinement_is_second_order() {
    let c = solve(4, 8.0, 0.2);
    let f = solve(4, 8.0, 0.1);
    let m = solve(4, 8.0, 0.05);
    let diff = |a: &SaddleSolution, b: &SaddleSolution| {
        let k = (a.grid.n / b.grid.n).max(b.grid.n / a.grid.n);
        let (coarse, fine) = if a.grid.n < b.grid.n { (a, b) } else { (b, a) };
        let mut w: f64 = 0.0;
        for i in 0..=coarse.grid.n {
            for j in 0..=i {
                w = w.max((coarse.u.get(i, j) - fine.u.get(k * i, k * j)).abs());
            }
        }
        w
    };
    let d1 = diff(&c, &f);
    let d2 = diff(&f, &m);
    println!("refinement: {d1:e} {d2:e} ratio {}", d1 / d2);
    assert!(d1 / d2 > 3.0 && d1 / d2 < 5.0);
}

fn window_diff(a: &SaddleSolution, b: &SaddleSolution, window: f64) -> f64 {
    let g = a.grid;
    let mut w: f64 = 0.0;
    for i in 0..=g.n {
        if g.coord(i) > window {
            break;
        }
        for j in 0..=i {
            w = w.max((a.u.get(i, j) - b.u.get(i, j)).abs());
        }
    }
    w
}

#[test]
fn r_doubling_changes_half_window_below_1e6() {
    let s16 = solve(4, 16.0, 0.1);
    let s32 = solve(4, 32.0, 0.1);
    let d = window_diff(&s16, &s32, 8.0);
    assert!(d < 1e-6, "{d:e}");
}
