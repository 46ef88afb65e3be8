//! Finite-difference Newton solver for the doubly-radial Allen-Cahn equation
//!
//! ```text
//! −u_ss − u_tt − (m−1)/s·u_s − (m−1)/t·u_t = u − u³
//! ```
//!
//! on the triangle `{0 ≤ t ≤ s ≤ R}` with `u = 0` on the diagonal,
//! `u = H(y)H(z)` on the outer edge `s = R` and even reflection across
//! `t = 0`. The quadrant is filled afterwards by `u(t, s) = −u(s, t)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{GridError, SolveError};
use crate::linalg::{Csr, SparseLu};
use crate::scalar_forms::{heteroclinic, hh_supersolution, DimensionParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub r: f64,
    pub h: f64,
    /// Number of intervals per side, `R/h`.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Diagonal,
    Outer,
    Axis,
    Interior,
}

/// Validated grid over `{0 ≤ t ≤ s ≤ R}`.
pub fn build_grid(r: f64, h: f64) -> Result<Grid, GridError> {
    if !(h > 0.0 && h <= 0.2) {
        return Err(GridError::Invalid(format!("h = {h} outside (0, 0.2]")));
    }
    if !(r >= 8.0) {
        return Err(GridError::Invalid(format!("R = {r} below 8")));
    }
    Grid::new(r, h)
}

impl Grid {
    /// Like [`build_grid`] without the size policy; only integrality is checked.
    pub fn new(r: f64, h: f64) -> Result<Grid, GridError> {
        let ratio = r / h;
        let n = ratio.round();
        if !(h > 0.0) || (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 4.0 {
            return Err(GridError::NonIntegral { ratio });
        }
        Ok(Grid { r, h, n: n as usize })
    }

    /// Nodes per quadrant side.
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Classification of a triangle node `j ≤ i`.
    pub fn kind(&self, i: usize, j: usize) -> NodeKind {
        debug_assert!(j <= i);
        if i == j {
            NodeKind::Diagonal
        } else if i == self.n {
            NodeKind::Outer
        } else if j == 0 {
            NodeKind::Axis
        } else {
            NodeKind::Interior
        }
    }

    pub fn triangle_node_count(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    pub fn diagonal_node_count(&self) -> usize {
        self.n + 1
    }

    /// True inside the outer `2h` band where one-sided stencils are used.
    pub fn in_outer_band(&self, i: usize, j: usize) -> bool {
        i.max(j) + 1 >= self.n
    }

    /// Unknown index map for `0 ≤ j < i < n`, row-major in `i`.
    fn unknowns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 1..self.n {
            for j in 0..i {
                out.push((i, j));
            }
        }
        out
    }
}

/// Row-major `(n+1)²` array over the quadrant; entry `(i, j)` sits at `s = ih, t = jh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub side: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(side: usize) -> Field {
        Field { side, data: vec![0.0; side * side] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize, usize) -> f64) -> Field {
        let side = grid.side();
        let mut data = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                data.push(f(i, j));
            }
        }
        Field { side, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.side + j] = v;
    }

    /// Value with even reflection across both axes (`−k ↦ k`).
    #[inline]
    pub fn get_ext(&self, i: isize, j: isize) -> f64 {
        self.get(i.unsigned_abs(), j.unsigned_abs())
    }

    /// Fills the upper triangle from the lower one by `u(j, i) = −u(i, j)`.
    pub fn reflect_odd(&mut self) {
        for i in 0..self.side {
            self.set(i, i, 0.0);
            for j in 0..i {
                let v = self.get(i, j);
                self.set(j, i, -v);
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Maximum number of step halvings per Newton iteration.
    pub damping: u32,
    pub linear_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { newton_tol: 1e-10, max_newton_iters: 50, damping: 30, linear_tol: 1e-10 }
    }
}

/// Right-hand side `f(u)` of `−Δu = f(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonlinearity {
    /// `u − u³`
    AllenCahn,
    /// `sin u`
    SineGordon,
}

impl Nonlinearity {
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        match self {
            Nonlinearity::AllenCahn => u - u * u * u,
            Nonlinearity::SineGordon => u.sin(),
        }
    }

    #[inline]
    pub fn derivative(self, u: f64) -> f64 {
        match self {
            Nonlinearity::AllenCahn => 1.0 - 3.0 * u * u,
            Nonlinearity::SineGordon => u.cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub params: DimensionParams,
    pub grid: Grid,
    pub u: Field,
    pub u_s: Field,
    pub u_t: Field,
    pub u_ss: Field,
    pub u_st: Field,
    pub u_tt: Field,
    pub u_y: Field,
    pub u_z: Field,
    pub residual_norm: f64,
    pub newton_iterations: usize,
}

impl SaddleSolution {
    /// Wraps a solved quadrant field; derivative fields start empty.
    pub fn from_field(params: DimensionParams, grid: Grid, u: Field, residual_norm: f64) -> Self {
        let z = Field::zeros(grid.side());
        SaddleSolution {
            params,
            grid,
            u,
            u_s: z.clone(),
            u_t: z.clone(),
            u_ss: z.clone(),
            u_st: z.clone(),
            u_tt: z.clone(),
            u_y: z.clone(),
            u_z: z,
            residual_norm,
            newton_iterations: 0,
        }
    }

    pub fn flagged(&self, i: usize, j: usize) -> bool {
        self.grid.in_outer_band(i, j)
    }

    /// `u_yz = ½(u_ss − u_tt)`.
    pub fn u_yz(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.u_ss.get(i, j) - self.u_tt.get(i, j))
    }
}

/// Discrete residual `−Δ_h u − f(u)` at one unknown node, reading only the
/// triangle (the 5-point stencil never crosses the diagonal).
#[inline]
fn residual_at(u: &Field, i: usize, j: usize, h: f64, drift: f64, f: Nonlinearity) -> f64 {
    let c = u.get(i, j);
    let s = i as f64 * h;
    let h2 = h * h;
    let e = u.get(i + 1, j);
    let w = u.get(i - 1, j);
    let lap_s = (e - 2.0 * c + w) / h2;
    let ds = drift / s * (e - w) / (2.0 * h);
    let (lap_t, dt) = if j == 0 {
        // even ghost u(i,−1) = u(i,1); drift limit (m−1)u_tt
        let nb = u.get(i, 1);
        let utt = 2.0 * (nb - c) / h2;
        (utt, drift * utt)
    } else {
        let t = j as f64 * h;
        let nn = u.get(i, j + 1);
        let ss = u.get(i, j - 1);
        ((nn - 2.0 * c + ss) / h2, drift / t * (nn - ss) / (2.0 * h))
    };
    -(lap_s + lap_t + ds + dt) - f.value(c)
}

/// Residual field of the reduced equation with the Allen-Cahn nonlinearity.
///
/// `u` must hold boundary data on the diagonal and outer edge; only the lower
/// triangle is read. Non-unknown nodes get 0.
pub fn apply_operator(u: &Field, params: DimensionParams, grid: &Grid) -> Field {
    apply_operator_with(u, params, grid, Nonlinearity::AllenCahn)
}

pub fn apply_operator_with(u: &Field, params: DimensionParams, grid: &Grid, f: Nonlinearity) -> Field {
    let mut out = Field::zeros(grid.side());
    let h = grid.h;
    let drift = params.drift;
    let side = grid.side();
    out.data.par_chunks_mut(side).enumerate().for_each(|(i, row)| {
        if i == 0 || i >= grid.n {
            return;
        }
        for (j, slot) in row.iter_mut().enumerate().take(i) {
            *slot = residual_at(u, i, j, h, drift, f);
        }
    });
    out
}

/// Boundary data, initial iterate and nonlinearity of one solve.
pub struct Problem<'a> {
    pub params: DimensionParams,
    pub nonlinearity: Nonlinearity,
    pub boundary: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub guess: &'a (dyn Fn(f64, f64) -> f64 + Sync),
}

fn hh_st(s: f64, t: f64) -> f64 {
    hh_supersolution((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2)
}

fn subsolution_guess(s: f64, t: f64) -> f64 {
    let y = (s + t) * FRAC_1_SQRT_2;
    let z = (s - t) * FRAC_1_SQRT_2;
    heteroclinic(0.45 * y, 0) * heteroclinic(0.45 * z, 0)
}

/// Saddle solution `U_m`: outer data `H(y)H(z)`, initial iterate `H(0.45y)H(0.45z)`.
pub fn newton_solve(params: DimensionParams, config: SolverConfig, grid: &Grid) -> Result<SaddleSolution, SolveError> {
    let problem =
        Problem { params, nonlinearity: Nonlinearity::AllenCahn, boundary: &hh_st, guess: &subsolution_guess };
    let (u, res, its) = solve_problem(&problem, config, grid)?;
    let mut sol = SaddleSolution::from_field(params, *grid, u, res);
    sol.newton_iterations = its;
    Ok(compute_derivatives(sol))
}

fn residual_vector(u: &Field, nodes: &[(usize, usize)], grid: &Grid, p: &Problem) -> Vec<f64> {
    nodes.par_iter().map(|&(i, j)| residual_at(u, i, j, grid.h, p.params.drift, p.nonlinearity)).collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

fn jacobian(u: &Field, nodes: &[(usize, usize)], index: &[usize], grid: &Grid, p: &Problem) -> Csr {
    let h = grid.h;
    let h2 = h * h;
    let drift = p.params.drift;
    let side = grid.side();
    let mut trip = Vec::with_capacity(nodes.len() * 5);
    for (row, &(i, j)) in nodes.iter().enumerate() {
        let s = i as f64 * h;
        let mut diag = 4.0 / h2 - p.nonlinearity.derivative(u.get(i, j));
        let mut push = |pi: usize, pj: usize, c: f64| {
            let k = index[pi * side + pj];
            if k != usize::MAX {
                trip.push((row, k, c));
            }
        };
        push(i + 1, j, -1.0 / h2 - drift / s / (2.0 * h));
        push(i - 1, j, -1.0 / h2 + drift / s / (2.0 * h));
        if j == 0 {
            diag += 2.0 * drift / h2;
            push(i, 1, -2.0 / h2 - 2.0 * drift / h2);
        } else {
            let t = j as f64 * h;
            push(i, j + 1, -1.0 / h2 - drift / t / (2.0 * h));
            push(i, j - 1, -1.0 / h2 + drift / t / (2.0 * h));
        }
        trip.push((row, row, diag));
    }
    Csr::from_triplets(nodes.len(), trip)
}

/// Damped Newton on the triangle. Returns the odd-reflected quadrant field,
/// the final residual max-norm and the iteration count.
pub fn solve_problem(p: &Problem, config: SolverConfig, grid: &Grid) -> Result<(Field, f64, usize), SolveError> {
    if !(config.newton_tol > 0.0) || config.max_newton_iters == 0 {
        return Err(SolveError::Config(format!("{config:?}")));
    }
    let n = grid.n;
    let side = grid.side();
    let mut u = Field::zeros(side);
    for i in 0..=n {
        let s = grid.coord(i);
        for j in 0..i {
            let t = grid.coord(j);
            let v = if i == n { (p.boundary)(s, t) } else { (p.guess)(s, t) };
            u.set(i, j, v);
        }
    }
    let nodes = grid.unknowns();
    let mut index = vec![usize::MAX; side * side];
    for (k, &(i, j)) in nodes.iter().enumerate() {
        index[i * side + j] = k;
    }

    let mut res = residual_vector(&u, &nodes, grid, p);
    let mut norm = max_norm(&res);
    let mut it = 0;
    while norm > config.newton_tol {
        if it == config.max_newton_iters {
            return Err(SolveError::NotConverged { iterations: it, residual: norm });
        }
        it += 1;
        let jac = jacobian(&u, &nodes, &index, grid, p);
        let lu = SparseLu::factor(&jac).map_err(SolveError::Linear)?;
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let mut du = lu.solve(&rhs);
        // one refinement step if the solve missed linear_tol
        let mut jd = vec![0.0; du.len()];
        jac.matvec(&du, &mut jd);
        let lin_res: Vec<f64> = rhs.iter().zip(&jd).map(|(b, a)| b - a).collect();
        if max_norm(&lin_res) > config.linear_tol * max_norm(&rhs) {
            let corr = lu.solve(&lin_res);
            for (d, c) in du.iter_mut().zip(&corr) {
                *d += c;
            }
        }

        let mut alpha = 1.0;
        let mut halvings = 0;
        loop {
            let mut trial = u.clone();
            for (k, &(i, j)) in nodes.iter().enumerate() {
                trial.set(i, j, u.get(i, j) + alpha * du[k]);
            }
            let tres = residual_vector(&trial, &nodes, grid, p);
            let tnorm = max_norm(&tres);
            if tnorm < norm {
                u = trial;
                res = tres;
                norm = tnorm;
                break;
            }
            if halvings == config.damping {
                return Err(SolveError::LineSearch { iteration: it, residual: norm });
            }
            halvings += 1;
            alpha *= 0.5;
        }
    }
    u.reflect_odd();
    Ok((u, norm, it))
}

#[inline]
fn d1(g: &dyn Fn(isize) -> f64, k: isize, n: isize, h: f64) -> f64 {
    if k < n {
        (g(k + 1) - g(k - 1)) / (2.0 * h)
    } else {
        (3.0 * g(k) - 4.0 * g(k - 1) + g(k - 2)) / (2.0 * h)
    }
}

#[inline]
fn d2(g: &dyn Fn(isize) -> f64, k: isize, n: isize, h: f64) -> f64 {
    if k < n {
        (g(k + 1) - 2.0 * g(k) + g(k - 1)) / (h * h)
    } else {
        (2.0 * g(k) - 5.0 * g(k - 1) + 4.0 * g(k - 2) - g(k - 3)) / (h * h)
    }
}

/// Fills all derivative fields on the quadrant. Central stencils with even
/// reflection across the axes; one-sided second-order stencils on the outer edge.
pub fn compute_derivatives(mut sol: SaddleSolution) -> SaddleSolution {
    let grid = sol.grid;
    let n = grid.n as isize;
    let h = grid.h;
    let side = grid.side();
    let u = &sol.u;

    let sweep = |f: &(dyn Fn(isize, isize) -> f64 + Sync)| -> Field {
        let mut out = Field::zeros(side);
        out.data.par_chunks_mut(side).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = f(i as isize, j as isize);
            }
        });
        out
    };

    let u_s = sweep(&|i, j| d1(&|k| u.get_ext(k, j), i, n, h));
    let u_t = sweep(&|i, j| d1(&|k| u.get_ext(i, k), j, n, h));
    let u_ss = sweep(&|i, j| d2(&|k| u.get_ext(k, j), i, n, h));
    let u_tt = sweep(&|i, j| d2(&|k| u.get_ext(i, k), j, n, h));
    // u_t is even in s, so the s-difference of u_t is the 4-point cross stencil
    let u_st = sweep(&|i, j| d1(&|k| u_t.get_ext(k, j), i, n, h));
    let rot = 2.0 * SQRT_2 * h;
    let u_y = sweep(&|i, j| {
        if i < n && j < n {
            (u.get_ext(i + 1, j + 1) - u.get_ext(i - 1, j - 1)) / rot
        } else {
            (u_s.get(i as usize, j as usize) + u_t.get(i as usize, j as usize)) * FRAC_1_SQRT_2
        }
    });
    let u_z = sweep(&|i, j| {
        if i < n && j < n {
            (u.get_ext(i + 1, j - 1) - u.get_ext(i - 1, j + 1)) / rot
        } else {
            (u_s.get(i as usize, j as usize) - u_t.get(i as usize, j as usize)) * FRAC_1_SQRT_2
        }
    });
    sol.u_s = u_s;
    sol.u_t = u_t;
    sol.u_ss = u_ss;
    sol.u_tt = u_tt;
    sol.u_st = u_st;
    sol.u_y = u_y;
    sol.u_z = u_z;
    sol
}

/// Residual of the rotated-coordinate form
/// `−u_yy − u_zz − 2(m−1)/(y²−z²)·(y u_y − z u_z) − (u − u³)`.
#[derive(Debug, Clone)]
pub struct YzResidual {
    pub field: Field,
    /// Nodes where `y² − z² ≤ δ` (the coefficient is singular there).
    pub flagged: Vec<bool>,
    pub max_norm: f64,
}

pub fn residual_yz_form(sol: &SaddleSolution, delta: f64) -> YzResidual {
    let grid = sol.grid;
    let side = grid.side();
    let n = grid.n;
    let h = grid.h;
    let u = &sol.u;
    let mut field = Field::zeros(side);
    let mut flagged = vec![false; side * side];
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (s, t) = (grid.coord(i), grid.coord(j));
            let y = (s + t) * FRAC_1_SQRT_2;
            let z = (s - t) * FRAC_1_SQRT_2;
            let gap = y * y - z * z;
            if gap <= delta {
                flagged[i * side + j] = true;
                field.set(i, j, f64::NAN);
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let c = u.get(i, j);
            let uyy = (u.get_ext(ii + 1, jj + 1) - 2.0 * c + u.get_ext(ii - 1, jj - 1)) / (2.0 * h * h);
            let uzz = (u.get_ext(ii + 1, jj - 1) - 2.0 * c + u.get_ext(ii - 1, jj + 1)) / (2.0 * h * h);
            let drift = 2.0 * sol.params.drift / gap * (y * sol.u_y.get(i, j) - z * sol.u_z.get(i, j));
            let r = -uyy - uzz - drift - (c - c * c * c);
            field.set(i, j, r);
            worst = worst.max(r.abs());
        }
    }
    YzResidual { field, flagged, max_norm: worst }
}

/// `4·arctan(cosh(s/√2)/cosh(t/√2)) − π`, the planar sine-Gordon saddle.
pub fn sine_gordon_exact(s: f64, t: f64) -> f64 {
    // ratio of cosh via exponentials to avoid overflow at large arguments
    let a = s.abs() * FRAC_1_SQRT_2;
    let b = t.abs() * FRAC_1_SQRT_2;
    let ratio = ((a - b).exp()) * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp());
    4.0 * ratio.atan() - std::f64::consts::PI
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub h: f64,
    pub residual_coarse: f64,
    pub residual_fine: f64,
    /// `log2(residual_coarse / residual_fine)`
    pub rate: f64,
    /// Max error of the discrete solution against the exact one, when the solve ran.
    pub error_coarse: Option<f64>,
    pub error_fine: Option<f64>,
    pub error_rate: Option<f64>,
}

fn exact_samples(grid: &Grid) -> Field {
    let mut u = Field::from_fn(grid, |i, j| sine_gordon_exact(grid.coord(i), grid.coord(j)));
    u.reflect_odd();
    u
}

fn unknown_max(f: &Field, grid: &Grid) -> f64 {
    grid.unknowns().iter().fold(0.0f64, |a, &(i, j)| a.max(f.get(i, j).abs()))
}

fn sine_gordon_error(grid: &Grid) -> Option<f64> {
    let params = DimensionParams::new(1).ok()?;
    let problem = Problem {
        params,
        nonlinearity: Nonlinearity::SineGordon,
        boundary: &sine_gordon_exact,
        guess: &|s, t| std::f64::consts::PI * subsolution_guess(s, t),
    };
    let (u, _, _) = solve_problem(&problem, SolverConfig::default(), grid).ok()?;
    let exact = exact_samples(grid);
    let diff = Field { side: u.side, data: u.data.iter().zip(&exact.data).map(|(a, b)| a - b).collect() };
    Some(unknown_max(&diff, grid))
}

/// Residual of the exact sine-Gordon saddle under the `m = 1` operator with
/// `sin u`, at `h` and `h/2`, and the observed order.
pub fn validate_exact(grid: &Grid) -> Result<ConvergenceReport, GridError> {
    let fine = Grid::new(grid.r, grid.h / 2.0)?;
    let params = DimensionParams::new(1).expect("m = 1");
    let rc = unknown_max(&apply_operator_with(&exact_samples(grid), params, grid, Nonlinearity::SineGordon), grid);
    let rf = unknown_max(&apply_operator_with(&exact_samples(&fine), params, &fine, Nonlinearity::SineGordon), &fine);
    let ec = sine_gordon_error(grid);
    let ef = sine_gordon_error(&fine);
    let error_rate = match (ec, ef) {
        (Some(a), Some(b)) if b > 0.0 => Some((a / b).log2()),
        _ => None,
    };
    Ok(ConvergenceReport {
        h: grid.h,
        residual_coarse: rc,
        residual_fine: rf,
        rate: (rc / rf).log2(),
        error_coarse: ec,
        error_fine: ef,
        error_rate,
    })
}
