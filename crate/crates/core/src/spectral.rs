//! Principal eigenvalue of the second variation of the energy in the
//! doubly-radial class, and the supersolution-based stability certificate.
//!
//! The quadratic form `∫(|∇η|² + (3u² − 1)η²)·s^{m−1}t^{m−1}` is discretized on
//! the full quadrant with edge weights at the midpoints and half cells on the
//! axes. Nodes on `max(s, t) = R` are Dirichlet. For `m > 1` the weight
//! vanishes on the axes and those nodes are dropped.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidate::CandidateParams;
use crate::error::{CertificateError, EigenError};
use crate::io::{json_hash, solution_hash};
use crate::linalg::{dense_symmetric_eigen, Csr, SparseCholesky};
use crate::saddle_solver::{Field, SaddleSolution};
use crate::verifier_grid::SupersolutionReport;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFormAssembly {
    pub stiffness: Csr,
    /// Diagonal of the mass matrix, `h²·s^{m−1}t^{m−1}` times the half-cell factors.
    pub mass: Vec<f64>,
    /// Grid node `(i, j)` of each unknown.
    pub nodes: Vec<(usize, usize)>,
    /// Unknown index of each grid node, row-major over the `(N+1)²` nodes.
    pub index: Vec<Option<usize>>,
    pub side: usize,
    pub h: f64,
    pub m: usize,
}

fn weight(m: usize, s: f64, t: f64) -> f64 {
    let k = (m - 1) as i32;
    s.powi(k) * t.powi(k)
}

fn half(i: usize) -> f64 {
    if i == 0 {
        0.5
    } else {
        1.0
    }
}

/// Stiffness and mass of the pencil for a solved quadrant field.
pub fn assemble(sol: &SaddleSolution) -> QuadraticFormAssembly {
    let g = sol.grid;
    let (n, h, m) = (g.n, g.h, sol.params.m);
    let side = g.side();
    let mut index = vec![None; side * side];
    let mut nodes = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if m > 1 && (i == 0 || j == 0) {
                continue;
            }
            index[i * side + j] = Some(nodes.len());
            nodes.push((i, j));
        }
    }
    let idx = |i: usize, j: usize| index[i * side + j];
    let rows: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut trip = Vec::new();
            let mut mass = Vec::new();
            let edge = |trip: &mut Vec<_>, a: Option<usize>, b: Option<usize>, w: f64| {
                for (x, y) in [(a, b), (b, a)] {
                    if let Some(x) = x {
                        trip.push((x, x, w));
                        if let Some(y) = y {
                            trip.push((x, y, -w));
                        }
                    }
                }
            };
            let s = g.coord(i);
            for j in 0..n {
                let t = g.coord(j);
                let here = idx(i, j);
                edge(&mut trip, here, idx(i + 1, j), weight(m, s + 0.5 * h, t) * half(j));
                edge(&mut trip, here, idx(i, j + 1), weight(m, s, t + 0.5 * h) * half(i));
                if let Some(k) = here {
                    let mk = h * h * weight(m, s, t) * half(i) * half(j);
                    let u = sol.u.get(i, j);
                    mass.push((k, mk));
                    trip.push((k, k, mk * (3.0 * u * u - 1.0)));
                }
            }
            (trip, mass)
        })
        .collect();
    let mut trip = Vec::new();
    let mut mass = vec![0.0; nodes.len()];
    for (t, ms) in rows {
        trip.extend(t);
        for (k, v) in ms {
            mass[k] = v;
        }
    }
    QuadraticFormAssembly { stiffness: Csr::from_triplets(nodes.len(), trip), mass, nodes, index, side, h, m }
}

impl QuadraticFormAssembly {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Restriction of a grid field to the unknowns.
    pub fn restrict(&self, f: &Field) -> Vec<f64> {
        self.nodes.iter().map(|&(i, j)| f.get(i, j)).collect()
    }

    /// `ηᵀKη`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let mut kv = vec![0.0; v.len()];
        self.stiffness.par_matvec(v, &mut kv);
        dot(v, &kv)
    }

    /// `ηᵀKη / ηᵀBη`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        self.energy(v) / b_dot(&self.mass, v, v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn b_dot(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigConfig {
    /// Stop when `‖(K − λB)v‖ ≤ tol·‖Bv‖`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Shift `σ`; `K − σB` must be positive definite, which holds for `σ < −1`.
    pub shift: f64,
    /// Block size of the subspace iteration.
    pub block: usize,
}

impl Default for EigConfig {
    fn default() -> Self {
        EigConfig { tol: 1e-8, max_iterations: 2000, shift: -1.05, block: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigEstimate {
    pub lambda_min: f64,
    /// `‖(K − λB)v‖ / ‖Bv‖` at return.
    pub residual: f64,
    pub iterations: usize,
    /// Ritz values of the final block, ascending.
    pub ritz_values: Vec<f64>,
    /// `B`-normalized, with a positive sum.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

/// Deterministic start block: the constant vector, then products of sines.
fn start_block(a: &QuadraticFormAssembly, p: usize) -> Vec<Vec<f64>> {
    let l = a.side as f64;
    (0..p)
        .map(|k| {
            a.nodes
                .iter()
                .map(|&(i, j)| {
                    if k == 0 {
                        return 1.0;
                    }
                    let (ka, kb) = ((k + 1) / 2 + 1, k / 2 + 1);
                    let x = std::f64::consts::PI * (i as f64 + 0.5) / l;
                    let y = std::f64::consts::PI * (j as f64 + 0.5) / l;
                    (ka as f64 * x).cos() * (kb as f64 * y).cos()
                })
                .collect()
        })
        .collect()
}

/// Modified Gram-Schmidt in the `B` inner product.
fn b_orthonormalize(mass: &[f64], cols: &mut [Vec<f64>]) {
    for k in 0..cols.len() {
        for _ in 0..2 {
            for l in 0..k {
                let c = b_dot(mass, &cols[l], &cols[k]);
                let (head, tail) = cols.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[l]) {
                    *x -= c * y;
                }
            }
        }
        let nrm = b_dot(mass, &cols[k], &cols[k]).sqrt();
        for x in cols[k].iter_mut() {
            *x /= nrm;
        }
    }
}

/// Smallest eigenvalue of `Kv = λBv` by shifted block inverse iteration with
/// Rayleigh-Ritz on each block.
pub fn min_eigenvalue(a: &QuadraticFormAssembly, cfg: &EigConfig) -> Result<EigEstimate, EigenError> {
    let n = a.len();
    let p = cfg.block.clamp(1, n.max(1));
    let shifted = a.stiffness.add_diagonal(-cfg.shift, &a.mass);
    let chol = SparseCholesky::factor(&shifted).map_err(EigenError::Factorization)?;
    let mut x = start_block(a, p);
    b_orthonormalize(&a.mass, &mut x);
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let mut y: Vec<Vec<f64>> = x
            .par_iter()
            .map(|v| {
                let bv: Vec<f64> = v.iter().zip(&a.mass).map(|(x, m)| x * m).collect();
                chol.solve(&bv)
            })
            .collect();
        b_orthonormalize(&a.mass, &mut y);
        let ky: Vec<Vec<f64>> = y
            .par_iter()
            .map(|v| {
                let mut out = vec![0.0; n];
                a.stiffness.par_matvec(v, &mut out);
                out
            })
            .collect();
        let kp = Mat::<f64>::from_fn(p, p, |r, c| 0.5 * (dot(&y[r], &ky[c]) + dot(&y[c], &ky[r])));
        let (theta, w) = dense_symmetric_eigen(&kp).map_err(EigenError::Factorization)?;
        x = (0..p)
            .map(|c| {
                let mut v = vec![0.0; n];
                for r in 0..p {
                    let wr = w[(r, c)];
                    for (vi, yi) in v.iter_mut().zip(&y[r]) {
                        *vi += wr * yi;
                    }
                }
                v
            })
            .collect();
        // residual of the lowest Ritz pair, from K·y combined the same way
        let mut kx = vec![0.0; n];
        for r in 0..p {
            let wr = w[(r, 0)];
            for (k, v) in kx.iter_mut().zip(&ky[r]) {
                *k += wr * v;
            }
        }
        let bx: Vec<f64> = x[0].iter().zip(&a.mass).map(|(v, m)| v * m).collect();
        let r: Vec<f64> = kx.iter().zip(&bx).map(|(k, b)| k - theta[0] * b).collect();
        residual = norm(&r) / norm(&bx);
        if residual <= cfg.tol {
            let mut v = std::mem::take(&mut x[0]);
            if v.iter().sum::<f64>() < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            return Ok(EigEstimate {
                lambda_min: theta[0],
                residual,
                iterations: it,
                ritz_values: theta,
                eigenvector: v,
            });
        }
    }
    Err(EigenError::NotConverged { iterations: cfg.max_iterations, residual })
}

/// Oracle: all eigenvalues of `B^{−1/2}KB^{−1/2}` from a dense solver.
pub fn dense_eigenvalues(a: &QuadraticFormAssembly) -> Result<Vec<f64>, EigenError> {
    let mut k = a.stiffness.to_dense();
    let r: Vec<f64> = a.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    for i in 0..a.len() {
        for j in 0..a.len() {
            k[(i, j)] *= r[i] * r[j];
        }
    }
    let (vals, _) = dense_symmetric_eigen(&k).map_err(EigenError::Factorization)?;
    Ok(vals)
}

/// Eigenvector as `s,t,value` rows over the unknowns.
pub fn eigenvector_csv(a: &QuadraticFormAssembly, est: &EigEstimate) -> String {
    let mut out = String::from("s,t,value\n");
    for (&(i, j), v) in a.nodes.iter().zip(&est.eigenvector) {
        out.push_str(&format!("{},{},{v:e}\n", i as f64 * a.h, j as f64 * a.h));
    }
    out
}

/// Largest `|v(i,j) − v(j,i)|` relative to `max|v|`.
pub fn cone_symmetry_defect(a: &QuadraticFormAssembly, v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst: f64 = 0.0;
    for (k, &(i, j)) in a.nodes.iter().enumerate() {
        if let Some(l) = a.index[j * a.side + i] {
            worst = worst.max((v[k] - v[l]).abs());
        }
    }
    worst / scale
}

/// A supersolution report with the hash of its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SealedReport {
    pub report: SupersolutionReport,
    pub sha256: String,
}

impl SealedReport {
    pub fn seal(report: SupersolutionReport) -> SealedReport {
        let sha256 = json_hash(&report);
        SealedReport { report, sha256 }
    }

    pub fn intact(&self) -> bool {
        json_hash(&self.report) == self.sha256
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub schema_version: u32,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub h: f64,
    pub conclusion: String,
    /// `min Φ` over the checked nodes.
    pub phi_min: f64,
    /// Largest `LΦ` over the checked nodes.
    pub max_l_phi: f64,
    pub solution_sha256: String,
    pub candidate_sha256: String,
    pub report_sha256: String,
}

/// Stability of the saddle solution from a positive supersolution of the
/// linearized operator. Refuses unless the sealed report is intact, belongs to
/// this candidate and passed.
pub fn stability_certificate(
    sol: &SaddleSolution,
    cand: &CandidateParams,
    sealed: &SealedReport,
) -> Result<StabilityCertificate, CertificateError> {
    if !sealed.intact() {
        return Err(CertificateError::TamperedReport);
    }
    let r = &sealed.report;
    if cand.n != 2 * sol.params.m || r.report.id != format!("supersolution_n{}", cand.n) {
        return Err(CertificateError::InputMismatch(format!(
            "m = {}, candidate n = {}, report {}",
            sol.params.m, cand.n, r.report.id
        )));
    }
    if r.with_phi0 != (cand.phi0_coeff != 0.0) {
        return Err(CertificateError::InputMismatch("Φ₀ term differs from the candidate".into()));
    }
    if !r.report.pass {
        return Err(CertificateError::PrerequisiteFailed(format!(
            "LΦ = {:e} at {:?}",
            -r.report.worst_margin, r.report.worst_point
        )));
    }
    if !r.phi_positive {
        return Err(CertificateError::PrerequisiteFailed(format!("Φ = {:e} at {:?}", r.phi_min, r.phi_min_point)));
    }
    Ok(StabilityCertificate {
        schema_version: 1,
        n: cand.n,
        m: sol.params.m,
        r: sol.grid.r,
        h: sol.grid.h,
        conclusion: "stable: LΦ ≤ 0 with Φ > 0 on the grid".into(),
        phi_min: r.phi_min,
        max_l_phi: -r.report.worst_margin,
        solution_sha256: solution_hash(sol),
        candidate_sha256: json_hash(cand),
        report_sha256: sealed.sha256.clone(),
    })
}
