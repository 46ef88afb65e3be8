//! Grid-wise verification of the pointwise inequalities satisfied by the
//! saddle solution, and of the supersolution condition `LΦ ≤ 0`, `Φ > 0`.
//!
//! A check is a margin function that is nonnegative wherever the inequality
//! holds, together with a per-node tolerance `τ = κh²·Σ|terms| + ε/h²`. The
//! sum runs over the terms built from grid fields; closed-form terms carry no
//! discretization error and do not widen `τ`. The `ε/h²` part is a floor for
//! rounding noise in difference quotients where every term is tiny.
//! These are validations, not proofs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::candidate::{l_phi, phi_field, region_classify, CandidateParams, Region};
use crate::error::CandidateError;
use crate::saddle_solver::{Field, Grid, SaddleSolution};
use crate::scalar_forms::{double_well, heteroclinic, rho, RhoKind};

/// Default `κ` in the tolerance model.
pub const KAPPA: f64 = 10.0;
/// Looser `κ` for the check evaluated on the cone itself.
pub const KAPPA_CONE: f64 = 50.0;
/// Rounding floor numerator: `τ ≥ ROUNDING_FLOOR / h²`.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Nodes dropped next to the cone and the axis.
pub const EXCLUSION: usize = 2;
/// Width in `s` of the far-field band `max(s, t) > R − FAR_FIELD` left out of
/// every check. The outer Dirichlet data bends the solution there.
pub const FAR_FIELD: f64 = 2.0;
/// Bound used by [`verify_supersolution`] for `LΦ`.
pub const SUPERSOLUTION_TOL: f64 = 1e-8;

/// Node set a check quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSet {
    /// Triangle nodes with `j ≥ 2`, `i − j ≥ 2` and `s ≤ R − FAR_FIELD`.
    Interior,
    /// [`NodeSet::Interior`] restricted to `max(s, t) ≤ R − R/3`.
    Near,
    /// [`NodeSet::Interior`] with `z > 1`.
    ZAboveOne,
    /// [`NodeSet::Interior`] with `i + j` even, so that `(y, 0)` is a node.
    EvenLines,
    /// Cone nodes `i = j` with `i ≥ 2` and `s ≤ R − FAR_FIELD`.
    Cone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSpec {
    pub id: &'static str,
    /// The inequality, in the solution's variables.
    pub statement: &'static str,
    pub nodes: NodeSet,
    pub kappa: f64,
    /// Width of the boundary exclusion, in nodes.
    pub exclusion: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub statement: String,
    pub pass: bool,
    /// Margin at the node where `margin + τ` is smallest.
    pub worst_margin: f64,
    pub worst_point: (f64, f64),
    pub nodes_checked: usize,
    pub nodes_excluded: usize,
    /// `τ` at the worst node.
    pub tolerance_used: f64,
}

/// Point values handed to a margin function.
struct At<'a> {
    sol: &'a SaddleSolution,
    i: usize,
    j: usize,
    s: f64,
    t: f64,
    y: f64,
    z: f64,
    k: f64,
    rho: &'a [f64],
}

impl At<'_> {
    fn u(&self) -> f64 {
        self.sol.u.get(self.i, self.j)
    }
    fn us(&self) -> f64 {
        self.sol.u_s.get(self.i, self.j)
    }
    fn ut(&self) -> f64 {
        self.sol.u_t.get(self.i, self.j)
    }
    fn uss(&self) -> f64 {
        self.sol.u_ss.get(self.i, self.j)
    }
    fn ust(&self) -> f64 {
        self.sol.u_st.get(self.i, self.j)
    }
    fn utt(&self) -> f64 {
        self.sol.u_tt.get(self.i, self.j)
    }
    fn uy(&self) -> f64 {
        self.sol.u_y.get(self.i, self.j)
    }
    fn uz(&self) -> f64 {
        self.sol.u_z.get(self.i, self.j)
    }
    /// `u_s` at the cone node on the same `y` line; needs `i + j` even.
    fn us_cone(&self) -> f64 {
        let c = (self.i + self.j) / 2;
        self.sol.u_s.get(c, c)
    }
}

/// `Σ` of the terms, and `Σ|terms|` as the magnitude scale.
fn sum(terms: &[f64]) -> (f64, f64) {
    terms.iter().fold((0.0, 0.0), |(a, b), &x| (a + x, b + x.abs()))
}

/// As [`sum`], with closed-form terms that add to the margin only.
fn mix(grid_terms: &[f64], exact: &[f64]) -> (f64, f64) {
    let (v, scale) = sum(grid_terms);
    (v + exact.iter().sum::<f64>(), scale)
}

type MarginFn = fn(&At) -> (f64, f64);

fn catalog() -> Vec<(CheckSpec, MarginFn)> {
    use NodeSet::*;
    let c = |id, statement, nodes| CheckSpec { id, statement, nodes, kappa: KAPPA, exclusion: EXCLUSION };
    vec![
        (c("1", "½(u_s² + u_t²) ≤ F(u)", Interior), |a| {
            sum(&[double_well(a.u()), -0.5 * a.us() * a.us(), -0.5 * a.ut() * a.ut()])
        }),
        (c("2", "t·u_s + s·u_t ≤ 0", Interior), |a| sum(&[-a.t * a.us(), -a.s * a.ut()])),
        (c("3a", "u_s + u_t ≥ 0", Interior), |a| sum(&[a.us(), a.ut()])),
        (c("3b", "u_s + u_t ≤ 2z/(y+z)·u_s", Interior), |a| {
            sum(&[2.0 * a.z / (a.y + a.z) * a.us(), -a.us(), -a.ut()])
        }),
        (c("4", "u_s ≤ 2(e^{0.85t} + 4.9/√t)e^{−0.85s}", Near), |a| {
            mix(&[-a.us()], &[2.0 * ((0.85 * a.t).exp() + 4.9 / a.t.sqrt()) * (-0.85 * a.s).exp()])
        }),
        (c("5", "u_s/s − u_ss ≥ 0", Interior), |a| sum(&[a.us() / a.s, -a.uss()])),
        (c("6", "u_s/s + u_t/t − u_ss − u_tt ≥ 0", Interior), |a| {
            sum(&[a.us() / a.s, a.ut() / a.t, -a.uss(), -a.utt()])
        }),
        (c("7", "u_s + u_t ≤ (1/t² − 1/s²)(2(u_s − u_t) + √(u_s − u_t))", Interior), |a| {
            let d = a.us() - a.ut();
            let w = 1.0 / (a.t * a.t) - 1.0 / (a.s * a.s);
            sum(&[w * (2.0 * d + d.sqrt()), -a.us(), -a.ut()])
        }),
        (c("8", "u − u³ + u_ss ≥ 0", Interior), |a| sum(&[a.u() - a.u().powi(3), a.uss()])),
        (c("9", "√2·u_s·u + u_ss ≥ 0", Interior), |a| sum(&[SQRT_2 * a.us() * a.u(), a.uss()])),
        (c("10", "√2·u_t·u + u_st ≤ 0", Interior), |a| sum(&[-SQRT_2 * a.ut() * a.u(), -a.ust()])),
        (c("11", "2(u_s + u_t) + u_st + u_ss ≥ 0", Interior), |a| {
            sum(&[2.0 * a.us(), 2.0 * a.ut(), a.ust(), a.uss()])
        }),
        (c("12", "2(u_s + u_t) − u_st − u_tt ≥ 0", Interior), |a| {
            sum(&[2.0 * a.us(), 2.0 * a.ut(), -a.ust(), -a.utt()])
        }),
        (c("13a", "u/y + u/z − u_y − u_z ≥ 0", Interior), |a| sum(&[a.u() / a.y, a.u() / a.z, -a.uy(), -a.uz()])),
        (c("13b", "u ≥ y·u_y", Interior), |a| sum(&[a.u(), -a.y * a.uy()])),
        (CheckSpec { kappa: KAPPA_CONE, ..c("14", "u_z − y·u_yz ≥ 0 at z = 0", Cone) }, |a| {
            let uyz = 0.5 * (a.uss() - a.utt());
            sum(&[a.uz(), -a.y * uyz])
        }),
        (c("15", "−u_t/t + u_st + u_tt ≥ 0", Interior), |a| sum(&[-a.ut() / a.t, a.ust(), a.utt()])),
        (c("16", "(m−1)(1/t − 1/s)u_s + u_ss + 2u_st ≥ 0", Interior), |a| {
            sum(&[a.k * (1.0 / a.t - 1.0 / a.s) * a.us(), a.uss(), 2.0 * a.ust()])
        }),
        (c("17", "(m−1)(1/t − 1/s)(u_s − u_t) + 2u_st + u_ss + u_tt ≥ 0", Interior), |a| {
            sum(&[a.k * (1.0 / a.t - 1.0 / a.s) * (a.us() - a.ut()), 2.0 * a.ust(), a.uss(), a.utt()])
        }),
        (c("18", "u_st + u_ss + (1/t² − 1/s²)(2(u_s − u_t) + √(u_s − u_t)) ≥ 0", Interior), |a| {
            let d = a.us() - a.ut();
            let w = 1.0 / (a.t * a.t) - 1.0 / (a.s * a.s);
            sum(&[a.ust(), a.uss(), w * (2.0 * d + d.sqrt())])
        }),
        (c("19", "u_s·u + u_ss ≥ 0", Interior), |a| sum(&[a.us() * a.u(), a.uss()])),
        (c("20", "−u_t·u − u_st ≥ 0", Interior), |a| sum(&[-a.ut() * a.u(), -a.ust()])),
        (c("21", "((m−1)/2)(1/t − 1/s)u_s + u_ss + u_st ≥ 0", Interior), |a| {
            sum(&[0.5 * a.k * (1.0 / a.t - 1.0 / a.s) * a.us(), a.uss(), a.ust()])
        }),
        (c("22", "((m−1)/2)(1/s − 1/t)u_t − u_st − u_tt ≥ 0", Interior), |a| {
            sum(&[0.5 * a.k * (1.0 / a.s - 1.0 / a.t) * a.ut(), -a.ust(), -a.utt()])
        }),
        (c("23", "u_s + u_t − u_st − u_tt ≥ 0", Interior), |a| sum(&[a.us(), a.ut(), -a.ust(), -a.utt()])),
        (c("24", "u_s + u_t + u_st + u_ss ≥ 0", Interior), |a| sum(&[a.us(), a.ut(), a.ust(), a.uss()])),
        (c("25a", "u_s + u_t ≤ (1/t² − 1/s²)(u_s − u_t + ½√(u_s − u_t))", Interior), |a| {
            let d = a.us() - a.ut();
            let w = 1.0 / (a.t * a.t) - 1.0 / (a.s * a.s);
            sum(&[w * (d + 0.5 * d.sqrt()), -a.us(), -a.ut()])
        }),
        (c("25b", "(1/t² − 1/s²)(u_s − u_t + ½√(u_s − u_t)) + u_st + u_ss ≥ 0", Interior), |a| {
            let d = a.us() - a.ut();
            let w = 1.0 / (a.t * a.t) - 1.0 / (a.s * a.s);
            sum(&[w * (d + 0.5 * d.sqrt()), a.ust(), a.uss()])
        }),
        (c("26a", "∂_z(u² + 2u_s) ≥ 0, i.e. u_s·u − u_t·u + u_ss − u_st ≥ 0", Interior), |a| {
            sum(&[a.us() * a.u(), -a.ut() * a.u(), a.uss(), -a.ust()])
        }),
        (c("26b", "2u_s(y,z) ≥ 2u_s(y,0) + u²(y,0) − u²(y,z)", EvenLines), |a| {
            sum(&[2.0 * a.us(), -2.0 * a.us_cone(), a.u() * a.u()])
        }),
        (c("27a", "H(y)H(z) − u ≤ 4H(y)(H(z) + zH'(z))/(y² − z²)", Interior), |a| {
            let (hy, hz) = (heteroclinic(a.y, 0), heteroclinic(a.z, 0));
            let bound = 4.0 * hy * (hz + a.z * heteroclinic(a.z, 1)) / (a.y * a.y - a.z * a.z);
            mix(&[a.u()], &[bound, -hy * hz])
        }),
        (c("27b", "H(y)H(z) − u ≤ (5/4)(1/t − 1/s)H(y)ρ(z) for z > 1", ZAboveOne), |a| {
            let hy = heteroclinic(a.y, 0);
            let bound = 1.25 * (1.0 / a.t - 1.0 / a.s) * hy * a.rho[a.i - a.j];
            mix(&[a.u()], &[bound, -hy * heteroclinic(a.z, 0)])
        }),
        (c("28", "u ≥ H(0.45y)H(0.45z)", Interior), |a| {
            mix(&[a.u()], &[-heteroclinic(0.45 * a.y, 0) * heteroclinic(0.45 * a.z, 0)])
        }),
        (c("29", "u_ss + u_tt + (m−1)(u_s/s + u_t/t) ≥ −u(2u_s(y,z) + 1 − 2u_s(y,0))", EvenLines), |a| {
            let u = a.u();
            sum(&[
                a.uss(),
                a.utt(),
                a.k * a.us() / a.s,
                a.k * a.ut() / a.t,
                2.0 * u * a.us(),
                u,
                -2.0 * u * a.us_cone(),
            ])
        }),
    ]
}

/// Specs of every suite check, in report order.
pub fn suite_specs() -> Vec<CheckSpec> {
    catalog().into_iter().map(|(s, _)| s).collect()
}

fn in_set(g: &Grid, set: NodeSet, excl: usize, i: usize, j: usize) -> bool {
    let near = i + excl <= g.n && g.coord(i) <= g.r - FAR_FIELD;
    let interior = near && j >= excl && i >= j + excl;
    match set {
        NodeSet::Interior => interior,
        NodeSet::Near => interior && g.coord(i) <= g.r - g.r / 3.0,
        NodeSet::ZAboveOne => interior && (i - j) as f64 * g.h * FRAC_1_SQRT_2 > 1.0,
        NodeSet::EvenLines => interior && (i + j) % 2 == 0,
        NodeSet::Cone => near && i == j && i >= excl,
    }
}

/// `ρ(z)` at `z = d·h/√2` for every diagonal offset `d`.
fn rho_table(g: &Grid) -> Vec<f64> {
    (0..=g.n).into_par_iter().map(|d| rho(d as f64 * g.h * FRAC_1_SQRT_2, RhoKind::Rho).expect("z >= 0")).collect()
}

#[derive(Clone, Copy)]
struct Worst {
    key: f64,
    margin: f64,
    tau: f64,
    point: (f64, f64),
    checked: usize,
}

fn merge(a: Worst, b: Worst) -> Worst {
    let checked = a.checked + b.checked;
    // ties broken by point, so the merge is order-independent
    let pick = if b.key < a.key || (b.key == a.key && b.point < a.point) { b } else { a };
    Worst { checked, ..pick }
}

const EMPTY: Worst =
    Worst { key: f64::INFINITY, margin: f64::INFINITY, tau: 0.0, point: (f64::NAN, f64::NAN), checked: 0 };

fn run_check(sol: &SaddleSolution, spec: &CheckSpec, f: MarginFn, rho: &[f64]) -> CheckReport {
    let g = sol.grid;
    let h2 = g.h * g.h;
    let k = sol.params.drift;
    let floor = ROUNDING_FLOOR / h2;
    let worst = (0..=g.n)
        .into_par_iter()
        .map(|i| {
            let mut w = EMPTY;
            for j in 0..=i {
                if !in_set(&g, spec.nodes, spec.exclusion, i, j) {
                    continue;
                }
                let (s, t) = (g.coord(i), g.coord(j));
                let at = At { sol, i, j, s, t, y: (s + t) * FRAC_1_SQRT_2, z: (s - t) * FRAC_1_SQRT_2, k, rho };
                let (margin, scale) = f(&at);
                let tau = spec.kappa * h2 * scale + floor;
                // NaN margins count as failures
                let key = if margin.is_nan() { f64::NEG_INFINITY } else { margin + tau };
                w = merge(w, Worst { key, margin, tau, point: (s, t), checked: 1 });
            }
            w
        })
        .reduce(|| EMPTY, merge);
    let total = match spec.nodes {
        NodeSet::Cone => g.n + 1,
        _ => g.triangle_node_count(),
    };
    CheckReport {
        id: spec.id.to_string(),
        statement: spec.statement.to_string(),
        pass: worst.checked > 0 && worst.key >= 0.0,
        worst_margin: worst.margin,
        worst_point: worst.point,
        nodes_checked: worst.checked,
        nodes_excluded: total - worst.checked,
        tolerance_used: worst.tau,
    }
}

/// Every check of the catalog against one solution, in catalog order.
pub fn run_inequality_suite(sol: &SaddleSolution) -> Vec<CheckReport> {
    let rho = rho_table(&sol.grid);
    catalog().par_iter().map(|(spec, f)| run_check(sol, spec, *f, &rho)).collect()
}

/// One check by id.
pub fn run_check_by_id(sol: &SaddleSolution, id: &str) -> Option<CheckReport> {
    let (spec, f) = catalog().into_iter().find(|(s, _)| s.id == id)?;
    let rho = if spec.nodes == NodeSet::ZAboveOne { rho_table(&sol.grid) } else { Vec::new() };
    Some(run_check(sol, &spec, f, &rho))
}

/// Smallest margin of a check on each of the first `bands` diagonals
/// `i − j = d`, `d = 1..=bands`, over `j ≥ 2` and `s ≤ R − FAR_FIELD`.
pub fn cone_band_margins(sol: &SaddleSolution, id: &str, bands: usize) -> Option<Vec<f64>> {
    let (_, f) = catalog().into_iter().find(|(s, _)| s.id == id)?;
    let g = sol.grid;
    let k = sol.params.drift;
    Some(
        (1..=bands)
            .map(|d| {
                let mut m = f64::INFINITY;
                for j in EXCLUSION..g.n {
                    let i = j + d;
                    if !in_set(&g, NodeSet::Interior, 0, i, j) {
                        break;
                    }
                    let (s, t) = (g.coord(i), g.coord(j));
                    let at =
                        At { sol, i, j, s, t, y: (s + t) * FRAC_1_SQRT_2, z: (s - t) * FRAC_1_SQRT_2, k, rho: &[] };
                    m = m.min(f(&at).0);
                }
                m
            })
            .collect(),
    )
}

/// Largest `|margin₂₆ₐ − (margin₁₉ + margin₂₀)|` over the interior nodes.
/// The two sides are the same sum grouped differently, so this is rounding.
pub fn implication_gap(sol: &SaddleSolution) -> f64 {
    let cat = catalog();
    let f = |id: &str| cat.iter().find(|(s, _)| s.id == id).map(|(_, f)| *f).expect("catalog id");
    let (f19, f20, f26) = (f("19"), f("20"), f("26a"));
    let g = sol.grid;
    let k = sol.params.drift;
    (0..=g.n)
        .into_par_iter()
        .map(|i| {
            let mut gap: f64 = 0.0;
            for j in 0..=i {
                if !in_set(&g, NodeSet::Interior, EXCLUSION, i, j) {
                    continue;
                }
                let (s, t) = (g.coord(i), g.coord(j));
                let at = At { sol, i, j, s, t, y: (s + t) * FRAC_1_SQRT_2, z: (s - t) * FRAC_1_SQRT_2, k, rho: &[] };
                gap = gap.max((f26(&at).0 - f19(&at).0 - f20(&at).0).abs());
            }
            gap
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMargin {
    pub region: Region,
    /// Smallest `−LΦ` over the region's nodes.
    pub worst_margin: f64,
    pub worst_point: (f64, f64),
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    /// Margin `−LΦ` against [`SUPERSOLUTION_TOL`].
    pub report: CheckReport,
    pub phi_positive: bool,
    pub phi_min: f64,
    pub phi_min_point: (f64, f64),
    pub regions: Vec<RegionMargin>,
    /// Whether `Φ₀` was part of the candidate.
    pub with_phi0: bool,
}

impl SupersolutionReport {
    pub fn pass(&self) -> bool {
        self.report.pass && self.phi_positive
    }
}

/// `LΦ ≤ SUPERSOLUTION_TOL` and `Φ > 0` at every node `1 ≤ i, j ≤ N − 1`.
pub fn verify_supersolution(sol: &SaddleSolution, p: &CandidateParams) -> Result<SupersolutionReport, CandidateError> {
    let l = l_phi(sol, p)?;
    let phi = phi_field(sol, p)?;
    let g = sol.grid;
    let mut worst = EMPTY;
    let mut phi_min = (f64::INFINITY, (f64::NAN, f64::NAN));
    let mut regions: Vec<RegionMargin> = [Region::E1, Region::E2, Region::E3]
        .into_iter()
        .map(|region| RegionMargin { region, worst_margin: f64::INFINITY, worst_point: (f64::NAN, f64::NAN), nodes: 0 })
        .collect();
    for i in 1..g.n {
        for j in 1..g.n {
            let (s, t) = (g.coord(i), g.coord(j));
            let margin = -l.get(i, j);
            let key = if margin.is_nan() { f64::NEG_INFINITY } else { margin + SUPERSOLUTION_TOL };
            worst = merge(worst, Worst { key, margin, tau: SUPERSOLUTION_TOL, point: (s, t), checked: 1 });
            let v = phi.get(i, j);
            if !(v >= phi_min.0) {
                phi_min = (v, (s, t));
            }
            if i != j {
                let r = &mut regions[match region_classify(s.max(t), s.min(t)) {
                    Region::E1 => 0,
                    Region::E2 => 1,
                    Region::E3 => 2,
                }];
                r.nodes += 1;
                if !(margin >= r.worst_margin) {
                    r.worst_margin = margin;
                    r.worst_point = (s, t);
                }
            }
        }
    }
    let checked = worst.checked;
    Ok(SupersolutionReport {
        report: CheckReport {
            id: format!("supersolution_n{}", p.n),
            statement: "LΦ ≤ 0".to_string(),
            pass: checked > 0 && worst.key >= 0.0,
            worst_margin: worst.margin,
            worst_point: worst.point,
            nodes_checked: checked,
            nodes_excluded: g.side() * g.side() - checked,
            tolerance_used: SUPERSOLUTION_TOL,
        },
        phi_positive: phi_min.0 > 0.0,
        phi_min: phi_min.0,
        phi_min_point: phi_min.1,
        regions,
        with_phi0: p.phi0_coeff != 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    /// Within the map's tolerance of zero.
    Zero,
    Positive,
    /// NaN or outside the field's domain.
    Missing,
}

impl Sign {
    fn of(v: f64, tau: f64) -> Sign {
        if v.is_nan() {
            Sign::Missing
        } else if v > tau {
            Sign::Positive
        } else if v < -tau {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Negative => '-',
            Sign::Zero => '0',
            Sign::Positive => '+',
            Sign::Missing => '.',
        }
    }

    fn color(self) -> &'static str {
        match self {
            Sign::Negative => "#2b6cb0",
            Sign::Zero => "#e2e8f0",
            Sign::Positive => "#c53030",
            Sign::Missing => "#ffffff",
        }
    }
}

/// Per-node sign classification of a quadrant field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignMap {
    pub title: String,
    pub side: usize,
    pub h: f64,
    pub tau: f64,
    /// Row-major, `(i, j)` at `s = ih`, `t = jh`.
    pub signs: Vec<Sign>,
}

pub fn sign_map(field: &Field, grid: &Grid, tau: f64, title: &str) -> SignMap {
    SignMap {
        title: title.to_string(),
        side: field.side,
        h: grid.h,
        tau,
        signs: field.data.iter().map(|&v| Sign::of(v, tau)).collect(),
    }
}

impl SignMap {
    pub fn get(&self, i: usize, j: usize) -> Sign {
        self.signs[i * self.side + j]
    }

    pub fn count(&self, s: Sign) -> usize {
        self.signs.iter().filter(|&&x| x == s).count()
    }

    /// `s,t,sign` rows with `sign ∈ {-,0,+,.}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,sign\n");
        for i in 0..self.side {
            for j in 0..self.side {
                out.push_str(&format!("{},{},{}\n", i as f64 * self.h, j as f64 * self.h, self.get(i, j).symbol()));
            }
        }
        out
    }

    /// Heatmap with `s` to the right and `t` upward, fixed colors and a legend.
    /// Runs of equal sign along a row are merged into one rectangle.
    pub fn to_svg(&self) -> String {
        let cell = (600.0 / self.side as f64).max(1.0);
        let size = cell * self.side as f64;
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{hgt:.0}\" viewBox=\"0 0 {w:.0} {hgt:.0}\">\n",
            w = size + 160.0,
            hgt = size + 40.0
        ));
        out.push_str(&format!("<title>{}</title>\n", escape(&self.title)));
        out.push_str(&format!("<text x=\"4\" y=\"16\" font-size=\"14\">{}</text>\n", escape(&self.title)));
        out.push_str("<g transform=\"translate(0,30)\" shape-rendering=\"crispEdges\">\n");
        for j in 0..self.side {
            let row = self.side - 1 - j;
            let mut i = 0;
            while i < self.side {
                let s = self.get(i, j);
                let start = i;
                while i < self.side && self.get(i, j) == s {
                    i += 1;
                }
                if s != Sign::Missing {
                    out.push_str(&format!(
                        "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"/>\n",
                        start as f64 * cell,
                        row as f64 * cell,
                        (i - start) as f64 * cell,
                        cell,
                        s.color()
                    ));
                }
            }
        }
        out.push_str("</g>\n");
        for (k, (s, label)) in [(Sign::Negative, "negative"), (Sign::Zero, "|v| ≤ τ"), (Sign::Positive, "positive")]
            .into_iter()
            .enumerate()
        {
            let y = 40.0 + 22.0 * k as f64;
            out.push_str(&format!(
                "<rect x=\"{:.0}\" y=\"{y:.0}\" width=\"14\" height=\"14\" fill=\"{}\" stroke=\"#000\"/>\n",
                size + 12.0,
                s.color()
            ));
            out.push_str(&format!(
                "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\">{label}</text>\n",
                size + 32.0,
                y + 12.0
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"11\">τ = {:e}, h = {}</text>\n",
            size + 12.0,
            40.0 + 22.0 * 3.0 + 12.0,
            self.tau,
            self.h
        ));
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
