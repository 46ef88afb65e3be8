//! The supersolution candidate `Φ = f·u_s + h·u_t + Φ₀` for the linearized
//! operator `L = Δ + 1 − 3u²`, its coefficient fields, and the region and
//! ratio diagnostics used to argue `LΦ ≤ 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::CandidateError;
use crate::rigor::catalog::build_f;
use crate::rigor::expr::{Arena, Expr, Jet2};
use crate::saddle_solver::{Field, SaddleSolution};
use crate::scalar_forms::DimensionParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateParams {
    pub n: usize,
    /// `α` in the factor `(s+t)^{−α}`.
    pub decay_exponent: f64,
    /// `c` in `Φ₀ = c(s^{−β}e^{−t/3} + t^{−β}e^{−s/3})`.
    pub phi0_coeff: f64,
    /// `β`.
    pub phi0_exponent: f64,
    /// Whether `f` carries the extra `(1 − e^{−s/2t})/4.2` term.
    pub has_exp_term: bool,
}

impl CandidateParams {
    pub fn new(n: usize) -> Result<Self, CandidateError> {
        let (phi0_coeff, phi0_exponent, has_exp_term) = match n {
            8 => (0.00007, 1.8, true),
            10 | 12 => (0.001, (n - 4) as f64 / 2.0, false),
            _ => return Err(CandidateError::Dimension(n)),
        };
        Ok(CandidateParams { n, decay_exponent: (n - 3) as f64 / 2.0, phi0_coeff, phi0_exponent, has_exp_term })
    }

    /// Same candidate with `Φ₀` switched off.
    pub fn without_phi0(mut self) -> Self {
        self.phi0_coeff = 0.0;
        self
    }

    pub fn dimension(&self) -> DimensionParams {
        DimensionParams::from_ambient(self.n).expect("n is even by construction")
    }

    fn drift(&self) -> f64 {
        (self.n / 2 - 1) as f64
    }

    /// Roots of `α² + (n−3)α + (n−2) = 0`, larger first.
    pub fn indicial_roots(&self) -> (f64, f64) {
        let b = self.n as f64 - 3.0;
        let c = self.n as f64 - 2.0;
        let d = (b * b - 4.0 * c).sqrt();
        ((-b + d) / 2.0, (-b - d) / 2.0)
    }

    /// `b` in `B = b·s/√(s²+t²)`.
    fn b_scale(&self) -> f64 {
        if self.has_exp_term {
            std::f64::consts::SQRT_2
        } else {
            1.0
        }
    }
}

fn check_domain(s: f64, t: f64) -> Result<(), CandidateError> {
    if s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(CandidateError::Domain { s, t })
    }
}

pub fn f_eval(s: f64, t: f64, p: &CandidateParams) -> Result<f64, CandidateError> {
    check_domain(s, t)?;
    let r = (s * s + t * t).sqrt();
    let mut g = (s / t).tanh() * (p.b_scale() * s / r);
    if p.has_exp_term {
        g += (1.0 - (-(s / (2.0 * t))).exp()) / 4.2;
    }
    Ok(g * (s + t).powf(-p.decay_exponent))
}

pub fn h_eval(s: f64, t: f64, p: &CandidateParams) -> Result<f64, CandidateError> {
    Ok(-f_eval(t, s, p)?)
}

/// Value and the partials needed by the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partials {
    pub v: f64,
    pub s: f64,
    pub t: f64,
    pub ss: f64,
    pub tt: f64,
}

/// Hand-derived partials of `f = (A·B + E)·P` with `A = tanh(s/t)`,
/// `B = b·s/√(s²+t²)`, `E = (1 − e^{−s/2t})/4.2`, `P = (s+t)^{−α}`.
pub fn f_partials(s: f64, t: f64, p: &CandidateParams) -> Result<Partials, CandidateError> {
    check_domain(s, t)?;
    let w = s / t;
    let th = w.tanh();
    let sc = 1.0 / w.cosh().powi(2);
    let a = th;
    let a_s = sc / t;
    let a_t = -s * sc / (t * t);
    let a_ss = -2.0 * sc * th / (t * t);
    let a_tt = 2.0 * s * sc * (1.0 - w * th) / (t * t * t);

    let b = p.b_scale();
    let r2 = s * s + t * t;
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let bb = b * s / r;
    let b_s = b * t * t / r3;
    let b_t = -b * s * t / r3;
    let b_ss = -3.0 * b * s * t * t / r5;
    let b_tt = -b * s * (s * s - 2.0 * t * t) / r5;

    let (e, e_s, e_t, e_ss, e_tt) = if p.has_exp_term {
        let ex = (-0.5 * w).exp();
        let e_w = ex / 8.4;
        let e_ww = -ex / 16.8;
        (
            (1.0 - ex) / 4.2,
            e_w / t,
            -e_w * s / (t * t),
            e_ww / (t * t),
            e_ww * s * s / t.powi(4) + 2.0 * e_w * s / (t * t * t),
        )
    } else {
        (0.0, 0.0, 0.0, 0.0, 0.0)
    };

    let g = a * bb + e;
    let g_s = a_s * bb + a * b_s + e_s;
    let g_t = a_t * bb + a * b_t + e_t;
    let g_ss = a_ss * bb + 2.0 * a_s * b_s + a * b_ss + e_ss;
    let g_tt = a_tt * bb + 2.0 * a_t * b_t + a * b_tt + e_tt;

    let al = p.decay_exponent;
    let sum = s + t;
    let pp = sum.powf(-al);
    let p1 = -al * pp / sum;
    let p2 = al * (al + 1.0) * pp / (sum * sum);

    Ok(Partials {
        v: g * pp,
        s: g_s * pp + g * p1,
        t: g_t * pp + g * p1,
        ss: g_ss * pp + 2.0 * g_s * p1 + g * p2,
        tt: g_tt * pp + 2.0 * g_t * p1 + g * p2,
    })
}

fn f_tape(p: &CandidateParams) -> &'static Expr {
    static TAPES: OnceLock<Vec<(usize, Expr)>> = OnceLock::new();
    let tapes = TAPES.get_or_init(|| {
        [8, 10, 12]
            .into_iter()
            .map(|n| {
                let q = CandidateParams::new(n).expect("supported n");
                let mut ar = Arena::new();
                let (s, t) = (ar.var(0), ar.var(1));
                let f = build_f(&mut ar, s, t, &q);
                (n, ar.compile(f, 2))
            })
            .collect()
    });
    &tapes.iter().find(|(n, _)| *n == p.n).expect("supported n").1
}

/// Partials of `f` by forward-mode differentiation of its expression tree.
pub fn f_partials_jet(s: f64, t: f64, p: &CandidateParams) -> Result<Partials, CandidateError> {
    check_domain(s, t)?;
    let j =
        f_tape(p).eval(&[Jet2::variable(s, 0), Jet2::variable(t, 1)]).map_err(|_| CandidateError::Domain { s, t })?;
    Ok(Partials { v: j.v, s: j.d[0], t: j.d[1], ss: j.dd[0], tt: j.dd[2] })
}

/// Point values of the five coefficients of `LΦ₁ = C_s u_s + C_st u_st +
/// C_ss u_ss + C_tt u_tt + C_t u_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub c_s: f64,
    pub c_st: f64,
    pub c_ss: f64,
    pub c_tt: f64,
    pub c_t: f64,
}

fn assemble(s: f64, t: f64, f: Partials, g: Partials, k: f64) -> CoefficientSet {
    // g holds the partials of f at the swapped point (t, s); h(s,t) = −f(t,s)
    let h = Partials { v: -g.v, s: -g.t, t: -g.s, ss: -g.tt, tt: -g.ss };
    CoefficientSet {
        c_s: f.ss + f.tt + k * f.s / s + k * f.t / t + k * f.v / (s * s),
        c_st: 2.0 * f.t + 2.0 * h.s,
        c_ss: 2.0 * f.s,
        c_tt: 2.0 * h.t,
        c_t: h.ss + h.tt + k * h.s / s + k * h.t / t + k * h.v / (t * t),
    }
}

/// Coefficients from the hand-derived partials. Defined for all `s, t > 0`.
pub fn coefficients(s: f64, t: f64, p: &CandidateParams) -> Result<CoefficientSet, CandidateError> {
    Ok(assemble(s, t, f_partials(s, t, p)?, f_partials(t, s, p)?, p.drift()))
}

/// Coefficients from the forward-mode route.
pub fn coefficients_jet(s: f64, t: f64, p: &CandidateParams) -> Result<CoefficientSet, CandidateError> {
    Ok(assemble(s, t, f_partials_jet(s, t, p)?, f_partials_jet(t, s, p)?, p.drift()))
}

/// `Φ₀(s, t)`.
pub fn phi0(s: f64, t: f64, p: &CandidateParams) -> f64 {
    let b = p.phi0_exponent;
    p.phi0_coeff * (s.powf(-b) * (-t / 3.0).exp() + t.powf(-b) * (-s / 3.0).exp())
}

/// `L(s^{−β}e^{−t/3}) = s^{−β}e^{−t/3}[(β² − (m−2)β)/s² + 1/9 − (m−1)/(3t) + 1 − 3u²]`,
/// one summand of `LΦ₀` without the coefficient.
pub fn l_phi0_summand(s: f64, t: f64, u: f64, p: &CandidateParams) -> f64 {
    let a = -p.phi0_exponent;
    let k = p.drift();
    s.powf(a) * (-t / 3.0).exp() * ((a * a + (k - 1.0) * a) / (s * s) + 1.0 / 9.0 - k / (3.0 * t) + 1.0 - 3.0 * u * u)
}

/// `LΦ₀` in closed form.
pub fn l_phi0(s: f64, t: f64, u: f64, p: &CandidateParams) -> f64 {
    p.phi0_coeff * (l_phi0_summand(s, t, u, p) + l_phi0_summand(t, s, u, p))
}

/// `E₁`, `E₂`, `E₃` partition of `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `0.65s < t < s`, `t > 1/2`
    E1,
    /// `1/2 < t ≤ 0.65s`
    E2,
    /// `t ≤ 1/2`
    E3,
}

pub fn region_classify(s: f64, t: f64) -> Region {
    if t <= 0.5 {
        Region::E3
    } else if t > 0.65 * s {
        Region::E1
    } else {
        Region::E2
    }
}

/// `λ = ((n−2)/4)(1/t − 1/s)`.
pub fn lambda_coeff(s: f64, t: f64, p: &CandidateParams) -> f64 {
    (p.n as f64 - 2.0) / 4.0 * (1.0 / t - 1.0 / s)
}

/// `T(r) = (1−r)C_ss / (C_s + (1−r)max{C_st − C_ss, 0} − r C_t)`.
pub fn t_ratio(s: f64, t: f64, r: f64, p: &CandidateParams) -> Result<f64, CandidateError> {
    let c = coefficients(s, t, p)?;
    let den = c.c_s + (1.0 - r) * (c.c_st - c.c_ss).max(0.0) - r * c.c_t;
    if !(den < 0.0) {
        return Err(CandidateError::TUndefined { denominator: den });
    }
    Ok((1.0 - r) * c.c_ss / den)
}

/// The sampled `r` values for `T(r)`: the clamped `1 − λ` followed by eight
/// evenly spaced values from `max(0, 1−λ)` to `1 − 10⁻³`.
pub fn t_ratio_r_values(s: f64, t: f64, p: &CandidateParams) -> Vec<f64> {
    let r0 = (1.0 - lambda_coeff(s, t, p)).clamp(0.0, 1.0 - 1e-3);
    let mut rs = vec![r0];
    rs.extend((0..8).map(|k| r0 + (1.0 - 1e-3 - r0) * k as f64 / 7.0));
    rs
}

pub fn ct_over_cs(s: f64, t: f64, p: &CandidateParams) -> Result<f64, CandidateError> {
    let c = coefficients(s, t, p)?;
    Ok(c.c_t / c.c_s)
}

pub fn css_over_gap(s: f64, t: f64, p: &CandidateParams) -> Result<f64, CandidateError> {
    let c = coefficients(s, t, p)?;
    Ok(c.c_ss / (c.c_st - c.c_tt))
}

fn check_match(sol: &SaddleSolution, p: &CandidateParams) -> Result<(), CandidateError> {
    if 2 * sol.params.m != p.n {
        return Err(CandidateError::Mismatch { m: sol.params.m, n: p.n });
    }
    Ok(())
}

fn node_field(sol: &SaddleSolution, f: impl Fn(usize, usize, f64, f64) -> f64 + Sync) -> Field {
    let g = sol.grid;
    let side = g.side();
    let mut out = Field { side, data: vec![f64::NAN; side * side] };
    out.data.par_chunks_mut(side).enumerate().for_each(|(i, row)| {
        if i == 0 || i >= g.n {
            return;
        }
        for (j, slot) in row.iter_mut().enumerate().take(g.n).skip(1) {
            *slot = f(i, j, g.coord(i), g.coord(j));
        }
    });
    out
}

/// `LΦ₁` and `LΦ₀` at the interior quadrant nodes `1 ≤ i, j ≤ N−1`; NaN on
/// the axes and the outer edge.
pub fn l_phi_parts(sol: &SaddleSolution, p: &CandidateParams) -> Result<(Field, Field), CandidateError> {
    check_match(sol, p)?;
    let l1 = node_field(sol, |i, j, s, t| {
        let c = coefficients(s, t, p).expect("interior node");
        c.c_s * sol.u_s.get(i, j)
            + c.c_st * sol.u_st.get(i, j)
            + c.c_ss * sol.u_ss.get(i, j)
            + c.c_tt * sol.u_tt.get(i, j)
            + c.c_t * sol.u_t.get(i, j)
    });
    let l0 = node_field(sol, |i, j, s, t| l_phi0(s, t, sol.u.get(i, j), p));
    Ok((l1, l0))
}

pub fn l_phi(sol: &SaddleSolution, p: &CandidateParams) -> Result<Field, CandidateError> {
    let (mut l1, l0) = l_phi_parts(sol, p)?;
    for (a, b) in l1.data.iter_mut().zip(&l0.data) {
        *a += b;
    }
    Ok(l1)
}

/// `Φ = f u_s + h u_t + Φ₀` at interior quadrant nodes.
pub fn phi_field(sol: &SaddleSolution, p: &CandidateParams) -> Result<Field, CandidateError> {
    check_match(sol, p)?;
    Ok(node_field(sol, |i, j, s, t| {
        let f = f_eval(s, t, p).expect("interior node");
        let h = h_eval(s, t, p).expect("interior node");
        f * sol.u_s.get(i, j) + h * sol.u_t.get(i, j) + phi0(s, t, p)
    }))
}

/// Five-point discrete `L` applied to a nodal field; NaN wherever a stencil
/// neighbour is NaN.
pub fn apply_l_discrete(phi: &Field, sol: &SaddleSolution) -> Field {
    let g = sol.grid;
    let h = g.h;
    let k = sol.params.drift;
    node_field(sol, |i, j, s, t| {
        let c = phi.get(i, j);
        let (e, w, nn, ss) = (phi.get(i + 1, j), phi.get(i - 1, j), phi.get(i, j + 1), phi.get(i, j - 1));
        let lap = (e + w + nn + ss - 4.0 * c) / (h * h);
        let drift = k / s * (e - w) / (2.0 * h) + k / t * (nn - ss) / (2.0 * h);
        let u = sol.u.get(i, j);
        lap + drift + (1.0 - 3.0 * u * u) * c
    })
}

/// Outcome of the `E₃` comparison `|2(C_s − C_t)·t·u_tt*| < |LΦ₀|`, with
/// `u_tt*` the column minimum of `u_tt(s, ·)` over `h ≤ r ≤ t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct E3Report {
    pub nodes: usize,
    pub violations: usize,
    /// Largest `|2(C_s−C_t)t u_tt*| / |LΦ₀|`.
    pub worst_ratio: f64,
    pub worst_point: (f64, f64),
    /// Largest `s` at which the comparison fails.
    pub violation_s_max: Option<f64>,
}

pub fn e3_diagnostic(sol: &SaddleSolution, p: &CandidateParams) -> Result<E3Report, CandidateError> {
    check_match(sol, p)?;
    let g = sol.grid;
    let mut rep =
        E3Report { nodes: 0, violations: 0, worst_ratio: 0.0, worst_point: (0.0, 0.0), violation_s_max: None };
    for i in 2..g.n {
        if sol.flagged(i, 0) {
            continue;
        }
        let s = g.coord(i);
        let mut utt_star = f64::INFINITY;
        for j in 1..i {
            let t = g.coord(j);
            if t > 0.5 {
                break;
            }
            utt_star = utt_star.min(sol.u_tt.get(i, j));
            let c = coefficients(s, t, p)?;
            let lhs = (2.0 * (c.c_s - c.c_t) * t * utt_star).abs();
            let rhs = l_phi0(s, t, sol.u.get(i, j), p).abs();
            let ratio = lhs / rhs;
            rep.nodes += 1;
            if !(lhs < rhs) {
                rep.violations += 1;
                rep.violation_s_max = Some(s);
            }
            if ratio > rep.worst_ratio {
                rep.worst_ratio = ratio;
                rep.worst_point = (s, t);
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_and_jet_partials_agree() {
        for n in [8, 10, 12] {
            let p = CandidateParams::new(n).unwrap();
            for &(s, t) in &[(2.0, 1.0), (0.3, 0.2), (15.0, 0.4), (1.0, 3.0)] {
                let a = f_partials(s, t, &p).unwrap();
                let b = f_partials_jet(s, t, &p).unwrap();
                for (x, y) in [(a.v, b.v), (a.s, b.s), (a.t, b.t), (a.ss, b.ss), (a.tt, b.tt)] {
                    assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "n={n} ({s},{t}): {x} {y}");
                }
            }
        }
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_classify(2.0, 1.5), Region::E1);
        assert_eq!(region_classify(4.0, 1.0), Region::E2);
        assert_eq!(region_classify(4.0, 0.3), Region::E3);
    }
}
