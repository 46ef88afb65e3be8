//! Expression trees for every closed-form claim the prover handles.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use super::expr::{Arena, Expr, NodeId};
use super::interval::Interval;
use crate::candidate::CandidateParams;
use crate::error::RigorError;

/// Variable slots of the `(s, t)` expressions.
pub const S: u8 = 0;
pub const T: u8 = 1;
/// Variable slots of the `(a, ỹ, z̃)` expressions.
pub const A: u8 = 0;
pub const Y: u8 = 1;
pub const Z: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarSet {
    /// `(s, t)`
    St,
    /// `(a, ỹ, z̃)`
    AYZ,
}

impl VarSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            VarSet::St => &["s", "t"],
            VarSet::AYZ => &["a", "y", "z"],
        }
    }

    pub fn len(self) -> usize {
        self.names().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

pub struct Entry {
    pub name: &'static str,
    pub vars: VarSet,
    pub root: NodeId,
    pub expr: Expr,
}

pub struct Catalog {
    pub params: CandidateParams,
    arena: Arena,
    pub entries: Vec<Entry>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    /// Compiled partial derivatives of an entry, one per variable.
    pub fn gradient(&mut self, name: &str) -> Result<Vec<Expr>, RigorError> {
        let (root, vars) = {
            let e = self.get(name).ok_or(RigorError::Guard("unknown catalog entry"))?;
            (e.root, e.vars)
        };
        (0..vars.len())
            .map(|k| {
                let d = self.arena.diff(root, k as u8)?;
                Ok(self.arena.compile(d, vars.len()))
            })
            .collect()
    }
}

/// `f(s, t)` built from the given variable nodes, so that `h(s, t) = −f(t, s)`
/// reuses the same construction with the roles swapped.
pub fn build_f(ar: &mut Arena, s: NodeId, t: NodeId, p: &CandidateParams) -> NodeId {
    let w = ar.div(s, t);
    let tanh = ar.tanh(w);
    let s2 = ar.powi(s, 2);
    let t2 = ar.powi(t, 2);
    let r2 = ar.add(s2, t2);
    let r = ar.sqrt(r2);
    let ratio = ar.div(s, r);
    let b = if p.has_exp_term {
        let two = ar.constant(2.0);
        let c = ar.sqrt(two);
        ar.mul(c, ratio)
    } else {
        ratio
    };
    let mut g = ar.mul(tanh, b);
    if p.has_exp_term {
        let two = ar.constant(2.0);
        let tt = ar.mul(two, t);
        let half_w = ar.div(s, tt);
        let neg = ar.neg(half_w);
        let e = ar.exp(neg);
        let one = ar.constant(1.0);
        let num = ar.sub(one, e);
        let den = ar.decimal(4.2);
        let e_term = ar.div(num, den);
        g = ar.add(g, e_term);
    }
    let sum = ar.add(s, t);
    let decay = ar.pow(sum, Interval::point(-p.decay_exponent));
    ar.mul(g, decay)
}

/// Drift Laplacian `g_ss + g_tt + (m−1)/s g_s + (m−1)/t g_t`.
fn laplacian(ar: &mut Arena, g: NodeId, s: NodeId, t: NodeId, k: f64) -> Result<NodeId, RigorError> {
    let gs = ar.diff(g, S)?;
    let gt = ar.diff(g, T)?;
    let gss = ar.diff(gs, S)?;
    let gtt = ar.diff(gt, T)?;
    let kk = ar.constant(k);
    let a = ar.div(gs, s);
    let a = ar.mul(kk, a);
    let b = ar.div(gt, t);
    let b = ar.mul(kk, b);
    let lap = ar.add(gss, gtt);
    let lap = ar.add(lap, a);
    Ok(ar.add(lap, b))
}

fn build_phi0(ar: &mut Arena, s: NodeId, t: NodeId, p: &CandidateParams) -> NodeId {
    let beta = if p.phi0_exponent == p.phi0_exponent.trunc() {
        Interval::point(-p.phi0_exponent)
    } else {
        Interval::around(-p.phi0_exponent)
    };
    let three = ar.constant(3.0);
    let term = |ar: &mut Arena, x: NodeId, y: NodeId| {
        let pw = ar.pow(x, beta);
        let arg = ar.div(y, three);
        let arg = ar.neg(arg);
        let e = ar.exp(arg);
        ar.mul(pw, e)
    };
    let a = term(ar, s, t);
    let b = term(ar, t, s);
    let sum = ar.add(a, b);
    let c = ar.decimal(p.phi0_coeff);
    ar.mul(c, sum)
}

/// The displayed two-term subsolution defect in `(a, ỹ, z̃)`.
fn build_defect(ar: &mut Arena, k: f64) -> NodeId {
    let (a, y, z) = (ar.var(A), ar.var(Y), ar.var(Z));
    let inv = ar.interval(Interval::around(FRAC_1_SQRT_2));
    let yv = ar.mul(y, inv);
    let zv = ar.mul(z, inv);
    let hy = ar.tanh(yv);
    let hz = ar.tanh(zv);
    let a2 = ar.powi(a, 2);
    let hy2 = ar.powi(hy, 2);
    let hz2 = ar.powi(hz, 2);
    let two = ar.constant(2.0);
    let one = ar.constant(1.0);
    let mut pot = ar.mul(two, a2);
    pot = ar.sub(pot, one);
    let t1 = ar.mul(a2, hy2);
    pot = ar.sub(pot, t1);
    let t2 = ar.mul(a2, hz2);
    pot = ar.sub(pot, t2);
    let t3 = ar.mul(hy2, hz2);
    pot = ar.add(pot, t3);
    let hyhz = ar.mul(hy, hz);
    let pot = ar.mul(hyhz, pot);
    let yhz = ar.mul(y, hz);
    let zhy = ar.mul(z, hy);
    let zhz = ar.mul(z, hz);
    let yhy = ar.mul(y, hy);
    let inner = ar.sub(zhz, yhy);
    let inner = ar.mul(hyhz, inner);
    let br = ar.sub(yhz, zhy);
    let br = ar.add(br, inner);
    let sqrt2 = ar.sqrt(two);
    let kk = ar.constant(k);
    let coef = ar.mul(sqrt2, kk);
    let coef = ar.mul(coef, a2);
    let y2 = ar.powi(y, 2);
    let z2 = ar.powi(z, 2);
    let gap = ar.sub(y2, z2);
    let coef = ar.div(coef, gap);
    let drift = ar.mul(coef, br);
    ar.sub(pot, drift)
}

/// `K` with `defect = H(ỹ)H(z̃)·K`:
/// `K = −(1−a²)(p+q) + pq − 2(m−1)a²·R(ỹ, z̃)`, `p = sech²(ỹ/√2)`,
/// `q = sech²(z̃/√2)`, `R` the divided difference of `Q(x) = √2x/sinh(√2x)`
/// in `x²`. Cancellation-free, so intervals stay tight.
fn build_defect_reduced(ar: &mut Arena, k: f64) -> NodeId {
    let (a, y, z) = (ar.var(A), ar.var(Y), ar.var(Z));
    let inv = ar.interval(Interval::around(FRAC_1_SQRT_2));
    let yv = ar.mul(y, inv);
    let zv = ar.mul(z, inv);
    let p = ar.sech2(yv);
    let q = ar.sech2(zv);
    let a2 = ar.powi(a, 2);
    let one = ar.constant(1.0);
    let c = ar.sub(one, a2);
    let pq_sum = ar.add(p, q);
    let first = ar.mul(c, pq_sum);
    let first = ar.neg(first);
    let pq = ar.mul(p, q);
    let r = ar.q_divdiff(y, z);
    let kk = ar.constant(2.0 * k);
    let last = ar.mul(kk, a2);
    let last = ar.mul(last, r);
    let out = ar.add(first, pq);
    ar.sub(out, last)
}

/// All trees for one candidate dimension: `f`, `h`, the five coefficients,
/// `Φ₀`, its drift Laplacian, and the subsolution defect in both forms.
pub fn builtin_expressions(p: &CandidateParams) -> Result<Catalog, RigorError> {
    let mut ar = Arena::new();
    let k = p.dimension().drift;
    let (s, t) = (ar.var(S), ar.var(T));
    let f = build_f(&mut ar, s, t, p);
    let h = {
        let swapped = build_f(&mut ar, t, s, p);
        ar.neg(swapped)
    };
    let fs = ar.diff(f, S)?;
    let ft = ar.diff(f, T)?;
    let hs = ar.diff(h, S)?;
    let ht = ar.diff(h, T)?;
    let kk = ar.constant(k);
    let c_s = {
        let lap = laplacian(&mut ar, f, s, t, k)?;
        let s2 = ar.powi(s, 2);
        let z = ar.div(f, s2);
        let z = ar.mul(kk, z);
        ar.add(lap, z)
    };
    let c_t = {
        let lap = laplacian(&mut ar, h, s, t, k)?;
        let t2 = ar.powi(t, 2);
        let z = ar.div(h, t2);
        let z = ar.mul(kk, z);
        ar.add(lap, z)
    };
    let c_ss = ar.scale(2.0, fs);
    let c_tt = ar.scale(2.0, ht);
    let c_st = {
        let sum = ar.add(ft, hs);
        ar.scale(2.0, sum)
    };
    let phi0 = build_phi0(&mut ar, s, t, p);
    let phi0_lap = laplacian(&mut ar, phi0, s, t, k)?;
    let defect = build_defect(&mut ar, k);
    let reduced = build_defect_reduced(&mut ar, k);

    let st = [
        ("f", f),
        ("h", h),
        ("C_s", c_s),
        ("C_st", c_st),
        ("C_ss", c_ss),
        ("C_tt", c_tt),
        ("C_t", c_t),
        ("phi0", phi0),
        ("phi0_laplacian", phi0_lap),
    ];
    let mut entries: Vec<Entry> =
        st.into_iter().map(|(name, root)| Entry { name, vars: VarSet::St, root, expr: ar.compile(root, 2) }).collect();
    for (name, root) in [("defect", defect), ("defect_reduced", reduced)] {
        entries.push(Entry { name, vars: VarSet::AYZ, root, expr: ar.compile(root, 3) });
    }
    Ok(Catalog { params: *p, arena: ar, entries })
}
