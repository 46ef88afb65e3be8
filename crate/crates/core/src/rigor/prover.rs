//! Branch-and-bound sign prover over axis-aligned boxes.
//!
//! Boxes are processed breadth-first, one depth layer at a time. Within a layer
//! the boxes are evaluated in parallel and the results are merged in box-id
//! order, so the traversal and every count are independent of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::interval::Interval;

/// `x[greater] > x[lesser] + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub greater: usize,
    pub lesser: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub min_width: f64,
    pub max_depth: u32,
    /// Hard cap on examined boxes; the remaining queue becomes undecided.
    pub max_boxes: usize,
    /// Intersect the naive enclosure with the mean-value form when a
    /// gradient is supplied.
    pub mean_value: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig { min_width: 1e-4, max_depth: 40, max_boxes: 20_000_000, mean_value: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofStatus {
    Proven,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    /// Heap numbering: root 1, children `2k` and `2k+1`.
    pub id: u64,
    pub depth: u32,
    pub bounds: Vec<Interval>,
    /// Upper end of the enclosure, if it could be evaluated.
    pub upper: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofResult {
    pub status: ProofStatus,
    pub boxes_examined: u64,
    pub leaves_proven: u64,
    pub boxes_discarded: u64,
    pub max_depth_reached: u32,
    /// Largest upper bound among accepted leaves.
    pub worst_accepted_upper: f64,
    pub min_undecided_width: Option<f64>,
    pub frontier: Vec<BoxRecord>,
}

enum Outcome {
    Discarded,
    Accepted(f64),
    Split(Vec<Interval>, Vec<Interval>),
    Undecided(Option<f64>, &'static str),
}

/// Shrinks `b` around its feasible points; `false` if it has none.
fn contract(b: &mut [Interval], constraints: &[Constraint]) -> bool {
    for c in constraints {
        let (g, l) = (b[c.greater], b[c.lesser]);
        if (g.hi - l.lo).next_up() <= c.delta {
            return false;
        }
        let g_lo = g.lo.max((l.lo + c.delta).next_down());
        let l_hi = l.hi.min((g.hi - c.delta).next_up());
        if g_lo > g.hi || l.lo > l_hi {
            return false;
        }
        b[c.greater] = Interval::new(g_lo, g.hi);
        b[c.lesser] = Interval::new(l.lo, l_hi);
    }
    true
}

/// Enclosure of `expr` over `b`, tightened by the mean-value form
/// `f(c) + Σ ∂ᵢf(B)(Bᵢ − cᵢ)` when a gradient is available.
pub fn enclose(expr: &Expr, gradient: Option<&[Expr]>, b: &[Interval]) -> Option<Interval> {
    let naive = expr.eval(b).ok();
    let Some(grad) = gradient else { return naive };
    let mv = (|| {
        let c: Vec<Interval> = b.iter().map(|x| Interval::point(x.mid())).collect();
        let mut acc = expr.eval(&c).ok()?;
        for (k, g) in grad.iter().enumerate() {
            let d = g.eval(b).ok()?;
            let off = b[k].sub(&c[k]).ok()?;
            acc = acc.add(&d.mul(&off).ok()?).ok()?;
        }
        Some(acc)
    })();
    match (naive, mv) {
        (Some(a), Some(m)) => Some(a.intersect(&m).unwrap_or(a)),
        (a, m) => a.or(m),
    }
}

fn widest(b: &[Interval], scale: &[f64]) -> usize {
    let mut best = 0;
    let mut w = f64::NEG_INFINITY;
    for (k, x) in b.iter().enumerate() {
        let v = x.width() / scale[k];
        if v > w {
            w = v;
            best = k;
        }
    }
    best
}

/// Tries to show `expr < −margin` on every feasible point of `domain`.
pub fn prove_nonpositive(
    expr: &Expr,
    gradient: Option<&[Expr]>,
    domain: &[Interval],
    constraints: &[Constraint],
    margin: f64,
    cfg: &ProverConfig,
) -> ProofResult {
    assert_eq!(domain.len(), expr.nvars(), "box dimension must match the expression");
    let grad = if cfg.mean_value { gradient } else { None };
    let scale: Vec<f64> = domain.iter().map(|x| x.width().max(f64::MIN_POSITIVE)).collect();
    let mut res = ProofResult {
        status: ProofStatus::Proven,
        boxes_examined: 0,
        leaves_proven: 0,
        boxes_discarded: 0,
        max_depth_reached: 0,
        worst_accepted_upper: f64::NEG_INFINITY,
        min_undecided_width: None,
        frontier: Vec::new(),
    };
    let mut layer: Vec<(u64, Vec<Interval>)> = vec![(1, domain.to_vec())];
    let mut depth = 0u32;
    while !layer.is_empty() {
        if res.boxes_examined + layer.len() as u64 > cfg.max_boxes as u64 {
            for (id, b) in layer {
                push_undecided(&mut res, id, depth, b, None, "box budget exhausted");
            }
            break;
        }
        res.max_depth_reached = depth;
        let outcomes: Vec<Outcome> = layer
            .par_iter()
            .map(|(_, b)| {
                let mut b = b.clone();
                if !contract(&mut b, constraints) {
                    return Outcome::Discarded;
                }
                let enc = enclose(expr, grad, &b);
                if let Some(e) = enc {
                    if e.hi < -margin {
                        return Outcome::Accepted(e.hi);
                    }
                }
                let upper = enc.map(|e| e.hi);
                if depth >= cfg.max_depth {
                    return Outcome::Undecided(upper, "max depth");
                }
                let max_w = b.iter().map(Interval::width).fold(0.0, f64::max);
                if max_w < cfg.min_width {
                    return Outcome::Undecided(upper, "min width");
                }
                let k = widest(&b, &scale);
                let m = b[k].mid();
                let mut lo = b.clone();
                let mut hi = b;
                lo[k] = Interval::new(lo[k].lo, m);
                hi[k] = Interval::new(m, hi[k].hi);
                Outcome::Split(lo, hi)
            })
            .collect();
        res.boxes_examined += layer.len() as u64;
        let mut next = Vec::new();
        for ((id, b), o) in layer.into_iter().zip(outcomes) {
            match o {
                Outcome::Discarded => res.boxes_discarded += 1,
                Outcome::Accepted(hi) => {
                    res.leaves_proven += 1;
                    res.worst_accepted_upper = res.worst_accepted_upper.max(hi);
                }
                Outcome::Split(a, c) => {
                    next.push((2 * id, a));
                    next.push((2 * id + 1, c));
                }
                Outcome::Undecided(upper, why) => push_undecided(&mut res, id, depth, b, upper, why),
            }
        }
        layer = next;
        depth += 1;
    }
    res
}

const FRONTIER_CAP: usize = 1000;

fn push_undecided(res: &mut ProofResult, id: u64, depth: u32, b: Vec<Interval>, upper: Option<f64>, why: &str) {
    res.status = ProofStatus::Undecided;
    let w = b.iter().map(Interval::width).fold(0.0, f64::max);
    res.min_undecided_width = Some(res.min_undecided_width.map_or(w, |m: f64| m.min(w)));
    if res.frontier.len() < FRONTIER_CAP {
        res.frontier.push(BoxRecord { id, depth, bounds: b, upper, reason: why.to_string() });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigor::expr::Arena;

    fn quad() -> Expr {
        let mut a = Arena::new();
        let x = a.var(0);
        let x2 = a.powi(x, 2);
        let tx = a.scale(2.0, x);
        let e = a.sub(x2, tx);
        a.compile(e, 1)
    }

    #[test]
    fn proves_simple_quadratic() {
        let r = prove_nonpositive(&quad(), None, &[Interval::new(0.5, 1.5)], &[], 0.0, &ProverConfig::default());
        assert_eq!(r.status, ProofStatus::Proven);
        assert!(r.worst_accepted_upper < 0.0);
    }

    #[test]
    fn reports_undecided_when_false() {
        let cfg = ProverConfig { max_depth: 12, ..ProverConfig::default() };
        let r = prove_nonpositive(&quad(), None, &[Interval::new(0.5, 2.5)], &[], 0.0, &cfg);
        assert_eq!(r.status, ProofStatus::Undecided);
        assert!(!r.frontier.is_empty());
    }

    #[test]
    fn constraint_discards_infeasible_boxes() {
        // y − x < 0 on {x > y + 0.1}
        let mut a = Arena::new();
        let (x, y) = (a.var(0), a.var(1));
        let e = a.sub(y, x);
        let e = a.compile(e, 2);
        let dom = [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)];
        let c = [Constraint { greater: 0, lesser: 1, delta: 0.1 }];
        let r = prove_nonpositive(&e, None, &dom, &c, 0.0, &ProverConfig::default());
        assert_eq!(r.status, ProofStatus::Proven);
        // entirely infeasible box
        let dom = [Interval::new(0.0, 0.3), Interval::new(0.5, 1.0)];
        let r = prove_nonpositive(&e, None, &dom, &c, 0.0, &ProverConfig::default());
        assert_eq!((r.status, r.boxes_discarded, r.boxes_examined), (ProofStatus::Proven, 1, 1));
    }
}
