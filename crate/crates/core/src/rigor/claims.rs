//! The concrete sign claims, their boxes, and replayable proof traces.

use serde::{Deserialize, Serialize};

use super::catalog::{Catalog, VarSet};
use super::interval::Interval;
use super::prover::{prove_nonpositive, Constraint, ProofResult, ProverConfig};
use crate::error::RigorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSpec {
    pub id: String,
    /// Catalog entry whose negativity is claimed.
    pub entry: String,
    pub statement: String,
    pub n: usize,
    pub domain: Vec<Interval>,
    pub constraints: Vec<Constraint>,
    pub margin: f64,
}

/// Sign of the expression outside the compact box, by point sampling only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub rigorous: bool,
    pub region: String,
    pub samples: usize,
    pub violations: usize,
    pub max_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub claim: ClaimSpec,
    pub config: ProverConfig,
    pub result: ProofResult,
    pub tail: TailReport,
}

fn st_claim(n: usize, entry: &str, statement: &str) -> ClaimSpec {
    ClaimSpec {
        id: format!("{entry}_negative_n{n}"),
        entry: entry.to_string(),
        statement: statement.to_string(),
        n,
        domain: vec![Interval::new(0.2, 20.0), Interval::new(0.2, 20.0)],
        constraints: vec![Constraint { greater: 0, lesser: 1, delta: 0.05 }],
        margin: 0.0,
    }
}

/// The subsolution claim: `K(a, ỹ, z̃) < 0` for `a ∈ [0.01, 0.45]`,
/// `ỹ, z̃ ∈ [0.01, 12]`, `ỹ > z̃ + 0.01`. Since the defect equals
/// `H(ỹ)H(z̃)·K` and `H(ỹ)H(z̃) > 0` for `ỹ, z̃ > 0`, this is the defect's sign.
pub fn subsolution_claim(n: usize) -> ClaimSpec {
    ClaimSpec {
        id: format!("subsolution_defect_n{n}"),
        entry: "defect_reduced".to_string(),
        statement: "subsolution defect of H(ay)H(az) is negative for a in [0.01, 0.45]".to_string(),
        n,
        domain: vec![Interval::new(0.01, 0.45), Interval::new(0.01, 12.0), Interval::new(0.01, 12.0)],
        constraints: vec![Constraint { greater: 1, lesser: 2, delta: 0.01 }],
        margin: 0.0,
    }
}

/// Claims run for candidate dimension `n`. The subsolution claim is skipped
/// for `n = 12`: there `K(a, 0, 0) = −1 + 16a²/3` is positive once `a > 0.433`.
pub fn standard_claims(n: usize) -> Vec<ClaimSpec> {
    let mut out = Vec::new();
    if n != 12 {
        out.push(subsolution_claim(n));
    }
    for (entry, stmt) in [("C_s", "C_s < 0 on s > t"), ("C_ss", "C_ss < 0 on s > t"), ("C_st", "C_st < 0 on s > t")] {
        out.push(st_claim(n, entry, stmt));
    }
    out
}

fn tail_points(vars: VarSet, spec: &ClaimSpec) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let geo = |lo: f64, hi: f64, k: usize, n: usize| lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
    match vars {
        VarSet::St => {
            let hi = spec.domain[0].hi;
            let delta = spec.constraints.first().map_or(0.0, |c| c.delta);
            for a in 0..60 {
                let s = geo(hi, 50.0 * hi, a, 60);
                for b in 0..60 {
                    let t = geo(spec.domain[1].lo, s - delta, b, 60);
                    pts.push(vec![s, t]);
                }
            }
        }
        VarSet::AYZ => {
            let hi = spec.domain[1].hi;
            for ka in 0..9 {
                let a = spec.domain[0].lo + (spec.domain[0].hi - spec.domain[0].lo) * ka as f64 / 8.0;
                for ky in 0..40 {
                    let y = geo(hi, 5.0 * hi, ky, 40);
                    for kz in 0..40 {
                        let z = geo(spec.domain[2].lo, y - 0.01, kz, 40);
                        pts.push(vec![a, y, z]);
                    }
                }
            }
        }
    }
    pts
}

/// Runs the prover on one claim and samples its unbounded tail.
pub fn run_claim(catalog: &mut Catalog, spec: &ClaimSpec, cfg: &ProverConfig) -> Result<ProofTrace, RigorError> {
    let grad = catalog.gradient(&spec.entry).ok();
    let entry = catalog.get(&spec.entry).ok_or(RigorError::Guard("unknown catalog entry"))?;
    let result = prove_nonpositive(&entry.expr, grad.as_deref(), &spec.domain, &spec.constraints, spec.margin, cfg);
    let pts = tail_points(entry.vars, spec);
    let mut tail = TailReport {
        rigorous: false,
        region: match entry.vars {
            VarSet::St => {
                format!("s in [{}, {}], t < s - delta (point samples)", spec.domain[0].hi, 50.0 * spec.domain[0].hi)
            }
            VarSet::AYZ => {
                format!("y in [{}, {}], z < y - 0.01 (point samples)", spec.domain[1].hi, 5.0 * spec.domain[1].hi)
            }
        },
        samples: 0,
        violations: 0,
        max_value: f64::NEG_INFINITY,
    };
    for p in pts {
        let v = entry.expr.eval_f64(&p);
        tail.samples += 1;
        if !(v < 0.0) {
            tail.violations += 1;
        }
        if v > tail.max_value || v.is_nan() {
            tail.max_value = v;
        }
    }
    Ok(ProofTrace { claim: spec.clone(), config: *cfg, result, tail })
}
