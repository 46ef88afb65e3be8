//! Interval branch-and-bound proofs of the closed-form sign claims.

pub mod catalog;
pub mod claims;
pub mod expr;
pub mod interval;
pub mod prover;

pub use catalog::{builtin_expressions, Catalog};
pub use claims::{run_claim, standard_claims, ClaimSpec, ProofTrace, TailReport};
pub use expr::{Arena, Expr, Jet2, Node, NodeId, Scalar};
pub use interval::Interval;
pub use prover::{prove_nonpositive, Constraint, ProofResult, ProofStatus, ProverConfig};

/// Enclosure of `expr` over a box.
pub fn eval_interval(expr: &Expr, bx: &[Interval]) -> Result<Interval, crate::error::RigorError> {
    expr.eval(bx)
}
