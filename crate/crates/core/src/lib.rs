//! Numerical solve-and-verify toolkit for saddle solutions of the Allen-Cahn
//! equation `−Δu = u − u³` in `ℝ^{2m}`, reduced to the doubly-radial
//! variables `s = |x₁..ₘ|`, `t = |xₘ₊₁..₂ₘ|`.

pub mod candidate;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod rigor;
pub mod saddle_solver;
pub mod scalar_forms;
pub mod spectral;
pub mod verifier_grid;

pub use candidate::{CandidateParams, CoefficientSet};
pub use error::*;
pub use saddle_solver::{build_grid, Field, Grid, SaddleSolution, SolverConfig};
pub use scalar_forms::{CoordST, CoordYZ, DimensionParams};
