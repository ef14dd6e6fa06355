//! Alternating projections between closed sets of ℝⁿ, with finite-convergence
//! bounds and nearest-pair certificates for polyhedron / half-space pairs and a
//! projection-based linear-programming solver.
//!
//! The iteration starts at `x₀ ∈ A` and alternates `x_{2k+1} = P_B(x_{2k})`,
//! `x_{2k+2} = P_A(x_{2k+1})`. For a polyhedron `B` and a half-space `A` at
//! positive distance, [`certify`] computes the angle constant `α` and the
//! number of projections after which the minimum distance is attained.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod descriptor;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod lp;
pub mod qp;
pub mod sets;
pub mod verify;

pub use engine::{Certificate, RunOptions, SetLabel, StopReason, Trace};
pub use error::{Error, Result};
pub use linalg::{Point, Ray};
pub use sets::{EpigraphKind, EpigraphSet, HalfSpace, Polyhedron, ProjectableSet};
