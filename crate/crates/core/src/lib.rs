//! Computable core of the local well-posedness criterion for the Kawahara
//! equation `u_t - u_xxxxx + (u^2)_x = 0` on metric star graphs.
//!
//! * [`graph`]: star-graph topology, vertex coefficients, contraction check.
//! * [`bc_matrix`]: the coupling matrix `M(lambda, beta)`, its determinant,
//!   solves and conditioning.
//! * [`admissibility`]: the regularity window for the forcing indices and the
//!   compatibility conditions on initial data.
//! * [`search`]: Table-style sweeps and parameter search for wide certified ranges.
//! * [`dispersive`]: the fifth-order oscillatory kernel, fractional integrals,
//!   the free propagator and the boundary forcing operator.
//! * [`energy`]: the boundary energy form and its reduction under the vertex conditions.
//! * [`verify`]: self-check suites used by the CLI.

// `!(x <= tol)` is used on purpose so that NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod bc_matrix;
pub mod dispersive;
pub mod energy;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod search;
pub mod verify;

pub use admissibility::{admissible_s_range, check_compatibility, window, CompatibilityReport, EdgeTraces, RegularityInterval};
pub use bc_matrix::{assemble, normalized_determinant, solve_forcing, AssemblyMode, CouplingMatrix};
pub use error::{Error, Result};
pub use graph::{is_contraction, spectral_norm, validate_graph, GraphConfig, ParameterSet, StarGraphSpec};
pub use matrix::Matrix;
