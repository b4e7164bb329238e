//! Dyadic sparse domination for maximal truncated Calderón–Zygmund operators
//! on a discretized interval.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: the discretized domain, grid functions, the three shifted
//!   dyadic grids, averages and medians.
//! * [`sparse`]: stopping-time sparse families, sparsity certificates and the
//!   Carleson packing check.
//! * [`weights`]: Muckenhoupt characteristics (`A_p`, `A_1`, Fujii–Wilson
//!   `A_∞`), dual and power weights, the openness step.
//! * [`operators`]: the maximal truncated operator `T**`, dyadic maximal
//!   functions and the (shifted) sparse operators.
//! * [`spaces`]: distribution functions, decreasing rearrangements, Lebesgue,
//!   Lorentz and Orlicz norms, Boyd indices and modulars.
//! * [`young`]: N-functions, complementary functions, dilation indices and the
//!   Δ₂ data.
//! * [`harness`]: experiment drivers, configuration and report output used by
//!   the `sparsedom` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod spaces;
pub mod sparse;
pub mod weights;
pub mod young;

pub use error::{Error, Result};
pub use grid::{average, median, shifted_grids, Domain, DyadicCube, DyadicGrid, GridFunction};
pub use operators::{
    best_maximal, dyadic_maximal, maximal_truncated, shifted_sparse_operator, sparse_operator, weighted_dyadic_maximal,
    Hilbert, Kernel,
};
pub use spaces::{distribution, modular, rearrangement, space_norm, Rearrangement, SpaceSpec};
pub use sparse::{build_sparse_family, carleson_check, verify_sparsity, SparseFamily};
pub use weights::{dual_weight, openness_step, power_weight, Weight};
pub use young::NFunction;
