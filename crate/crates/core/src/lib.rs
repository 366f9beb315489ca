//! Optimal stopping of parallel search.
//!
//! The value of searching `d` alternatives against an outside option of zero
//! solves `min(-½Δu + c, u - g) = 0` with `g(x) = max(x_1, ..., x_d, 0)`.
//! This crate provides closed-form one- and two-dimensional pieces, a grid
//! solver for parallel, sequential and hybrid search, free boundary
//! extraction, Monte Carlo cross-checks and a reduction for large `d`.

mod error;

pub mod analytic;
pub mod boundary;
pub mod grid;
pub mod highdim;
pub mod mode;
pub mod montecarlo;
pub mod solver;

pub use analytic::{Cost, RotatedPoint};
pub use boundary::{BoundaryProfile, InclusionReport, StarShapedReport};
pub use error::{Error, Result};
pub use grid::{BoundaryData, ContactMask, GridSpec, ScalarField};
pub use highdim::{ChartSolution, HyperplaneChart, RdEstimate};
pub use mode::SearchMode;
pub use montecarlo::{OracleValue, SimEstimate, StoppingRule};
pub use solver::{Action, PolicyField, Solution, SolveDiagnostics, SolverConfig};
