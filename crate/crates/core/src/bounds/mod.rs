//! Bounds on Riesz means and eigenvalue sums, and the harness that checks
//! them against spectra.

pub mod aterm;
pub mod formulas;
pub mod verify;

pub use aterm::{
    a21_polygon, a_n1, a_n1_with, a_ngamma, a_ngamma_with, c_b, c_b_with, cone_printed_intermediate,
    cone_printed_intermediate_quadrature, wall_constant, wall_integral, AtermMode,
};
pub use formulas::*;
pub use verify::{
    verify, Axis, BoundId, BoundParams, BoundReport, FlagStatus, HypothesisFlag, Status,
    DEFAULT_REL_TOL,
};
