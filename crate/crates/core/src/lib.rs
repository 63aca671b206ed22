#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod par;
pub mod quad;
pub mod report;
pub mod riesz;
pub mod specfun;
pub mod spectra;

pub use error::{Error, Result};
