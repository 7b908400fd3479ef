//! Finite metric measure spaces with weak-type, fractional and Orlicz functionals,
//! a nonlocal p-Laplacian solver, Vitali coverings and asymptotic diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod covering;
pub mod error;
pub mod fields;
pub mod functionals;
pub mod nonlocal;
pub mod parallel;
pub mod space;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
