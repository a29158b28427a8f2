//! Numerical laboratory for wave equations in Regge-Wheeler form on the
//! Schwarzschild exterior and on warped products `R x W`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod harmonics;
pub mod observables;

pub use error::{Error, Result};

#[cfg(test)]
mod properties;
