//! Simulation and decay certificates for the one-dimensional wave equation
//! with a dynamic boundary condition at `x = 0` and nonlinear Neumann
//! feedback at `x = L`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod nonlinearities;
pub mod runner;
pub mod solver;
pub mod state_space;

pub use error::{Error, Result};
