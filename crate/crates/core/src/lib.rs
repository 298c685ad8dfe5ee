//! Numerical laboratory for a degenerate Keller-Segel system with volume filling
//! on the unit interval.
//!
//! - [`model`]: parameters, grid, state and the pointwise nonlinearities.
//! - [`scheme`]: the upwind finite-volume stepper and the run driver.
//! - [`diagnostics`]: mass, energy, relative entropies and decay fits.
//! - [`steady`]: constant and increasing steady states via the time map.
//! - [`limits`]: the `τ → 0` and `η → 0` limit systems and sweeps.
//! - [`cli`]: config files, initial conditions, CSV output and subcommands.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::too_many_arguments
)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod limits;
pub mod model;
pub mod quadrature;
pub mod scheme;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{CUpdateMode, CellState, Grid, ModelParams, SolverConfig};
