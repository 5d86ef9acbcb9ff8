//! Simulation and verification tools for a tumor / necrosis / vasculature
//! reaction-diffusion model.
//!
//! - [`kinetics`]: reaction terms and parameter sets.
//! - [`ode`]: pointwise dynamics, equilibria and long-time limits.
//! - [`pde`]: grid discretization and IMEX time stepping.
//! - [`spectral`]: principal eigenvalue of `−Δ + b`.
//! - [`analysis`]: invariant monitors and decay envelopes.
//! - [`app`]: scenario configuration and the `gbm` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod app;
pub mod error;
pub mod kinetics;
pub mod ode;
pub mod pde;
pub mod spectral;

pub use error::{Error, Result};
pub use kinetics::{Kinetics, Params, StateTriple};
