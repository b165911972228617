//! Local hidden variables (LHV) model for flavour-entangled `B0 / B0bar` pairs
//! produced in `Y(4S)` decays.
//!
//! The crate is organised as:
//!
//! - [`model`]: parameters and the hidden-variable densities (the flavour
//!   window law, the positive-part cosine law and its normaliser `N(lambda)`).
//! - [`quantum`]: closed-form quantum predictions (conditional rates, joint
//!   densities, the `I_kl` overlap integrals, the mixing asymmetry).
//! - [`verify`]: quadrature reconstruction of the joint densities from the
//!   hidden-variable integral plus every normalisation identity.
//! - [`montecarlo`]: reproducible, partitionable event generation.
//! - [`analysis`]: binning, expected counts, chi-square and asymmetry fits.
//! - [`io`]: event files and report writers.
//! - [`cli`]: the `lhv` command-line front end.
//!
//! Parallel loops go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exec;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod quantum;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Flavour, HiddenVariable, ModelParams, NormTable, PairEvent};
