//! Classical radiation from a rigidly moving planar dipole layer.
//!
//! A plane carrying a dipole density `D(x_par)` moves along its normal as
//! `x3 = q(t)`. To second order in `q`, the energy radiated per unit area
//! depends only on the motion spectrum `|q~(w)|^2` and the isotropic
//! autocorrelation spectrum `Omega~(k)` of the layer. The crate evaluates
//! that spectrum by direct quadrature, provides closed forms for the
//! standard patch-potential models, and compares the result with the
//! quantum emission of a moving perfect mirror.
//!
//! All internal quantities are Gaussian-CGS.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod correlation;
pub mod ensemble;
pub mod error;
pub mod motion;
pub mod quad;
pub mod schema;
pub mod specfun;
pub mod spectrum;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
