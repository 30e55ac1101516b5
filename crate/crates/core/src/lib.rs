//! Numerical verification of spectral properties of spinning (vortex)
//! solitons of the 2D cubic nonlinear Schrödinger equation: ground-state
//! profiles, Sturm index counts for the linearized operators, inner-product
//! tables, and self-similarly collapsing profiles.

pub mod bvp;
pub mod cli;
pub mod error;
pub mod export;
pub mod index;
pub mod innerprod;
pub mod report;
pub mod selfsim;
pub mod vortex;

pub use error::{Error, Result};
