//! Superradiance of indistinguishable multilevel atoms.
//!
//! The crate models ensembles of identical V-type and four-level atoms in a
//! symmetrized occupation-number basis, integrates their collective master
//! equation, reconstructs the photonic state left behind after full decay and
//! provides the entanglement and phase-space diagnostics used to study it.
//!
//! Module map:
//!
//! - [`basis`]: level schemes, occupation bases, collective ladder operators.
//! - [`dynamics`]: master-equation generator, RK4 integrator, intensities.
//! - [`photonic`]: final photonic states and mixtures, mode-independence test.
//! - [`entanglement`]: partial trace/transpose, negativity, entropies.
//! - [`wigner`]: multimode Wigner functions and separability probes.
//! - [`fitting`]: power-law fits of peak intensities.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod basis;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod fitting;
pub mod linalg;
pub mod photonic;
pub mod wigner;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
