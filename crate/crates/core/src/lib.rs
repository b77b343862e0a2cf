//! Robust adaptive beamforming against direction-of-arrival mismatch.
//!
//! The crate implements the subspace-constrained diagonal loading (SSC-DL)
//! beamformer next to the classical MVDR (Capon) beamformer, diagonal-loaded
//! MVDR and the clairvoyant "optimal" benchmark, together with a seeded
//! Monte Carlo harness that evaluates them on a uniform linear array.
//!
//! Module map:
//!
//! * [`numerics`]: complex solves and orthonormal bases.
//! * [`array_model`]: ULA geometry, steering vectors, the SSC-DL angle grid.
//! * [`signal_sim`]: scenarios, snapshot synthesis, covariance matrices.
//! * [`beamformers`]: MVDR, DL, SSC-DL and the optimal weights.
//! * [`metrics`]: output SINR, beampatterns and projection ratios.
//! * [`gamma_analysis`]: exact evaluation of the SINR as a function of the
//!   loading factor.
//! * [`experiments`]: Monte Carlo sweeps and the builtin figure specs.

pub mod array_model;
pub mod beamformers;
pub mod error;
pub mod experiments;
pub mod gamma_analysis;
pub mod metrics;
pub mod numerics;
pub mod signal_sim;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, Complex64};
