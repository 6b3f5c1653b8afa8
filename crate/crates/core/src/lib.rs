//! Finite level-set graphs of warped cones.
//!
//! The crate builds the discrete objects attached to an isometric action
//! `Γ ↷ M` of a finitely generated group of rational rotations on a model
//! manifold, and measures them:
//!
//! * [`algebra`]: exact arithmetic over `Z[1/5]`, words, and word-metric balls.
//! * [`manifold`]: spheres, flat tori and `SO(3)`, with distances, Haar sampling
//!   and ball-volume bounds.
//! * [`net`]: separated/dense nets, Voronoi partitions and measure ratios.
//! * [`warped`]: the warped metric `ρ_t` (exact oracle and graph approximation).
//! * [`graph`]: approximating graphs on partition regions.
//! * [`spectral`]: Laplacian spectra, Cheeger constants, the action gap and the
//!   non-embeddability certificate.
//! * [`coarse`]: singular sets, ball/product comparisons, growth profiles,
//!   cardinality scheduling and subsequence separation.
//!
//! Everything here is allocation-only (`alloc`); IO and file formats live in
//! the companion `warpcone` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod algebra;
pub mod coarse;
pub mod error;
pub mod graph;
pub mod manifold;
pub mod net;
pub mod spatial;
pub mod spectral;
pub mod warped;

pub use error::{Error, Result};
