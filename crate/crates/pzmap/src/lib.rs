//! Analysis toolkit for a discrete phytoplankton-zooplankton map with
//! Holling type II grazing and type III toxin release:
//!
//! ```text
//! u' = u(2 - u) - uv/(γ + u)
//! v' = βuv/(γ + u) + (1 - r)v - θu²v/(γ² + u²)
//! ```
//!
//! The crate locates and classifies fixed points across the twelve-region
//! partition of (r, γ, β) space ([`equilibria`]), detects Neimark-Sacker
//! thresholds in θ and reduces the map to normal form up to the
//! discriminating quantity 𝓛 ([`nsbif`]), builds the gain-space
//! stability triangle for feedback control ([`control`]), and iterates,
//! classifies, and sweeps orbits ([`dynamics`]).
//!
//! Everything is a pure function of its arguments; values are immutable
//! and `Send + Sync`, so parameter sweeps parallelize trivially.

pub mod control;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod model;
pub mod nsbif;
mod roots;
pub mod serde_complex;

pub use error::{Error, Result};
pub use model::{map_step, Matrix2, Params, State};
