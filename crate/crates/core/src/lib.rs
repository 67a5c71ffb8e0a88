//! Soliton-to-chaos analysis for a Bose-Einstein condensate in a moving
//! optical superlattice.
//!
//! The traveling-wave amplitude obeys a driven Duffing equation. This crate
//! evaluates its Melnikov function, counts Melnikov zeros per period to
//! predict chaos probabilities, builds the first-order chaotic-soliton
//! solution, and estimates chaos probabilities by Monte Carlo over
//! stroboscopic sections.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod melnikov;
pub mod montecarlo;
pub mod ode;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod soliton;

pub use dynamics::PhaseState;
pub use error::{Error, Result};
pub use params::{DimensionlessParams, LatticeConfig, PhysicalParams, WaveRatio};
