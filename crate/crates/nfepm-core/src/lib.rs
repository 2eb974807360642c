//! Near-field electromagnetic channel for a dipole source in front of a
//! continuous strip aperture, with closed-form position/attitude solvers,
//! Ziv-Zakai and expected Cramér-Rao bounds, and a grid MAP estimator.
//!
//! Units are SI throughout: lengths in metres, voltages in volts, SNR as a
//! linear ratio unless a name ends in `_db`. Element indices are 1-based.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod ecrb;
pub mod error;
pub mod geometry;
pub mod map;
pub mod numerics;
pub mod observation;
pub mod solver;
pub mod zzb;

pub use channel::{PoseCpl, PoseGeneral};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, PriorUniform, RegionClass, Wave};
pub use observation::{NoiseSpec, VoltageVector};
