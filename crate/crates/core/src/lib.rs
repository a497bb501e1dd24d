//! Simulation toolkit for piezoelectric vibration micro power generators.
//!
//! The generator can be described at several levels of abstraction:
//!
//! * a functional current source in parallel with the piezo capacitance,
//! * a structural equivalent circuit (inductor = inertia, capacitor =
//!   compliance, resistor = viscous damping, ideal transformer = coupling),
//! * a lumped single-degree-of-freedom electromechanical model,
//! * effective lumped parameters derived from cantilever and seismic-mass
//!   geometry plus material constants.
//!
//! The [`circuit`] engine (modified nodal analysis with Newton iteration)
//! runs the circuit-level models and the diode voltage multiplier used to
//! rectify the generator output. [`harness`] strings everything together
//! into reproducible studies with CSV export.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lumped;
pub mod materials;
pub mod netlist;
pub mod series;

pub use error::{Error, Result};

/// Standard gravity in m/s², the value used for "1 g" drives.
pub const STANDARD_GRAVITY: f64 = 9.80665;
