//! Exact computations in the free group `F_N`: marked metric graphs (points
//! of Outer space), rational geodesic currents, the geometric intersection
//! form between them, Perron-Frobenius dynamics of train-track
//! representatives, and one-edge free splittings with the curve-complex
//! analogue graphs built on them.
//!
//! Everything on the Outer-space side is exact rational arithmetic.
//! Floating point appears only in the dynamics module, where limits are
//! approximated and every approximate value carries an error estimate.

pub mod currents;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod intersection;
pub mod marked_graph;
pub mod rational;
pub mod splittings;
pub mod words;

pub use error::{Error, Result};
pub use rational::Rational;
