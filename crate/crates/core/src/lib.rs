//! Entanglement between two two-state bodies coupled by a distance-dependent
//! potential.
//!
//! Each body has two internal states sitting at different positions, so the
//! interaction energy depends on the joint state through the four distances
//! `d11, d12, d21, d22`. The crate evolves such systems exactly, measures the
//! entanglement they build up, checks the constraint
//! `f(d11) + f(d22) - f(d12) - f(d21) = 0` under which no entanglement can
//! arise, and runs an echo protocol that isolates subleading terms of an
//! inverse-power expansion of `f`.
//!
//! Everything is in natural units with ħ = 1.

pub mod cli;
pub mod dynamics;
pub mod echo;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod potentials;

pub use dynamics::{CouplingCoefficients, Simulation, TwoQubitState};
pub use echo::{EchoParams, EchoProtocol, EchoSweepRecord};
pub use error::{Error, Result};
pub use geometry::{Distances, StateConfiguration, Trajectory};
pub use numerics::QuadratureSpec;
pub use potentials::Potential;
