//! Modeling toolkit for a two-mode superconducting circuit whose transmon-like
//! qubit and lumped LC readout mode are orthogonal and coupled only through a
//! built-in cross-Kerr term.
//!
//! The crate covers the energy scales of the circuit ([`params`]), the
//! perturbative spectrum ([`analytic`]) and an exact-diagonalization check of it
//! ([`numeric`]), flux tuning ([`flux`]), T1 budgets ([`coherence`]) and
//! dispersive single-shot readout ([`readout`]). [`cli`] wires these into the
//! `quantromon` binary.

pub mod analytic;
pub mod cli;
pub mod coherence;
pub mod error;
pub mod flux;
pub mod numeric;
pub mod params;
pub mod readout;

pub use error::{Error, Result};
