//! Benchmarking toolkit for quantum-repeater memories.
//!
//! Given a memory's benchmark parameters (efficiency, lifetime, mode
//! count, fidelity, source model), the crate computes the information
//! capacity of the memory as a discrete channel, the expected
//! entanglement distribution time of a nested repeater chain built from
//! it, and the resulting interconnect rate in bits per minute. Supporting
//! modules reduce raw photon-count records to the underlying estimators
//! (g2, heralding rates, storage efficiency, crosstalk, qudit fidelity
//! bounds), reconstruct qubit states from tomography counts, bound the
//! entanglement of formation of noisy qudit pairs, and cross-check the
//! analytic timing model with a discrete-event Monte-Carlo simulation.

pub mod capacity;
pub mod counts;
pub mod entanglement;
pub mod error;
pub mod mcsim;
pub mod repeater;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
