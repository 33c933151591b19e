//! Simulation of Hong-Ou-Mandel (HOM) based measurements on time-bin encoded
//! photonic quantum states.
//!
//! A single photon carries a qubit (or qudit) in its arrival time: the basis
//! states `|t_i>` are discrete temporal modes separated by a few picoseconds.
//! Interfering an unknown target photon with an engineered reference photon on
//! a balanced beam splitter turns the anti-bunching (coincidence) rate into a
//! projective measurement of the target state. This crate models that
//! measurement chain end to end:
//!
//! - [`quantum`]: pure states, density matrices, observables, and the dense
//!   linear algebra they need (d ≤ ~64 throughout).
//! - [`hom`]: the two-outcome HOM measurement with visibility and accidental
//!   noise, temporal-mode overlap, Poissonian count simulation, the three
//!   count-normalization estimators, and a second-quantized Fock oracle.
//! - [`tomography`]: MUB projection schedules and maximum-likelihood
//!   reconstruction of time-bin qubits from HOM count records.
//! - [`contextuality`]: CHSH-type test on hybrid polarization-time entangled
//!   single-photon states.
//! - [`qwalk`]: discrete-time quantum walk (polarization coin, time-bin
//!   walker) and numerical synthesis of arbitrary qudit states.
//! - [`entangle`]: SPDC generation of time-bin entangled pairs from a
//!   walk-shaped pump and two-station joint HOM statistics.
//!
//! All randomized operations take explicit seeds and are reproducible; all
//! types are immutable values safe to share across threads.

pub mod contextuality;
pub mod entangle;
pub mod error;
pub mod hom;
pub mod optim;
pub mod qwalk;
pub mod quantum;
pub mod tomography;

pub use error::{Error, Result};
