//! Classical polarization optics as a computing substrate.
//!
//! Light beams with pure polarization act as "classical qubits": an
//! x-polarized beam encodes logical 1 and a y-polarized beam logical 0.
//! Waveplates apply SU(2) transforms to a single beam and 50/50 beam
//! splitters clone and re-interfere beams. This crate provides:
//!
//! * [`jones`]: Jones vectors and matrices, waveplates, Q-H-Q synthesis.
//! * [`network`]: optical netlists and deterministic beam propagation.
//! * [`bv`]: the interferometric Bernstein-Vazirani circuit, classical-mode
//!   evaluation of `f(x) = a·x mod 2`, and the n-query classical baseline.
//! * [`qref`]: an n-qubit state-vector reference for the textbook algorithm,
//!   oracle equivalence, phase kickback, and separability certification.
//! * [`dsl`]: the `.onl` text netlist format.

pub mod bits;
pub mod bv;
pub mod dsl;
pub mod error;
pub mod jones;
pub mod network;
pub mod qref;

pub use bits::BitString;
pub use error::{Error, Result};
