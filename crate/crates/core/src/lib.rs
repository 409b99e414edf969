//! Holonomic gates for trapped ions on the adiabatic manifold of a
//! resonant Jaynes-Cummings model.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adiabatic;
pub mod controls;
pub mod conventions;
pub mod error;
pub mod fock;
pub mod geometry;
pub mod holonomy;
pub mod jc;
pub mod linalg;
pub mod resilience;

pub use error::{Error, Result};
