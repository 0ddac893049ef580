//! Thomas-Fermi atoms, negative-eigenvalue traces of magnetic Schrödinger
//! and Pauli operators on 3D grids, and minimization of the total energy
//! over divergence-free vector potentials.
//!
//! Units: the kinetic operator is `-Δ` (so hydrogen with charge `c` has
//! ground energy `-c²/4`) and electrons have two spin states.

pub mod coulomb;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod minimize;
pub mod operator;
pub mod par;
pub mod potentials;
pub mod semiclassics;
pub mod tf;

pub use error::{Error, Result};
