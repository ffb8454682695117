//! Variational eigensolver laboratory for Anderson-impurity-model qubit
//! Hamiltonians: Pauli algebra, Jordan-Wigner mapping, circuit simulation
//! with noise, UCC and hardware-efficient ansatze, routing, VQE drivers and
//! an exact-diagonalization oracle.

pub mod ansatz;
pub mod circuit;
pub mod cluster;
pub mod error;
pub mod experiment;
pub mod fermion;
pub mod noise;
pub mod pauli;
pub mod spectral;
pub mod topology;
pub mod vqe;

pub use error::{Error, Result};
