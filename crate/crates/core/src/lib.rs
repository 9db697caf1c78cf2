//! Quantum double Hamiltonians over finite groups, clock gadgets that
//! reproduce them as low-energy effective Hamiltonians, and exact
//! term-by-term Bloch perturbation series for checking the construction.

pub mod error;
pub mod groups;
pub mod fsio;
pub mod lattice;
pub mod linop;
pub mod qdmodel;
pub mod ribbon;
pub mod gadget;
pub mod bloch;
pub mod harness;

pub use error::{QdError, Result};
