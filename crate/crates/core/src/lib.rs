//! Numerical toolkit for a critical quantum sensor built on a Fock-space
//! lattice: a qubit coupled to two bosonic modes with linear and three-body
//! terms, whose fixed-excitation sector is a chiral chain with cell-dependent
//! hoppings.
//!
//! The parameter `theta` is encoded in the exact zero-energy mode; this crate
//! computes that mode, its quantum and classical Fisher information, the
//! excitation gap, winding numbers along the cell curve, finite-size scaling
//! exponents, boundary geometry and the circuit-QED parameter map.

pub mod bessel;
pub mod cli;
pub mod error;
pub mod extended;
pub mod geometry;
pub mod hardware_map;
pub mod linalg;
pub mod metrology;
pub mod model;
pub mod scaling;
pub mod spectrum;
pub mod topology;
pub mod verify;
pub mod zero_mode;

pub use error::{Error, Result};
pub use model::ModelParams;
