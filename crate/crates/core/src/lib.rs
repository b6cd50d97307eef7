//! Classical toolkit for quantum Krylov ground-state energy estimation.
//!
//! Two measurement strategies for the projected Hamiltonian matrix are
//! emulated under binomial shot noise: the conventional per-Pauli-term
//! route (weighted by the LCU 1-norm) and a mirror route that reconstructs
//! the Hamiltonian from a central finite-difference combination of
//! time-evolution expectation values at symmetrically shifted times. On
//! top sit the variance-optimal shot allocations, the time-shift and
//! energy-shift preprocessing that minimize the total matrix perturbation,
//! thresholded generalized eigensolving, Hamiltonian-moment extraction
//! with Lanczos-style energy error mitigation, and integral-level 1-norm
//! reduction (orbital rotations and number-sector shifts).

pub mod chem;
pub mod engine;
pub mod error;
pub mod finitediff;
pub mod fixtures;
pub mod krylov;
pub mod linalg;
pub mod moments;
pub mod pauli;
pub mod reduction;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
