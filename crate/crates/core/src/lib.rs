//! Quantization kinematics on discrete configuration manifolds.
//!
//! A configuration manifold is modelled as an oriented 2-complex with a vertex
//! measure ([`mesh`]). Its integral homology ([`homology`]) fixes the set of
//! inequivalent quantizations ([`classify`]): an element of `H²(M,ℤ)` (the
//! Chern class of the line bundle), a character of `H₁(M,ℤ)` (flux angles and
//! torsion signs) and a real constant `c`. Discrete U(1) connections
//! ([`gauge`]) realize those classes, [`operators`] builds the position and
//! momentum observables on them and [`spectra`] diagonalizes the magnetic
//! Hamiltonian.

pub mod classify;
pub mod cli;
pub mod error;
pub mod gauge;
pub mod homology;
pub mod mesh;
pub mod operators;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
