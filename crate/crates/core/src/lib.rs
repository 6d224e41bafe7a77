//! Exact algebra for small fermionic systems: Slater-determinant states,
//! one-particle reduced density matrices and their natural occupation
//! numbers, generalized Pauli constraints, pinning analysis, and
//! exact-rational polytope projection for spin/orbital constraint systems.
//!
//! Orbital indices are 1-based throughout.

pub mod constraints;
pub mod data;
pub mod fock;
pub mod pinning;
pub mod polytope;
pub mod rational;
pub mod rdm;
pub mod spin;

pub use constraints::{AffineConstraint, ConstraintSet, EvaluationReport, Relation, Status};
pub use fock::{FermionState, OrbitalUnitary, SlaterDet};
pub use rdm::{NaturalFrame, OneRDM, Spectrum};

pub use num_complex::Complex64;
pub use rational::Rational;
