//! Random-matrix models of decoherence.
//!
//! A central system coupled to a chaotic environment, with the coupling drawn
//! from a Gaussian ensemble. The crate provides three layers that can be
//! compared against each other:
//!
//! * exact Monte Carlo ensembles of reduced density matrices ([`dynamics`]),
//! * the linear-response average density matrix and purities ([`linear_response`]),
//! * Fermi-golden-rule master equations ([`master_equation`]).
//!
//! [`experiments`] runs the convergence, Werner and layer-comparison studies
//! and exports CSV data.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linear_response;
pub mod master_equation;
pub mod matrix;
pub mod observables;
pub mod parallel;
pub mod rmt;
pub mod state;

pub use error::{Error, Invariant, Result};
pub use matrix::{C64, ComplexMatrix, HermitianEigen};
pub use state::{DensityMatrix, PureState, SubsystemSplit};
