//! Numerical toolkit for Weyl products on modulation spaces.
//!
//! Functions, windows and symbols are sampled on centered uniform grids
//! ([`grid`]); Gabor coefficients live on truncated lattices ([`lattice_norms`]).

pub mod error;
pub mod experiments;
pub mod gabor;
pub mod grid;
pub mod hermite;
pub mod io;
pub mod lattice_norms;
pub mod matrix_space;
pub mod phase_space;
pub mod pseudodiff;
pub mod verification;
pub mod weights;

pub use error::{Error, Result};
