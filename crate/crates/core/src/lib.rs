//! Spectral solver for the Poisson equation and related even-order PDEs on
//! the square `[-1,1]^2`.
//!
//! Discretization uses sparse ultraspherical operators with basis
//! recombination; the resulting generalized Sylvester equation is solved by
//! ADI (or factored ADI) with Zolotarev-optimal shifts.

pub mod adi;
pub mod banded;
pub mod chebfun;
pub mod cli;
pub mod error;
pub mod exprparse;
pub mod oracle;
pub mod poisson;
pub mod recomb;
pub mod spectra;
pub mod usops;
pub mod zolotarev;

#[cfg(test)]
mod testutil;

pub use banded::{BandedLu, BandedMatrix, SolveSide};
pub use error::{Error, Result};
