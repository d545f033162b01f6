//! Homotopy analysis eigensolver for the quartic anharmonic oscillator.
//!
//! The crate computes eigenpairs of `H = -1/2 d^2/dxi^2 + 1/2 xi^2 + beta xi^4`
//! in a truncated harmonic-oscillator basis, all in extended precision:
//!
//! - [`scalar`]: MPFR-backed real numbers and the precision context.
//! - [`oscillator`]: basis, banded Hamiltonian, inner products, quadrature.
//! - [`ham`]: order-by-order homotopy series with optimal diagonal
//!   coefficients and residual tracking.
//! - [`perturbation`]: Rayleigh–Schrödinger baseline.
//! - [`pade`]: diagonal Padé acceleration of the energy series.
//! - [`driver`]: sweeps, iterative restarts, continuation in `beta`, a
//!   diagonalization oracle and CSV/JSON reports.

pub mod driver;
pub mod error;
pub mod ham;
pub mod oscillator;
pub mod pade;
pub mod perturbation;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{format_scalar, make_context, PrecisionContext, Real};
