//! Numerical laboratory for viscous vortex layers in the low-Mach compressible
//! Navier-Stokes system on the periodic strip `T^d x R`.
//!
//! Layout:
//!
//! - [`domain`]: grids, fields, discrete calculus, mode split, norms, binary I/O.
//! - [`profiles`]: the self-similar shear layer and Gaussian diffusion waves.
//! - [`ansatz`]: mass-matched ansatz, its error terms, zero-mass and envelope checks.
//! - [`solver`]: compressible (acoustic-implicit) and incompressible (projection) steppers.
//! - [`diagnostics`]: perturbation variables, anti-derivatives, energies, decay fits, monitors.
//! - [`harness`]: configuration, experiments, persistence, CLI.

pub mod domain;
pub mod error;
pub mod jet;
pub mod profiles;
pub mod ansatz;
pub mod solver;
pub mod diagnostics;
pub mod harness;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/grids.md")]
mod book_grids {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/profiles.md")]
mod book_profiles {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/ansatz.md")]
mod book_ansatz {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/solvers.md")]
mod book_solvers {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/diagnostics.md")]
mod book_diagnostics {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
