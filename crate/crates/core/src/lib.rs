//! heatlab: a numerical laboratory for Littlewood-Paley analysis, Besov
//! norms and Dirichlet heat flow on torus, slab, bounded and
//! exterior-proxy geometries.
//!
//! The crate is organized around the objects it measures:
//!
//! - [`grid`]: periodic lattices and real fields with cached spectra;
//! - [`cutoffs`]: dyadic cutoffs, Littlewood-Paley blocks, heat multiplier;
//! - [`besov`]: Besov norms (block and finite-difference flavors) and the
//!   product / composition / duality / interpolation estimate checks;
//! - [`heat`]: the exact spectral heat solver with Duhamel forcing and
//!   maximal-regularity reports;
//! - [`halfspace`]: Dirichlet slab solver by antisymmetric reflection;
//! - [`fd`]: finite-difference Dirichlet solvers on masked geometries and
//!   decay-rate measurements;
//! - [`nonlinear`]: semilinear solver, blow-up detection and small-data
//!   global-existence experiments.

pub mod besov;
pub mod halfspace;
pub mod heat;
pub mod cutoffs;
pub mod error;
pub mod families;
pub mod fd;
mod fft;
pub mod grid;
pub mod io;
pub mod nonlinear;
pub mod rng;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
