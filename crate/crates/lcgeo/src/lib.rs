//! A numerical laboratory for the geometry of log-concave functions.
//!
//! The crate represents integrable log-concave functions on R^n (desk scale,
//! n <= 4) in two affinely-closed families, computes the geometric
//! functionals attached to them — projections, sections, quermassintegrals,
//! total variation, John ellipsoids, isotropic constants — and certifies a
//! suite of sharp inequalities between those quantities by Monte Carlo
//! estimation with explicit error reporting.
//!
//! Module map:
//! - [`funcrep`]: evaluable function representations and pointwise operations;
//! - [`grassmann`]: orthonormal frames and Haar sampling on Grassmannians;
//! - [`quad`]: the integration engine, every estimate carrying a standard error;
//! - [`functionals`]: quermassintegrals, Steiner fits, John ellipsoids,
//!   isotropic positions, section power means;
//! - [`harness`]: inequality checks with a uniform 3-sigma decision rule.

pub mod error;
pub mod funcrep;
pub mod functionals;
pub mod geometry;
pub mod grassmann;
pub mod harness;
pub mod quad;

pub(crate) mod lin;
pub(crate) mod lp;
pub(crate) mod opt;

pub use error::{Error, Result};
