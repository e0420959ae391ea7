//! Numerical laboratory for the data complexity of operator learning.
//!
//! Two halves that meet in the middle:
//!
//! - [`adversarial`] builds lower-bound witnesses: bump partitions of the cube and of
//!   Gaussian space, fooling pairs that defeat any sampling decoder, and bi-orthogonal
//!   hypercubes that embed finite-dimensional hardness into operator space.
//! - [`fno`], [`analysis`] and [`erm`] build the upper-bound side: a Fourier neural
//!   operator with hand-written reverse mode, closed-form Lipschitz and covering-number
//!   bounds with sampling audits, and an ERM decoder with rate sweeps.
//!
//! [`space::GridFunction`] is the common currency. [`runner`] wires everything into
//! verb-dispatched jobs that emit JSON reports.
//!
//! ```
//! use opwidth::space::{Domain, GridFunction, NormSpec};
//!
//! let f = GridFunction::from_fn(1, 256, Domain::Cube, |x| (2.0 * std::f64::consts::PI * x[0]).sin()).unwrap();
//! let l2 = opwidth::space::norm(&f, &NormSpec::l2()).unwrap();
//! assert!((l2 - 0.5f64.sqrt()).abs() < 1e-12);
//! ```

pub mod adversarial;
pub mod analysis;
pub mod erm;
mod error;
pub mod fno;
pub mod rng;
pub mod runner;
pub mod space;

pub use error::{Error, Result};
