//! Simulation and verification laboratory for multidimensional random walks
//! and directionally reinforced random walks.
//!
//! The crate is organized around five concerns:
//!
//! * [`pmf`] — exact arithmetic on finite integer-supported distributions
//!   (construction, convolution, moments, concentration functionals);
//! * [`hierarchy`] — mixture-of-uniform waiting-time laws, their level
//!   truncations, the coupled bundle sampler, and the recursive parameter
//!   constructor in iterated-log arithmetic;
//! * [`walks`] — lattice walk simulation and geometric event detection
//!   (returns, sign changes, level crossings, segment–box hits);
//! * [`drw`] — directionally reinforced random walks and their embedded
//!   walks;
//! * [`verify`] — exact lemma oracles, Monte Carlo estimators with Wilson
//!   intervals, and exponent fitting.

pub mod drw;
pub mod error;
pub mod hierarchy;
pub mod mag;
pub mod pmf;
pub mod stream;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
pub use mag::Mag;
pub use pmf::{ExactPmf, FloatPmf, LatticePmf, MomentSummary, Shape};
