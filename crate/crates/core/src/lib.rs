//! Bicomplex continuation of the stationary Gross-Pitaevskii equation for a
//! PT-symmetric double well, a four-level matrix model of the same system,
//! and tools for encircling its exceptional points.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bicomplex;
pub mod ep;
pub mod error;
pub mod linalg;
pub mod matrix_model;
pub mod model;
pub mod solver;
pub mod spectrum;

pub use bicomplex::{Bicomplex, Conjugation, IdempotentPair, ImagUnit, JComplex};
pub use error::{Error, Result};
