//! lmlab: construction and verification of last multipliers of vector
//! fields on coordinate charts — with a plain volume form, on Poisson
//! structures, and on Riemannian metrics — plus a flow-based numerical
//! cross-check and a document-driven CLI.
//!
//! A function `m` is a last multiplier of the vector field `A` when
//! `A(m) + m div A = 0`; equivalently `div(m A) = 0`, equivalently
//! `d(m i_A V) = 0`. The library verifies these conditions (and their many
//! reformulations) by exact symbolic differentiation followed by sampled
//! zero tests on a user-declared domain box, and can confirm passing
//! instances dynamically by transporting `m` along integrated trajectories.

pub mod error;
pub mod expr;
pub mod fields;

pub use error::{Error, Result};
