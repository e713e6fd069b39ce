//! Continued fractions with bounded partial quotients, viewed through the
//! semigroup generated by the matrices `[[0, 1], [1, a]]`.
//!
//! The crate is split by subject:
//!
//! * [`cf`] – alphabets, words, exact 2×2 matrices and eigen-data.
//! * [`orbit`] – norm-ball enumeration, denominator multiplicities, sector counts.
//! * [`construction`] – the multi-scale parameter schedule and sector sets.
//! * [`modular`] – closures mod `q`, admissible residues, obstruction search.
//! * [`arith`] – Ramanujan sums, averaged sums over residue tables, singular series.
//! * [`dimension`] – Hausdorff dimension via a collocated transfer operator.
//! * [`circle`] – exponential sums, major-arc main terms and error profiles.
//! * [`primroot`] – primitive roots whose fractions have small height.

pub mod arith;
pub mod cf;
pub mod circle;
pub mod construction;
pub mod dimension;
mod error;
pub mod modular;
pub mod numth;
pub mod orbit;
pub mod primroot;

pub use cf::{Alphabet, EigenData, Mat2, Word};
pub use error::{Error, Result};
pub use orbit::{DetFilter, MultiplicityIndex, OrbitBall};
