//! Variance of multiplicative functions of the class F_{α,β,k} in short
//! intervals: exponents, Euler-product constants, residue main terms,
//! fractional-part constants and exact sieved measurements.

pub mod arith;
pub mod constants;
pub mod error;
pub mod empirics;
pub mod euler;
pub mod exponents;
pub mod fmt;
pub mod fracsum;
pub mod oracle;
pub mod primes;
pub mod quad;
pub mod spec;
pub mod special;
pub mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
