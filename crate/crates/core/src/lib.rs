//! Numerical laboratory for quantum channels with an adversarially
//! controlled input: channels and codes at small Hilbert-space dimension,
//! error observables on the jammer register, permutation symmetrization,
//! tail-bound derandomization of random codes, diamond-distance nets with
//! telescoping approximation, and maximin capacity estimates.

pub mod approx;
pub mod capacity;
pub mod channel;
pub mod code;
pub mod derand;
pub mod error;
pub mod qmath;
pub mod random;
pub mod scenario;
pub mod seed;
pub mod symmetry;

pub use error::{Error, Result};
