//! Exact computational kernel for polynomial logarithmic q-forms on projective
//! space and stability certificates for the singular foliations they define.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`] — exact coefficient arithmetic (arbitrary-precision rationals,
//!   prime fields, and dual numbers for derivative checks),
//! * [`linalg`] — sparse exact linear algebra: rank and kernel bases,
//! * [`poly`] — sparse homogeneous multivariate polynomials,
//! * [`multivec`] — the exterior algebra of C^m with interior products and the
//!   Koszul complex of a degree vector,
//! * [`forms`] — polynomial differential forms on the affine cone C^{n+1},
//! * [`logfol`] — construction and verification of logarithmic q-forms of a
//!   given degree type, genericity and balancedness predicates, and
//!   fixed-degree ideal slices of the crossing strata,
//! * [`tangent`] — the coordinate model of twisted projective 2-forms, the
//!   perturbation (Zariski tangent) system, the derivative of the natural
//!   parametrization, and the rank-equality stability certificate.
//!
//! Everything is `no_std` + `alloc`; values are immutable after construction
//! and safe to share across threads. All arithmetic is exact: there is no
//! floating point anywhere in the crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod comb;
pub mod error;
pub mod field;
pub mod forms;
pub mod linalg;
pub mod logfol;
pub mod multivec;
pub mod poly;
pub mod rng;
pub mod tangent;

pub use error::{Error, Result};
pub use field::{Field, FieldDesc, PrimeField, Rationals, Ring};

/// Default prime for certificate runs. Large enough that random genericity
/// failures modulo p are improbable at desk scale, small enough for
/// single-word arithmetic.
pub const DEFAULT_PRIME: u64 = 32003;
