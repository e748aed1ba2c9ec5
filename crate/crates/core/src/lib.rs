//! Exact symbolic side of the Carnot-group ACF toolkit.
//!
//! Everything here works over exact rationals and is allocation-only
//! (`alloc`, no `std`): stratified polynomials, Carnot group models given by
//! polynomial-coefficient horizontal fields, horizontal calculus, and the
//! construction of `u = P1 - P3` counterexamples with exact certificates.
//!
//! Numerical work (gauge balls, Monte-Carlo integrals) and all IO live in the
//! `carnot-acf` companion crate.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counterexample;
pub mod group;
pub mod hcalc;
pub mod linalg;
pub mod ratpoly;

pub use counterexample::{construct, CertificateReport, ConstructError, CounterexampleResult, PairChoice};
pub use group::{CarnotGroup, Derivation, GroupError, GroupLaw, Presentation, VectorField};
pub use hcalc::{Harmonicity, HorizontalSection};
pub use ratpoly::{
    parse_poly, parse_rational, print_poly, Monomial, PolyError, Polynomial, Rational,
    StratifiedWeights, VarNames,
};
