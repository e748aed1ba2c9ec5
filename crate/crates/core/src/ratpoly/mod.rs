//! Exact multivariate polynomials over the rationals, graded by the weights of
//! a stratification.

mod parse;
mod poly;
mod weights;

use alloc::string::String;
use num_bigint::BigInt;
use num_traits::One;

pub use parse::{parse_poly, parse_poly_with, parse_rational, print_poly, print_poly_with, format_rational};
pub use poly::{ArithOp, Monomial, Polynomial};
pub use weights::{StratifiedWeights, VarNames};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("dilation factor must be nonzero")]
    ZeroLambda,
    #[error("syntax error at position {pos}: {message}")]
    SyntaxError { pos: usize, message: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("invalid strata: {0}")]
    BadStrata(String),
}

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for a rational base.
pub fn rat_pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}
