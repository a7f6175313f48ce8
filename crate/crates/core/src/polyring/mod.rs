//! Exact sparse polynomial and truncated power-series arithmetic over the
//! rationals and over word-sized prime fields.

mod monomial;
mod poly;
mod ring;
mod series;
mod text;
mod univariate;

pub use monomial::{binomial, multi_indices, multi_indices_of_order, MultiIndex};
pub use poly::{var_list, PolyRing, Polynomial};
pub use ring::{is_prime_u64, parse_rational, rat, PrimeField, Rationals, Ring, DEFAULT_PRIME, MAX_PRIME};
pub use series::{series_exp, series_log};
pub use text::parse_polynomial;
pub use univariate::UniPoly;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operands have different variable lists")]
    VariableMismatch,
    #[error("operands have different coefficient fields")]
    RingMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("series exponential needs a zero constant term")]
    NonZeroConstantTerm,
    #[error("series logarithm needs constant term 1")]
    ConstantTermNotOne,
    #[error("series operation needs a truncation bound")]
    TruncationRequired,
    #[error("characteristic {prime} does not exceed the truncation order {order}")]
    CharacteristicTooSmall { prime: u64, order: u32 },
    #[error("{value} has no image modulo {prime}")]
    NotInvertible { value: String, prime: u64 },
    #[error("{0} is not a prime in [3, 2^62)")]
    InvalidPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
}
