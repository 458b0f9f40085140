//! Graded multivariate power series over exact or floating coefficients.

mod belitskii;
mod hat;
mod json;
mod matrix;
mod multi_index;
mod scalar;
mod series;
mod vector;

use thiserror::Error;

pub use belitskii::{belitskii_inner, belitskii_inner_tuple, monomial_weight, BelitskiiVariant};
pub use hat::{derivative_constant, dominates, HatSeries};
pub use json::{matrix_from_json, matrix_to_json, series_from_json, series_to_json, vector_from_json, vector_to_json};
pub use matrix::MatrixSeries;
pub use multi_index::{binomial, monomial_count, monomials, MultiIndex};
pub use scalar::{
    factorial, factorial_f64, format_f64, format_rational, ln_factorial, parse_rational, rational_from_f64, Complex64,
    GaussRational, Mode, Rational, RealScalar, Scalar, DEFAULT_TOL,
};
pub use series::{accumulate_product, GradedSeries, Terms};
pub use vector::VectorSeries;

pub const DEFAULT_TRUNCATION: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradedError {
    #[error("expected {expected} components, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("series have different variable counts")]
    VariableMismatch,
    #[error("input is not homogeneous of a single degree")]
    NotHomogeneous,
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("substitution component {0} has a constant term")]
    ConstantSubstitution(usize),
    #[error("matrix perturbation has a nonzero constant term")]
    ConstantTerm,
    #[error("parse error: {0}")]
    Parse(String),
}
