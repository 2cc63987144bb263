//! Exact absorption distributions, moments, duality and limit laws for
//! weighted sampling (model I) and OK-Corral (model II) urns.
//!
//! Every computation is generic over [`numerics::Real`], so the same code runs
//! in exact rationals, big floats or machine floats.

pub mod cli;
pub mod closedform;
pub mod error;
pub mod limits;
pub mod moments;
pub mod numerics;
pub mod oracle;
pub mod simulate;
pub mod weights;

pub use error::{Error, Result};
pub use numerics::{BigFloat, Polynomial, Real, Scalar, ScalarMode};
pub use oracle::ExactDistribution;
pub use weights::{Model, UrnSpec, WeightSequence};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Distribution with exact rational probabilities.
pub type RationalDistribution = ExactDistribution<Rational>;
/// Distribution with big-float probabilities.
pub type BigFloatDistribution = ExactDistribution<BigFloat>;
/// Distribution with machine-float probabilities.
pub type FloatDistribution = ExactDistribution<f64>;
/// Polynomial with exact rational coefficients.
pub type RationalPolynomial = Polynomial<Rational>;
