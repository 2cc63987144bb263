//! Scalar tower, summation and combinatorial special functions.

pub mod bigfloat;
pub mod combinatorics;
pub mod dynamic;
pub mod poly;
pub mod real;
pub mod summation;

pub use bigfloat::BigFloat;
pub use combinatorics::{
    binom_general, binom_rational, binomial, double_factorial, factorial, falling_factorial,
    ramanujan_q, rising_factorial, stirling_first_unsigned, stirling_second,
};
pub use dynamic::{parse_rational, rational_string, rational_to_decimal, Scalar, ScalarMode};
pub use poly::Polynomial;
pub use real::{rational_to_f64, Real, Transcendental};
pub use summation::{compensated_sum, KahanSum};
