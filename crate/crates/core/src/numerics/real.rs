//! The scalar tower every computation in the crate is generic over.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use super::bigfloat::BigFloat;
use super::dynamic::{Scalar, ScalarMode};
use super::summation::compensated_sum;

/// Arithmetic shared by exact rationals, big floats and machine floats.
///
/// Mixing two implementors in one expression is a type error; conversions
/// between modes only happen through [`Real::from_rational`] and
/// [`Real::into_scalar`].
pub trait Real:
    Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn from_rational(r: &BigRational) -> Self;

    fn from_bigint(n: &BigInt) -> Self {
        Self::from_rational(&BigRational::from_integer(n.clone()))
    }

    fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    fn from_u64(n: u64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(num.into(), den.into()))
    }

    /// `base^exp` for a rational exponent. Exact scalars only answer when the
    /// result is rational (integer exponents).
    fn rational_power(base: &BigRational, exp: &BigRational) -> Option<Self>;

    /// The exact value, when this scalar is exact.
    fn to_rational(&self) -> Option<BigRational>;

    fn to_f64(&self) -> f64;

    fn into_scalar(self) -> Scalar;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, e: u32) -> Self {
        num_traits::pow(self.clone(), e as usize)
    }

    /// Sum of a batch of terms. Floating implementors override this with
    /// magnitude-sorted compensated summation, which matters for the
    /// alternating sums in the closed forms.
    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    fn is_exact() -> bool {
        Self::MODE == ScalarMode::Exact
    }
}

/// Transcendental functions needed by the limit laws. Not available for
/// exact rationals.
pub trait Transcendental: Real {
    fn pi() -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn powf(&self, e: &Self) -> Self;
}

impl Real for BigRational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn rational_power(base: &BigRational, exp: &BigRational) -> Option<Self> {
        exact_rational_power(base, exp)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Correctly scaled conversion that does not overflow for huge numerators
/// and denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // Keep ~64 significant bits of the quotient.
    let shift = 64 - (nb - db);
    let scaled = if shift >= 0 {
        (r.numer() << (shift as usize)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-shift) as usize))
    };
    // Two steps so subnormal results do not flush to zero early.
    let half = -shift / 2;
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(half as i32) * 2f64.powi((-shift - half) as i32)
}

macro_rules! impl_machine_float {
    ($t:ty, $mode:expr) => {
        impl Real for $t {
            const MODE: ScalarMode = $mode;

            fn from_rational(r: &BigRational) -> Self {
                rational_to_f64(r) as $t
            }

            fn rational_power(base: &BigRational, exp: &BigRational) -> Option<Self> {
                let b = rational_to_f64(base) as $t;
                let e = rational_to_f64(exp) as $t;
                Some(b.powf(e))
            }

            fn to_rational(&self) -> Option<BigRational> {
                None
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn into_scalar(self) -> Scalar {
                Scalar::Machine(self as f64)
            }

            fn abs_val(&self) -> Self {
                self.abs()
            }

            fn powi(&self, e: u32) -> Self {
                <$t>::powi(*self, e as i32)
            }

            fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
                compensated_sum(terms.into_iter().map(|t| t as f64)) as $t
            }
        }

        impl Transcendental for $t {
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn sinh(&self) -> Self {
                <$t>::sinh(*self)
            }
            fn cosh(&self) -> Self {
                <$t>::cosh(*self)
            }
            fn powf(&self, e: &Self) -> Self {
                <$t>::powf(*self, *e)
            }
        }
    };
}

impl_machine_float!(f64, ScalarMode::Machine);
impl_machine_float!(f32, ScalarMode::Machine);

impl Real for BigFloat {
    const MODE: ScalarMode = ScalarMode::BigFloat;

    fn from_rational(r: &BigRational) -> Self {
        BigFloat::from_rational(r, super::bigfloat::default_precision())
    }

    fn rational_power(base: &BigRational, exp: &BigRational) -> Option<Self> {
        let b = <Self as Real>::from_rational(base);
        if exp.is_integer() {
            if let Some(e) = exp.to_integer().to_i64() {
                if e >= 0 {
                    return Some(Real::powi(&b, e as u32));
                }
                return Some(BigFloat::one() / Real::powi(&b, (-e) as u32));
            }
        }
        if let Some(exact) = exact_rational_power(base, exp) {
            return Some(<Self as Real>::from_rational(&exact));
        }
        let e = <Self as Real>::from_rational(exp);
        Some(Transcendental::powf(&b, &e))
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn to_f64(&self) -> f64 {
        BigFloat::to_f64(self)
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Big(self)
    }

    fn powi(&self, e: u32) -> Self {
        BigFloat::powi(self, e as usize)
    }
}

impl Transcendental for BigFloat {
    fn pi() -> Self {
        BigFloat::pi(super::bigfloat::default_precision())
    }
    fn sqrt(&self) -> Self {
        BigFloat::sqrt(self)
    }
    fn exp(&self) -> Self {
        BigFloat::exp(self)
    }
    fn ln(&self) -> Self {
        BigFloat::ln(self)
    }
    fn sinh(&self) -> Self {
        BigFloat::sinh(self)
    }
    fn cosh(&self) -> Self {
        BigFloat::cosh(self)
    }
    fn powf(&self, e: &Self) -> Self {
        BigFloat::powf(self, e)
    }
}

/// `base^exp` when it is rational: integer exponents, or roots of perfect
/// powers such as `4^(1/2)`.
pub fn exact_rational_power(base: &BigRational, exp: &BigRational) -> Option<BigRational> {
    let den = exp.denom().to_u32()?;
    let num = exp.numer().to_i32()?;
    if base.is_zero() {
        return if num > 0 { Some(BigRational::zero()) } else { None };
    }
    let root = if den == 1 {
        base.clone()
    } else {
        if base.is_negative() {
            return None;
        }
        let (p, q) = (base.numer().nth_root(den), base.denom().nth_root(den));
        if p.pow(den) != *base.numer() || q.pow(den) != *base.denom() {
            return None;
        }
        BigRational::new(p, q)
    };
    Some(num_traits::pow::Pow::pow(&root, num))
}

/// Lossless check used by tests and the CLI: is `x` exactly the integer `n`?
pub fn is_integer_value<T: Real>(x: &T, n: i64) -> bool {
    match x.to_rational() {
        Some(r) => r == BigRational::from_integer(n.into()),
        None => (x.to_f64() - n as f64).abs() == 0.0,
    }
}
