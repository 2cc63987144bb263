//! Arbitrary-precision binary floating point backed by `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use astro_float::{Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};

/// Used when no precision is configured.
pub const DEFAULT_PRECISION_BITS: usize = 256;

/// Environment variable consulted for the process-wide default precision.
pub const PRECISION_ENV: &str = "URNLAB_PRECISION_BITS";

const RM: RoundingMode = RoundingMode::ToEven;

static PRECISION: AtomicUsize = AtomicUsize::new(0);
static ENV_PRECISION: OnceLock<usize> = OnceLock::new();

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Precision used for values created without an explicit precision
/// (`zero()`, `one()`, conversions from rationals).
pub fn default_precision() -> usize {
    match PRECISION.load(AtomicOrdering::Relaxed) {
        0 => *ENV_PRECISION.get_or_init(|| {
            std::env::var(PRECISION_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&p| p >= 64)
                .unwrap_or(DEFAULT_PRECISION_BITS)
        }),
        p => p,
    }
}

/// Overrides the default precision for the whole process.
pub fn set_default_precision(bits: usize) {
    PRECISION.store(bits.max(64), AtomicOrdering::Relaxed);
}

/// A big float together with the precision its results are rounded to.
///
/// Binary operations round to the larger precision of the two operands.
#[derive(Clone)]
pub struct BigFloat {
    inner: astro_float::BigFloat,
    precision: usize,
}

impl BigFloat {
    fn wrap(inner: astro_float::BigFloat, precision: usize) -> Self {
        BigFloat { inner, precision }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn from_f64(x: f64, precision: usize) -> Self {
        Self::wrap(astro_float::BigFloat::from_f64(x, precision), precision)
    }

    pub fn from_bigint(n: &BigInt, precision: usize) -> Self {
        let s = n.to_string();
        let inner = with_consts(|cc| astro_float::BigFloat::parse(&s, Radix::Dec, precision, RM, cc));
        Self::wrap(inner, precision)
    }

    pub fn from_rational(r: &BigRational, precision: usize) -> Self {
        let num = Self::from_bigint(r.numer(), precision + 64);
        let den = Self::from_bigint(r.denom(), precision + 64);
        Self::wrap(num.inner.div(&den.inner, precision, RM), precision)
    }

    pub fn parse(s: &str, precision: usize) -> Option<Self> {
        let inner = with_consts(|cc| astro_float::BigFloat::parse(s, Radix::Dec, precision, RM, cc));
        if inner.is_nan() {
            None
        } else {
            Some(Self::wrap(inner, precision))
        }
    }

    pub fn pi(precision: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(precision, RM)), precision)
    }

    pub fn is_nan(&self) -> bool {
        self.inner.is_nan()
    }

    pub fn to_f64(&self) -> f64 {
        if self.inner.is_zero() {
            return 0.0;
        }
        self.to_decimal_string().parse::<f64>().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with all digits the precision supports.
    pub fn to_decimal_string(&self) -> String {
        if self.inner.is_zero() {
            return "0".to_string();
        }
        with_consts(|cc| self.inner.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".to_string())
    }

    pub fn powi(&self, e: usize) -> Self {
        Self::wrap(self.inner.powi(e, self.precision, RM), self.precision)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.inner.sqrt(self.precision, RM), self.precision)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.inner.exp(self.precision, RM, cc)), self.precision)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_consts(|cc| self.inner.ln(self.precision, RM, cc)), self.precision)
    }

    pub fn sinh(&self) -> Self {
        Self::wrap(with_consts(|cc| self.inner.sinh(self.precision, RM, cc)), self.precision)
    }

    pub fn cosh(&self) -> Self {
        Self::wrap(with_consts(|cc| self.inner.cosh(self.precision, RM, cc)), self.precision)
    }

    /// `self^e` for positive `self`, as `exp(e ln self)` with guard bits.
    ///
    /// The library `pow` never terminates when the result is exactly
    /// representable (`4^0.5`), so it is avoided.
    pub fn powf(&self, e: &Self) -> Self {
        let p = self.precision.max(e.precision);
        if self.inner.is_zero() {
            return Self::wrap(astro_float::BigFloat::from_u8(0, p), p);
        }
        let guard = p + 64;
        let v = with_consts(|cc| {
            let l = self.inner.ln(guard, RM, cc);
            l.mul(&e.inner, guard, RM).exp(guard, RM, cc)
        });
        let mut v = v;
        let _ = v.set_precision(p, RM);
        Self::wrap(v, p)
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({}, {} bits)", self.to_decimal_string(), self.precision)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.inner.cmp(&other.inner).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                let p = self.precision.max(rhs.precision);
                let f: fn(&astro_float::BigFloat, &astro_float::BigFloat, usize) -> astro_float::BigFloat = $body;
                BigFloat::wrap(f(&self.inner, &rhs.inner, p), p)
            }
        }
    };
}

binop!(Add, add, |a, b, p| a.add(b, p, RM));
binop!(Sub, sub, |a, b, p| a.sub(b, p, RM));
binop!(Mul, mul, |a, b, p| a.mul(b, p, RM));
binop!(Div, div, |a, b, p| a.div(b, p, RM));
binop!(Rem, rem, |a, b, _p| a.rem(b));

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat::wrap(self.inner.neg(), self.precision)
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        let p = default_precision();
        Self::wrap(astro_float::BigFloat::from_word(0, p), p)
    }
    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        let p = default_precision();
        Self::wrap(astro_float::BigFloat::from_word(1, p), p)
    }
}

impl Num for BigFloat {
    type FromStrRadixErr = &'static str;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err("only decimal big floats are supported");
        }
        BigFloat::parse(s, default_precision()).ok_or("not a decimal number")
    }
}
