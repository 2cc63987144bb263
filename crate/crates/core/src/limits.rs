//! Limit laws for square-like black weights: `Y_m`, `Z_n`, `W`, the theta
//! function and the Euler-function cube.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{binomial, stirling_first_unsigned, stirling_second, Real, Transcendental};
use crate::weights::WeightSequence;

/// Black-weight families with an explicit limit law for `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitFamily {
    /// `B = m^2`
    Square,
    /// `B = m (m+1) / 2`
    Triangular,
    /// `B = (m - 1/2)^2`
    ShiftedSquare,
}

impl LimitFamily {
    pub const ALL: [LimitFamily; 3] = [LimitFamily::Square, LimitFamily::Triangular, LimitFamily::ShiftedSquare];

    pub fn weights(self) -> WeightSequence {
        match self {
            LimitFamily::Square => WeightSequence::square(),
            LimitFamily::Triangular => WeightSequence::triangular(),
            LimitFamily::ShiftedSquare => WeightSequence::shifted_square(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimitFamily::Square => "square",
            LimitFamily::Triangular => "triangular",
            LimitFamily::ShiftedSquare => "shifted-square",
        }
    }

    /// `beta_l` as a machine float.
    pub fn beta(self, l: u64) -> f64 {
        let l = l as f64;
        match self {
            LimitFamily::Square => l * l,
            LimitFamily::Triangular => l * (l + 1.0) / 2.0,
            LimitFamily::ShiftedSquare => (l - 0.5) * (l - 0.5),
        }
    }

    /// An upper bound for `sum_{l > big_m} 1 / beta_l`.
    pub fn tail_sum_bound(self, big_m: u64) -> f64 {
        let m = big_m as f64;
        match self {
            LimitFamily::Square => {
                if big_m == 0 {
                    std::f64::consts::PI * std::f64::consts::PI / 6.0
                } else {
                    1.0 / m
                }
            }
            LimitFamily::Triangular => 2.0 / (m + 1.0),
            LimitFamily::ShiftedSquare => {
                if big_m == 0 {
                    std::f64::consts::PI * std::f64::consts::PI / 2.0
                } else {
                    1.0 / (m - 0.5)
                }
            }
        }
    }
}

impl fmt::Display for LimitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LimitFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LimitFamily::Square),
            "triangular" => Ok(LimitFamily::Triangular),
            "shifted-square" => Ok(LimitFamily::ShiftedSquare),
            other => Err(Error::Parse(format!(
                "unknown limit family `{other}`, expected square, triangular or shifted-square"
            ))),
        }
    }
}

fn sign<T: Real>(e: u64) -> T {
    if e.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

fn int<T: Real>(n: &BigInt) -> T {
    T::from_bigint(n)
}

/// `E(Y_m^s) = prod_{l=1}^m l^2 / (l^2 + s)`.
pub fn ym_moment<T: Real>(m: u64, s: u64) -> T {
    (1..=m).fold(T::one(), |acc, l| {
        let sq = T::from_u64(l * l);
        acc * sq.clone() / (sq + T::from_u64(s))
    })
}

/// Complex log-gamma by the Lanczos approximation (`g = 7`), `Re z >= 1/2`.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = z - 1.0;
    let mut x = Complex64::new(COEFFS[0], 0.0);
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `(m!)^2 pi sqrt(s) / (Gamma(m+1-i sqrt s) Gamma(m+1+i sqrt s) sinh(pi sqrt s))`
/// in machine floats.
pub fn ym_moment_gamma(m: u64, s: u64) -> f64 {
    let t = (s as f64).sqrt();
    let a = m as f64 + 1.0;
    let log_fact = ln_gamma_complex(Complex64::new(a, 0.0)).re;
    let log_conj = ln_gamma_complex(Complex64::new(a, t)).re;
    let pt = std::f64::consts::PI * t;
    (2.0 * (log_fact - log_conj)).exp() * pt / pt.sinh()
}

/// Density `f_m(q) = 2 sum_l (-1)^{l-1} C(m,l) / C(m+l,m) l^2 q^{l^2-1}` of `Y_m`.
pub fn ym_density<T: Real>(m: u64, q: &T) -> Result<T> {
    if *q < T::zero() || *q > T::one() {
        return Err(Error::Domain(format!("density argument {q} outside [0, 1]")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let sum = T::sum_terms((1..=m).map(|l| {
        sign::<T>(l - 1) * int::<T>(&binomial(m, l)) / int::<T>(&binomial(m + l, m))
            * T::from_u64(l * l)
            * q.powi((l * l - 1) as u32)
    }));
    Ok(T::from_u64(2) * sum)
}

/// `int_0^1 q^s f_m(q) dq`, integrated term by term.
pub fn ym_density_moment(m: u64, s: u64) -> BigRational {
    let two = BigRational::from_integer(2.into());
    (1..=m)
        .map(|l| {
            let l2 = BigInt::from(l * l);
            let sign = if l % 2 == 1 { 1 } else { -1 };
            BigRational::new(BigInt::from(sign) * binomial(m, l) * &l2, binomial(m + l, m) * (l2 + BigInt::from(s)))
        })
        .fold(BigRational::from_integer(0.into()), |a, b| a + b)
        * two
}

/// `pi sqrt(x) / sinh(pi sqrt(x))`, one at zero.
pub fn sinh_ratio<T: Transcendental>(x: u64) -> T {
    if x == 0 {
        return T::one();
    }
    let t = T::pi() * T::from_u64(x).sqrt();
    t.clone() / t.sinh()
}

/// How `P{Z_n = k}` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum ZnMethod {
    /// `sum_{l=k}^{n} (-1)^{l-k} C(n,l) C(l,k) pi sqrt(l) / sinh(pi sqrt(l))`.
    FiniteSum,
    /// `2 sum_{l>=1} (-1)^{l-1} / C(n + l^2, n)`, stopped once the next term
    /// is below `tol`. Only for `k = 0`.
    Series { tol: f64 },
}

/// A value with a bound on its truncation error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncated<T> {
    pub value: T,
    pub error_bound: f64,
    pub terms: u64,
}

/// `P{Z_n = k}` with the truncation error (zero for the finite sum).
pub fn zn_pmf<T: Transcendental>(n: u64, k: u64, method: ZnMethod) -> Result<Truncated<T>> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} exceeds n={n}")));
    }
    match method {
        ZnMethod::FiniteSum => {
            let value = T::sum_terms((k..=n).map(|l| {
                sign::<T>(l - k) * int::<T>(&(binomial(n, l) * binomial(l, k))) * sinh_ratio::<T>(l)
            }));
            Ok(Truncated { value, error_bound: 0.0, terms: n - k + 1 })
        }
        ZnMethod::Series { tol } => {
            if k != 0 {
                return Err(Error::Unsupported(format!(
                    "the series for P{{Z_n = {k}}} has terms that do not vanish; use the finite sum"
                )));
            }
            if n == 0 {
                return Ok(Truncated { value: T::one(), error_bound: 0.0, terms: 0 });
            }
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::InvalidArgument("tol must be positive".into()));
            }
            let term = |l: u64| T::one() / int::<T>(&binomial(n + l * l, n));
            let mut terms = Vec::new();
            let mut l = 1u64;
            loop {
                let t = term(l);
                let next = term(l + 1);
                terms.push(sign::<T>(l - 1) * t);
                if next.to_f64() < tol / 2.0 {
                    // Alternating with decreasing terms: the error is below the next term.
                    let value = T::from_u64(2) * T::sum_terms(terms);
                    return Ok(Truncated { value, error_bound: 2.0 * next.to_f64(), terms: l });
                }
                l += 1;
            }
        }
    }
}

/// `E(Z_n^s) = sum_{l=1}^{s} n^l sum_{j=l}^{s} S(s,j) c(j,l) (-1)^{j-l} pi sqrt(j) / sinh(pi sqrt(j))`.
pub fn zn_moment<T: Transcendental>(n: u64, s: u64) -> T {
    let ratios: Vec<T> = (0..=s).map(sinh_ratio::<T>).collect();
    T::sum_terms((1..=s).flat_map(|l| {
        let ratios = &ratios;
        (l..=s).map(move |j| {
            let c = stirling_second(s, j) * stirling_first_unsigned(j, l);
            sign::<T>(j - l) * int::<T>(&(c * num_traits::pow(BigInt::from(n), l as usize))) * ratios[j as usize].clone()
        })
    }))
}

/// Closed-form `E(W^s)` for the family.
pub fn w_moment<T: Transcendental>(s: u64, family: LimitFamily) -> T {
    let pi = T::pi();
    match family {
        LimitFamily::Square => sinh_ratio(s),
        LimitFamily::Triangular => {
            let arg = pi.clone() * T::from_u64(8 * s - 1).sqrt() / T::from_u64(2);
            T::from_u64(2 * s) * pi / arg.cosh()
        }
        LimitFamily::ShiftedSquare => T::one() / (pi * T::from_u64(s).sqrt()).cosh(),
    }
}

/// Bracket `[lower, upper]` for `prod_{l>=1} beta_l / (beta_l + s)` from the
/// first `terms` factors and the tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductBracket {
    pub lower: f64,
    pub upper: f64,
    pub terms: u64,
}

impl ProductBracket {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

/// The moment product truncated so the bracket width is at most `tol`
/// (relative).
pub fn w_moment_product(s: u64, family: LimitFamily, tol: f64) -> Result<ProductBracket> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let sf = s as f64;
    // 1 - exp(-s * tail) <= s * tail <= tol
    let mut terms = ((2.0 * sf / tol).ceil() as u64).max(1);
    while sf * family.tail_sum_bound(terms) > tol {
        terms *= 2;
    }
    let log: f64 = (1..=terms).map(|l| -(sf / family.beta(l)).ln_1p()).sum();
    let upper = log.exp();
    let lower = upper * (-sf * family.tail_sum_bound(terms)).exp();
    Ok(ProductBracket { lower, upper, terms })
}

fn check_q<T: Real>(q: &T) -> Result<()> {
    if *q < T::zero() || *q >= T::one() {
        return Err(Error::Domain(format!("q = {q} outside [0, 1)")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    Ok(())
}

/// `Theta(q) = 1 + 2 sum_{n>=1} (-1)^n q^{n^2}`, stopped once the next term
/// is below `tol`.
pub fn theta<T: Real>(q: &T, tol: f64) -> Result<T> {
    check_q(q)?;
    check_tol(tol)?;
    let mut terms = vec![T::one()];
    let mut n = 1u64;
    loop {
        let t = q.powi((n * n) as u32);
        if t.to_f64() < tol / 2.0 {
            break;
        }
        terms.push(sign::<T>(n) * T::from_u64(2) * t);
        n += 1;
    }
    Ok(T::sum_terms(terms))
}

/// `prod_{j>=1} (1 - q^{2j}) (1 - q^{2j-1})^2`.
pub fn triple_product<T: Real>(q: &T, tol: f64) -> Result<T> {
    check_q(q)?;
    check_tol(tol)?;
    let mut acc = T::one();
    let mut j = 1u64;
    loop {
        let odd = q.powi((2 * j - 1) as u32);
        if odd.to_f64() < tol * 1e-3 {
            return Ok(acc);
        }
        let even = odd.clone() * q.clone();
        let factor = T::one() - odd;
        acc = acc * (T::one() - even) * factor.clone() * factor;
        j += 1;
    }
}

/// `sum_{l>=0} (-1)^l (2l+1) q^{l(l+1)/2}`.
pub fn euler_phi_cubed<T: Real>(q: &T, tol: f64) -> Result<T> {
    check_q(q)?;
    check_tol(tol)?;
    let mut terms = Vec::new();
    let mut l = 0u64;
    loop {
        let t = T::from_u64(2 * l + 1) * q.powi((l * (l + 1) / 2) as u32);
        if l > 0 && t.to_f64() < tol / 2.0 {
            return Ok(T::sum_terms(terms));
        }
        terms.push(sign::<T>(l) * t);
        l += 1;
    }
}

/// `prod_{j>=1} (1 - q^j)^3`.
pub fn euler_phi_cubed_product<T: Real>(q: &T, tol: f64) -> Result<T> {
    check_q(q)?;
    check_tol(tol)?;
    let mut acc = T::one();
    let mut j = 1u64;
    loop {
        let p = q.powi(j as u32);
        if p.to_f64() < tol * 1e-3 {
            return Ok(acc);
        }
        let f = T::one() - p;
        acc = acc * f.clone() * f.clone() * f;
        j += 1;
    }
}

/// Limiting CDF `P{W <= q}` of the family, evaluated to absolute accuracy
/// about `1e-15` in the working precision.
pub fn w_cdf<T: Transcendental>(q: &T, family: LimitFamily) -> Result<T> {
    if *q < T::zero() || *q > T::one() {
        return Err(Error::Domain(format!("q = {q} outside [0, 1]")));
    }
    if *q == T::one() {
        return Ok(T::one());
    }
    let tol = 1e-17;
    match family {
        // Near q = 1 the alternating series cancel down to tiny values; the
        // products stay positive and accurate there.
        LimitFamily::Square if q.to_f64() >= 0.5 => Ok(T::one() - triple_product(q, tol)?),
        LimitFamily::Square => Ok(T::one() - theta(q, tol)?),
        LimitFamily::Triangular if q.to_f64() >= 0.5 => Ok(T::one() - euler_phi_cubed_product(q, tol)?),
        LimitFamily::Triangular => Ok(T::one() - euler_phi_cubed(q, tol)?),
        LimitFamily::ShiftedSquare => {
            if q.is_zero() {
                return Ok(T::zero());
            }
            // q^{(l-1/2)^2} = q^{1/4} q^{l(l-1)}
            let quarter = q.sqrt().sqrt();
            let mut terms = Vec::new();
            let mut l = 1u64;
            loop {
                let t = quarter.clone() * q.powi((l * (l - 1)) as u32) / T::from_u64(2 * l - 1);
                if l > 1 && t.to_f64() < tol {
                    break;
                }
                terms.push(sign::<T>(l - 1) * t);
                l += 1;
            }
            Ok(T::from_u64(4) / T::pi() * T::sum_terms(terms))
        }
    }
}
