//! Moments of the linear-weight specializations, and the polynomial
//! machinery (`f_n`, `g_n`, `M_s`) behind the OK-Corral moments.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    binom_general, binomial, double_factorial, factorial, falling_factorial, ramanujan_q, stirling_second,
    Polynomial, Real, Scalar,
};
use crate::oracle::{pmf_recurrence, pmf_recurrence_multi, ExactDistribution};
use crate::weights::UrnSpec;

type Q = BigRational;
type Poly = Polynomial<Q>;

fn ratio(num: u64, den: u64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn int<T: Real>(n: &BigInt) -> T {
    T::from_bigint(n)
}

fn sign<T: Real>(e: u64) -> T {
    if e.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// How a moment was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    ClosedForm,
    DirectSummation,
}

/// One computed moment together with its order and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: Vec<u64>,
    pub value: Scalar,
    pub method: MomentMethod,
}

impl MomentReport {
    pub fn new<T: Real>(order: Vec<u64>, value: T, method: MomentMethod) -> Self {
        MomentReport { order, value: value.into_scalar(), method }
    }
}

/// `E(Y^(s))` for the sampling urn with weights `a*j`, `d*j` (in units of `a`).
pub fn sampling_factorial_moment<T: Real>(a: u64, d: u64, n: u64, m: u64, s: u64) -> Result<T> {
    if a == 0 || d == 0 {
        return Err(Error::InvalidArgument("a and d must be positive".into()));
    }
    let x = ratio(a * s, d) + Q::from_integer(m.into());
    Ok(falling_factorial(&T::from_u64(n), s) / binom_general(&T::from_rational(&x), m))
}

/// `E(Y^s)` for the sampling urn, through Stirling numbers of the second kind.
pub fn sampling_raw_moment<T: Real>(a: u64, d: u64, n: u64, m: u64, s: u64) -> Result<T> {
    let terms = (0..=s)
        .map(|j| Ok(int::<T>(&stirling_second(s, j)) * sampling_factorial_moment::<T>(a, d, n, m, j)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(T::sum_terms(terms))
}

/// Mixed factorial moment `E(prod_j Y_j^(s_j))` of the `r`-color sampling
/// urn with weights `a_j * i`.
pub fn multi_mixed_factorial_moment<T: Real>(a: &[u64], n: &[u64], s: &[u64]) -> Result<T> {
    let r = a.len();
    if r < 2 || n.len() != r || s.len() != r - 1 || a.contains(&0) {
        return Err(Error::InvalidArgument("need r >= 2 positive factors, r counts and r-1 orders".into()));
    }
    let nr = n[r - 1];
    let shift: Q = (0..r - 1).map(|f| ratio(a[f] * s[f], a[r - 1])).sum();
    let numer = (0..r - 1).fold(T::one(), |acc, j| acc * falling_factorial(&T::from_u64(n[j]), s[j]));
    Ok(numer / binom_general(&T::from_rational(&(shift + Q::from_integer(nr.into()))), nr))
}

/// `sum_k f(k) P{X = k}` over a univariate distribution.
pub fn direct_moment<T: Real>(dist: &ExactDistribution<T>, f: impl Fn(u64) -> T) -> T {
    dist.expect(|k| f(k[0] as u64))
}

/// `E(X^(s))` for any urn by summation over the recurrence law.
pub fn factorial_moment_direct<T: Real>(spec: &UrnSpec, s: u64) -> Result<T> {
    let dist = pmf_recurrence::<T>(spec)?;
    Ok(direct_moment(&dist, |k| falling_factorial(&T::from_u64(k), s)))
}

/// `E(X^s)` for any urn by summation over the recurrence law.
pub fn raw_moment_direct<T: Real>(spec: &UrnSpec, s: u64) -> Result<T> {
    let dist = pmf_recurrence::<T>(spec)?;
    Ok(direct_moment(&dist, |k| T::from_u64(k).powi(s as u32)))
}

/// Mixed factorial moment of an `r`-color urn by summation over the
/// recurrence law.
pub fn mixed_factorial_moment_direct<T: Real>(spec: &UrnSpec, s: &[u64]) -> Result<T> {
    let dist = pmf_recurrence_multi::<T>(spec)?;
    if s.len() != dist.dims().len() {
        return Err(Error::InvalidArgument(format!("expected {} orders, got {}", dist.dims().len(), s.len())));
    }
    Ok(dist.expect(|k| {
        k.iter().zip(s).fold(T::one(), |acc, (&kj, &sj)| acc * falling_factorial(&T::from_u64(kj as u64), sj))
    }))
}

struct SeriesCache {
    f: Vec<Poly>,
    g: Vec<Poly>,
}

static SERIES: Mutex<SeriesCache> = Mutex::new(SeriesCache { f: Vec::new(), g: Vec::new() });

/// `exp(h)` for a power series `h` with zero constant term, via
/// `n E_n = sum_k k h_k E_{n-k}`.
fn series_exp(h: &[Poly]) -> Vec<Poly> {
    let mut e = vec![Poly::constant(Q::one())];
    for n in 1..h.len() {
        let mut acc = Poly::zero();
        for k in 1..=n {
            if !h[k].is_zero() {
                acc = &acc + &(&h[k] * &e[n - k]).scale(&Q::from_integer(k.into()));
            }
        }
        e.push(acc.scale(&ratio(1, n as u64)));
    }
    e
}

fn series_mul(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|i| (0..=i).fold(Poly::zero(), |acc, j| &acc + &(&a[j] * &b[i - j])))
        .collect()
}

/// Coefficients `[z^n]` of `F` and `G` up to `order`, as polynomials in `u`.
fn expand_series(order: usize) -> (Vec<Poly>, Vec<Poly>) {
    let len = order + 1;
    let inv_fact = |k: usize| Q::new(BigInt::one(), factorial(k as u64));
    let alt = |k: usize| if k.is_multiple_of(2) { Q::one() } else { -Q::one() };
    let u = Poly::monomial(Q::one(), 1);
    // u (e^{-z} + z - 1) and its negative.
    let h: Vec<Poly> = (0..len).map(|k| if k < 2 { Poly::zero() } else { u.scale(&(alt(k) * inv_fact(k))) }).collect();
    let neg_h: Vec<Poly> = h.iter().map(|p| -p).collect();
    let f = series_exp(&h);
    let e_minus: Vec<Poly> = (0..len).map(|k| u.scale(&(alt(k) * inv_fact(k)))).collect();
    let integrand = series_mul(&e_minus, &series_exp(&neg_h));
    let mut integral = vec![Poly::zero()];
    integral.extend((0..order).map(|k| integrand[k].scale(&ratio(1, k as u64 + 1))));
    let g = series_mul(&f, &integral);
    let to_egf = |s: Vec<Poly>| -> Vec<Poly> {
        s.into_iter().enumerate().map(|(n, p)| p.scale(&Q::from_integer(factorial(n as u64)))).collect()
    };
    (to_egf(f), to_egf(g))
}

fn cached(n: usize) -> (Poly, Poly) {
    let mut cache = SERIES.lock().expect("series cache poisoned");
    if cache.f.len() <= n {
        let order = n.max(2 * cache.f.len()).max(16);
        let (f, g) = expand_series(order);
        cache.f = f;
        cache.g = g;
    }
    (cache.f[n].clone(), cache.g[n].clone())
}

/// `f_n(u) = n! [z^n] exp(u (e^{-z} + z - 1))`.
pub fn puyhaubert_f(n: usize) -> Poly {
    cached(n).0
}

/// `g_n(u) = n! [z^n] G(z, u)` where
/// `G = F(z, u) * int_0^z u e^{-t} exp(-u (e^{-t} + t - 1)) dt`.
pub fn puyhaubert_g(n: usize) -> Poly {
    cached(n).1
}

/// `(f_{s+1}(l) Q(l) + g_{s+1}(l)) / l`, the closed side of the sum identity.
fn fq_plus_g(l: u64, s: u64) -> Q {
    let (f, g) = cached(s as usize + 1);
    let x = Q::from_integer(l.into());
    f.eval(&x) * ramanujan_q(l) + g.eval(&x)
}

/// Both sides of
/// `sum_{k=1}^{l} C(l-1,k-1) k! l^{-k} k^s = (f_{s+1}(l) Q(l) + g_{s+1}(l)) / l`.
pub fn puyhaubert_sum_identity_check(l: u64, s: u64) -> Result<(Q, Q)> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let ll = Q::from_integer(l.into());
    let lhs = (1..=l)
        .map(|k| {
            Q::from_integer(binomial(l - 1, k - 1) * factorial(k) * num_traits::pow(BigInt::from(k), s as usize))
                / num_traits::pow(ll.clone(), k as usize)
        })
        .fold(Q::zero(), |a, b| a + b);
    Ok((lhs, fq_plus_g(l, s) / ll))
}

/// Exponent attached to `l` in the OK-Corral raw-moment sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MomentExponent {
    /// `l^{m+n-1}`: agrees with direct summation.
    #[default]
    MinusOne,
    /// `l^{m+n}`, the alternative reading; kept for the diagnostic.
    Full,
}

fn okcorral_prefix_check(b: u64, c: u64, n: u64, m: u64) -> Result<()> {
    if b == 0 || c == 0 || n == 0 || m == 0 {
        return Err(Error::InvalidArgument("b, c, n, m must be positive".into()));
    }
    Ok(())
}

/// `E(Y^s)` for the OK-Corral urn with weights `c*j`, `b*j`, `s >= 1`.
pub fn okcorral_raw_moment<T: Real>(b: u64, c: u64, n: u64, m: u64, s: u64) -> Result<T> {
    okcorral_raw_moment_with(b, c, n, m, s, MomentExponent::MinusOne)
}

pub fn okcorral_raw_moment_with<T: Real>(
    b: u64,
    c: u64,
    n: u64,
    m: u64,
    s: u64,
    exponent: MomentExponent,
) -> Result<T> {
    okcorral_prefix_check(b, c, n, m)?;
    if s == 0 {
        return Err(Error::InvalidArgument("the OK-Corral moment formula needs s >= 1".into()));
    }
    let e = match exponent {
        MomentExponent::MinusOne => m + n - 1,
        MomentExponent::Full => m + n,
    };
    let sum = T::sum_terms((1..=n).map(|l| {
        let x = ratio(c * l, b) + Q::from_integer(m.into());
        let coeff = binomial(n + m, n - l) * binomial(m + l, l);
        sign::<T>(n - l) * int::<T>(&coeff) / binom_general(&T::from_rational(&x), m)
            * T::from_u64(l).powi(e as u32)
            * T::from_rational(&fq_plus_g(l, s))
    }));
    let pre = T::from_rational(&ratio(c, b)).powi(m as u32) / int::<T>(&factorial(n + m));
    Ok(pre * sum)
}

/// Which exponent readings reproduce direct summation for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentReport {
    pub minus_one_matches: bool,
    pub full_matches: bool,
}

pub fn okcorral_exponent_diagnostics(b: u64, c: u64, n: u64, m: u64, s: u64) -> Result<ExponentReport> {
    let direct = okcorral_direct_moment::<Q>(b, c, n, m, |k| num_traits::pow(Q::from_integer(k.into()), s as usize))?;
    Ok(ExponentReport {
        minus_one_matches: okcorral_raw_moment_with::<Q>(b, c, n, m, s, MomentExponent::MinusOne)? == direct,
        full_matches: okcorral_raw_moment_with::<Q>(b, c, n, m, s, MomentExponent::Full)? == direct,
    })
}

/// `sum_k f(k) P{Y = ck}` over the OK-Corral law from the recurrence.
pub fn okcorral_direct_moment<T: Real>(b: u64, c: u64, n: u64, m: u64, f: impl Fn(u64) -> T) -> Result<T> {
    okcorral_prefix_check(b, c, n, m)?;
    let spec = UrnSpec::two_color(
        crate::weights::Model::II,
        crate::weights::WeightSequence::linear(c as i64),
        crate::weights::WeightSequence::linear(b as i64),
        n,
        m,
    );
    let dist = pmf_recurrence::<T>(&spec)?;
    Ok(direct_moment(&dist, f))
}

/// The monic degree-`2s` polynomial `M_s(X) = sum_{i=1}^{2s} m_i X^i` with
/// `sum_i m_i f_{i+1} = 0` and `sum_i m_i g_{i+1} = s! 2^s X^{s+1}`.
///
/// Coefficients come from back-substitution on the triangular system; the
/// full identities are then verified and any residue is an error.
pub fn m_polynomial(s: u64) -> Result<Poly> {
    if s == 0 {
        return Err(Error::InvalidArgument("M_s is defined for s >= 1".into()));
    }
    let s = s as usize;
    let f: Vec<Poly> = (0..=2 * s + 1).map(puyhaubert_f).collect();
    let g: Vec<Poly> = (0..=2 * s + 1).map(puyhaubert_g).collect();
    let mut m = vec![Q::zero(); 2 * s + 1];
    m[2 * s] = Q::one();
    let residual = |m: &[Q], polys: &[Poly], d: usize, skip: usize| -> Q {
        (1..=2 * s).filter(|&i| i != skip).fold(Q::zero(), |acc, i| acc + &m[i] * polys[i + 1].coeff(d))
    };
    for d in (1..=s).rev() {
        // X^d of the f-identity: pivot is the leading coefficient of f_{2d}.
        let i = 2 * d - 1;
        let pivot = f[i + 1].coeff(d);
        if pivot.is_zero() {
            return Err(Error::Inconsistent(format!("zero pivot for m_{i}")));
        }
        m[i] = -residual(&m, &f, d, i) / pivot;
        // X^d of the g-identity determines m_{2d-2}; at d = 1 there is no m_0.
        if d >= 2 {
            let i = 2 * d - 2;
            let pivot = g[i + 1].coeff(d);
            if pivot.is_zero() {
                return Err(Error::Inconsistent(format!("zero pivot for m_{i}")));
            }
            m[i] = -residual(&m, &g, d, i) / pivot;
        }
    }
    let combine = |polys: &[Poly]| {
        (1..=2 * s).fold(Poly::zero(), |acc, i| &acc + &polys[i + 1].scale(&m[i]))
    };
    let target = Poly::monomial(Q::from_integer(factorial(s as u64) << s), s + 1);
    if !combine(&f).is_zero() {
        return Err(Error::Inconsistent(format!("sum m_i f_(i+1) = {} for s = {s}", combine(&f))));
    }
    if combine(&g) != target {
        return Err(Error::Inconsistent(format!("sum m_i g_(i+1) = {} for s = {s}", combine(&g))));
    }
    Ok(Poly::new(m))
}

/// The two normalizations of the `E(M_s(Y))` sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MsNormalization {
    /// Prefactor `s! 2^s / (n+m)!` with `C(n+m, n-l) C(m+l, l)`.
    Total,
    /// Prefactor `s! 2^s / (n! m!)` with `C(n, l)`.
    Separate,
}

impl MsNormalization {
    pub const BOTH: [MsNormalization; 2] = [MsNormalization::Total, MsNormalization::Separate];
}

/// `E(M_s(Y))` for the OK-Corral urn with weights `c*j`, `b*j`.
pub fn okcorral_ms_moment<T: Real>(b: u64, c: u64, n: u64, m: u64, s: u64, form: MsNormalization) -> Result<T> {
    okcorral_prefix_check(b, c, n, m)?;
    let sum = T::sum_terms((1..=n).map(|l| {
        let x = ratio(c * l, b) + Q::from_integer(m.into());
        let coeff = match form {
            MsNormalization::Total => binomial(n + m, n - l) * binomial(m + l, l),
            MsNormalization::Separate => binomial(n, l),
        };
        sign::<T>(n - l) * int::<T>(&coeff) / binom_general(&T::from_rational(&x), m)
            * T::from_u64(l).powi((m + n + s) as u32)
    }));
    let norm = match form {
        MsNormalization::Total => factorial(n + m),
        MsNormalization::Separate => factorial(n) * factorial(m),
    };
    let pre = int::<T>(&(factorial(s) << s)) / int::<T>(&norm) * T::from_rational(&ratio(c, b)).powi(m as u32);
    Ok(pre * sum)
}

/// `E(M_s(Y))` by direct summation of `M_s(k)` over the recurrence law.
pub fn okcorral_ms_moment_direct(b: u64, c: u64, n: u64, m: u64, s: u64) -> Result<Q> {
    let ms = m_polynomial(s)?;
    okcorral_direct_moment(b, c, n, m, |k| ms.eval(&Q::from_integer(k.into())))
}

/// Leading coefficients `(2n-1)!!` of `f_{2n}` and `(2n)!!` of `g_{2n+1}`.
pub fn puyhaubert_leading(n: u64) -> (BigInt, BigInt) {
    (double_factorial(2 * n as i64 - 1), double_factorial(2 * n as i64))
}
