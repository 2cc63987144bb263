//! Binomials, factorials, Stirling numbers and Ramanujan's Q-function.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::real::Real;

/// Generalized binomial coefficient `x(x-1)...(x-n+1) / n!` for any scalar `x`.
pub fn binom_general<T: Real>(x: &T, n: u64) -> T {
    let mut acc = T::one();
    for j in 1..=n {
        acc = acc * (x.clone() - T::from_u64(j - 1)) / T::from_u64(j);
    }
    acc
}

/// Exact generalized binomial with a rational upper argument.
pub fn binom_rational(x: &BigRational, n: u64) -> BigRational {
    // Multiply numerators and denominators separately and reduce once.
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 1..=n {
        let term = x - BigRational::from_integer(BigInt::from(j - 1));
        num *= term.numer();
        den *= term.denom() * BigInt::from(j);
    }
    BigRational::new(num, den)
}

/// Ordinary binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Binomial with a possibly negative lower index (zero outside `0..=n`).
pub fn binomial_signed(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        BigInt::zero()
    } else {
        binomial(n as u64, k as u64)
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// `n!!` with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut j = n;
    while j > 1 {
        acc *= BigInt::from(j);
        j -= 2;
    }
    acc
}

/// Falling factorial `x(x-1)...(x-s+1)`, one for `s = 0`.
pub fn falling_factorial<T: Real>(x: &T, s: u64) -> T {
    (0..s).fold(T::one(), |acc, j| acc * (x.clone() - T::from_u64(j)))
}

/// Rising factorial `x(x+1)...(x+s-1)`.
pub fn rising_factorial<T: Real>(x: &T, s: u64) -> T {
    (0..s).fold(T::one(), |acc, j| acc * (x.clone() + T::from_u64(j)))
}

/// A lower-triangular table grown on demand. Rows are appended under a write
/// lock; reads of existing rows only take the read lock.
struct TriangularTable {
    rows: RwLock<Vec<Vec<BigInt>>>,
    next_row: fn(&[BigInt], usize) -> Vec<BigInt>,
}

impl TriangularTable {
    const fn new(next_row: fn(&[BigInt], usize) -> Vec<BigInt>) -> Self {
        TriangularTable { rows: RwLock::new(Vec::new()), next_row }
    }

    fn get(&self, n: usize, k: usize) -> BigInt {
        if k > n {
            return BigInt::zero();
        }
        {
            let rows = self.rows.read().expect("stirling table poisoned");
            if let Some(row) = rows.get(n) {
                return row[k].clone();
            }
        }
        let mut rows = self.rows.write().expect("stirling table poisoned");
        if rows.is_empty() {
            rows.push(vec![BigInt::one()]);
        }
        while rows.len() <= n {
            let i = rows.len();
            let row = (self.next_row)(&rows[i - 1], i);
            rows.push(row);
        }
        rows[n][k].clone()
    }
}

fn stirling2_row(prev: &[BigInt], n: usize) -> Vec<BigInt> {
    // S(n,k) = k S(n-1,k) + S(n-1,k-1)
    (0..=n)
        .map(|k| {
            let same = prev.get(k).map(|s| s * BigInt::from(k)).unwrap_or_default();
            let left = if k > 0 { prev[k - 1].clone() } else { BigInt::zero() };
            same + left
        })
        .collect()
}

fn stirling1_row(prev: &[BigInt], n: usize) -> Vec<BigInt> {
    // c(n,k) = (n-1) c(n-1,k) + c(n-1,k-1)
    (0..=n)
        .map(|k| {
            let same = prev.get(k).map(|s| s * BigInt::from(n - 1)).unwrap_or_default();
            let left = if k > 0 { prev[k - 1].clone() } else { BigInt::zero() };
            same + left
        })
        .collect()
}

static STIRLING2: TriangularTable = TriangularTable::new(stirling2_row);
static STIRLING1: TriangularTable = TriangularTable::new(stirling1_row);

/// Stirling numbers of the second kind `S(n, k)`.
pub fn stirling_second(n: u64, k: u64) -> BigInt {
    STIRLING2.get(n as usize, k as usize)
}

/// Unsigned Stirling numbers of the first kind `c(n, k)`.
pub fn stirling_first_unsigned(n: u64, k: u64) -> BigInt {
    STIRLING1.get(n as usize, k as usize)
}

/// Ramanujan's Q-function `Q(n) = sum_{i=0}^{n} n^(i) / n^i`.
pub fn ramanujan_q(n: u64) -> BigRational {
    assert!(n >= 1, "Q(n) is defined for n >= 1");
    let nn = BigInt::from(n);
    let mut term = BigRational::one();
    let mut total = BigRational::one();
    for i in 0..n {
        // term_{i+1} = term_i * (n - i) / n
        term *= BigRational::new(BigInt::from(n - i), nn.clone());
        total += &term;
    }
    total
}
