//! Explicit absorption laws in every available representation.
//!
//! Each function checks the hypotheses the formula needs (distinct weights up
//! to the largest index touched, counts in range) and evaluates in the scalar
//! type of the caller. Alternating sums go through [`Real::sum_terms`], which
//! is exact for rationals and compensated for floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{binom_general, binomial, factorial, Real};
use crate::oracle::{pmf_recurrence_multi, ExactDistribution};
use crate::weights::{Model, UrnSpec, WeightSequence};

/// Which set of poles the partial-fraction sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Poles {
    /// Sum over the white weights `alpha_k..alpha_n`.
    Alpha,
    /// Sum over the black weights `beta_1..beta_m`.
    Beta,
}

impl Poles {
    pub const BOTH: [Poles; 2] = [Poles::Alpha, Poles::Beta];
}

impl std::str::FromStr for Poles {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" | "alpha-poles" => Ok(Poles::Alpha),
            "beta" | "beta-poles" => Ok(Poles::Beta),
            other => Err(Error::Parse(format!("unknown representation `{other}`, expected alpha or beta"))),
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

fn product<T: Real>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::one(), |acc, x| acc * x)
}

fn int<T: Real>(n: &BigInt) -> T {
    T::from_bigint(n)
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn require_two_color(a: &WeightSequence, b: &WeightSequence, n: u64, m: u64, k: Option<u64>) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("closed forms need n, m >= 1, got n={n}, m={m}")));
    }
    if let Some(k) = k {
        if k > n {
            return Err(Error::InvalidArgument(format!("k={k} exceeds n={n}")));
        }
    }
    a.require_distinct(n)?;
    b.require_distinct(m)
}

/// `P{X_{n,m} = k}` in model I.
pub fn pmf_i<T: Real>(a: &WeightSequence, b: &WeightSequence, n: u64, m: u64, k: u64, poles: Poles) -> Result<T> {
    require_two_color(a, b, n, m, Some(k))?;
    let alpha = a.table::<T>(n)?;
    let beta = b.table::<T>(m)?;
    let (n, m, k) = (n as usize, m as usize, k as usize);
    let pre = product(beta[1..=m].iter().cloned()) * product(alpha[k + 1..=n].iter().cloned());
    let sum = match poles {
        Poles::Beta => T::sum_terms((1..=m).map(|l| {
            let d1 = product((k..=n).map(|j| alpha[j].clone() + beta[l].clone()));
            let d2 = product((1..=m).filter(|&i| i != l).map(|i| beta[i].clone() - beta[l].clone()));
            T::one() / (d1 * d2)
        })),
        Poles::Alpha => T::sum_terms((k..=n).map(|l| {
            let d1 = product((k..=n).filter(|&j| j != l).map(|j| alpha[j].clone() - alpha[l].clone()));
            let d2 = product((1..=m).map(|i| beta[i].clone() + alpha[l].clone()));
            T::one() / (d1 * d2)
        })),
    };
    Ok(pre * sum)
}

/// The whole model I law `[P{X=0}, ..., P{X=n}]`, sharing partial products
/// across `k`.
pub fn pmf_i_all<T: Real>(a: &WeightSequence, b: &WeightSequence, n: u64, m: u64, poles: Poles) -> Result<Vec<T>> {
    require_two_color(a, b, n, m, None)?;
    let alpha = a.table::<T>(n)?;
    let beta = b.table::<T>(m)?;
    let (n, m) = (n as usize, m as usize);
    let beta_prod = product(beta[1..=m].iter().cloned());
    let mut out = vec![T::zero(); n + 1];
    // Running product alpha_{k+1} ... alpha_n as k decreases.
    let mut alpha_tail = T::one();
    match poles {
        Poles::Beta => {
            let cross: Vec<T> = (1..=m)
                .map(|l| product((1..=m).filter(|&i| i != l).map(|i| beta[i].clone() - beta[l].clone())))
                .collect();
            let mut shifted: Vec<T> = vec![T::one(); m];
            for k in (0..=n).rev() {
                for (l, s) in shifted.iter_mut().enumerate() {
                    *s = s.clone() * (alpha[k].clone() + beta[l + 1].clone());
                }
                let sum = T::sum_terms((0..m).map(|l| T::one() / (shifted[l].clone() * cross[l].clone())));
                out[k] = beta_prod.clone() * alpha_tail.clone() * sum;
                alpha_tail = alpha_tail * alpha[k].clone();
            }
        }
        Poles::Alpha => {
            let against_beta: Vec<T> =
                (0..=n).map(|l| product((1..=m).map(|i| beta[i].clone() + alpha[l].clone()))).collect();
            // diffs[l] = prod_{j=k..n, j != l} (alpha_j - alpha_l), grown as k decreases.
            let mut diffs: Vec<T> = vec![T::one(); n + 1];
            for k in (0..=n).rev() {
                for l in k + 1..=n {
                    diffs[l] = diffs[l].clone() * (alpha[k].clone() - alpha[l].clone());
                }
                diffs[k] = product((k + 1..=n).map(|j| alpha[j].clone() - alpha[k].clone()));
                let sum = T::sum_terms((k..=n).map(|l| T::one() / (diffs[l].clone() * against_beta[l].clone())));
                out[k] = beta_prod.clone() * alpha_tail.clone() * sum;
                alpha_tail = alpha_tail * alpha[k].clone();
            }
        }
    }
    Ok(out)
}

/// `P{X_{n,m} = k}` in model II; `k = 0` uses its own pair of formulas.
pub fn pmf_ii<T: Real>(a: &WeightSequence, b: &WeightSequence, n: u64, m: u64, k: u64, poles: Poles) -> Result<T> {
    require_two_color(a, b, n, m, Some(k))?;
    let alpha = a.table::<T>(n)?;
    let beta = b.table::<T>(m)?;
    let (n, m, k) = (n as usize, m as usize, k as usize);
    let lo = k.max(1);
    let exp = (n + m - 1 - k) as u32;
    let sum = match poles {
        Poles::Alpha => T::sum_terms((lo..=n).map(|j| {
            let d1 = product((lo..=n).filter(|&l| l != j).map(|l| alpha[j].clone() - alpha[l].clone()));
            let d2 = product((1..=m).map(|h| alpha[j].clone() + beta[h].clone()));
            alpha[j].powi(exp) / (d1 * d2)
        })),
        Poles::Beta => T::sum_terms((1..=m).map(|l| {
            let d1 = product((lo..=n).map(|j| beta[l].clone() + alpha[j].clone()));
            let d2 = product((1..=m).filter(|&h| h != l).map(|h| beta[l].clone() - beta[h].clone()));
            beta[l].powi(exp) / (d1 * d2)
        })),
    };
    Ok(match (k, poles) {
        (0, Poles::Alpha) => T::one() - sum,
        (0, Poles::Beta) => sum,
        _ => alpha[k].clone() * sum,
    })
}

/// The whole model II law, sharing partial products across `k`.
pub fn pmf_ii_all<T: Real>(a: &WeightSequence, b: &WeightSequence, n: u64, m: u64, poles: Poles) -> Result<Vec<T>> {
    require_two_color(a, b, n, m, None)?;
    let alpha = a.table::<T>(n)?;
    let beta = b.table::<T>(m)?;
    let (n, m) = (n as usize, m as usize);
    let mut out = vec![T::zero(); n + 1];
    match poles {
        Poles::Alpha => {
            let against_beta: Vec<T> =
                (0..=n).map(|j| product((1..=m).map(|h| alpha[j].clone() + beta[h].clone()))).collect();
            let mut diffs: Vec<T> = vec![T::one(); n + 1];
            for k in (1..=n).rev() {
                for j in k + 1..=n {
                    diffs[j] = diffs[j].clone() * (alpha[j].clone() - alpha[k].clone());
                }
                diffs[k] = product((k + 1..=n).map(|l| alpha[k].clone() - alpha[l].clone()));
                let exp = (n + m - 1 - k) as u32;
                let sum = T::sum_terms(
                    (k..=n).map(|j| alpha[j].powi(exp) / (diffs[j].clone() * against_beta[j].clone())),
                );
                out[k] = alpha[k].clone() * sum;
            }
            let exp = (n + m - 1) as u32;
            out[0] = T::one()
                - T::sum_terms((1..=n).map(|j| alpha[j].powi(exp) / (diffs[j].clone() * against_beta[j].clone())));
        }
        Poles::Beta => {
            let cross: Vec<T> = (1..=m)
                .map(|l| product((1..=m).filter(|&h| h != l).map(|h| beta[l].clone() - beta[h].clone())))
                .collect();
            let mut shifted: Vec<T> = vec![T::one(); m];
            for k in (1..=n).rev() {
                for (l, s) in shifted.iter_mut().enumerate() {
                    *s = s.clone() * (beta[l + 1].clone() + alpha[k].clone());
                }
                let exp = (n + m - 1 - k) as u32;
                let sum = T::sum_terms(
                    (0..m).map(|l| beta[l + 1].powi(exp) / (shifted[l].clone() * cross[l].clone())),
                );
                out[k] = alpha[k].clone() * sum;
            }
            let exp = (n + m - 1) as u32;
            out[0] = T::sum_terms((0..m).map(|l| beta[l + 1].powi(exp) / (shifted[l].clone() * cross[l].clone())));
        }
    }
    Ok(out)
}

/// Closed-form law of a two-color urn in either model.
pub fn pmf_two_color<T: Real>(spec: &UrnSpec, poles: Poles) -> Result<Vec<T>> {
    if spec.colors() != 2 {
        return Err(Error::InvalidArgument(format!("expected a two-color urn, got {} colors", spec.colors())));
    }
    let (a, b) = (&spec.weights[0], &spec.weights[1]);
    let (n, m) = (spec.counts[0], spec.counts[1]);
    match spec.model {
        Model::I => pmf_i_all(a, b, n, m, poles),
        Model::II => pmf_ii_all(a, b, n, m, poles),
    }
}

/// Sampling urn with linear weights `a*j`, `d*j`:
/// `P{Y_{an,dm} = ak}` by the alternating binomial sums.
pub fn pmf_sampling_polya<T: Real>(a: u64, d: u64, n: u64, m: u64, k: u64, poles: Poles) -> Result<T> {
    if a == 0 || d == 0 {
        return Err(Error::InvalidArgument("a and d must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} exceeds n={n}")));
    }
    let val = match poles {
        Poles::Beta => T::sum_terms((1..=m).map(|l| {
            let shift = ratio(l * d, a);
            let num = binom_general(&T::from_rational(&(&shift + BigRational::from_integer(BigInt::from(k) - 1))), k);
            let den = binom_general(&T::from_rational(&(&shift + BigRational::from_integer(n.into()))), n);
            sign::<T>(l - 1) * int::<T>(&binomial(m, l)) * num / den
        })),
        Poles::Alpha => T::sum_terms((k..=n).map(|l| {
            let x = ratio(l * a, d) + BigRational::from_integer(m.into());
            sign::<T>(l - k) * int::<T>(&(binomial(n, l) * binomial(l, k))) / binom_general(&T::from_rational(&x), m)
        })),
    };
    Ok(val)
}

/// The classical sampling law `C(n+m-1-k, m-1) / C(n+m, n)` for unit weights.
pub fn pmf_folklore<T: Real>(n: u64, m: u64, k: u64) -> Result<T> {
    if m == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need m >= 1 and k <= n, got n={n}, m={m}, k={k}")));
    }
    Ok(int::<T>(&binomial(n + m - 1 - k, m - 1)) / int::<T>(&binomial(n + m, n)))
}

/// The classical OK-Corral survivor law for unit weights, `1 <= k <= n`.
pub fn pmf_classical_okcorral<T: Real>(n: u64, m: u64, k: u64) -> Result<T> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("the classical survivor formula needs 1 <= k <= n, got k={k}")));
    }
    let sum = T::sum_terms((1..=n).map(|r| {
        let c = binomial(n + m, n - r) * binomial(r - 1, k - 1);
        sign::<T>(n - r) * int::<T>(&c) * T::from_u64(r).powi((n + m - k) as u32)
    }));
    Ok(int::<T>(&factorial(k)) / int::<T>(&factorial(n + m)) * sum)
}

/// The two displayed forms of the OK-Corral survivor law with linear
/// weights. For `k = 0` there is a single form and this choice is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OkCorralDisplay {
    /// Alternating sum over `l = 1..m`.
    BlackSum,
    /// Alternating sum over `l = k..n`.
    WhiteSum,
}

impl OkCorralDisplay {
    pub const BOTH: [OkCorralDisplay; 2] = [OkCorralDisplay::BlackSum, OkCorralDisplay::WhiteSum];
}

/// OK-Corral urn with linear weights `c*j` (white) and `b*j` (black):
/// `P{Y_{cn,bm} = ck}`.
pub fn pmf_okcorral_polya<T: Real>(b: u64, c: u64, n: u64, m: u64, k: u64, display: OkCorralDisplay) -> Result<T> {
    if b == 0 || c == 0 || n == 0 || m == 0 {
        return Err(Error::InvalidArgument("b, c, n, m must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} exceeds n={n}")));
    }
    let bc = T::from_rational(&ratio(b, c));
    let cb = T::from_rational(&ratio(c, b));
    if k == 0 {
        let pre = bc.powi(n as u32) / int::<T>(&(factorial(n) * factorial(m - 1)));
        let sum = T::sum_terms((1..=m).map(|l| {
            let x = ratio(b * l, c) + BigRational::from_integer(n.into());
            sign::<T>(m - l) * int::<T>(&binomial(m - 1, l - 1)) / binom_general(&T::from_rational(&x), n)
                * T::from_u64(l).powi((n + m - 1) as u32)
        }));
        return Ok(pre * sum);
    }
    let kk = T::from_u64(k);
    match display {
        OkCorralDisplay::BlackSum => {
            let pre = kk / int::<T>(&(factorial(n - k + 1) * factorial(m - 1))) * bc.powi((n - k) as u32);
            let sum = T::sum_terms((1..=m).map(|l| {
                let x = ratio(b * l, c) + BigRational::from_integer(n.into());
                sign::<T>(m - l) * int::<T>(&binomial(m - 1, l - 1)) / binom_general(&T::from_rational(&x), n - k + 1)
                    * T::from_u64(l).powi((n + m - 1 - k) as u32)
            }));
            Ok(pre * sum)
        }
        OkCorralDisplay::WhiteSum => {
            let pre = kk / int::<T>(&(factorial(n - k) * factorial(m))) * cb.powi(m as u32);
            let sum = T::sum_terms((k..=n).map(|l| {
                let x = ratio(c * l, b) + BigRational::from_integer(m.into());
                sign::<T>(n - l) * int::<T>(&binomial(n - k, l - k)) / binom_general(&T::from_rational(&x), m)
                    * T::from_u64(l).powi((m + n - 1 - k) as u32)
            }));
            Ok(pre * sum)
        }
    }
}

/// Which OK-Corral displays reproduce the general model II formula exactly
/// for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisplayReport {
    pub black_sum_matches: bool,
    pub white_sum_matches: bool,
    pub zero_matches: bool,
    pub mismatched_k: Vec<u64>,
}

impl DisplayReport {
    pub fn all_match(&self) -> bool {
        self.black_sum_matches && self.white_sum_matches && self.zero_matches
    }
}

/// Compares every OK-Corral display against the model II formula with
/// weights `c*j`, `b*j`, exactly.
pub fn okcorral_display_diagnostics(b: u64, c: u64, n: u64, m: u64) -> Result<DisplayReport> {
    let reference: Vec<BigRational> = pmf_ii_all(
        &WeightSequence::linear(c as i64),
        &WeightSequence::linear(b as i64),
        n,
        m,
        Poles::Alpha,
    )?;
    let mut report = DisplayReport { black_sum_matches: true, white_sum_matches: true, zero_matches: true, mismatched_k: vec![] };
    for k in 0..=n {
        let mut bad = false;
        for display in OkCorralDisplay::BOTH {
            let v: BigRational = pmf_okcorral_polya(b, c, n, m, k, display)?;
            if v != reference[k as usize] {
                bad = true;
                match (k, display) {
                    (0, _) => report.zero_matches = false,
                    (_, OkCorralDisplay::BlackSum) => report.black_sum_matches = false,
                    (_, OkCorralDisplay::WhiteSum) => report.white_sum_matches = false,
                }
            }
        }
        if bad {
            report.mismatched_k.push(k);
        }
    }
    Ok(report)
}

fn require_multi(weights: &[WeightSequence], n: &[u64], k: &[u64]) -> Result<usize> {
    let r = weights.len();
    if r < 2 || n.len() != r || k.len() != r - 1 {
        return Err(Error::InvalidArgument(format!(
            "need r >= 2 sequences, r counts and r-1 survivor counts, got {}, {}, {}",
            r,
            n.len(),
            k.len()
        )));
    }
    if n[r - 1] == 0 {
        return Err(Error::InvalidArgument("the absorbing color needs at least one ball".into()));
    }
    if let Some(j) = (0..r - 1).find(|&j| k[j] > n[j]) {
        return Err(Error::InvalidArgument(format!("k[{j}]={} exceeds n[{j}]={}", k[j], n[j])));
    }
    for (w, &c) in weights.iter().zip(n) {
        w.require_distinct(c)?;
    }
    Ok(r)
}

/// Odometer over the box `lo[j]..=hi[j]`.
fn for_each_tuple(lo: &[u64], hi: &[u64], mut f: impl FnMut(&[u64])) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut j = cur.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if cur[j] < hi[j] {
                cur[j] += 1;
                break;
            }
            cur[j] = lo[j];
        }
    }
}

/// `P{X_n = k}` for the `r`-color model I urn by the nested partial-fraction
/// sum.
pub fn pmf_multi_i<T: Real>(weights: &[WeightSequence], n: &[u64], k: &[u64]) -> Result<T> {
    let r = require_multi(weights, n, k)?;
    let tables: Vec<Vec<T>> = weights.iter().zip(n).map(|(w, &c)| w.table(c)).collect::<Result<_>>()?;
    let last = &tables[r - 1];
    let nr = n[r - 1] as usize;
    let mut numer = product(last[1..=nr].iter().cloned());
    for j in 0..r - 1 {
        numer = numer * product(tables[j][k[j] as usize + 1..=n[j] as usize].iter().cloned());
    }
    // diffs[j][l - k_j] = prod_{h = k_j..n_j, h != l} (alpha_h - alpha_l)
    let diffs: Vec<Vec<T>> = (0..r - 1)
        .map(|j| {
            let t = &tables[j];
            (k[j]..=n[j])
                .map(|l| {
                    product((k[j]..=n[j]).filter(|&h| h != l).map(|h| t[h as usize].clone() - t[l as usize].clone()))
                })
                .collect()
        })
        .collect();
    let mut terms = Vec::new();
    for_each_tuple(&k[..r - 1], &n[..r - 1], |ls| {
        let s = T::sum_terms((0..r - 1).map(|j| tables[j][ls[j] as usize].clone()));
        let d1 = product((1..=nr).map(|f| last[f].clone() + s.clone()));
        let d2 = product((0..r - 1).map(|j| diffs[j][(ls[j] - k[j]) as usize].clone()));
        terms.push(T::one() / (d1 * d2));
    });
    Ok(numer * T::sum_terms(terms))
}

/// Sampling urn with `r` colors and linear weights `a_j * i`:
/// `P{Y_{an} = ak}`.
pub fn pmf_multi_polya<T: Real>(a: &[u64], n: &[u64], k: &[u64]) -> Result<T> {
    let r = a.len();
    if r < 2 || n.len() != r || k.len() != r - 1 || a.contains(&0) {
        return Err(Error::InvalidArgument("need r >= 2 positive factors, r counts, r-1 survivor counts".into()));
    }
    if (0..r - 1).any(|j| k[j] > n[j]) {
        return Err(Error::InvalidArgument("survivor count exceeds initial count".into()));
    }
    let nr = n[r - 1];
    let mut terms = Vec::new();
    for_each_tuple(&k[..r - 1], &n[..r - 1], |ls| {
        let mut coeff = BigInt::from(1);
        let mut parity = 0;
        for j in 0..r - 1 {
            coeff *= binomial(n[j], ls[j]) * binomial(ls[j], k[j]);
            parity += ls[j] - k[j];
        }
        let shift: BigRational = (0..r - 1).map(|f| ratio(a[f] * ls[f], a[r - 1])).sum();
        let x = T::from_rational(&(shift + BigRational::from_integer(nr.into())));
        terms.push(sign::<T>(parity) * int::<T>(&coeff) / binom_general(&x, nr));
    });
    Ok(T::sum_terms(terms))
}

/// How the cross term in the `r`-color model II formula is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CrossTerm {
    /// `prod_j alpha_{l_j} / alpha_{l_g}`: agrees with the recurrence.
    #[default]
    Corrected,
    /// `prod_j alpha_{k_j} / alpha_{l_g}`: kept only to demonstrate the mismatch.
    Literal,
}

/// `P{X_n = k}` for the `r`-color model II urn, all `k_j >= 1`.
///
/// Survivor vectors with a zero entry have no closed form here; use
/// [`pmf_multi_ii_or_oracle`] to fall back to the recurrence.
pub fn pmf_multi_ii<T: Real>(weights: &[WeightSequence], n: &[u64], k: &[u64], cross: CrossTerm) -> Result<T> {
    let r = require_multi(weights, n, k)?;
    if let Some(j) = k.iter().position(|&v| v == 0) {
        return Err(Error::Unsupported(format!(
            "no closed form for k[{j}] = 0 in model II with {r} colors; use the recurrence oracle"
        )));
    }
    let tables: Vec<Vec<T>> = weights.iter().zip(n).map(|(w, &c)| w.table(c)).collect::<Result<_>>()?;
    let last = &tables[r - 1];
    let nr = n[r - 1];
    let alpha_k = product((0..r - 1).map(|j| tables[j][k[j] as usize].clone()));
    let diffs: Vec<Vec<T>> = (0..r - 1)
        .map(|j| {
            let t = &tables[j];
            (k[j]..=n[j])
                .map(|l| {
                    product((k[j]..=n[j]).filter(|&h| h != l).map(|h| t[l as usize].clone() - t[h as usize].clone()))
                })
                .collect()
        })
        .collect();
    let mut terms = Vec::new();
    for_each_tuple(&k[..r - 1], &n[..r - 1], |ls| {
        let at = |j: usize| tables[j][ls[j] as usize].clone();
        let alpha_l = product((0..r - 1).map(at));
        let numer = alpha_k.clone()
            * product((0..r - 1).map(|j| at(j).powi((n[j] - k[j] + nr - 1) as u32)));
        let top = match cross {
            CrossTerm::Corrected => alpha_l.clone(),
            CrossTerm::Literal => alpha_k.clone(),
        };
        let cross_sum = T::sum_terms((0..r - 1).map(|g| top.clone() / at(g)));
        let d1 = product((1..=nr as usize).map(|f| alpha_l.clone() + last[f].clone() * cross_sum.clone()));
        let d2 = product((0..r - 1).map(|j| diffs[j][(ls[j] - k[j]) as usize].clone()));
        terms.push(numer / (d1 * d2));
    });
    Ok(T::sum_terms(terms))
}

/// How a multivariate probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Recurrence,
}

/// Model II probability by the closed form when every `k_j >= 1`, otherwise
/// by the recurrence.
pub fn pmf_multi_ii_or_oracle<T: Real>(weights: &[WeightSequence], n: &[u64], k: &[u64]) -> Result<(T, Method)> {
    if k.iter().all(|&v| v >= 1) {
        return Ok((pmf_multi_ii(weights, n, k, CrossTerm::Corrected)?, Method::ClosedForm));
    }
    require_multi(weights, n, k)?;
    let spec = UrnSpec::new(Model::II, weights.to_vec(), n.to_vec())?;
    let d: ExactDistribution<T> = pmf_recurrence_multi(&spec)?;
    let idx: Vec<usize> = k.iter().map(|&v| v as usize).collect();
    Ok((d.prob(&idx), Method::Recurrence))
}

/// Both sides of `1 / prod_j (a_j + x) = sum_j 1 / ((a_j + x) prod_{i != j} (a_i - a_j))`.
pub fn partial_fraction_check<T: Real>(nodes: &[T], x: &T) -> Result<(T, T)> {
    for (i, a) in nodes.iter().enumerate() {
        if nodes[i + 1..].iter().any(|b| b == a) {
            return Err(Error::NotDistinct(format!("node {a} appears twice")));
        }
        if (a.clone() + x.clone()).is_zero() {
            return Err(Error::Domain(format!("x = -{a} is a pole")));
        }
    }
    let lhs = T::one() / product(nodes.iter().map(|a| a.clone() + x.clone()));
    let rhs = T::sum_terms(nodes.iter().enumerate().map(|(j, aj)| {
        let d = product(nodes.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, ai)| ai.clone() - aj.clone()));
        T::one() / ((aj.clone() + x.clone()) * d)
    }));
    Ok((lhs, rhs))
}
