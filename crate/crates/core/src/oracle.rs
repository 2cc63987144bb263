//! Ground-truth absorption distributions from the recurrence systems, plus
//! exhaustive path enumeration for tiny instances.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::Real;
use crate::weights::{Model, UrnSpec};

/// Largest total ball count accepted by [`pmf_enumerate`].
pub const ENUMERATION_LIMIT: u64 = 16;

/// Probabilities on the grid `0..dims[0] x ... x 0..dims[d-1]`, row-major.
///
/// For a two-color urn the grid is one-dimensional and indexed by the number
/// of surviving white balls.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution<T> {
    dims: Vec<usize>,
    probs: Vec<T>,
}

impl<T: Real> ExactDistribution<T> {
    pub fn new(dims: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if len != probs.len() {
            return Err(Error::InvalidArgument(format!(
                "grid of {len} points but {} probabilities",
                probs.len()
            )));
        }
        Ok(ExactDistribution { dims, probs })
    }

    pub fn univariate(probs: Vec<T>) -> Self {
        ExactDistribution { dims: vec![probs.len()], probs }
    }

    /// Point mass at `k` on the grid `dims`.
    pub fn point_mass(dims: Vec<usize>, k: &[usize]) -> Self {
        let mut probs = vec![T::zero(); dims.iter().product()];
        let idx = flat_index(&dims, k);
        probs[idx] = T::one();
        ExactDistribution { dims, probs }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<T> {
        self.probs
    }

    /// `P{X = k}`, zero outside the grid.
    pub fn prob(&self, k: &[usize]) -> T {
        if k.len() != self.dims.len() || k.iter().zip(&self.dims).any(|(&a, &d)| a >= d) {
            return T::zero();
        }
        self.probs[flat_index(&self.dims, k)].clone()
    }

    /// Univariate shorthand for `prob(&[k])`.
    pub fn pmf(&self, k: usize) -> T {
        self.prob(&[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &T)> + '_ {
        self.probs.iter().enumerate().map(move |(i, p)| (unflatten(&self.dims, i), p))
    }

    pub fn total(&self) -> T {
        T::sum_terms(self.probs.iter().cloned())
    }

    /// `E f(X)`.
    pub fn expect(&self, f: impl Fn(&[usize]) -> T) -> T {
        T::sum_terms(self.iter().filter(|(_, p)| !p.is_zero()).map(|(k, p)| f(&k) * p.clone()))
    }

    /// Every probability lies in `[0, 1]`.
    pub fn in_unit_interval(&self) -> bool {
        self.probs.iter().all(|p| *p >= T::zero() && *p <= T::one())
    }

    pub fn map<U: Real>(&self, f: impl Fn(&T) -> U) -> ExactDistribution<U> {
        ExactDistribution { dims: self.dims.clone(), probs: self.probs.iter().map(f).collect() }
    }
}

pub(crate) fn flat_index(dims: &[usize], k: &[usize]) -> usize {
    k.iter().zip(dims).fold(0, |acc, (&kj, &d)| acc * d + kj)
}

pub(crate) fn unflatten(dims: &[usize], mut i: usize) -> Vec<usize> {
    let mut k = vec![0; dims.len()];
    for j in (0..dims.len()).rev() {
        k[j] = i % dims[j];
        i /= dims[j];
    }
    k
}

/// Two-color absorption law by the recurrence, filled row by row.
pub fn pmf_recurrence<T: Real>(spec: &UrnSpec) -> Result<ExactDistribution<T>> {
    let lattice = recurrence_lattice::<T>(spec)?;
    Ok(lattice.get(&spec.counts).expect("corner state is always computed").clone())
}

/// Distributions for every sub-instance `x <= counts` of an urn, as produced
/// by one recurrence sweep.
#[derive(Debug, Clone)]
pub struct Lattice<T> {
    counts: Vec<u64>,
    states: Vec<ExactDistribution<T>>,
}

impl<T: Real> Lattice<T> {
    fn index(&self, x: &[u64]) -> Option<usize> {
        if x.len() != self.counts.len() || x.iter().zip(&self.counts).any(|(a, b)| a > b) {
            return None;
        }
        Some(x.iter().zip(&self.counts).fold(0, |acc, (&xj, &c)| acc * (c as usize + 1) + xj as usize))
    }

    /// The distribution for initial counts `x`, over the grid `0..=x_j` of the
    /// non-absorbing colors.
    pub fn get(&self, x: &[u64]) -> Option<&ExactDistribution<T>> {
        self.index(x).map(|i| &self.states[i])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Runs the recurrence once and keeps the law of every sub-instance.
pub fn recurrence_lattice<T: Real>(spec: &UrnSpec) -> Result<Lattice<T>> {
    spec.validate()?;
    if spec.colors() == 2 {
        two_color_lattice(spec)
    } else {
        multi_lattice(spec)
    }
}

fn two_color_lattice<T: Real>(spec: &UrnSpec) -> Result<Lattice<T>> {
    let (n, m) = (spec.counts[0], spec.counts[1]);
    let tables = spec.tables::<T>()?;
    let (alpha, beta) = (&tables[0], &tables[1]);
    let width = m as usize + 1;
    let mut states: Vec<ExactDistribution<T>> = Vec::with_capacity((n as usize + 1) * width);
    for i in 0..=n as usize {
        for j in 0..=m as usize {
            let dist = if j == 0 {
                let mut p = vec![T::zero(); i + 1];
                p[i] = T::one();
                p
            } else if i == 0 {
                vec![T::one()]
            } else {
                let total = alpha[i].clone() + beta[j].clone();
                let (pw, pb) = match spec.model {
                    Model::I => (alpha[i].clone() / total.clone(), beta[j].clone() / total),
                    Model::II => (beta[j].clone() / total.clone(), alpha[i].clone() / total),
                };
                // White drawn: state (i-1, j). Black drawn: state (i, j-1).
                let up = states[(i - 1) * width + j].probs();
                let left = states[i * width + j - 1].probs();
                (0..=i)
                    .map(|k| {
                        let a = up.get(k).map(|p| pw.clone() * p.clone());
                        let b = pb.clone() * left[k].clone();
                        match a {
                            Some(a) => a + b,
                            None => b,
                        }
                    })
                    .collect()
            };
            states.push(ExactDistribution::univariate(dist));
        }
    }
    Ok(Lattice { counts: spec.counts.clone(), states })
}

/// Drawing weights at state `x` (the counts of all colors), per model.
pub(crate) fn draw_weights<T: Real>(model: Model, tables: &[Vec<T>], x: &[u64]) -> Vec<T> {
    let r = x.len();
    (0..r)
        .map(|l| {
            if x[l] == 0 {
                return T::zero();
            }
            match model {
                Model::I => tables[l][x[l] as usize].clone(),
                Model::II => (0..r)
                    .filter(|&j| j != l && x[j] > 0)
                    .fold(T::one(), |acc, j| acc * tables[j][x[j] as usize].clone()),
            }
        })
        .collect()
}

/// Terminal outcome if `x` is absorbing: all last-color balls gone, or only
/// last-color balls left.
pub(crate) fn absorbed(x: &[u64]) -> Option<Vec<usize>> {
    let r = x.len();
    if x[r - 1] == 0 {
        Some(x[..r - 1].iter().map(|&v| v as usize).collect())
    } else if x[..r - 1].iter().all(|&v| v == 0) {
        Some(vec![0; r - 1])
    } else {
        None
    }
}

/// Joint absorption law for `r` colors by the recurrence.
pub fn pmf_recurrence_multi<T: Real>(spec: &UrnSpec) -> Result<ExactDistribution<T>> {
    spec.validate()?;
    let lattice = multi_lattice::<T>(spec)?;
    Ok(lattice.get(&spec.counts).expect("corner state is always computed").clone())
}

fn multi_lattice<T: Real>(spec: &UrnSpec) -> Result<Lattice<T>> {
    let r = spec.colors();
    let tables = spec.tables::<T>()?;
    let counts = &spec.counts;
    let radix: Vec<usize> = counts.iter().map(|&c| c as usize + 1).collect();
    let n_states: usize = radix.iter().product();
    let mut states: Vec<Option<ExactDistribution<T>>> = vec![None; n_states];

    // Group states by their total so each level only reads the previous one.
    let mut levels: HashMap<u64, Vec<usize>> = HashMap::new();
    for idx in 0..n_states {
        let x = unflatten(&radix, idx);
        levels.entry(x.iter().sum::<usize>() as u64).or_default().push(idx);
    }
    let max_total: u64 = counts.iter().sum();
    for t in 0..=max_total {
        for &idx in levels.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
            let x: Vec<u64> = unflatten(&radix, idx).into_iter().map(|v| v as u64).collect();
            let dims: Vec<usize> = x[..r - 1].iter().map(|&v| v as usize + 1).collect();
            if let Some(k) = absorbed(&x) {
                states[idx] = Some(ExactDistribution::point_mass(dims, &k));
                continue;
            }
            let weights = draw_weights(spec.model, &tables, &x);
            let total = T::sum_terms(weights.iter().cloned());
            let mut probs = vec![T::zero(); dims.iter().product()];
            for (l, w) in weights.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let p = w.clone() / total.clone();
                let mut y = x.clone();
                y[l] -= 1;
                let prev_idx = y.iter().zip(&radix).fold(0, |acc, (&v, &d)| acc * d + v as usize);
                let prev = states[prev_idx].as_ref().expect("previous level computed");
                // The previous grid is a sub-box of this one; embed it.
                for (i, q) in prev.probs().iter().enumerate() {
                    if q.is_zero() {
                        continue;
                    }
                    let k = unflatten(prev.dims(), i);
                    let target = flat_index(&dims, &k);
                    probs[target] = probs[target].clone() + p.clone() * q.clone();
                }
            }
            states[idx] = Some(ExactDistribution { dims, probs });
        }
    }
    Ok(Lattice { counts: counts.clone(), states: states.into_iter().map(|s| s.expect("all states filled")).collect() })
}

/// Absorption law by summing the weights of all drawing sequences.
pub fn pmf_enumerate<T: Real>(spec: &UrnSpec) -> Result<ExactDistribution<T>> {
    spec.validate()?;
    if spec.total_balls() > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "path enumeration is limited to {ENUMERATION_LIMIT} balls, got {}",
            spec.total_balls()
        )));
    }
    let r = spec.colors();
    let tables = spec.tables::<T>()?;
    let dims: Vec<usize> = spec.counts[..r - 1].iter().map(|&v| v as usize + 1).collect();
    let mut acc: Vec<Vec<T>> = vec![Vec::new(); dims.iter().product()];
    let mut x = spec.counts.clone();
    walk(spec.model, &tables, &mut x, T::one(), &dims, &mut acc);
    let probs = acc.into_iter().map(T::sum_terms).collect();
    ExactDistribution::new(dims, probs)
}

fn walk<T: Real>(model: Model, tables: &[Vec<T>], x: &mut [u64], weight: T, dims: &[usize], acc: &mut [Vec<T>]) {
    if let Some(k) = absorbed(x) {
        acc[flat_index(dims, &k)].push(weight);
        return;
    }
    let weights = draw_weights(model, tables, x);
    let total = T::sum_terms(weights.iter().cloned());
    for (l, w) in weights.into_iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        x[l] -= 1;
        walk(model, tables, x, weight.clone() * w / total.clone(), dims, acc);
        x[l] += 1;
    }
}
