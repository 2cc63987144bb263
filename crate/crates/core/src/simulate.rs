//! Monte Carlo simulation of the urn processes and of the exponential-sum
//! representations of the limit laws.
//!
//! Trials are split into fixed-size chunks; chunk `i` draws from the ChaCha8
//! stream `i` under the run seed, so aggregate counts do not depend on how
//! chunks are spread over worker threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::limits::LimitFamily;
use crate::numerics::{BigFloat, Real};
use crate::oracle::{absorbed, draw_weights, flat_index, ExactDistribution};
use crate::weights::UrnSpec;

/// Trials per RNG stream.
pub const CHUNK_TRIALS: u64 = 1 << 14;

/// Largest state grid the simulator precomputes transition tables for.
pub const STATE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub spec: UrnSpec,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(spec: UrnSpec, trials: u64, seed: u64) -> Self {
        SimConfig { spec, trials, seed, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// The RNG for stream `stream` of a run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `floor(p * 2^128)` for `p` in `[0, 1)`.
fn fixed_point(p: &BigRational) -> u128 {
    let scaled: BigInt = (p.numer() << 128u32) / p.denom();
    scaled.to_u128().unwrap_or(u128::MAX)
}

/// Cumulative draw thresholds of one state: draw color `colors[i]` if the
/// uniform `u128` is below `cum[i]`, else `fallback`.
#[derive(Debug, Clone)]
struct Transition {
    colors: Vec<u8>,
    cum: Vec<u128>,
    fallback: u8,
}

impl Transition {
    fn from_weights(w: &[BigRational]) -> Self {
        let positive: Vec<usize> = (0..w.len()).filter(|&c| !w[c].is_zero()).collect();
        let total: BigRational = positive.iter().map(|&c| w[c].clone()).sum();
        let mut acc = BigRational::zero();
        let mut colors = Vec::new();
        let mut cum = Vec::new();
        for &c in &positive[..positive.len() - 1] {
            acc += &w[c];
            colors.push(c as u8);
            cum.push(fixed_point(&(&acc / &total)));
        }
        Transition { colors, cum, fallback: *positive.last().expect("live state has a drawable color") as u8 }
    }

    fn from_float_weights(w: &[BigFloat]) -> Self {
        let positive: Vec<usize> = (0..w.len()).filter(|&c| w[c].to_f64() > 0.0).collect();
        let total = BigFloat::sum_terms(positive.iter().map(|&c| w[c].clone()));
        let mut acc = BigFloat::zero();
        let mut colors = Vec::new();
        let mut cum = Vec::new();
        for &c in &positive[..positive.len() - 1] {
            acc = acc + w[c].clone();
            colors.push(c as u8);
            // 53 significant bits; enough for irrational weights at desk scale.
            let p = (acc.clone() / total.clone()).to_f64();
            cum.push((p * 2f64.powi(128)) as u128);
        }
        Transition { colors, cum, fallback: *positive.last().expect("live state has a drawable color") as u8 }
    }

    fn draw(&self, u: u128) -> usize {
        for (c, &t) in self.colors.iter().zip(&self.cum) {
            if u < t {
                return *c as usize;
            }
        }
        self.fallback as usize
    }
}

/// Precomputed transition tables for every state below the initial counts.
#[derive(Debug, Clone)]
pub struct Sampler {
    counts: Vec<u64>,
    radix: Vec<usize>,
    transitions: Vec<Option<Transition>>,
    outcome_dims: Vec<usize>,
}

impl Sampler {
    pub fn new(spec: &UrnSpec) -> Result<Self> {
        spec.validate()?;
        let radix: Vec<usize> = spec.counts.iter().map(|&c| c as usize + 1).collect();
        let states = radix.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if states > STATE_LIMIT {
            return Err(Error::InstanceTooLarge(format!("{states} states exceed the simulator limit {STATE_LIMIT}")));
        }
        let exact = spec.is_rational();
        let rational_tables = if exact { Some(spec.tables::<BigRational>()?) } else { None };
        let float_tables = if exact { None } else { Some(spec.tables::<BigFloat>()?) };
        let transitions = (0..states)
            .map(|i| {
                let x: Vec<u64> = crate::oracle::unflatten(&radix, i).into_iter().map(|v| v as u64).collect();
                if absorbed(&x).is_some() {
                    return None;
                }
                Some(match (&rational_tables, &float_tables) {
                    (Some(t), _) => Transition::from_weights(&draw_weights(spec.model, t, &x)),
                    (_, Some(t)) => Transition::from_float_weights(&draw_weights(spec.model, t, &x)),
                    _ => unreachable!(),
                })
            })
            .collect();
        let outcome_dims = radix[..radix.len() - 1].to_vec();
        Ok(Sampler { counts: spec.counts.clone(), radix, transitions, outcome_dims })
    }

    /// Dimensions of the outcome grid, `n_j + 1` for every non-absorbing color.
    pub fn outcome_dims(&self) -> &[usize] {
        &self.outcome_dims
    }

    /// Runs the urn to absorption and returns the surviving counts.
    pub fn run<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut x: Vec<usize> = self.counts.iter().map(|&c| c as usize).collect();
        loop {
            let idx = flat_index(&self.radix, &x);
            match &self.transitions[idx] {
                None => {
                    let xs: Vec<u64> = x.iter().map(|&v| v as u64).collect();
                    return absorbed(&xs).expect("state without transition is absorbing");
                }
                Some(t) => {
                    let u = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
                    x[t.draw(u)] -= 1;
                }
            }
        }
    }
}

/// One run of the urn; builds the transition tables on every call, so use a
/// [`Sampler`] for repeated runs.
pub fn simulate_once<R: RngCore + ?Sized>(spec: &UrnSpec, rng: &mut R) -> Result<Vec<usize>> {
    Ok(Sampler::new(spec)?.run(rng))
}

/// Outcome counts over the grid of surviving counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmpiricalPmf {
    pub dims: Vec<usize>,
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl EmpiricalPmf {
    /// Sample mean of coordinate `j` of the outcome.
    pub fn mean(&self, j: usize) -> f64 {
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| crate::oracle::unflatten(&self.dims, i)[j] as f64 * c as f64)
            .sum();
        sum / self.trials as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.trials as f64).collect()
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// Runs `trials` chunked, seeded tasks on `workers` threads and folds the
/// per-chunk results with `merge`.
fn run_chunks<A: Send>(
    trials: u64,
    seed: u64,
    workers: usize,
    chunk: impl Fn(&mut ChaCha8Rng, u64) -> A + Sync,
    merge: impl Fn(A, A) -> A + Sync + Send,
    empty: impl Fn() -> A + Sync + Send,
) -> Result<A> {
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let pool = thread_pool(workers)?;
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = CHUNK_TRIALS.min(trials - i * CHUNK_TRIALS);
                chunk(&mut stream_rng(seed, i), len)
            })
            .reduce(&empty, &merge)
    }))
}

/// Simulates the configured urn and tallies the outcomes.
pub fn empirical_pmf(config: &SimConfig) -> Result<EmpiricalPmf> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let sampler = Sampler::new(&config.spec)?;
    let dims = sampler.outcome_dims().to_vec();
    let cells: usize = dims.iter().product();
    let counts = run_chunks(
        config.trials,
        config.seed,
        config.workers,
        |rng, len| {
            let mut c = vec![0u64; cells];
            for _ in 0..len {
                let k = sampler.run(rng);
                c[flat_index(&dims, &k)] += 1;
            }
            c
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
        || vec![0u64; cells],
    )?;
    Ok(EmpiricalPmf { dims, counts, trials: config.trials })
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells after pooling those with expected count below 5.
    pub bins: usize,
}

/// Pearson chi-square of observed counts against an exact law. Cells with
/// expected count below 5 are pooled.
pub fn chi_square<T: Real>(observed: &EmpiricalPmf, exact: &ExactDistribution<T>) -> Result<ChiSquare> {
    if observed.dims != exact.dims() {
        return Err(Error::SupportMismatch(format!(
            "observed grid {:?} differs from exact grid {:?}",
            observed.dims,
            exact.dims()
        )));
    }
    let n = observed.trials as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (i, (&o, p)) in observed.counts.iter().zip(exact.probs()).enumerate() {
        let e = p.to_f64() * n;
        if e <= 0.0 {
            if o > 0 {
                return Err(Error::SupportMismatch(format!("cell {i} has {o} hits but probability zero")));
            }
            continue;
        }
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        if pooled.1 < 5.0 && !cells.is_empty() {
            let (idx, _) = cells
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .expect("non-empty");
            cells[idx].0 += pooled.0;
            cells[idx].1 += pooled.1;
        } else {
            cells.push(pooled);
        }
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        dist.sf(statistic)
    };
    Ok(ChiSquare { statistic, dof, p_value, bins: cells.len() })
}

/// One draw of `Y_m = exp(-sum_{l<=m} e_l / l^2)`.
pub fn sample_ym<R: Rng + ?Sized>(m: u64, rng: &mut R) -> f64 {
    let s: f64 = (1..=m).map(|l| rng.sample::<f64, _>(Exp1) / (l * l) as f64).sum();
    (-s).exp()
}

/// One draw of `W` truncated after `big_m` exponentials,
/// `exp(-sum_{l<=M} e_l / beta_l)`.
pub fn sample_w<R: Rng + ?Sized>(family: LimitFamily, rng: &mut R, big_m: u64) -> Result<f64> {
    if big_m == 0 {
        return Err(Error::InvalidArgument("truncation index must be at least 1".into()));
    }
    let s: f64 = (1..=big_m).map(|l| rng.sample::<f64, _>(Exp1) / family.beta(l)).sum();
    Ok((-s).exp())
}

/// Upper bound on `E(W_M^s) - E(W^s)` from dropping the tail:
/// `1 - exp(-s sum_{l>M} 1/beta_l) <= s sum_{l>M} 1/beta_l`.
pub fn w_truncation_bias(family: LimitFamily, big_m: u64, s: u64) -> f64 {
    s as f64 * family.tail_sum_bound(big_m)
}

/// Mean and standard error of a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Draws `samples` values in seeded chunks and summarizes them.
pub fn sample_mean(
    samples: u64,
    seed: u64,
    workers: usize,
    draw: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<SampleSummary> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    // Per-chunk (count, mean, M2), combined pairwise.
    let (count, mean, m2) = run_chunks(
        samples,
        seed,
        workers,
        |rng, len| {
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..len {
                let x = draw(rng);
                let d = x - mean;
                mean += d / (i + 1) as f64;
                m2 += d * (x - mean);
            }
            (len as f64, mean, m2)
        },
        |a, b| {
            if a.0 == 0.0 {
                return b;
            }
            if b.0 == 0.0 {
                return a;
            }
            let n = a.0 + b.0;
            let d = b.1 - a.1;
            (n, a.1 + d * b.0 / n, a.2 + b.2 + d * d * a.0 * b.0 / n)
        },
        || (0.0, 0.0, 0.0),
    )?;
    let var = if count > 1.0 { m2 / (count - 1.0) } else { 0.0 };
    Ok(SampleSummary { samples, mean, std_error: (var / count).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::pmf_recurrence;
    use crate::weights::{Model, WeightSequence};

    fn unit(model: Model, n: u64, m: u64) -> UrnSpec {
        UrnSpec::two_color(model, WeightSequence::linear(1), WeightSequence::linear(1), n, m)
    }

    #[test]
    fn absorbing_starts() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..10 {
            assert_eq!(simulate_once(&unit(Model::I, 1, 0), &mut rng).unwrap(), vec![1]);
            assert_eq!(simulate_once(&unit(Model::I, 0, 3), &mut rng).unwrap(), vec![0]);
        }
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let spec = UrnSpec::two_color(Model::II, WeightSequence::square(), WeightSequence::linear(2), 5, 4);
        let one = empirical_pmf(&SimConfig::new(spec.clone(), 100_000, 7)).unwrap();
        let eight = empirical_pmf(&SimConfig::new(spec, 100_000, 7).with_workers(8)).unwrap();
        assert_eq!(one, eight);
        assert_eq!(one.counts.iter().sum::<u64>(), 100_000);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(empirical_pmf(&SimConfig::new(unit(Model::I, 2, 2), 0, 1)).is_err());
    }

    #[test]
    fn mean_matches_oracle() {
        let emp = empirical_pmf(&SimConfig::new(unit(Model::I, 2, 2), 200_000, 3).with_workers(4)).unwrap();
        // E = 2/3, Var = 1/3 + 4/6 - 4/9 = 5/9
        let sigma = (5.0f64 / 9.0 / 200_000.0).sqrt();
        assert!((emp.mean(0) - 2.0 / 3.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn chi_square_against_oracle() {
        let spec = UrnSpec::two_color(Model::I, WeightSequence::triangular(), WeightSequence::square(), 6, 5);
        let exact = pmf_recurrence::<BigRational>(&spec).unwrap();
        let emp = empirical_pmf(&SimConfig::new(spec, 200_000, 11).with_workers(4)).unwrap();
        let chi = chi_square(&emp, &exact).unwrap();
        assert!(chi.p_value > 0.001 && chi.p_value < 0.999, "{chi:?}");
        let wrong = ExactDistribution::univariate(vec![BigRational::from_integer(1.into())]);
        assert!(matches!(chi_square(&emp, &wrong), Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn multi_color_outcomes() {
        let spec = UrnSpec::new(Model::II, vec![WeightSequence::linear(1); 3], vec![1, 1, 1]).unwrap();
        let emp = empirical_pmf(&SimConfig::new(spec.clone(), 60_000, 5).with_workers(3)).unwrap();
        let exact = crate::oracle::pmf_recurrence_multi::<BigRational>(&spec).unwrap();
        assert!(chi_square(&emp, &exact).unwrap().p_value > 0.001);
    }

    #[test]
    fn irrational_weights_simulate() {
        let spec = UrnSpec::two_color(Model::I, "power:1:1/2".parse().unwrap(), WeightSequence::linear(1), 4, 3);
        let exact = pmf_recurrence::<BigFloat>(&spec).unwrap();
        let emp = empirical_pmf(&SimConfig::new(spec, 100_000, 2).with_workers(2)).unwrap();
        let chi = chi_square(&emp, &exact).unwrap();
        assert!(chi.p_value > 0.001 && chi.p_value < 0.999, "{chi:?}");
    }

    #[test]
    fn exponential_samplers() {
        let mut rng = stream_rng(9, 0);
        for _ in 0..1000 {
            let y = sample_ym(3, &mut rng);
            assert!(y > 0.0 && y <= 1.0);
            let w = sample_w(LimitFamily::Triangular, &mut rng, 50).unwrap();
            assert!(w > 0.0 && w <= 1.0);
        }
        let s = sample_mean(200_000, 4, 4, |rng| sample_ym(1, rng)).unwrap();
        assert!((s.mean - 0.5).abs() < 3.0 * s.std_error);
        let t = sample_mean(200_000, 4, 1, |rng| sample_ym(1, rng)).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn fixed_point_thresholds() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(fixed_point(&half), 1u128 << 127);
        let t = Transition::from_weights(&[BigRational::from_integer(0.into()), BigRational::from_integer(3.into())]);
        assert_eq!(t.draw(u128::MAX), 1);
        assert_eq!(t.draw(0), 1);
    }
}
