//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use urnlab::closedform::{self, CrossTerm, OkCorralDisplay, Poles};
use urnlab::limits::{self, LimitFamily, ZnMethod};
use urnlab::moments::{self, MsNormalization};
use urnlab::numerics::{falling_factorial, BigFloat, Real};
use urnlab::oracle::{recurrence_lattice, ExactDistribution, Lattice};
use urnlab::simulate::{self, SimConfig};
use urnlab::{Model, UrnSpec, WeightSequence};

type Q = BigRational;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lattice(model: Model, weights: &[WeightSequence], counts: &[u64]) -> Lattice<Q> {
    let spec = UrnSpec::new(model, weights.to_vec(), counts.to_vec()).expect("valid spec");
    recurrence_lattice(&spec).expect("recurrence runs")
}

fn odometer(hi: &[u64], lo: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &h in hi {
        out = out.into_iter().flat_map(|p| (lo..=h).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn short(w: &WeightSequence) -> String {
    w.to_string()
}

/// Closed-form two-color laws in both representations against the recurrence.
fn criterion_1() -> Outcome {
    let fams = WeightSequence::builtin_families();
    let mut pairs: Vec<(Model, WeightSequence, WeightSequence)> = Vec::new();
    for model in [Model::I, Model::II] {
        for a in &fams {
            for b in &fams {
                pairs.push((model, a.clone(), b.clone()));
            }
        }
    }
    let checked: usize = pairs
        .par_iter()
        .map(|(model, a, b)| -> Result<usize, String> {
            let lat = lattice(*model, &[a.clone(), b.clone()], &[12, 12]);
            let mut count = 0;
            for n in 1..=12 {
                for m in 1..=12 {
                    let oracle = lat.get(&[n, m]).unwrap().probs();
                    for poles in Poles::BOTH {
                        let closed: Vec<Q> = match model {
                            Model::I => closedform::pmf_i_all(a, b, n, m, poles),
                            Model::II => closedform::pmf_ii_all(a, b, n, m, poles),
                        }
                        .map_err(|e| e.to_string())?;
                        ensure(closed == oracle, || {
                            format!("model {model} A={} B={} n={n} m={m} {poles:?}", short(a), short(b))
                        })?;
                        count += 1;
                    }
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    Ok(format!("{checked} laws (2 models x {} family pairs x n,m<=12 x 2 representations) equal the recurrence exactly", fams.len().pow(2)))
}

/// Linear-weight reductions against the classical formulas.
fn criterion_2() -> Outcome {
    let mut count = 0;
    for n in 1..=10u64 {
        for m in 1..=10u64 {
            for k in 0..=n {
                let folk: Q = closedform::pmf_folklore(n, m, k).map_err(|e| e.to_string())?;
                for poles in Poles::BOTH {
                    let p: Q = closedform::pmf_sampling_polya(1, 1, n, m, k, poles).map_err(|e| e.to_string())?;
                    ensure(p == folk, || format!("sampling n={n} m={m} k={k} {poles:?}"))?;
                    count += 1;
                }
            }
            let classical: Vec<Q> =
                (1..=n).map(|k| closedform::pmf_classical_okcorral(n, m, k)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            for k in 1..=n {
                for d in OkCorralDisplay::BOTH {
                    let p: Q = closedform::pmf_okcorral_polya(1, 1, n, m, k, d).map_err(|e| e.to_string())?;
                    ensure(p == classical[k as usize - 1], || format!("OK-Corral n={n} m={m} k={k} {d:?}"))?;
                    count += 1;
                }
            }
            let zero: Q = closedform::pmf_okcorral_polya(1, 1, n, m, 0, OkCorralDisplay::BlackSum).map_err(|e| e.to_string())?;
            let complement = Q::one() - classical.iter().cloned().fold(Q::zero(), |a, b| a + b);
            ensure(zero == complement, || format!("OK-Corral n={n} m={m} k=0"))?;
            count += 1;
        }
    }
    Ok(format!("{count} probabilities match the folklore and classical OK-Corral laws exactly (n,m<=10)"))
}

/// Model I with (A, B) equals model II with the reciprocal sequences.
fn criterion_3() -> Outcome {
    let fams = WeightSequence::builtin_families();
    let pairs: Vec<(WeightSequence, WeightSequence)> =
        fams.iter().flat_map(|a| fams.iter().map(move |b| (a.clone(), b.clone()))).collect();
    let two: usize = pairs
        .par_iter()
        .map(|(a, b)| -> Result<usize, String> {
            let mut count = 0;
            for model in [Model::I, Model::II] {
                let ws = [a.clone(), b.clone()];
                let lat = lattice(model, &ws, &[10, 10]);
                let dual = lattice(model.dual(), &[a.reciprocal(), b.reciprocal()], &[10, 10]);
                for x in odometer(&[10, 10], 0) {
                    ensure(lat.get(&x).unwrap().probs() == dual.get(&x).unwrap().probs(), || {
                        format!("model {model} A={} B={} counts {x:?}", short(a), short(b))
                    })?;
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    let triples: Vec<Vec<WeightSequence>> = odometer(&[5, 5, 5], 0)
        .into_iter()
        .filter(|t| t[0] <= t[1])
        .map(|t| t.iter().map(|&i| fams[i as usize].clone()).collect())
        .collect();
    let three: usize = triples
        .par_iter()
        .map(|ws| -> Result<usize, String> {
            let recip: Vec<WeightSequence> = ws.iter().map(WeightSequence::reciprocal).collect();
            let lat = lattice(Model::I, ws, &[5, 5, 5]);
            let dual = lattice(Model::II, &recip, &[5, 5, 5]);
            let mut count = 0;
            for x in odometer(&[5, 5, 5], 0) {
                ensure(lat.get(&x).unwrap().probs() == dual.get(&x).unwrap().probs(), || {
                    format!("r=3 weights {:?} counts {x:?}", ws.iter().map(short).collect::<Vec<_>>())
                })?;
                count += 1;
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    Ok(format!("{two} two-color instances (n,m<=10) and {three} three-color instances (n_j<=5) are dual exactly"))
}

struct MultiTally {
    entries: usize,
    literal_checked: usize,
    literal_mismatches: usize,
}

fn multi_check(model: Model, ws: &[WeightSequence], corner: &[u64], vectors: &[Vec<u64>]) -> Result<MultiTally, String> {
    let lat = lattice(model, ws, corner);
    let r = ws.len();
    let mut tally = MultiTally { entries: 0, literal_checked: 0, literal_mismatches: 0 };
    for n in vectors {
        if n[r - 1] == 0 {
            continue;
        }
        let dist: &ExactDistribution<Q> = lat.get(n).unwrap();
        for (k, p) in dist.iter() {
            let k: Vec<u64> = k.iter().map(|&v| v as u64).collect();
            let closed: Q = match model {
                Model::I => closedform::pmf_multi_i(ws, n, &k),
                Model::II if k.iter().all(|&v| v >= 1) => closedform::pmf_multi_ii(ws, n, &k, CrossTerm::Corrected),
                Model::II => continue,
            }
            .map_err(|e| e.to_string())?;
            ensure(&closed == p, || {
                format!("model {model} weights {:?} n={n:?} k={k:?}", ws.iter().map(short).collect::<Vec<_>>())
            })?;
            tally.entries += 1;
            if model == Model::II {
                let literal: Q = closedform::pmf_multi_ii(ws, n, &k, CrossTerm::Literal).map_err(|e| e.to_string())?;
                tally.literal_checked += 1;
                tally.literal_mismatches += usize::from(&literal != p);
            }
        }
    }
    Ok(tally)
}

/// r-color closed forms against the multicolor recurrence.
fn criterion_4() -> Outcome {
    let f = WeightSequence::builtin_families();
    let (lin1, lin2, sq, tri, ssq, cube) = (&f[0], &f[1], &f[2], &f[3], &f[4], &f[5]);
    let tuples: Vec<Vec<WeightSequence>> = vec![
        vec![sq.clone(), tri.clone()],
        vec![cube.clone(), lin1.clone()],
        vec![lin1.clone(), sq.clone(), tri.clone()],
        vec![ssq.clone(), cube.clone(), lin2.clone()],
        vec![sq.clone(), lin1.clone(), tri.clone(), ssq.clone()],
        vec![lin2.clone(), cube.clone(), sq.clone(), lin1.clone()],
    ];
    let jobs: Vec<(Model, Vec<WeightSequence>)> =
        [Model::I, Model::II].into_iter().flat_map(|m| tuples.iter().map(move |t| (m, t.clone()))).collect();
    let tallies = jobs
        .par_iter()
        .map(|(model, ws)| {
            let r = ws.len();
            let corner = vec![6; r];
            let vectors = if r < 4 {
                odometer(&corner, 0)
            } else {
                let mut v: Vec<Vec<u64>> = odometer(&[2, 2, 2, 2], 0)
                    .into_iter()
                    .map(|i| i.iter().map(|&j| [1, 3, 6][j as usize]).collect())
                    .collect();
                v.push(vec![6, 6, 6, 1]);
                v
            };
            multi_check(*model, ws, &corner, &vectors)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let entries: usize = tallies.iter().map(|t| t.entries).sum();
    let lit: usize = tallies.iter().map(|t| t.literal_checked).sum();
    let lit_bad: usize = tallies.iter().map(|t| t.literal_mismatches).sum();
    Ok(format!(
        "{entries} probabilities equal the recurrence exactly for r in {{2,3,4}} (model II with every k_j>=1, \
         cross term prod alpha_(l_j)); finding: the cross term read as prod alpha_(k_j) disagrees on {lit_bad} of {lit} entries"
    ))
}

fn falling(k: usize, s: u64) -> Q {
    falling_factorial(&q(k as i64), s)
}

/// Closed-form moments against summation over the recurrence, plus the
/// coefficient identities behind the OK-Corral moments.
fn criterion_5() -> Outcome {
    let mut count = 0;
    // Sampling urn with weights a*j and d*j.
    for (a, d) in [(1, 1), (1, 2), (2, 1), (2, 3), (3, 1)] {
        let lat = lattice(Model::I, &[WeightSequence::linear(a), WeightSequence::linear(d)], &[8, 8]);
        for n in 1..=8 {
            for m in 1..=8 {
                let dist = lat.get(&[n, m]).unwrap();
                for s in 1..=4 {
                    let fd = dist.expect(|k| falling(k[0], s));
                    let rd = dist.expect(|k| num_traits::pow(q(k[0] as i64), s as usize));
                    let fc: Q = moments::sampling_factorial_moment(a as u64, d as u64, n, m, s).map_err(|e| e.to_string())?;
                    let rc: Q = moments::sampling_raw_moment(a as u64, d as u64, n, m, s).map_err(|e| e.to_string())?;
                    ensure(fc == fd && rc == rd, || format!("sampling a={a} d={d} n={n} m={m} s={s}"))?;
                    count += 2;
                }
            }
        }
    }
    // OK-Corral urn with weights c*j (white) and b*j (black).
    let ms: Vec<_> = (1..=4).map(|s| moments::m_polynomial(s).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    for (b, c) in [(1, 1), (1, 2), (2, 1), (3, 2)] {
        let lat = lattice(Model::II, &[WeightSequence::linear(c), WeightSequence::linear(b)], &[8, 8]);
        for n in 1..=8 {
            for m in 1..=8 {
                let dist = lat.get(&[n, m]).unwrap();
                for s in 1..=4u64 {
                    let raw = dist.expect(|k| num_traits::pow(q(k[0] as i64), s as usize));
                    let closed: Q = moments::okcorral_raw_moment(b as u64, c as u64, n, m, s).map_err(|e| e.to_string())?;
                    ensure(closed == raw, || format!("OK-Corral raw b={b} c={c} n={n} m={m} s={s}"))?;
                    let poly = &ms[s as usize - 1];
                    let direct = dist.expect(|k| poly.eval(&q(k[0] as i64)));
                    for form in MsNormalization::BOTH {
                        let v: Q = moments::okcorral_ms_moment(b as u64, c as u64, n, m, s, form).map_err(|e| e.to_string())?;
                        ensure(v == direct, || format!("E(M_s) {form:?} b={b} c={c} n={n} m={m} s={s}"))?;
                    }
                    count += 3;
                }
            }
        }
    }
    // Multicolor sampling urn, mixed factorial moments with s_j <= 2.
    for a in [vec![1u64, 1, 1], vec![1, 2, 3], vec![2, 1, 2]] {
        let ws: Vec<WeightSequence> = a.iter().map(|&x| WeightSequence::linear(x as i64)).collect();
        let lat = lattice(Model::I, &ws, &[8, 8, 8]);
        for n in odometer(&[8, 8, 8], 1) {
            let dist = lat.get(&n).unwrap();
            for s in odometer(&[2, 2], 0) {
                let direct = dist.expect(|k| falling(k[0], s[0]) * falling(k[1], s[1]));
                let closed: Q = moments::multi_mixed_factorial_moment(&a, &n, &s).map_err(|e| e.to_string())?;
                ensure(closed == direct, || format!("multicolor a={a:?} n={n:?} s={s:?}"))?;
                count += 1;
            }
        }
    }
    let mut identities = 0;
    for l in 1..=20 {
        for s in 1..=8 {
            let (lhs, rhs) = moments::puyhaubert_sum_identity_check(l, s).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("coefficient identity l={l} s={s}"))?;
            identities += 1;
        }
    }
    let m1 = moments::m_polynomial(1).map_err(|e| e.to_string())?;
    ensure(m1.coeffs() == [q(0), q(1), q(1)], || format!("M_1 = {m1:?}"))?;
    Ok(format!("{count} closed-form moments equal direct summation exactly; {identities} coefficient identities hold; M_1 = X^2 + X"))
}

/// Limit-law identities and numerics.
fn criterion_6() -> Outcome {
    let lat = lattice(Model::I, &[WeightSequence::linear(1), WeightSequence::square()], &[10, 10]);
    let mut products = 0;
    for n in 1..=10u64 {
        for m in 1..=10u64 {
            let dist = lat.get(&[n, m]).unwrap();
            for s in 1..=n {
                let lhs = dist.expect(|k| falling(k[0], s)) / falling(n as usize, s);
                let rhs = (1..=m as i64).fold(Q::one(), |acc, l| acc * q(l * l) / q(l * l + s as i64));
                ensure(lhs == rhs, || format!("moment product n={n} m={m} s={s}"))?;
                ensure(limits::ym_moment::<Q>(m, s) == rhs, || format!("ym_moment m={m} s={s}"))?;
                products += 1;
            }
        }
    }
    let target = std::f64::consts::PI / std::f64::consts::PI.sinh();
    let ym = limits::ym_moment::<f64>(1000, 1);
    ensure((ym - target).abs() < 1e-2, || format!("ym_moment(1000, 1) = {ym}"))?;
    let mut worst_theta = 0f64;
    for i in 1..=9 {
        let x = Q::new(BigInt::from(i), BigInt::from(10));
        let qf = BigFloat::from_rational(&x, urnlab::numerics::bigfloat::default_precision());
        let d = (limits::theta(&qf, 1e-40).unwrap() - limits::triple_product(&qf, 1e-40).unwrap()).abs_val().to_f64();
        let xf = i as f64 / 10.0;
        let d64 = (limits::theta(&xf, 1e-17).unwrap() - limits::triple_product(&xf, 1e-17).unwrap()).abs();
        worst_theta = worst_theta.max(d).max(d64);
    }
    ensure(worst_theta < 1e-12, || format!("theta vs triple product differs by {worst_theta:e}"))?;
    let mut worst_zn = 0f64;
    for n in 1..=10 {
        let total = (0..=n)
            .map(|k| limits::zn_pmf::<BigFloat>(n, k, ZnMethod::FiniteSum).unwrap().value)
            .fold(<BigFloat as num_traits::Zero>::zero(), |a, b| a + b);
        worst_zn = worst_zn.max((total - <BigFloat as num_traits::One>::one()).abs_val().to_f64());
    }
    ensure(worst_zn < 1e-20, || format!("sum of zn_pmf deviates from 1 by {worst_zn:e}"))?;
    Ok(format!(
        "{products} moment-product identities exact; |ym_moment(1000,1) - pi/sinh pi| = {:.2e}; \
         theta vs product <= {worst_theta:.1e} on q=0.1..0.9; |sum zn_pmf - 1| <= {worst_zn:.1e} for n<=10",
        (ym - target).abs()
    ))
}

/// Chi-square against exact laws and the exponential samplers.
fn criterion_7() -> Outcome {
    let f = WeightSequence::builtin_families();
    let (lin1, lin2, sq, tri, ssq, cube) = (&f[0], &f[1], &f[2], &f[3], &f[4], &f[5]);
    let specs = vec![
        UrnSpec::two_color(Model::I, lin1.clone(), lin1.clone(), 10, 10),
        UrnSpec::two_color(Model::II, lin1.clone(), lin1.clone(), 10, 10),
        UrnSpec::two_color(Model::I, sq.clone(), tri.clone(), 8, 8),
        UrnSpec::two_color(Model::II, sq.clone(), tri.clone(), 8, 8),
        UrnSpec::two_color(Model::I, ssq.clone(), lin2.clone(), 12, 6),
        UrnSpec::two_color(Model::II, cube.clone(), sq.clone(), 6, 9),
        UrnSpec::two_color(Model::I, sq.reciprocal(), lin1.clone(), 7, 7),
        UrnSpec::two_color(Model::II, tri.clone(), ssq.clone(), 9, 5),
        UrnSpec::new(Model::I, vec![lin1.clone(), sq.clone(), tri.clone()], vec![4, 4, 4]).unwrap(),
        UrnSpec::new(Model::II, vec![sq.clone(), lin1.clone(), tri.clone()], vec![3, 4, 3]).unwrap(),
    ];
    let mut pvals = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let config = SimConfig::new(spec.clone(), 1_000_000, 1000 + i as u64).with_workers(rayon::current_num_threads());
        let observed = simulate::empirical_pmf(&config).map_err(|e| e.to_string())?;
        let exact: ExactDistribution<Q> = recurrence_lattice(spec).map_err(|e| e.to_string())?.get(&spec.counts).unwrap().clone();
        let chi = simulate::chi_square(&observed, &exact).map_err(|e| e.to_string())?;
        ensure(chi.p_value > 0.001 && chi.p_value < 0.999, || format!("{spec}: p = {}", chi.p_value))?;
        pvals.push(chi.p_value);
    }
    let workers = rayon::current_num_threads();
    let ym = simulate::sample_mean(1_000_000, 77, workers, |rng| simulate::sample_ym(1, rng)).map_err(|e| e.to_string())?;
    let ym_z = (ym.mean - 0.5).abs() / ym.std_error;
    ensure(ym_z <= 3.0, || format!("sample_ym(1) mean {} is {ym_z:.2} sigma from 1/2", ym.mean))?;
    let big_m = 10_000;
    let w = simulate::sample_mean(1_000_000, 78, workers, |rng| simulate::sample_w(LimitFamily::Square, rng, big_m).unwrap())
        .map_err(|e| e.to_string())?;
    let target = std::f64::consts::PI / std::f64::consts::PI.sinh();
    let bias = simulate::w_truncation_bias(LimitFamily::Square, big_m, 1);
    let dev = (w.mean - target).abs();
    ensure(dev <= 3.0 * w.std_error + bias, || {
        format!("sample_w mean {} deviates by {dev:e} > 3 sigma {:e} + bias {bias:e}", w.mean, 3.0 * w.std_error)
    })?;
    let (lo, hi) = pvals.iter().fold((1f64, 0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Ok(format!(
        "10 configurations x 10^6 trials: p-values in [{lo:.3}, {hi:.3}]; sample_ym(1) mean {:.5} ({ym_z:.2} sigma); \
         sample_w(square, M={big_m}) mean {:.5}, |dev| {dev:.1e} <= 3 sigma {:.1e} + bias {bias:.1e}",
        ym.mean,
        w.mean,
        3.0 * w.std_error
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).output().map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(3) => Ok(out.stdout),
        code => Err(format!("{args:?} exited with {code:?}: {}", String::from_utf8_lossy(&out.stderr))),
    }
}

/// Byte-identical output across repeated runs and worker counts.
fn criterion_8() -> Outcome {
    let manifest = concat!(env!("CARGO_MANIFEST_DIR"), "/manifests/acceptance.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["pmf", "--A", "square", "--B", "triangular", "--n", "6", "--m", "5"],
        vec!["pmf", "--A", "power:1:1/2", "--B", "linear:1", "--n", "5", "--m", "4", "--format", "csv", "--decimals", "20"],
        vec!["pmf-multi", "--model", "II", "--weights", "square", "triangular", "linear:1", "--counts", "3,2,2"],
        vec!["pmf-multi", "--model", "II", "--weights", "square", "triangular", "linear:1", "--counts", "2,2,2", "--cross-term", "literal"],
        vec!["moments", "--a", "1", "--d", "2", "--n", "5", "--m", "4", "--s", "3"],
        vec!["okc-moments", "--b", "1", "--c", "1", "--n", "4", "--m", "3", "--s", "3"],
        vec!["limit", "--law", "w-cdf", "--grid-step", "0.01", "--format", "csv"],
        vec!["limit", "--law", "zn", "--n", "6"],
        vec!["limit", "--law", "ym", "--m", "5", "--s", "2", "--mode", "float"],
        vec!["theta", "--q", "0.7", "--tol", "1e-30"],
        vec!["duality-check", "--A", "square", "--B", "linear:1", "--n", "4", "--m", "3"],
        vec!["oracle", "--A", "square", "--B", "triangular", "--n", "4", "--m", "4", "--method", "enumerate"],
        vec!["compare", "--manifest", manifest, "--trials", "5000"],
    ];
    for args in &runs {
        let first = run_cli(args)?;
        ensure(first == run_cli(args)?, || format!("{args:?} differs between runs"))?;
    }
    let mut sims = 0;
    for (base, tag) in [
        (vec!["simulate", "--A", "square", "--B", "linear:1", "--n", "8", "--m", "6", "--trials", "100000", "--seed", "3"], "simulate"),
        (vec!["compare", "--manifest", manifest, "--trials", "20000", "--seed", "11"], "compare"),
    ] {
        let reference = run_cli(&base)?;
        for workers in ["1", "2", "8"] {
            let mut args = base.clone();
            args.extend(["--workers", workers]);
            ensure(run_cli(&args)? == reference, || format!("{tag} with {workers} workers differs"))?;
            sims += 1;
        }
    }
    Ok(format!("{} subcommand invocations repeat byte-identically; {sims} parallel runs match the single-worker output", runs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence, two colors", criterion_1),
        ("classical reductions", criterion_2),
        ("duality", criterion_3),
        ("multivariate closed forms", criterion_4),
        ("moments", criterion_5),
        ("limit laws", criterion_6),
        ("Monte Carlo", criterion_7),
        ("determinism", criterion_8),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if filter.is_some_and(|f| f != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("criterion {}: PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                format!("criterion {}: FAIL {name} ({secs:.1}s): {why}", i + 1)
            }
        };
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
