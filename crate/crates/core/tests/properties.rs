use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use urnlab::closedform::{self, Poles};
use urnlab::limits::{self, LimitFamily};
use urnlab::oracle::{pmf_recurrence, pmf_recurrence_multi};
use urnlab::simulate::{self, SimConfig};
use urnlab::{Model, UrnSpec, WeightSequence};

type Q = BigRational;

/// A built-in family, or a strictly increasing custom table of length 12.
fn weights() -> impl Strategy<Value = WeightSequence> {
    let builtin = (0..WeightSequence::builtin_families().len()).prop_map(|i| WeightSequence::builtin_families()[i].clone());
    let custom = prop::collection::vec((1i64..9, 1i64..5), 12).prop_map(|steps| {
        let mut acc = Q::zero();
        let values = steps
            .into_iter()
            .map(|(p, d)| {
                acc += Q::new(BigInt::from(p), BigInt::from(d));
                acc.clone()
            })
            .collect();
        WeightSequence::custom(values).unwrap()
    });
    let base = prop_oneof![3 => builtin, 1 => custom];
    (base, any::<bool>()).prop_map(|(w, recip)| if recip { w.reciprocal() } else { w })
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::I), Just(Model::II)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_equal_recurrence(model in model(), a in weights(), b in weights(), n in 1u64..9, m in 1u64..9) {
        let spec = UrnSpec::two_color(model, a, b, n, m);
        let oracle = pmf_recurrence::<Q>(&spec).unwrap();
        prop_assert_eq!(oracle.total(), Q::one());
        prop_assert!(oracle.in_unit_interval());
        for poles in Poles::BOTH {
            let closed: Vec<Q> = closedform::pmf_two_color(&spec, poles).unwrap();
            prop_assert_eq!(closed.as_slice(), oracle.probs());
        }
    }

    #[test]
    fn closed_forms_respect_duality(a in weights(), b in weights(), n in 1u64..9, m in 1u64..9, k in 0u64..9) {
        let k = k.min(n);
        let left: Q = closedform::pmf_i(&a, &b, n, m, k, Poles::Alpha).unwrap();
        let right: Q = closedform::pmf_ii(&a.reciprocal(), &b.reciprocal(), n, m, k, Poles::Beta).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn three_color_closed_forms_equal_recurrence(
        model in model(),
        ws in prop::collection::vec(weights(), 3),
        counts in prop::collection::vec(0u64..4, 2),
        last in 1u64..4,
    ) {
        let n = vec![counts[0], counts[1], last];
        let spec = UrnSpec::new(model, ws.clone(), n.clone()).unwrap();
        let oracle = pmf_recurrence_multi::<Q>(&spec).unwrap();
        prop_assert_eq!(oracle.total(), Q::one());
        for (k, p) in oracle.iter() {
            let k: Vec<u64> = k.iter().map(|&v| v as u64).collect();
            let closed: Q = match model {
                Model::I => closedform::pmf_multi_i(&ws, &n, &k).unwrap(),
                Model::II => closedform::pmf_multi_ii_or_oracle(&ws, &n, &k).unwrap().0,
            };
            prop_assert_eq!(&closed, p, "k = {:?}", k);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_is_reproducible(model in model(), a in weights(), b in weights(), seed in any::<u64>(), workers in 2usize..6) {
        let spec = UrnSpec::two_color(model, a, b, 6, 5);
        let config = SimConfig::new(spec, 40_000, seed);
        let single = simulate::empirical_pmf(&config).unwrap();
        let parallel = simulate::empirical_pmf(&config.clone().with_workers(workers)).unwrap();
        prop_assert_eq!(&single, &parallel);
        prop_assert_eq!(single.counts.iter().sum::<u64>(), 40_000);
    }
}

#[test]
fn finite_moments_approach_the_limit() {
    for s in 1..=10 {
        let gap = (limits::ym_moment::<f64>(1000, s) - limits::w_moment::<f64>(s, LimitFamily::Square)).abs();
        assert!(gap < 1e-2 * s as f64, "s={s}: gap {gap}");
    }
}
