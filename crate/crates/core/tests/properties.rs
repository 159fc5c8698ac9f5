use orthoseries::coefficients::{orlicz_reduction, tandori_blocks, SequenceSpec, WeightSpec, MAX_TRUNCATION};
use orthoseries::majorants::{
    dyadic_decomposition, dyadic_pointwise_bound, majorant, permuted_majorant, tandori_delta, PermutationPlan,
};
use orthoseries::scalar::fiber_norm_sq;
use orthoseries::slack::holds;
use orthoseries::{generate, System, SystemKind, SystemSpec};
use proptest::prelude::*;

const SLACK: f64 = 1e-12;

const KINDS: [SystemKind; 6] = [
    SystemKind::StandardBasis,
    SystemKind::Rademacher,
    SystemKind::Haar,
    SystemKind::RandomQr,
    SystemKind::TensorVector,
    SystemKind::VaryingDim,
];

fn system(kind: usize, n: usize, d: usize, seed: u64) -> System<f64> {
    let kind = KINDS[kind % KINDS.len()];
    let n = if kind == SystemKind::Rademacher { n.min(10) } else { n };
    generate(&SystemSpec::minimal(kind, n).with_fiber_dim(d).with_seed(seed)).expect("valid spec")
}

fn coefficients(raw: &[f64], n: usize) -> Vec<f64> {
    raw.iter().cycle().take(n).copied().collect()
}

fn majorant_rhs(b: &[f64]) -> f64 {
    (2.0 + (b.len() as f64).log2()) * b.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Majorant values recomputed from the definition, one partial sum at a time.
fn majorant_by_definition(sys: &System<f64>, a: &[f64], order: &[usize]) -> Vec<f64> {
    let mut best = vec![0.0f64; sys.fibers.len()];
    let mut coeffs = vec![0.0; sys.len()];
    for &f in order {
        coeffs[f] = a[f];
        let s = sys.combine(&coeffs).expect("lengths match");
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.max(fiber_norm_sq(s.block(i)).sqrt());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_blocks_tile_the_prefix(r in 0u32..=20, frac in 0.0f64..1.0) {
        let j = 1 + ((frac * (1u64 << r) as f64) as u64).min((1u64 << r) - 1);
        let dec = dyadic_decomposition(j, r).unwrap();
        let mut lo = 0;
        for &(a, b) in &dec.blocks {
            prop_assert_eq!(a, lo);
            prop_assert!((b - a).is_power_of_two());
            prop_assert_eq!(a % (b - a), 0);
            lo = b;
        }
        prop_assert_eq!(lo, j);
        prop_assert_eq!(dec.blocks.len() as u32, j.count_ones());
    }

    #[test]
    fn pointwise_bound_holds(
        r in 0u32..=8,
        d in 1usize..=4,
        raw in prop::collection::vec(-10.0f64..10.0, 1..=1024),
    ) {
        let j = raw.len().min(1 << r).max(1);
        let h: Vec<Vec<f64>> = (0..j).map(|n| (0..d).map(|c| raw[(n * d + c) % raw.len()]).collect()).collect();
        let (lhs, rhs) = dyadic_pointwise_bound(&h, r).unwrap();
        prop_assert!(holds(lhs, rhs, SLACK), "lhs {} rhs {}", lhs, rhs);
    }

    #[test]
    fn majorant_bound_under_any_rearrangement(
        kind in 0usize..6,
        n in 1usize..=48,
        d in 1usize..=4,
        seed in any::<u64>(),
        shuffle in any::<u64>(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..=16),
    ) {
        let sys = system(kind, n, d, seed);
        let n = sys.len();
        let a = coefficients(&raw, n);
        let plan = PermutationPlan::seeded_shuffle(n, shuffle);
        let m = permuted_majorant(&sys, &a, &plan, n).unwrap();
        prop_assert!(holds(m.l2_norm, majorant_rhs(&a), SLACK));
    }

    #[test]
    fn streaming_matches_definition(
        kind in 0usize..6,
        n in 1usize..=24,
        d in 1usize..=3,
        seed in any::<u64>(),
        shuffle in any::<u64>(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..=8),
    ) {
        let sys = system(kind, n, d, seed);
        let n = sys.len();
        let a = coefficients(&raw, n);
        let plan = PermutationPlan::seeded_shuffle(n, shuffle);
        let fast = permuted_majorant(&sys, &a, &plan, n).unwrap();
        let slow = majorant_by_definition(&sys, &a, &plan.zero_based());
        for (x, y) in fast.values.iter().zip(&slow) {
            prop_assert!((x - y).abs() <= 1e-12 * y.max(1.0));
        }
    }

    #[test]
    fn identity_plan_is_bitwise_identical(
        kind in 0usize..6,
        n in 1usize..=48,
        seed in any::<u64>(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..=16),
    ) {
        let sys = system(kind, n, 2, seed);
        let n = sys.len();
        let a = coefficients(&raw, n);
        let plain = majorant(&sys, &a, n).unwrap();
        let planned = permuted_majorant(&sys, &a, &PermutationPlan::identity(n), n).unwrap();
        prop_assert_eq!(plain, planned);
    }

    #[test]
    fn majorant_grows_with_n(
        kind in 0usize..6,
        n in 2usize..=40,
        seed in any::<u64>(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..=16),
    ) {
        let sys = system(kind, n, 1, seed);
        let n = sys.len();
        let a = coefficients(&raw, n);
        let mut prev = vec![0.0; sys.fibers.len()];
        for m in 1..=n {
            let cur = majorant(&sys, &a, m).unwrap().values;
            prop_assert!(cur.iter().zip(&prev).all(|(c, p)| c >= p));
            prev = cur;
        }
    }

    #[test]
    fn tandori_thresholds_square(t in 3u64..=MAX_TRUNCATION) {
        let b = tandori_blocks(t).unwrap();
        prop_assert_eq!(b.nu[0], 2);
        for w in b.nu.windows(2) {
            prop_assert_eq!(w[1], w[0] * w[0]);
        }
        prop_assert_eq!(b.blocks[0].0, 3);
        prop_assert_eq!(b.blocks.last().unwrap().1, t);
        for w in b.blocks.windows(2) {
            prop_assert_eq!(w[1].0, w[0].1 + 1);
        }
    }

    #[test]
    fn reduction_chain_is_ordered(
        c in 0.1f64..5.0,
        alpha in 0.5f64..2.0,
        beta in -1.0f64..3.0,
        gamma in 0.0f64..4.0,
        t in 3u64..=100_000,
    ) {
        let a = SequenceSpec::power_log(c, alpha, beta).unwrap();
        let r = orlicz_reduction(&a, &WeightSpec::log_power(gamma).unwrap(), t).unwrap();
        prop_assert!(r.cauchy_schwarz_holds && r.monotone_step_holds);
        prop_assert!(r.c_partial > 0.0);
        prop_assert!(r.orlicz8.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.orlicz9.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn block_oscillation_within_twice_the_majorant(
        kind in 0usize..6,
        n in 5usize..=64,
        seed in any::<u64>(),
        shuffle in any::<u64>(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..=16),
    ) {
        let sys = system(kind, n, 2, seed);
        let n = sys.len();
        prop_assume!(n >= 5);
        let a = coefficients(&raw, n);
        let plan = PermutationPlan::seeded_shuffle(n, shuffle);
        for k in 0..tandori_blocks(n as u64).unwrap().blocks.len() {
            let d = tandori_delta(&sys, &a, &plan, k, n).unwrap();
            prop_assert!(d.one_sided_holds);
            prop_assert!(d.bound_24.holds(SLACK));
        }
    }
}
