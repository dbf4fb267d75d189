//! Property tests for the structural invariants that hold for every
//! admissible metric, not just the frozen oracle cases.

use proptest::prelude::*;

use toric_core::fenchel::{transform, TransformOptions};
use toric_core::metrics::{
    concavity_margin, is_dominated, random_admissible, InvariantMetric, MetricSpec,
};
use toric_core::simplex::{cell_partition, Cell};

fn opts() -> TransformOptions {
    TransformOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Fenchel-Young: ⟨x,u⟩ - f(u) ≥ f̌(x) for sampled pairs.
    #[test]
    fn fenchel_young_holds(
        seed in 0u64..5000,
        xr in 0.0f64..1.0,
        u in -6.0f64..6.0,
    ) {
        let h = random_admissible(seed, 1, 3);
        let x = [xr];
        let value = transform(&h, &x, &opts()).unwrap();
        let slack = x[0] * u - h.eval(&[u]) - value;
        prop_assert!(slack >= -1e-9, "slack {slack}");
    }

    /// Constant shifts move the transform by the opposite constant, exactly.
    #[test]
    fn shift_law_is_exact(seed in 0u64..5000, c in -2.0f64..2.0, xr in 0.0f64..1.0) {
        let h = random_admissible(seed, 1, 3);
        let shifted = h.scale((2.0 * c).exp()).unwrap(); // potential + c
        let a = transform(&h, &[xr], &opts()).unwrap();
        let b = transform(&shifted, &[xr], &opts()).unwrap();
        prop_assert!((b - (a - c)).abs() < 1e-9);
    }

    /// Order reversal: scaling down keeps the metric dominated and flips the
    /// transform ordering.
    #[test]
    fn order_reversal(seed in 0u64..5000, t in 0.05f64..1.0, xr in 0.0f64..1.0) {
        let h = random_admissible(seed, 1, 3);
        let smaller = h.scale(t).unwrap();
        prop_assert!(is_dominated(&smaller, &h, 300).dominated);
        let a = transform(&smaller, &[xr], &opts()).unwrap();
        let b = transform(&h, &[xr], &opts()).unwrap();
        prop_assert!(a >= b - 1e-9);
    }

    /// Generated metrics are concave and sit below the canonical one.
    #[test]
    fn generated_metrics_are_admissible(seed in 0u64..5000, n in 1usize..3) {
        let h = random_admissible(seed, n, 4);
        prop_assert!(concavity_margin(&h, seed ^ 0xabcd, 200, 15.0) >= -1e-9);
        prop_assert!(is_dominated(&h, &InvariantMetric::canonical(n), 600).dominated);
    }

    /// Metric specs round-trip bit-exactly through their JSON schema.
    #[test]
    fn spec_round_trip(seed in 0u64..50_000) {
        let spec = toric_core::metrics::random_admissible_spec(seed, 2, 5);
        let json = serde_json::to_string(&spec).unwrap();
        let back: MetricSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&spec, &back);
        prop_assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    /// Cell averages are monotone: bounding g pointwise bounds the average.
    #[test]
    fn cell_average_respects_pointwise_bounds(
        m in 1usize..6,
        nu in 0usize..5,
        a in -1.0f64..1.0,
        b in 0.0f64..2.0,
    ) {
        prop_assume!(nu < m);
        let cell = Cell::new(1, m, &[nu]).unwrap();
        let rule = toric_core::quad::gauss_legendre(8);
        let avg = cell.average(&rule, |x| a + b * x[0]).unwrap();
        let lo = a + b * (nu as f64 / m as f64);
        let hi = a + b * ((nu + 1) as f64 / m as f64);
        prop_assert!(avg >= lo - 1e-12 && avg <= hi + 1e-12);
    }
}

#[test]
fn partition_volumes_are_probabilities_of_the_simplex() {
    // deterministic exhaustive check kept beside the random properties
    for n in 1..=3usize {
        for m in 1..=6usize {
            let total: f64 = cell_partition(n, m).iter().map(|c| c.volume()).sum();
            let factorial: f64 = (1..=n).map(|k| k as f64).product();
            assert!((total * factorial - 1.0).abs() < 1e-12, "n={n} m={m}");
        }
    }
}
