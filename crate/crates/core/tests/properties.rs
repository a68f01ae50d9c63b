use proptest::prelude::*;

use saddlelab::analysis::stats::{wilson_interval, Z95};
use saddlelab::analysis::{classify, ClassifierConfig};
use saddlelab::continuous::{simulate_em_seeded, TimeGrid};
use saddlelab::discrete::{simulate_sgd, DriftMode, NoiseSpec, SgdSpec};
use saddlelab::model::{DriftSpec, NoiseSchedule, ProcessSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wilson_contains_estimate(n in 1u64..5000, frac in 0.0f64..=1.0) {
        let x = ((n as f64) * frac).floor() as u64;
        let ci = wilson_interval(x, n, Z95);
        let p = x as f64 / n as f64;
        prop_assert!(0.0 <= ci.lo && ci.lo <= p && p <= ci.hi && ci.hi <= 1.0);
    }

    #[test]
    fn em_is_deterministic_and_classification_pure(seed in any::<u64>(), gamma in 0.55f64..0.95, x0 in -0.5f64..0.0) {
        let spec = ProcessSpec::new(
            DriftSpec::unit_monomial(2.0).unwrap(),
            NoiseSchedule::PowerTransformed { gamma },
            1.0,
            x0,
        ).unwrap();
        let grid = TimeGrid::new(1.0, 3.0, 0.01).unwrap();
        let a = simulate_em_seeded(&spec, &grid, seed).unwrap();
        let b = simulate_em_seeded(&spec, &grid, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let cfg = ClassifierConfig::default();
        prop_assert_eq!(classify(&a, &cfg), classify(&b, &cfg));
    }

    #[test]
    fn sgd_bounded_jumps(seed in any::<u64>(), gamma in 0.55f64..0.95, bound in 0.1f64..2.0) {
        let spec = SgdSpec {
            drift: DriftSpec::unit_monomial(3.0).unwrap(),
            gamma,
            noise: NoiseSpec::uniform(bound).unwrap(),
            x0: -0.3,
            n0: 1,
            n_end: 300,
            mode: DriftMode::Shrunk,
        };
        let t = simulate_sgd(&spec, seed).unwrap();
        for (i, w) in t.values.windows(2).enumerate() {
            let a = ((i + 1) as f64).powf(-gamma);
            let noise = w[1] - w[0] - spec.drift.eval_shrunk(w[0]) * a;
            prop_assert!(noise.abs() <= bound * a * (1.0 + 1e-12) + 1e-15);
        }
    }
}
