use proptest::prelude::*;

use tinylinks_core::analysis::Verdict;
use tinylinks_core::concrete::RunVerdict;
use tinylinks_core::harness::{judge, GenConfig, RandomGen, TypedGen};
use tinylinks_core::{parse, pretty};

fn cfg(seed: u64) -> GenConfig {
    GenConfig {
        seed,
        max_depth: 6,
        ..GenConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn safe_programs_do_not_go_wrong(seed in any::<u64>()) {
        let mut g = TypedGen::new(&cfg(seed));
        for _ in 0..20 {
            let p = g.program(6);
            let v = judge(0, &p, 100_000);
            prop_assert!(!(v.analysis == Verdict::Safe && v.concrete == RunVerdict::Wrong), "{}", v);
            prop_assert!(!(v.effects_safe && v.concrete == RunVerdict::Wrong), "{}", v);
        }
    }

    #[test]
    fn generated_programs_terminate(seed in any::<u64>()) {
        let mut g = RandomGen::new(&cfg(seed));
        for _ in 0..20 {
            let p = g.program(6);
            prop_assert_ne!(judge(0, &p, 100_000).concrete, RunVerdict::Skipped);
        }
    }

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        let mut g = TypedGen::new(&cfg(seed));
        let mut r = RandomGen::new(&cfg(seed));
        for p in [g.program(7), r.program(7)] {
            prop_assert_eq!(parse(&pretty(&p)).unwrap(), p);
        }
    }
}
