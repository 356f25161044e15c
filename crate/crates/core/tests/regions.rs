use std::sync::Arc;

use bsg_core::game::{generate, GenSpec};
use bsg_core::region::white_box::{learn_regions as truth, maps_equal, InstanceOracle};
use bsg_core::region::{learn_regions, QueryOracle};
use bsg_core::{Environment, FeedbackMode, Halfspace, Polytope, Rat};

fn spec(seed: u64) -> GenSpec {
    GenSpec {
        m: 2 + (seed as usize % 3),
        n: 2 + (seed as usize / 3) % 3,
        k: 1,
        l: 4 + seed % 5,
        seed,
    }
}

#[test]
fn learned_regions_match_payoffs() {
    for seed in 0..40 {
        let inst = generate(&spec(seed)).unwrap();
        let m = inst.m;
        let mut s = Polytope::simplex(m).unwrap();
        if seed % 4 == 3 {
            s = s.intersect(&Halfspace::lower_bound(m, 0, Rat::frac(1, 5))).unwrap();
        }
        let map = learn_regions(&mut InstanceOracle::new(&inst, 0), &s, inst.l).unwrap();
        assert!(maps_equal(&map, &truth(&inst, 0, &s)), "seed {seed}");
    }
}

#[test]
fn environment_queries_cost_one_round_for_a_single_type() {
    for seed in 0..10 {
        let inst = Arc::new(generate(&spec(seed)).unwrap());
        let mut env = Environment::new(inst.clone(), FeedbackMode::Type, 1_000_000, seed).unwrap();
        let s = Polytope::simplex(inst.m).unwrap();
        let mut oracle = QueryOracle::new(&mut env, 0, 1);
        let map = learn_regions(&mut oracle, &s, inst.l).unwrap();
        assert_eq!(oracle.rounds_spent(), oracle.queries());
        assert!(maps_equal(&map, &truth(&inst, 0, &s)));
    }
}

#[test]
fn rare_types_time_out() {
    let mut inst = generate(&GenSpec { m: 2, n: 2, k: 2, l: 4, seed: 3 }).unwrap();
    inst.mu = vec![Rat::one(), Rat::zero()];
    let mut env = Environment::new(Arc::new(inst), FeedbackMode::Type, 1000, 0).unwrap();
    let s = Polytope::simplex(2).unwrap();
    let err = learn_regions(&mut QueryOracle::new(&mut env, 1, 5), &s, 4).unwrap_err();
    assert_eq!(err, bsg_core::Error::QueryTimeout { theta: 1, rounds: 5 });
    assert_eq!(env.rounds_played(), 5);
}
