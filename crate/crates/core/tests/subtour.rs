use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsp12::instance::{held_karp_opt, num_pairs, Instance};
use tsp12::subtour::{
    is_subtour_feasible_exhaustive, solve_f2m_lp, solve_min_2m, solve_subtour_lp, solve_tsp_ip_with, BranchRule,
    IpOptions,
};

fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=9);
    let p = rng.gen_range(0.15..0.6);
    let ones: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect();
    Instance::new(n, ones).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn relaxations_are_ordered(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let f2m = solve_f2m_lp(&inst).unwrap();
        let (x, _) = solve_subtour_lp(&inst).unwrap();
        prop_assert!(is_subtour_feasible_exhaustive(&x));
        let two_m = solve_min_2m(&inst).unwrap().cost;
        let opt = held_karp_opt(&inst).unwrap().cost;
        prop_assert!(f2m.objective() <= x.objective());
        // 2M may fall below the subtour bound (two far-apart triangles).
        prop_assert!(*f2m.objective() <= tsp12::Rational::from_int(two_m));
        prop_assert!(*x.objective() <= tsp12::Rational::from_int(opt));
        prop_assert!(two_m <= opt);
    }

    #[test]
    fn any_branching_order_finds_the_optimum(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let opt = held_karp_opt(&inst).unwrap().cost;
        let default = solve_tsp_ip_with(&inst, &IpOptions::default()).unwrap();
        let reversed: Vec<usize> = (0..num_pairs(inst.n())).rev().collect();
        let replay = solve_tsp_ip_with(&inst, &IpOptions { branch: BranchRule::Priority(reversed), limits: None }).unwrap();
        prop_assert_eq!(default.0.cost, opt);
        prop_assert_eq!(replay.0.cost, opt);
        // Same order twice gives the same tree.
        let again = solve_tsp_ip_with(&inst, &IpOptions::default()).unwrap();
        prop_assert_eq!(again.1, default.1);
        prop_assert_eq!(again.0, default.0);
    }
}
