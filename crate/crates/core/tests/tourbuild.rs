mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_pair;
use tsp12::instance::{held_karp_opt, Edge, Instance, NodeId};
use tsp12::tourbuild::{augment, complete_partial_tour, max_augmentation_exhaustive, PartialTour, Walk};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn augmentation_meets_the_bound_and_the_oracle(seed in any::<u64>()) {
        let (t, a) = random_pair(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(a.len() <= 9);
        let best = max_augmentation_exhaustive(&t, &a);
        let mut grown = t.clone();
        let added = augment(&mut grown, &a).unwrap();
        prop_assert!(added.len() >= a.guaranteed());
        prop_assert!(best >= a.guaranteed());
        prop_assert!(added.len() <= best);
        let edges: Vec<Edge> = a.edges();
        prop_assert!(added.iter().all(|e| edges.contains(e)));
        // T ∪ A' rebuilt from scratch is still a partial tour.
        let all: Vec<Edge> = t.edges().into_iter().chain(added.iter().copied()).collect();
        prop_assert!(PartialTour::from_edges(t.n(), all).is_ok());
    }

    #[test]
    fn completion_cost_formula(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..=9);
        let ones: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.4)).collect();
        let inst = Instance::new(n, ones).unwrap();
        let mut perm: Vec<NodeId> = (0..n).collect();
        perm.shuffle(&mut rng);
        // Cut a random Hamiltonian path into pieces of at least two nodes.
        let mut t = PartialTour::new(n);
        let mut i = 0;
        while i + 1 < n {
            let len = rng.gen_range(2..=n - i).min(n - i);
            let len = if n - i - len == 1 { len + 1 } else { len };
            for k in i..i + len - 1 {
                t.add(Edge::new(perm[k], perm[k + 1]));
            }
            i += len;
        }
        let d = t.degree_one_count() as i64;
        let tour = complete_partial_tour(&inst, &t).unwrap();
        prop_assert!(tour.cost <= t.cost(&inst) + d);
        prop_assert!(tour.cost >= held_karp_opt(&inst).unwrap().cost);
    }
}

#[test]
fn matching_edges_and_a_five_cycle() {
    let t = PartialTour::from_edges(10, (0..5).map(|i| Edge::new(i, i + 5))).unwrap();
    let a = Walk::Cycle(vec![0, 1, 2, 3, 4]);
    let mut grown = t.clone();
    assert!(augment(&mut grown, &a).unwrap().len() >= 2);
    assert_eq!(max_augmentation_exhaustive(&t, &a), 2);
}
