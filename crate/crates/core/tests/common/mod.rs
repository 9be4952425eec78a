use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tsp12::instance::{Edge, NodeId};
use tsp12::tourbuild::{PartialTour, Walk};

/// A walk on fresh nodes plus a partial tour in which every walk node is a
/// path end. Ends are paired with each other or with extra nodes.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (PartialTour, Walk) {
    let cycle = rng.gen_bool(0.5);
    let a_len = if cycle { *[3usize, 5, 7, 9].choose(rng).unwrap() } else { rng.gen_range(2..=10) };
    let a_nodes: Vec<NodeId> = (0..a_len).collect();
    let mut next = a_len;
    let mut t_edges = Vec::new();
    let mut open: Vec<NodeId> = a_nodes.clone();
    open.shuffle(rng);
    while let Some(u) = open.pop() {
        let mut prev = u;
        for _ in 0..rng.gen_range(0..3) {
            t_edges.push(Edge::new(prev, next));
            prev = next;
            next += 1;
        }
        if !open.is_empty() && rng.gen_bool(0.5) {
            let w = open.pop().unwrap();
            if prev == u {
                // Keep T and A disjoint.
                t_edges.push(Edge::new(prev, next));
                prev = next;
                next += 1;
            }
            t_edges.push(Edge::new(prev, w));
        } else {
            t_edges.push(Edge::new(prev, next));
            next += 1;
        }
    }
    let mut order = a_nodes;
    order.shuffle(rng);
    let walk = if cycle { Walk::Cycle(order) } else { Walk::Path(order) };
    (PartialTour::from_edges(next, t_edges).unwrap(), walk)
}

