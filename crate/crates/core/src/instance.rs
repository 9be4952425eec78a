//! 1,2-TSP instances, tours, the Held–Karp oracle, and the instance
//! transforms that move a bad example into the biconnected, low-LP-value
//! class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;
use crate::subtour::FracSolution;

pub type NodeId = usize;

/// Largest node count an [`Instance`] can hold (adjacency is a `u64` mask).
pub const MAX_NODES: usize = 64;
/// Largest node count accepted by [`held_karp_opt`].
pub const HELD_KARP_MAX: usize = 18;

/// An unordered pair of distinct nodes, stored smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert!(a != b, "self-loop {a}-{a}");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn u(&self) -> NodeId {
        self.0
    }

    pub fn v(&self) -> NodeId {
        self.1
    }

    pub fn ends(&self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }

    pub fn other(&self, w: NodeId) -> NodeId {
        if w == self.0 {
            self.1
        } else {
            self.0
        }
    }

    pub fn touches(&self, w: NodeId) -> bool {
        self.0 == w || self.1 == w
    }

    /// Position of the edge in the lexicographic order of all pairs of `K_n`.
    pub fn index(&self, n: usize) -> usize {
        let (u, v) = (self.0, self.1);
        u * (2 * n - u - 1) / 2 + (v - u - 1)
    }

    /// Inverse of [`Edge::index`].
    pub fn from_index(n: usize, mut idx: usize) -> Edge {
        for u in 0..n {
            let row = n - u - 1;
            if idx < row {
                return Edge(u, u + 1 + idx);
            }
            idx -= row;
        }
        panic!("edge index out of range");
    }

    /// The `"u-v"` key used in solution files.
    pub fn key(&self) -> String {
        format!("{}-{}", self.0, self.1)
    }

    pub fn parse_key(s: &str) -> Option<Edge> {
        let (a, b) = s.split_once('-')?;
        let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        (a != b).then(|| Edge::new(a, b))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Edge::parse_key(&s).ok_or_else(|| serde::de::Error::custom(format!("bad edge key {s:?}")))
    }
}

pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Every pair of `K_n` in index order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| Edge(u, v)))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node count {0} not supported here (allowed {1})")]
    UnsupportedSize(usize, &'static str),
    #[error("cost-1 graph is already connected")]
    AlreadyConnected,
    #[error("cost-1 graph is disconnected")]
    Disconnected,
    #[error("cost-1 graph is already biconnected")]
    AlreadyBiconnected,
    #[error("LP solution has no positive value on a cost-2 edge")]
    NoCostTwoFlow,
    #[error("LP solution carries only {0} on cost-2 edges, one full unit is needed")]
    InsufficientCostTwoFlow(Rational),
    #[error("not a tour: {0}")]
    InvalidTour(String),
    #[error("malformed instance file: {0}")]
    Format(String),
}

/// A 1,2-TSP instance held as its graph of cost-1 edges.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    n: usize,
    adj: Vec<u64>,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance").field("n", &self.n).field("ones", &self.one_edges()).finish()
    }
}

impl Instance {
    pub fn new(n: usize, ones: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, InstanceError> {
        if n > MAX_NODES {
            return Err(InstanceError::UnsupportedSize(n, "n <= 64"));
        }
        let mut adj = vec![0u64; n];
        for (a, b) in ones {
            for w in [a, b] {
                if w >= n {
                    return Err(InstanceError::NodeOutOfRange { node: w, n });
                }
            }
            if a == b {
                return Err(InstanceError::SelfLoop(a));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(Instance { n, adj })
    }

    pub fn complete(n: usize) -> Self {
        Instance::new(n, all_pairs(n).map(|e| e.ends())).unwrap()
    }

    pub fn from_adjacency(adj: Vec<u64>) -> Self {
        let n = adj.len();
        assert!(n <= MAX_NODES);
        Instance { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut m = self.adj[v];
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let w = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(w)
        })
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn is_one(&self, a: NodeId, b: NodeId) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    /// Cost of the pair `a`-`b`: 1 for a cost-1 edge, otherwise 2.
    pub fn c(&self, a: NodeId, b: NodeId) -> i64 {
        if self.is_one(a, b) {
            1
        } else {
            2
        }
    }

    /// Cost of an edge with range checking.
    pub fn cost(&self, e: Edge) -> Result<i64, InstanceError> {
        for w in [e.u(), e.v()] {
            if w >= self.n {
                return Err(InstanceError::NodeOutOfRange { node: w, n: self.n });
            }
        }
        Ok(self.c(e.u(), e.v()))
    }

    pub fn one_edges(&self) -> Vec<Edge> {
        all_pairs(self.n).filter(|e| self.is_one(e.u(), e.v())).collect()
    }

    pub fn num_one_edges(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Cost of the closed walk through `order` with wraparound.
    pub fn cycle_cost(&self, order: &[NodeId]) -> i64 {
        let k = order.len();
        (0..k).map(|i| self.c(order[i], order[(i + 1) % k])).sum()
    }

    /// Connected components of the cost-1 graph restricted to `alive`.
    fn components_masked(&self, alive: u64) -> Vec<u64> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for s in 0..self.n {
            if alive >> s & 1 == 0 || seen >> s & 1 == 1 {
                continue;
            }
            let mut comp = 1u64 << s;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let nb = self.adj[v] & alive & !comp;
                comp |= nb;
                frontier |= nb;
            }
            seen |= comp;
            out.push(comp);
        }
        out
    }

    fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Node sets of the connected components of the cost-1 graph.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        self.components_masked(self.full_mask()).into_iter().map(mask_nodes).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components_masked(self.full_mask()).len() == 1
    }

    /// Articulation points of the cost-1 graph, ascending.
    pub fn cut_vertices(&self) -> Vec<NodeId> {
        // Iterative Hopcroft–Tarjan low-link DFS.
        let n = self.n;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_cut = vec![false; n];
        let mut time = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = time;
            low[root] = time;
            time += 1;
            let mut root_children = 0;
            // (node, parent, remaining neighbour mask)
            let mut stack = vec![(root, usize::MAX, self.adj[root])];
            while let Some(top) = stack.last_mut() {
                let (v, parent) = (top.0, top.1);
                if top.2 == 0 {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if p != root && low[v] >= disc[p] {
                            is_cut[p] = true;
                        }
                    }
                    continue;
                }
                let w = top.2.trailing_zeros() as usize;
                top.2 &= top.2 - 1;
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, self.adj[w]));
                } else if w != parent {
                    low[v] = low[v].min(disc[w]);
                }
            }
            if root_children > 1 {
                is_cut[root] = true;
            }
        }
        (0..n).filter(|&v| is_cut[v]).collect()
    }

    /// Connected and free of cut vertices.
    pub fn is_biconnected(&self) -> bool {
        if self.n < 3 {
            return self.n == 2 && self.is_one(0, 1);
        }
        self.is_connected() && self.cut_vertices().is_empty()
    }

    /// Copy with one extra node joined by cost-1 edges to `targets`.
    pub fn with_extra_node(&self, targets: impl IntoIterator<Item = NodeId>) -> Result<Instance, InstanceError> {
        let star = self.n;
        let mut ones: Vec<(NodeId, NodeId)> = self.one_edges().iter().map(|e| e.ends()).collect();
        ones.extend(targets.into_iter().map(|j| (j, star)));
        Instance::new(self.n + 1, ones)
    }

    pub fn relabel(&self, perm: &[NodeId]) -> Instance {
        let ones = self.one_edges().into_iter().map(|e| (perm[e.u()], perm[e.v()]));
        Instance::new(self.n, ones).unwrap()
    }
}

fn mask_nodes(m: u64) -> Vec<NodeId> {
    (0..64).filter(|&i| m >> i & 1 == 1).collect()
}

/// A Hamiltonian cycle with its cost.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<NodeId>,
    pub cost: i64,
}

impl Tour {
    /// Validates `order` as a permutation of all nodes and computes its cost.
    pub fn new(inst: &Instance, order: Vec<NodeId>) -> Result<Tour, InstanceError> {
        let n = inst.n();
        if n < 3 {
            return Err(InstanceError::InvalidTour(format!("n = {n} < 3")));
        }
        if order.len() != n {
            return Err(InstanceError::InvalidTour(format!("{} nodes listed, expected {n}", order.len())));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(InstanceError::InvalidTour(format!("node {v} repeated or out of range")));
            }
            seen[v] = true;
        }
        let cost = inst.cycle_cost(&order);
        Ok(Tour { order, cost })
    }

    /// Checks the stored cost against the instance.
    pub fn validate(&self, inst: &Instance) -> Result<(), InstanceError> {
        let fresh = Tour::new(inst, self.order.clone())?;
        if fresh.cost != self.cost {
            return Err(InstanceError::InvalidTour(format!(
                "stored cost {} but instance gives {}",
                self.cost, fresh.cost
            )));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<Edge> {
        let k = self.order.len();
        (0..k).map(|i| Edge::new(self.order[i], self.order[(i + 1) % k])).collect()
    }

    /// Edge set as a sorted list; two orders describing the same cycle agree.
    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges().into_iter().collect()
    }
}

/// Exact optimum tour by bitmask dynamic programming over paths from node 0.
/// Among optimal tours the lexicographically smallest order starting at 0 is
/// returned.
pub fn held_karp_opt(inst: &Instance) -> Result<Tour, InstanceError> {
    held_karp_with(inst.n(), |a, b| inst.c(a, b)).map(|order| Tour::new(inst, order).unwrap())
}

/// Held–Karp over an arbitrary symmetric integer cost function.
pub fn held_karp_with(n: usize, cost: impl Fn(NodeId, NodeId) -> i64) -> Result<Vec<NodeId>, InstanceError> {
    if !(3..=HELD_KARP_MAX).contains(&n) {
        return Err(InstanceError::UnsupportedSize(n, "3 <= n <= 18"));
    }
    let m = n - 1; // nodes 1..n mapped to bits 0..m
    let size = 1usize << m;
    const INF: i64 = i64::MAX / 4;
    let mut c = vec![0i64; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                c[a * n + b] = cost(a, b);
            }
        }
    }
    // f[mask * m + v]: cheapest path 0 -> ... -> (v+1) visiting exactly mask.
    let mut f = vec![INF; size * m];
    for v in 0..m {
        f[(1 << v) * m + v] = c[v + 1];
    }
    for mask in 1..size {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let cur = f[mask * m + v];
            if cur >= INF {
                continue;
            }
            let mut free = !mask & (size - 1);
            while free != 0 {
                let w = free.trailing_zeros() as usize;
                free &= free - 1;
                let nm = mask | 1 << w;
                let cand = cur + c[(v + 1) * n + w + 1];
                if cand < f[nm * m + w] {
                    f[nm * m + w] = cand;
                }
            }
        }
    }
    let full = size - 1;
    let best = (0..m).map(|v| f[full * m + v] + c[v + 1]).min().unwrap();
    // Greedy lexicographic reconstruction: the cheapest completion from v
    // through the unvisited set U back to 0 is the reversed path f[U ∪ {v}][v].
    let mut order = vec![0];
    let mut spent = 0i64;
    let mut cur = 0usize;
    let mut unvisited = full;
    while unvisited != 0 {
        let mut pick = None;
        let mut rest = unvisited;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let tail = f[unvisited * m + w];
            if spent + c[cur * n + w + 1] + tail == best {
                pick = Some(w);
                break;
            }
        }
        let w = pick.expect("held-karp reconstruction");
        spent += c[cur * n + w + 1];
        cur = w + 1;
        unvisited &= !(1 << w);
        order.push(cur);
    }
    Ok(order)
}

/// Adds a hub node joined by cost-1 edges to every node, making a
/// disconnected cost-1 graph connected.
pub fn connectify(inst: &Instance) -> Result<Instance, InstanceError> {
    if inst.is_connected() {
        return Err(InstanceError::AlreadyConnected);
    }
    inst.with_extra_node(0..inst.n())
}

/// Adds a node joined by cost-1 edges to every node that is not a cut vertex
/// of a connected, non-biconnected cost-1 graph.
pub fn biconnectify(inst: &Instance) -> Result<Instance, InstanceError> {
    if !inst.is_connected() {
        return Err(InstanceError::Disconnected);
    }
    if inst.is_biconnected() {
        return Err(InstanceError::AlreadyBiconnected);
    }
    let cuts = inst.cut_vertices();
    inst.with_extra_node((0..inst.n()).filter(|v| !cuts.contains(v)))
}

/// Adds a node `i` joined by cost-1 edges to every node incident on a cost-2
/// edge with positive LP value. Returns the new instance and the LP solution
/// with one unit of cost-2 flow rerouted through `i`.
pub fn add_absorber_node(inst: &Instance, x: &FracSolution) -> Result<(Instance, FracSolution), InstanceError> {
    let heavy: Vec<(Edge, Rational)> = x
        .support()
        .filter(|(e, _)| !inst.is_one(e.u(), e.v()))
        .map(|(e, v)| (*e, v.clone()))
        .collect();
    if heavy.is_empty() {
        return Err(InstanceError::NoCostTwoFlow);
    }
    let total: Rational = heavy.iter().map(|(_, v)| v).sum();
    if total < Rational::one() {
        return Err(InstanceError::InsufficientCostTwoFlow(total));
    }
    let targets: BTreeSet<NodeId> = heavy.iter().flat_map(|(e, _)| [e.u(), e.v()]).collect();
    let grown = inst.with_extra_node(targets.iter().copied())?;
    let star = inst.n();
    let mut y = x.resized(inst.n() + 1);
    let mut remaining = Rational::one();
    for (e, v) in &heavy {
        if remaining.is_zero() {
            break;
        }
        let t = if *v < remaining { v.clone() } else { remaining.clone() };
        remaining -= &t;
        y.add(*e, &-&t);
        y.add(Edge::new(e.u(), star), &t);
        y.add(Edge::new(e.v(), star), &t);
    }
    y.recompute_objective(&grown);
    Ok((grown, y))
}

/// On-disk instance format: `{"n": .., "one_edges": [[u, v], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub one_edges: Vec<[NodeId; 2]>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile { n: inst.n(), one_edges: inst.one_edges().iter().map(|e| [e.u(), e.v()]).collect() }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = InstanceError;

    fn try_from(f: InstanceFile) -> Result<Self, Self::Error> {
        let mut prev: Option<[NodeId; 2]> = None;
        for e in &f.one_edges {
            if e[0] >= e[1] {
                return Err(InstanceError::Format(format!("edge {:?} must have u < v", e)));
            }
            if prev.is_some_and(|p| p >= *e) {
                return Err(InstanceError::Format("edges must be sorted and distinct".into()));
            }
            prev = Some(*e);
        }
        Instance::new(f.n, f.one_edges.iter().map(|e| (e[0], e[1])))
    }
}

impl Instance {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).unwrap()
    }

    pub fn from_json(s: &str) -> Result<Instance, InstanceError> {
        let f: InstanceFile = serde_json::from_str(s).map_err(|e| InstanceError::Format(e.to_string()))?;
        Instance::try_from(f)
    }
}

/// The 9-node example whose subtour LP value is 9 and optimal tour is 10:
/// two cost-1 triangles {0,1,2} and {6,7,8} joined by the cost-1 paths
/// 0-3-6, 1-4-7 and 2-5-8.
pub fn w9() -> Instance {
    Instance::new(
        9,
        [(0, 1), (0, 2), (1, 2), (6, 7), (6, 8), (7, 8), (0, 3), (3, 6), (1, 4), (4, 7), (2, 5), (5, 8)],
    )
    .unwrap()
}
