//! Tours from fractional and integral 2-matchings.
//!
//! A [`PartialTour`] is a set of node-disjoint paths. [`augment`] adds a third
//! of a path or odd cycle of edges to it; [`build_tour_76`] grows the unit
//! 1-paths of a connected F2M vertex with cost-1 cycle edges and closes the
//! result with cost-2 edges. The rest of the module handles integral cycle
//! covers: stitching into a tour, normalizing to at most one non-pure cycle,
//! and the pure-cycle bipartite matching behind the `n + r` dual.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::f2m::{cycle_edge_list, decompose, is_canonical, is_two_connected, F2MError, F2MStats, FractionalComponent};
use crate::instance::{Edge, Instance, InstanceError, NodeId, Tour};
use crate::rational::Rational;
use crate::subtour::FracSolution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TourBuildError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("accounting check failed: {0}")]
    Accounting(String),
    #[error(transparent)]
    F2M(#[from] F2MError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

type Result<T> = std::result::Result<T, TourBuildError>;

fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(TourBuildError::Precondition(msg.into()))
}

/// Optional log of builder decisions.
#[derive(Debug, Clone, Default)]
pub struct Trace(Option<Vec<String>>);

impl Trace {
    pub fn enabled() -> Self {
        Trace(Some(Vec::new()))
    }

    pub fn log(&mut self, f: impl FnOnce() -> String) {
        if let Some(v) = &mut self.0 {
            v.push(f());
        }
    }

    pub fn lines(&self) -> &[String] {
        self.0.as_deref().unwrap_or(&[])
    }
}

/// Node-disjoint paths; isolated nodes are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialTour {
    adj: Vec<Vec<NodeId>>,
    /// For a node of degree ≤ 1, the other end of its path (itself if
    /// isolated). Stale for degree-2 nodes.
    other_end: Vec<NodeId>,
}

impl PartialTour {
    pub fn new(n: usize) -> Self {
        PartialTour { adj: vec![Vec::new(); n], other_end: (0..n).collect() }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut t = PartialTour::new(n);
        for e in edges {
            if e.v() >= n {
                return precondition(format!("edge {e} outside n = {n}"));
            }
            if !t.add(e) {
                return precondition(format!("edge {e} breaks the partial tour"));
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.adj[e.u()].contains(&e.v())
    }

    /// The other end of `v`'s path, for `v` of degree at most 1.
    pub fn other_end(&self, v: NodeId) -> NodeId {
        debug_assert!(self.degree(v) <= 1);
        self.other_end[v]
    }

    pub fn can_add(&self, e: Edge) -> bool {
        let (a, b) = e.ends();
        self.degree(a) < 2 && self.degree(b) < 2 && self.other_end[a] != b
    }

    /// Adds `e` if the result is still a partial tour.
    pub fn add(&mut self, e: Edge) -> bool {
        if !self.can_add(e) {
            return false;
        }
        let (a, b) = e.ends();
        let (ea, eb) = (self.other_end[a], self.other_end[b]);
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.other_end[ea] = eb;
        self.other_end[eb] = ea;
        true
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> =
            (0..self.n()).flat_map(|a| self.adj[a].iter().filter(move |&&b| a < b).map(move |&b| Edge::new(a, b))).collect();
        out.sort();
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn cost(&self, inst: &Instance) -> i64 {
        self.edges().iter().map(|e| inst.c(e.u(), e.v())).sum()
    }

    pub fn degree_one_count(&self) -> usize {
        self.adj.iter().filter(|a| a.len() == 1).count()
    }

    /// Paths through the given nodes, each from its smaller end; isolated
    /// nodes are single-node paths.
    pub fn paths_within(&self, nodes: &[NodeId]) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.n()];
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        let mut out = Vec::new();
        for &s in &sorted {
            if seen[s] || self.degree(s) == 2 {
                continue;
            }
            let mut path = vec![s];
            seen[s] = true;
            let mut prev = usize::MAX;
            let mut cur = s;
            while let Some(&next) = self.adj[cur].iter().find(|&&w| w != prev) {
                path.push(next);
                seen[next] = true;
                prev = cur;
                cur = next;
            }
            out.push(path);
        }
        out
    }

    pub fn paths(&self) -> Vec<Vec<NodeId>> {
        self.paths_within(&(0..self.n()).collect::<Vec<_>>())
    }
}

/// A path or odd cycle of candidate edges, given by its node sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Walk {
    Path(Vec<NodeId>),
    Cycle(Vec<NodeId>),
}

impl Walk {
    pub fn nodes(&self) -> &[NodeId] {
        match self {
            Walk::Path(v) | Walk::Cycle(v) => v,
        }
    }

    pub fn edges(&self) -> Vec<Edge> {
        match self {
            Walk::Path(v) => v.windows(2).map(|w| Edge::new(w[0], w[1])).collect(),
            Walk::Cycle(v) => cycle_edge_list(v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Guaranteed number of edges: `⌈|A|/3⌉` for cycles, `⌈(|A|-1)/3⌉` for paths.
    pub fn guaranteed(&self) -> usize {
        match self {
            // ⌈(L-1)/3⌉ with L = v.len() - 1 edges.
            Walk::Path(v) => v.len() / 3,
            Walk::Cycle(v) => v.len().div_ceil(3),
        }
    }
}

fn check_walk(t: &PartialTour, a: &Walk) -> Result<()> {
    let nodes = a.nodes();
    let distinct: BTreeSet<_> = nodes.iter().collect();
    if distinct.len() != nodes.len() {
        return precondition("walk repeats a node");
    }
    match a {
        Walk::Path(v) if v.len() < 2 => return precondition("path needs at least one edge"),
        Walk::Cycle(v) if v.len() < 3 || v.len() % 2 == 0 => return precondition("cycle must be odd with at least 3 nodes"),
        _ => {}
    }
    if let Some(&v) = nodes.iter().find(|&&v| v >= t.n() || t.degree(v) != 1) {
        return precondition(format!("node {v} does not have degree 1 in T"));
    }
    if let Some(e) = a.edges().into_iter().find(|&e| t.contains(e)) {
        return precondition(format!("edge {e} already in T"));
    }
    Ok(())
}

fn greedy(t: &mut PartialTour, seq: &[Edge], trace: &mut Trace) -> Vec<Edge> {
    let mut added = Vec::new();
    for &e in seq {
        if t.add(e) {
            trace.log(|| format!("  add {e}"));
            added.push(e);
        } else {
            trace.log(|| format!("  skip {e}"));
        }
    }
    added
}

/// Adds a subset `A'` of `a`'s edges to `t`, keeping it a partial tour, with
/// `|A'| ≥ |A|/3` for a cycle and `|A'| ≥ (|A|-1)/3` for a path.
pub fn augment(t: &mut PartialTour, a: &Walk) -> Result<Vec<Edge>> {
    augment_traced(t, a, &mut Trace::default())
}

pub fn augment_traced(t: &mut PartialTour, a: &Walk, trace: &mut Trace) -> Result<Vec<Edge>> {
    check_walk(t, a)?;
    let edges = a.edges();
    let added = match a {
        Walk::Path(_) => {
            trace.log(|| format!("path {:?}", a.nodes()));
            greedy(t, &edges, trace)
        }
        Walk::Cycle(u) => {
            let m = u.len();
            let inside: BTreeSet<NodeId> = u.iter().copied().collect();
            let j = (0..m)
                .find(|&j| !inside.contains(&t.other_end(u[j])))
                .expect("an odd cycle has a node whose T-path leaves it");
            // Edge i joins u[i] and u[i+1]; try starting at edge j-1, then j.
            let order = |s: usize| (0..m).map(|t| edges[(s + t) % m]).collect::<Vec<_>>();
            let first = order((j + m - 1) % m);
            let admits = |seq: &[Edge]| {
                let mut c = t.clone();
                c.add(seq[0]) && (m < 5 || c.add(seq[2]))
            };
            let seq = if admits(&first) { first } else { order(j) };
            trace.log(|| format!("cycle {:?}, pivot node {}, start {}", u, u[j], seq[0]));
            greedy(t, &seq, trace)
        }
    };
    if added.len() < a.guaranteed() {
        return Err(TourBuildError::Accounting(format!(
            "augment added {} of {} edges, below {}",
            added.len(),
            edges.len(),
            a.guaranteed()
        )));
    }
    Ok(added)
}

/// Largest `A' ⊆ A` with `T ∪ A'` a partial tour, by enumeration.
pub fn max_augmentation_exhaustive(t: &PartialTour, a: &Walk) -> usize {
    let edges = a.edges();
    assert!(edges.len() <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << edges.len()) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let mut c = t.clone();
        if (0..edges.len()).filter(|i| mask >> i & 1 == 1).all(|i| c.add(edges[i])) {
            best = k;
        }
    }
    best
}

/// Concatenates paths into a cycle in the given order. Each path after the
/// first is oriented to make its joining edge as cheap as possible.
fn join_paths(inst: &Instance, paths: &[Vec<NodeId>]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = paths[0].clone();
    for p in &paths[1..] {
        let last = *order.last().unwrap();
        if inst.c(last, p[p.len() - 1]) < inst.c(last, p[0]) {
            order.extend(p.iter().rev());
        } else {
            order.extend(p);
        }
    }
    order
}

/// Closes a spanning partial tour with `d/2` extra edges; the tour costs at
/// most `c(T) + d`, exactly that when every joining pair costs 2.
pub fn complete_partial_tour(inst: &Instance, t: &PartialTour) -> Result<Tour> {
    if t.n() != inst.n() {
        return precondition("partial tour and instance differ in size");
    }
    if let Some(v) = (0..t.n()).find(|&v| t.degree(v) == 0) {
        return precondition(format!("node {v} is isolated"));
    }
    let paths = t.paths();
    if paths.is_empty() {
        return precondition("T already contains a cycle");
    }
    let tour = Tour::new(inst, join_paths(inst, &paths))?;
    debug_assert!(tour.cost <= t.cost(inst) + t.degree_one_count() as i64);
    Ok(tour)
}

/// Counters from one run of the fractional tour builder.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    #[serde(flatten)]
    pub f2m: F2MStats,
    /// Cost-1 cycle edges.
    pub r_total: usize,
    /// Cost-1 cycle edges added to T.
    pub r_added: usize,
    pub p1_paths: usize,
    pub p1_non_eared: usize,
    /// P1 paths that received an end edge during preprocessing.
    pub p1_preprocessed: usize,
    /// Degree-1 nodes before closing.
    pub degree_one: usize,
    /// Whether at least half of the non-eared P1 paths were preprocessed.
    pub half_claim_holds: bool,
    pub tour_cost: i64,
}

/// Cost-1 runs of the half-cycles: whole cycles when no cycle edge costs 2,
/// otherwise the maximal paths between cost-2 edges. Sorted by smallest node.
fn cost_one_walks(inst: &Instance, comp: &FractionalComponent) -> Vec<Walk> {
    let mut out = Vec::new();
    for c in &comp.half_cycles {
        let m = c.len();
        let heavy: Vec<usize> = (0..m).filter(|&i| inst.c(c[i], c[(i + 1) % m]) == 2).collect();
        if heavy.is_empty() {
            out.push(Walk::Cycle(c.clone()));
            continue;
        }
        let start = (heavy[0] + 1) % m;
        let mut run = vec![c[start]];
        for t in 0..m {
            let a = c[(start + t) % m];
            let b = c[(start + t + 1) % m];
            if inst.c(a, b) == 2 {
                if run.len() >= 2 {
                    out.push(Walk::Path(std::mem::take(&mut run)));
                }
                run = vec![b];
            } else {
                run.push(b);
            }
        }
    }
    out.sort_by_key(|w| *w.nodes().iter().min().unwrap());
    out
}

/// Runs the builder on one fractional component. Returns the partial tour
/// over the component's nodes (other nodes untouched) and its counters.
fn grow_component(inst: &Instance, comp: &FractionalComponent, trace: &mut Trace) -> Result<(PartialTour, BuildStats)> {
    let n = inst.n();
    let mut t = PartialTour::from_edges(n, comp.path_edges())?;
    let mut partner = vec![usize::MAX; n];
    for p in &comp.one_paths {
        partner[p[0]] = p[p.len() - 1];
        partner[p[p.len() - 1]] = p[0];
    }
    let mut stats = BuildStats { f2m: F2MStats::of_component(inst, comp), ..Default::default() };
    let walks = cost_one_walks(inst, comp);
    stats.r_total = walks.iter().map(Walk::len).sum();

    let mut remaining = Vec::new();
    for w in walks {
        let Walk::Path(v) = &w else {
            remaining.push(w);
            continue;
        };
        let l = v.len() - 1;
        if l % 3 != 1 {
            remaining.push(w);
            continue;
        }
        stats.p1_paths += 1;
        let eared = partner[v[0]] == v[1] && partner[v[l]] == v[l - 1];
        if eared {
            stats.f2m.z_eared += 1;
            trace.log(|| format!("P1 path {v:?} is eared"));
            remaining.push(w);
            continue;
        }
        stats.p1_non_eared += 1;
        if t.add(Edge::new(v[0], v[1])) {
            trace.log(|| format!("P1 path {v:?}: added first edge"));
            stats.p1_preprocessed += 1;
            stats.r_added += 1;
            if l >= 3 {
                remaining.push(Walk::Path(v[2..].to_vec()));
            }
        } else if t.add(Edge::new(v[l - 1], v[l])) {
            trace.log(|| format!("P1 path {v:?}: added last edge"));
            stats.p1_preprocessed += 1;
            stats.r_added += 1;
            if l >= 3 {
                remaining.push(Walk::Path(v[..l - 1].to_vec()));
            }
        } else {
            trace.log(|| format!("P1 path {v:?}: neither end fits"));
            remaining.push(w);
        }
    }
    stats.half_claim_holds = 2 * stats.p1_preprocessed >= stats.p1_non_eared;

    for w in &remaining {
        stats.r_added += augment_traced(&mut t, w, trace)?.len();
    }

    let nodes: Vec<NodeId> = comp.nodes().into_iter().collect();
    stats.degree_one = nodes.iter().filter(|&&v| t.degree(v) == 1).count();
    let (k, p, z) = (stats.f2m.k, stats.f2m.p, stats.f2m.z_eared);
    if z > p {
        return Err(TourBuildError::Accounting(format!("z = {z} exceeds p = {p}")));
    }
    if 3 * stats.r_added + z < stats.r_total {
        return Err(TourBuildError::Accounting(format!(
            "added {} of {} cost-1 cycle edges with z = {z}",
            stats.r_added, stats.r_total
        )));
    }
    if 3 * stats.degree_one > k + 2 * p + 2 * z {
        return Err(TourBuildError::Accounting(format!(
            "{} degree-1 nodes exceed (k + 2p + 2z)/3 with k = {k}, p = {p}, z = {z}",
            stats.degree_one
        )));
    }
    Ok((t, stats))
}

fn component_cycle(inst: &Instance, comp: &FractionalComponent, trace: &mut Trace) -> Result<(Vec<NodeId>, BuildStats)> {
    let (t, mut stats) = grow_component(inst, comp, trace)?;
    let nodes: Vec<NodeId> = comp.nodes().into_iter().collect();
    let order = join_paths(inst, &t.paths_within(&nodes));
    let m = order.len();
    stats.tour_cost = (0..m).map(|i| inst.c(order[i], order[(i + 1) % m])).sum();
    let bound = Rational::new(7, 6) * stats.f2m.fractional_cost();
    if Rational::from_int(stats.tour_cost) > bound {
        return Err(TourBuildError::Accounting(format!("cycle cost {} exceeds 7/6 bound {bound}", stats.tour_cost)));
    }
    Ok((order, stats))
}

fn connected_component(x: &FracSolution) -> Result<FractionalComponent> {
    let d = decompose(x)?;
    if !d.integer_cycles.is_empty() {
        return precondition("x has an integer cycle; use the stitching path");
    }
    if d.fractional_components.len() != 1 {
        return precondition(format!("x has {} fractional components, expected 1", d.fractional_components.len()));
    }
    Ok(d.fractional_components.into_iter().next().unwrap())
}

/// A tour of cost at most `7/6 · cost(x)` for a connected F2M vertex `x`.
pub fn build_tour_76(inst: &Instance, x: &FracSolution) -> Result<Tour> {
    build_tour_76_with(inst, x, &mut Trace::default()).map(|(t, _)| t)
}

pub fn build_tour_76_with(inst: &Instance, x: &FracSolution, trace: &mut Trace) -> Result<(Tour, BuildStats)> {
    if x.n() != inst.n() {
        return precondition("solution and instance differ in size");
    }
    let comp = connected_component(x)?;
    let (order, stats) = component_cycle(inst, &comp, trace)?;
    let tour = Tour::new(inst, order)?;
    debug_assert_eq!(tour.cost, stats.tour_cost);
    Ok((tour, stats))
}

/// Any F2M vertex: each fractional component becomes one cycle through the
/// 7/6 construction, integer cycles are kept, and the cycles are stitched.
pub fn build_tour_f2m(inst: &Instance, x: &FracSolution) -> Result<(Tour, Vec<BuildStats>)> {
    if x.n() != inst.n() {
        return precondition("solution and instance differ in size");
    }
    let d = decompose(x)?;
    let mut cycles = d.integer_cycles.clone();
    let mut all_stats = Vec::new();
    let mut trace = Trace::default();
    for comp in &d.fractional_components {
        let (order, stats) = component_cycle(inst, comp, &mut trace)?;
        cycles.push(order);
        all_stats.push(stats);
    }
    let cover = CycleCover::new(inst, cycles)?;
    Ok((stitch_cycles(inst, &cover)?, all_stats))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Build109Stats {
    #[serde(flatten)]
    pub build: BuildStats,
    /// `c(P) ≥ k - 2p`.
    pub path_cost_bound_holds: bool,
}

/// Same construction for a connected, canonical, 2-connected vertex, with
/// the sharper `10/9` bound and `z = 0` checked.
pub fn build_tour_109_check(inst: &Instance, x: &FracSolution) -> Result<Tour> {
    build_tour_109_with(inst, x, &mut Trace::default()).map(|(t, _)| t)
}

pub fn build_tour_109_with(inst: &Instance, x: &FracSolution, trace: &mut Trace) -> Result<(Tour, Build109Stats)> {
    connected_component(x)?;
    if !is_canonical(inst, x)? {
        return precondition("x is not canonical");
    }
    if !is_two_connected(x) {
        return precondition("x is not 2-connected");
    }
    let (tour, build) = build_tour_76_with(inst, x, trace)?;
    if build.f2m.z_eared != 0 {
        return Err(TourBuildError::Accounting(format!("{} eared paths in a 2-connected vertex", build.f2m.z_eared)));
    }
    let bound = Rational::new(10, 9) * x.cost(inst);
    if Rational::from_int(tour.cost) > bound {
        return Err(TourBuildError::Accounting(format!("tour cost {} exceeds 10/9 bound {bound}", tour.cost)));
    }
    let s = &build.f2m;
    let path_cost_bound_holds = s.c_p + 2 * s.p as i64 >= s.k as i64;
    Ok((tour, Build109Stats { build, path_cost_bound_holds }))
}

/// Node-disjoint cycles covering every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCover {
    pub cycles: Vec<Vec<NodeId>>,
    pub cost: i64,
    /// Per cycle: every edge costs 1.
    pub pure: Vec<bool>,
}

impl CycleCover {
    pub fn new(inst: &Instance, cycles: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut seen = vec![false; inst.n()];
        for c in &cycles {
            if c.len() < 3 {
                return precondition(format!("cycle {c:?} has fewer than 3 nodes"));
            }
            for &v in c {
                if v >= inst.n() || std::mem::replace(&mut seen[v], true) {
                    return precondition(format!("node {v} repeated or out of range"));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return precondition(format!("node {v} not covered"));
        }
        let pure = cycles.iter().map(|c| cycle_edge_list(c).all(|e| inst.c(e.u(), e.v()) == 1)).collect();
        let cost = cycles.iter().map(|c| inst.cycle_cost(c)).sum();
        Ok(CycleCover { cycles, cost, pure })
    }

    pub fn n_pure(&self) -> usize {
        self.pure.iter().filter(|&&p| p).count()
    }

    pub fn n_non_pure(&self) -> usize {
        self.pure.len() - self.n_pure()
    }
}

/// Drops the most expensive edge of each cycle and chains the paths in input
/// order.
pub fn stitch_cycles(inst: &Instance, cover: &CycleCover) -> Result<Tour> {
    if cover.cycles.len() == 1 {
        return Ok(Tour::new(inst, cover.cycles[0].clone())?);
    }
    let mut paths = Vec::new();
    let mut dropped = 0;
    for c in &cover.cycles {
        let m = c.len();
        let mut best = 0;
        for i in 1..m {
            if inst.c(c[i], c[(i + 1) % m]) > inst.c(c[best], c[(best + 1) % m]) {
                best = i;
            }
        }
        dropped += inst.c(c[best], c[(best + 1) % m]);
        paths.push((0..m).map(|t| c[(best + 1 + t) % m]).collect::<Vec<_>>());
    }
    let tour = Tour::new(inst, join_paths(inst, &paths))?;
    let k = cover.cycles.len() as i64;
    if tour.cost > cover.cost - dropped + 2 * k || 3 * tour.cost > 4 * cover.cost {
        return Err(TourBuildError::Accounting(format!("stitched tour {} too expensive for cover {}", tour.cost, cover.cost)));
    }
    Ok(tour)
}

/// Path obtained by deleting the edge `c[i]`-`c[i+1]`, from `c[i+1]` to `c[i]`.
fn open_at(c: &[NodeId], i: usize) -> Vec<NodeId> {
    let m = c.len();
    (0..m).map(|t| c[(i + 1 + t) % m]).collect()
}

fn heavy_positions(inst: &Instance, c: &[NodeId]) -> Vec<usize> {
    let m = c.len();
    (0..m).filter(|&i| inst.c(c[i], c[(i + 1) % m]) == 2).collect()
}

/// Splices two non-pure cycles at their first cost-2 edges.
fn merge_non_pure(inst: &Instance, a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let pa = open_at(a, heavy_positions(inst, a)[0]);
    let pb = open_at(b, heavy_positions(inst, b)[0]);
    let mut fwd = pa.clone();
    fwd.extend(&pb);
    let mut rev = pa;
    rev.extend(pb.iter().rev());
    if inst.cycle_cost(&rev) < inst.cycle_cost(&fwd) {
        rev
    } else {
        fwd
    }
}

/// A 2-incident node `i` of a non-pure cycle with a cost-1 edge to `j` in a
/// pure cycle. Returns (non-pure index, pure index, merged cycle).
fn find_pure_merge(inst: &Instance, cover: &CycleCover) -> Option<(usize, usize, Vec<NodeId>)> {
    let owner = cycle_owner(inst.n(), &cover.cycles);
    let ci = cover.pure.iter().position(|p| !p)?;
    let c = &cover.cycles[ci];
    let m = c.len();
    let mut heavy_at: Vec<(NodeId, usize)> = Vec::new();
    for i in heavy_positions(inst, c) {
        // Edge c[i]-c[i+1] costs 2: both ends are 2-incident.
        heavy_at.push((c[i], i));
        heavy_at.push((c[(i + 1) % m], i));
    }
    heavy_at.sort_unstable();
    for &(i, pos) in &heavy_at {
        for j in inst.neighbors(i) {
            let dj = owner[j];
            if !cover.pure[dj] {
                continue;
            }
            let d = &cover.cycles[dj];
            let md = d.len();
            let q = d.iter().position(|&v| v == j).unwrap();
            // Open c at its heavy edge so the path ends at i.
            let pc = if c[pos] == i { open_at(c, pos) } else { open_at(c, pos).into_iter().rev().collect() };
            debug_assert_eq!(*pc.last().unwrap(), i);
            let i_prime = pc[0];
            // Open d next to j so the path starts at j and ends at j'.
            let succ = d[(q + 1) % md];
            let pred = d[(q + md - 1) % md];
            let path_to = |jp: NodeId| -> Vec<NodeId> {
                if jp == succ {
                    // Delete j-succ: walk j, pred, ..., succ.
                    (0..md).map(|t| d[(q + md - t) % md]).collect()
                } else {
                    (0..md).map(|t| d[(q + t) % md]).collect()
                }
            };
            let jp = [succ, pred].into_iter().min_by_key(|&jp| (inst.c(i_prime, jp), jp)).unwrap();
            let mut merged = pc;
            merged.extend(path_to(jp));
            return Some((ci, dj, merged));
        }
    }
    None
}

fn cycle_owner(n: usize, cycles: &[Vec<NodeId>]) -> Vec<usize> {
    let mut owner = vec![usize::MAX; n];
    for (i, c) in cycles.iter().enumerate() {
        for &v in c {
            owner[v] = i;
        }
    }
    owner
}

fn replace_two(inst: &Instance, cover: &CycleCover, a: usize, b: usize, merged: Vec<NodeId>) -> CycleCover {
    let mut cycles: Vec<Vec<NodeId>> =
        cover.cycles.iter().enumerate().filter(|&(i, _)| i != a && i != b).map(|(_, c)| c.clone()).collect();
    cycles.insert(a.min(b).min(cycles.len()), merged);
    CycleCover::new(inst, cycles).expect("merging keeps a cover")
}

/// Merges cycles until at most one is non-pure and no cost-1 edge joins a
/// 2-incident node of the non-pure cycle to a pure cycle. Never raises cost.
pub fn normalize_2m(inst: &Instance, cover: &CycleCover) -> CycleCover {
    let mut cur = cover.clone();
    loop {
        let non_pure: Vec<usize> = (0..cur.cycles.len()).filter(|&i| !cur.pure[i]).collect();
        let next = if non_pure.len() >= 2 {
            let merged = merge_non_pure(inst, &cur.cycles[non_pure[0]], &cur.cycles[non_pure[1]]);
            replace_two(inst, &cur, non_pure[0], non_pure[1], merged)
        } else if let Some((a, b, merged)) = find_pure_merge(inst, &cur) {
            replace_two(inst, &cur, a, b, merged)
        } else {
            return cur;
        };
        debug_assert!(next.cost <= cur.cost);
        cur = next;
    }
}

pub fn is_normalized(inst: &Instance, cover: &CycleCover) -> bool {
    cover.n_non_pure() <= 1 && find_pure_merge(inst, cover).is_none()
}

/// Maximum matching between pure cycles and nodes, with a König cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Indices of the pure cycles taking part (a pure cycle through every
    /// node has no valid set dual and is left out).
    pub pure_cycles: Vec<usize>,
    /// (cycle index, node) pairs.
    pub matching: Vec<(usize, NodeId)>,
    pub r: usize,
    /// C_M: cycle indices in the vertex cover.
    pub cover_cycles: Vec<usize>,
    /// V_M: nodes in the vertex cover.
    pub cover_nodes: Vec<NodeId>,
}

pub fn pure_cycle_matching(inst: &Instance, cover: &CycleCover) -> MatchResult {
    let n = inst.n();
    let left: Vec<usize> = (0..cover.cycles.len()).filter(|&i| cover.pure[i] && cover.cycles[i].len() < n).collect();
    let adj: Vec<Vec<NodeId>> = left
        .iter()
        .map(|&ci| {
            let c = &cover.cycles[ci];
            let inside: BTreeSet<NodeId> = c.iter().copied().collect();
            (0..n).filter(|i| !inside.contains(i) && c.iter().any(|&v| inst.is_one(*i, v))).collect()
        })
        .collect();
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    let mut match_left: Vec<Option<NodeId>> = vec![None; left.len()];

    fn try_augment(
        l: usize,
        adj: &[Vec<NodeId>],
        seen: &mut [bool],
        match_left: &mut [Option<NodeId>],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[l] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_right[v].is_none_or(|l2| try_augment(l2, adj, seen, match_left, match_right)) {
                match_right[v] = Some(l);
                match_left[l] = Some(v);
                return true;
            }
        }
        false
    }
    for l in 0..left.len() {
        let mut seen = vec![false; n];
        try_augment(l, &adj, &mut seen, &mut match_left, &mut match_right);
    }

    // König: Z = reachable from unmatched left by alternating paths.
    let mut zl = vec![false; left.len()];
    let mut zr = vec![false; n];
    let mut stack: Vec<usize> = (0..left.len()).filter(|&l| match_left[l].is_none()).collect();
    for &l in &stack {
        zl[l] = true;
    }
    while let Some(l) = stack.pop() {
        for &v in &adj[l] {
            if zr[v] || match_left[l] == Some(v) {
                continue;
            }
            zr[v] = true;
            if let Some(l2) = match_right[v] {
                if !zl[l2] {
                    zl[l2] = true;
                    stack.push(l2);
                }
            }
        }
    }
    let matching: Vec<(usize, NodeId)> =
        (0..left.len()).filter_map(|l| match_left[l].map(|v| (left[l], v))).collect();
    let cover_cycles: Vec<usize> = (0..left.len()).filter(|&l| !zl[l]).map(|l| left[l]).collect();
    let cover_nodes: Vec<NodeId> = (0..n).filter(|&v| zr[v]).collect();
    debug_assert_eq!(cover_cycles.len() + cover_nodes.len(), matching.len());
    MatchResult { r: left.len() - matching.len(), pure_cycles: left, matching, cover_cycles, cover_nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2m::canonicalize;
    use crate::instance::{held_karp_opt, w9};
    use crate::subtour::{solve_f2m_lp, solve_min_2m};

    fn two_triangles() -> Instance {
        Instance::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn multi_component_driver() {
        // W9 next to a separate cost-1 square.
        let mut ones: Vec<(NodeId, NodeId)> = w9().one_edges().iter().map(|e| e.ends()).collect();
        ones.extend([(9, 10), (10, 11), (11, 12), (9, 12)]);
        let inst = Instance::new(13, ones).unwrap();
        let x = solve_f2m_lp(&inst).unwrap();
        let d = decompose(&x).unwrap();
        assert_eq!((d.integer_cycles.len(), d.fractional_components.len()), (1, 1));
        let (tour, stats) = build_tour_f2m(&inst, &x).unwrap();
        assert_eq!(stats.len(), 1);
        assert!(Rational::from_int(3 * tour.cost) <= Rational::from_int(4) * x.cost(&inst));
        assert!(build_tour_76(&inst, &x).is_err());
    }

    #[test]
    fn partial_tour_rejects_cycles_and_degree_three() {
        let mut t = PartialTour::new(4);
        assert!(t.add(Edge::new(0, 1)));
        assert!(t.add(Edge::new(1, 2)));
        assert!(!t.add(Edge::new(0, 2)));
        assert!(!t.add(Edge::new(1, 3)));
        assert!(t.add(Edge::new(2, 3)));
        assert_eq!(t.paths(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(t.other_end(0), 3);
    }

    #[test]
    fn augment_cycle_on_matching() {
        // T pairs i with i+5; A is the 5-cycle on 0..5.
        let mut t = PartialTour::from_edges(10, (0..5).map(|i| Edge::new(i, i + 5))).unwrap();
        let a = Walk::Cycle(vec![0, 1, 2, 3, 4]);
        let added = augment(&mut t, &a).unwrap();
        assert!(added.len() >= 2);
        assert!(t.degree_one_count() >= 2);
    }

    #[test]
    fn augment_path_of_four() {
        let mut t = PartialTour::from_edges(10, (0..5).map(|i| Edge::new(i, i + 5))).unwrap();
        let added = augment(&mut t, &Walk::Path(vec![0, 1, 2, 3, 4])).unwrap();
        assert!(!added.is_empty());
    }

    #[test]
    fn augment_rejects_bad_walks() {
        let mut t = PartialTour::from_edges(6, [Edge::new(0, 3), Edge::new(1, 4), Edge::new(2, 5)]).unwrap();
        assert!(augment(&mut t.clone(), &Walk::Cycle(vec![0, 1, 2, 3])).is_err());
        let mut t2 = PartialTour::new(3);
        assert!(augment(&mut t2, &Walk::Path(vec![0, 1])).is_err());
        assert!(augment(&mut t, &Walk::Cycle(vec![0, 1, 2])).is_ok());
    }

    #[test]
    fn completion_costs() {
        let inst = Instance::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let t = PartialTour::from_edges(6, inst.one_edges()).unwrap();
        assert_eq!(complete_partial_tour(&inst, &t).unwrap().cost, 7);

        // Two cost-1 paths with cost-2 joins: c(T) = 8 over 4 ends.
        let inst2 = Instance::new(10, [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9)]).unwrap();
        let t2 = PartialTour::from_edges(10, inst2.one_edges()).unwrap();
        assert_eq!(t2.cost(&inst2), 8);
        assert_eq!(complete_partial_tour(&inst2, &t2).unwrap().cost, 8 + 4);
        assert!(complete_partial_tour(&inst2, &PartialTour::new(10)).is_err());
    }

    #[test]
    fn w9_builders_are_tight() {
        let inst = w9();
        let x = solve_f2m_lp(&inst).unwrap();
        let (tour, stats) = build_tour_76_with(&inst, &x, &mut Trace::default()).unwrap();
        assert_eq!(tour.cost, 10);
        assert_eq!(stats.r_added, 2);
        assert_eq!(stats.degree_one, 2);
        assert_eq!(build_tour_109_check(&inst, &x).unwrap().cost, 10);
    }

    #[test]
    fn builder_rejects_integral_and_non_canonical() {
        let t = two_triangles();
        let x = FracSolution::from_edges(&t, t.one_edges().into_iter().map(|e| (e, Rational::one())));
        assert!(matches!(build_tour_76(&t, &x), Err(TourBuildError::Precondition(_))));
        let (inst, x) = crate::f2m::tests::triangles_with_short_path();
        assert!(build_tour_76(&inst, &x).unwrap().cost <= 10);
        assert!(matches!(build_tour_109_check(&inst, &x), Err(TourBuildError::Precondition(_))));
        let y = canonicalize(&inst, &x).unwrap();
        assert!(build_tour_76(&inst, &y).is_err());
    }

    #[test]
    fn stitching() {
        let t = two_triangles();
        let cover = CycleCover::new(&t, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let tour = stitch_cycles(&t, &cover).unwrap();
        assert!(tour.cost <= 8);
        assert!(tour.cost >= held_karp_opt(&t).unwrap().cost);
        let single = CycleCover::new(&t, vec![vec![0, 1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(stitch_cycles(&t, &single).unwrap().order, vec![0, 1, 2, 3, 4, 5]);

        let inst = w9();
        let m = solve_min_2m(&inst).unwrap();
        let cover = CycleCover::new(&inst, m.cycles).unwrap();
        assert_eq!(cover.cost, 10);
        assert!(stitch_cycles(&inst, &cover).unwrap().cost <= 12);
    }

    #[test]
    fn normalization_merges() {
        // Two non-pure cycles, each with a single cost-2 edge.
        let inst = Instance::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let cover = CycleCover::new(&inst, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(cover.n_non_pure(), 2);
        let norm = normalize_2m(&inst, &cover);
        assert_eq!(norm.cycles.len(), 1);
        assert!(norm.cost <= cover.cost);
        assert!(is_normalized(&inst, &norm));

        // W9: pure 6-cycle through both triangles' outer nodes, triangle on
        // the middle nodes with one cost-2 edge.
        let inst = w9();
        let cover = CycleCover::new(&inst, vec![vec![0, 1, 4, 7, 6, 3], vec![2, 5, 8]]).unwrap();
        assert_eq!(cover.cost, 10);
        assert_eq!(cover.pure, vec![true, false]);
        assert!(!is_normalized(&inst, &cover));
        let m = pure_cycle_matching(&inst, &cover);
        assert_eq!(m.r, 0);
        let norm = normalize_2m(&inst, &cover);
        assert_eq!(norm.cycles.len(), 1);
        assert_eq!(norm.cost, 10);
        assert_eq!(normalize_2m(&inst, &norm), norm);
        let m = pure_cycle_matching(&inst, &norm);
        assert_eq!((m.pure_cycles.len(), m.r), (0, 0));
    }

    #[test]
    fn matching_on_separate_triangles() {
        let t = two_triangles();
        let cover = CycleCover::new(&t, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let m = pure_cycle_matching(&t, &cover);
        assert_eq!(m.r, 2);
        assert!(m.matching.is_empty());
        let k6 = Instance::complete(6);
        let cover = CycleCover::new(&k6, vec![(0..6).collect()]).unwrap();
        assert_eq!(pure_cycle_matching(&k6, &cover).r, 0);
    }
}
