//! The fractional 2-matching LP, the subtour LP, the integer TSP and the
//! minimum-cost 2-matching.
//!
//! All four share one model: a `[0, 1]` variable per pair of `K_n` (indexed
//! by [`Edge::index`]) and a degree-2 equality per node. The subtour LP adds
//! cuts `x(δ(S)) ≥ 2` found by Stoer–Wagner; the integer programs are
//! depth-first branch-and-bound over these relaxations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::instance::{all_pairs, num_pairs, Edge, Instance, InstanceError, NodeId, Tour};
use crate::lp::{LinearProgram, LpError, Relation, Row, Sense, Simplex, SimplexOptions, Status, DEFAULT_PIVOT_BUDGET};
use crate::mincut::{cut_value, stoer_wagner};
use crate::rational::Rational;

pub const DEFAULT_NODE_BUDGET: usize = 100_000;
pub const PIVOT_BUDGET_ENV: &str = "TSP12_PIVOT_BUDGET";
pub const NODE_BUDGET_ENV: &str = "TSP12_NODE_BUDGET";

/// Solver work limits. Exceeding either is reported as an error.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub pivot_budget: usize,
    pub node_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { pivot_budget: DEFAULT_PIVOT_BUDGET, node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl Limits {
    /// Defaults overridden by `TSP12_PIVOT_BUDGET` / `TSP12_NODE_BUDGET`.
    pub fn from_env() -> Self {
        let read = |k: &str| std::env::var(k).ok().and_then(|v| v.parse::<usize>().ok());
        let d = Limits::default();
        Limits {
            pivot_budget: read(PIVOT_BUDGET_ENV).unwrap_or(d.pivot_budget),
            node_budget: read(NODE_BUDGET_ENV).unwrap_or(d.node_budget),
        }
    }

    pub fn simplex(&self) -> SimplexOptions {
        SimplexOptions { pivot_budget: self.pivot_budget, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("branch-and-bound node budget of {budget} exhausted (best bound {bound})")]
    NodeBudget { budget: usize, bound: Rational },
    #[error("LP unexpectedly {0:?}")]
    UnexpectedStatus(Status),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
}

/// An LP point over the pairs of `K_n`; absent pairs are zero.
#[derive(Clone, PartialEq, Eq)]
pub struct FracSolution {
    n: usize,
    x: BTreeMap<Edge, Rational>,
    objective: Rational,
}

impl fmt::Debug for FracSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FracSolution(n={}, obj={}, {{", self.n, self.objective)?;
        for (i, (e, v)) in self.x.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}: {v}")?;
        }
        write!(f, "}})")
    }
}

impl FracSolution {
    pub fn zero(n: usize) -> Self {
        FracSolution { n, x: BTreeMap::new(), objective: Rational::zero() }
    }

    /// Builds from a dense vector indexed by [`Edge::index`].
    pub fn from_dense(inst: &Instance, values: &[Rational]) -> Self {
        let n = inst.n();
        let mut s = FracSolution::zero(n);
        for (i, v) in values.iter().enumerate().take(num_pairs(n)) {
            if !v.is_zero() {
                s.x.insert(Edge::from_index(n, i), v.clone());
            }
        }
        s.recompute_objective(inst);
        s
    }

    pub fn from_edges(inst: &Instance, values: impl IntoIterator<Item = (Edge, Rational)>) -> Self {
        let mut s = FracSolution::zero(inst.n());
        for (e, v) in values {
            s.set(e, v);
        }
        s.recompute_objective(inst);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, e: Edge) -> Rational {
        self.x.get(&e).cloned().unwrap_or_default()
    }

    pub fn val(&self, a: NodeId, b: NodeId) -> Rational {
        self.value(Edge::new(a, b))
    }

    pub fn set(&mut self, e: Edge, v: Rational) {
        assert!(e.v() < self.n, "edge {e} outside n = {}", self.n);
        if v.is_zero() {
            self.x.remove(&e);
        } else {
            self.x.insert(e, v);
        }
    }

    pub fn add(&mut self, e: Edge, delta: &Rational) {
        let v = self.value(e) + delta;
        self.set(e, v);
    }

    /// Nonzero entries in edge order.
    pub fn support(&self) -> impl Iterator<Item = (&Edge, &Rational)> {
        self.x.iter()
    }

    pub fn support_edges(&self) -> Vec<Edge> {
        self.x.keys().copied().collect()
    }

    pub fn degree(&self, v: NodeId) -> Rational {
        self.x.iter().filter(|(e, _)| e.touches(v)).map(|(_, x)| x).sum()
    }

    pub fn objective(&self) -> &Rational {
        &self.objective
    }

    pub fn recompute_objective(&mut self, inst: &Instance) {
        self.objective = self.cost(inst);
    }

    /// `Σ c(e) x(e)` under `inst`.
    pub fn cost(&self, inst: &Instance) -> Rational {
        self.x.iter().map(|(e, v)| v * inst.c(e.u(), e.v())).sum()
    }

    /// Copy over a larger (or equal) node set.
    pub fn resized(&self, n: usize) -> Self {
        assert!(n >= self.n);
        FracSolution { n, x: self.x.clone(), objective: self.objective.clone() }
    }

    pub fn dense(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); num_pairs(self.n)];
        for (e, x) in &self.x {
            v[e.index(self.n)] = x.clone();
        }
        v
    }

    pub fn weight_matrix(&self) -> Vec<Vec<Rational>> {
        let mut w = vec![vec![Rational::zero(); self.n]; self.n];
        for (e, v) in &self.x {
            w[e.u()][e.v()] = v.clone();
            w[e.v()][e.u()] = v.clone();
        }
        w
    }

    pub fn crossing(&self, side: &[NodeId]) -> Rational {
        let mut inside = vec![false; self.n];
        for &v in side {
            inside[v] = true;
        }
        self.x.iter().filter(|(e, _)| inside[e.u()] != inside[e.v()]).map(|(_, v)| v).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.x.values().all(|v| v.is_integer())
    }

    pub fn is_half_integral(&self) -> bool {
        let half = Rational::new(1, 2);
        self.x.values().all(|v| v.is_one() || *v == half)
    }

    /// Degree constraints and `0 ≤ x ≤ 1`.
    pub fn check_degree_and_bounds(&self) -> Result<(), String> {
        for (e, v) in &self.x {
            if v.is_negative() || *v > Rational::one() {
                return Err(format!("x({e}) = {v} outside [0, 1]"));
            }
        }
        let two = Rational::from_int(2);
        for i in 0..self.n {
            let d = self.degree(i);
            if d != two {
                return Err(format!("degree of node {i} is {d}, not 2"));
            }
        }
        Ok(())
    }
}

/// Generated subtour constraints, each a node set `S` with `3 ≤ |S| ≤ n-3`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutFamily {
    pub sets: Vec<Vec<NodeId>>,
}

/// The solution file format: `{"objective", "x": {"u-v": "p/q"}, "cuts"}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFile {
    pub solution: FracSolution,
    pub cuts: CutFamily,
}

impl Serialize for SolutionFile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct XMap<'a>(&'a FracSolution);
        impl Serialize for XMap<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut m = serializer.serialize_map(Some(self.0.x.len()))?;
                for (e, v) in &self.0.x {
                    m.serialize_entry(&e.key(), v)?;
                }
                m.end()
            }
        }
        let mut m = serializer.serialize_map(Some(3))?;
        m.serialize_entry("objective", &self.solution.objective)?;
        m.serialize_entry("x", &XMap(&self.solution))?;
        m.serialize_entry("cuts", &self.cuts.sets)?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for SolutionFile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            objective: Rational,
            x: BTreeMap<String, Rational>,
            #[serde(default)]
            cuts: Vec<Vec<NodeId>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut x = BTreeMap::new();
        let mut n = 0;
        for (k, v) in raw.x {
            let e = Edge::parse_key(&k).ok_or_else(|| de::Error::custom(format!("bad edge key {k:?}")))?;
            n = n.max(e.v() + 1);
            if !v.is_zero() {
                x.insert(e, v);
            }
        }
        Ok(SolutionFile {
            solution: FracSolution { n, x, objective: raw.objective },
            cuts: CutFamily { sets: raw.cuts },
        })
    }
}

impl FracSolution {
    pub fn to_json(&self, cuts: &CutFamily) -> String {
        serde_json::to_string(&SolutionFile { solution: self.clone(), cuts: cuts.clone() }).unwrap()
    }

    /// Parses a solution file. `n` is inferred from the largest node named.
    pub fn from_json(s: &str) -> Result<(FracSolution, CutFamily), serde_json::Error> {
        let f: SolutionFile = serde_json::from_str(s)?;
        Ok((f.solution, f.cuts))
    }
}

fn int(v: i64) -> Rational {
    Rational::from_int(v)
}

/// Degree and bound constraints over `K_n` with costs from `inst`.
pub fn f2m_program(inst: &Instance) -> LinearProgram {
    let n = inst.n();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for e in all_pairs(n) {
        lp.add_var(int(inst.c(e.u(), e.v())), Rational::zero(), Some(Rational::one()));
    }
    for i in 0..n {
        let coeffs = (0..n).filter(|&j| j != i).map(|j| (Edge::new(i, j).index(n), Rational::one())).collect();
        lp.add_row(Row::new(coeffs, Relation::Eq, int(2)));
    }
    lp
}

/// The row `x(δ(S)) ≥ 2`.
pub fn cut_row(n: usize, side: &[NodeId]) -> Row {
    let mut inside = vec![false; n];
    for &v in side {
        inside[v] = true;
    }
    let coeffs = all_pairs(n)
        .filter(|e| inside[e.u()] != inside[e.v()])
        .map(|e| (e.index(n), Rational::one()))
        .collect();
    Row::new(coeffs, Relation::Ge, int(2))
}

fn normalize_side(n: usize, side: &[NodeId]) -> Vec<NodeId> {
    if side.contains(&0) {
        let set: BTreeSet<NodeId> = side.iter().copied().collect();
        (0..n).filter(|v| !set.contains(v)).collect()
    } else {
        let mut s = side.to_vec();
        s.sort_unstable();
        s
    }
}

/// Global minimum cut of the support of `x`, or `None` when it is at least 2.
pub fn min_cut_separation(x: &FracSolution) -> Option<(Vec<NodeId>, Rational)> {
    let r = stoer_wagner(&x.weight_matrix())?;
    (r.best.value < int(2)).then(|| (normalize_side(x.n(), &r.best.side), r.best.value))
}

/// Every Stoer–Wagner phase cut of value below 2, deduplicated.
pub fn violated_phase_cuts(x: &FracSolution) -> Vec<Vec<NodeId>> {
    let Some(r) = stoer_wagner(&x.weight_matrix()) else {
        return Vec::new();
    };
    let two = int(2);
    let n = x.n();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in r.phases {
        if p.value < two {
            let s = normalize_side(n, &p.side);
            // Sets of size 1 or 2 are implied by degrees and bounds.
            debug_assert!(s.len() >= 3 && s.len() + 3 <= n, "implied cut {s:?} reported violated");
            if s.len() >= 3 && s.len() + 3 <= n && seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out
}

/// Minimum of `x(δ(S))` over every proper nonempty `S`, by enumeration of
/// all subsets containing node `n-1`'s complement side. Meant for n ≤ 16.
pub fn exhaustive_min_cut(x: &FracSolution) -> (Vec<NodeId>, Rational) {
    let n = x.n();
    let w = x.weight_matrix();
    let mut best: Option<(Vec<NodeId>, Rational)> = None;
    for m in 1u32..(1u32 << (n - 1)) {
        let side: Vec<NodeId> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
        let v = cut_value(&w, &side);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((side, v));
        }
    }
    best.expect("n >= 2")
}

/// Degree + bounds feasibility and every subtour constraint, by enumeration.
pub fn is_subtour_feasible_exhaustive(x: &FracSolution) -> bool {
    x.check_degree_and_bounds().is_ok() && exhaustive_min_cut(x).1 >= int(2)
}

/// Solver state after the cutting-plane loop; reusable as the root of
/// branch-and-bound.
#[derive(Debug, Clone)]
pub struct SubtourState {
    pub simplex: Simplex,
    pub cuts: CutFamily,
}

fn expect_optimal(st: Status) -> Result<(), SolveError> {
    match st {
        Status::Optimal => Ok(()),
        other => Err(SolveError::UnexpectedStatus(other)),
    }
}

/// Adds violated subtour cuts until none remain. Returns the final status.
fn cut_loop(inst: &Instance, simplex: &mut Simplex, cuts: &mut CutFamily) -> Result<Status, SolveError> {
    let n = inst.n();
    loop {
        let st = simplex.status().unwrap_or(Status::Infeasible);
        if st != Status::Optimal {
            return Ok(st);
        }
        let x = FracSolution::from_dense(inst, simplex.values());
        let found = violated_phase_cuts(&x);
        if found.is_empty() {
            return Ok(Status::Optimal);
        }
        for s in found {
            simplex.add_row(cut_row(n, &s))?;
            cuts.sets.push(s);
        }
        simplex.reoptimize()?;
    }
}

fn check_size(inst: &Instance) -> Result<(), SolveError> {
    if inst.n() < 3 {
        return Err(InstanceError::UnsupportedSize(inst.n(), "n >= 3").into());
    }
    Ok(())
}

pub fn f2m_state(inst: &Instance, limits: Limits) -> Result<Simplex, SolveError> {
    check_size(inst)?;
    let mut s = Simplex::new(&f2m_program(inst), limits.simplex())?;
    expect_optimal(s.solve()?)?;
    Ok(s)
}

/// Basic optimal solution of the fractional 2-matching LP.
pub fn solve_f2m_lp(inst: &Instance) -> Result<FracSolution, SolveError> {
    let s = f2m_state(inst, Limits::from_env())?;
    Ok(FracSolution::from_dense(inst, s.values()))
}

pub fn subtour_state(inst: &Instance, limits: Limits) -> Result<SubtourState, SolveError> {
    let mut simplex = f2m_state(inst, limits)?;
    let mut cuts = CutFamily::default();
    expect_optimal(cut_loop(inst, &mut simplex, &mut cuts)?)?;
    Ok(SubtourState { simplex, cuts })
}

/// Optimal vertex of the subtour LP and the cuts generated to reach it.
pub fn solve_subtour_lp(inst: &Instance) -> Result<(FracSolution, CutFamily), SolveError> {
    solve_subtour_lp_with(inst, Limits::from_env())
}

pub fn solve_subtour_lp_with(inst: &Instance, limits: Limits) -> Result<(FracSolution, CutFamily), SolveError> {
    let st = subtour_state(inst, limits)?;
    Ok((FracSolution::from_dense(inst, st.simplex.values()), st.cuts))
}

/// Choice of branching variable among the fractional ones.
#[derive(Debug, Clone, Default)]
pub enum BranchRule {
    /// Value closest to 1/2, ties to the smallest edge index.
    #[default]
    MostFractional,
    /// First fractional edge in the given priority order of edge indices.
    Priority(Vec<usize>),
}

impl BranchRule {
    fn pick(&self, values: &[Rational]) -> Option<usize> {
        let half = Rational::new(1, 2);
        match self {
            BranchRule::MostFractional => {
                let mut best: Option<(Rational, usize)> = None;
                for (j, v) in values.iter().enumerate() {
                    if v.is_integer() {
                        continue;
                    }
                    let dist = (v - &half).abs();
                    if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                        best = Some((dist, j));
                    }
                }
                best.map(|(_, j)| j)
            }
            BranchRule::Priority(order) => order.iter().copied().find(|&j| !values[j].is_integer()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IpOptions {
    pub branch: BranchRule,
    pub limits: Option<Limits>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IpStats {
    pub nodes: usize,
    pub cuts: usize,
}

/// Follows an integral degree-2 edge set into its cycles, each starting at
/// its smallest node and heading to the smaller neighbour.
pub fn integral_cycles(n: usize, values: &[Rational]) -> Result<Vec<Vec<NodeId>>, SolveError> {
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (i, v) in values.iter().enumerate() {
        if v.is_one() {
            let e = Edge::from_index(n, i);
            adj[e.u()].push(e.v());
            adj[e.v()].push(e.u());
        } else if !v.is_zero() {
            return Err(SolveError::InvalidSolution("fractional value in integral solution".into()));
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return Err(SolveError::InvalidSolution("node without degree 2".into()));
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut cyc = vec![s];
        seen[s] = true;
        let mut prev = s;
        let mut cur = *adj[s].iter().min().unwrap();
        while cur != s {
            seen[cur] = true;
            cyc.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        cycles.push(cyc);
    }
    Ok(cycles)
}

fn budget_error(limits: &Limits, bound: Rational) -> SolveError {
    SolveError::NodeBudget { budget: limits.node_budget, bound }
}

/// Depth-first branch-and-bound with integer objective values. `relax`
/// re-solves a node (and may add rows); `accept` turns an integral point into
/// an incumbent payload.
fn branch_and_bound<T>(
    root: Simplex,
    opts: &IpOptions,
    limits: Limits,
    mut relax: impl FnMut(&mut Simplex) -> Result<Status, SolveError>,
    mut accept: impl FnMut(&[Rational]) -> Result<T, SolveError>,
    stats: &mut IpStats,
) -> Result<Option<(i64, T)>, SolveError> {
    let mut best: Option<(i64, T)> = None;
    let mut stack = vec![(root, true)];
    while let Some((mut node, fresh_root)) = stack.pop() {
        stats.nodes += 1;
        if stats.nodes > limits.node_budget {
            let bound = best.as_ref().map(|(c, _)| int(*c)).unwrap_or_else(|| node.objective());
            return Err(budget_error(&limits, bound));
        }
        let st = if fresh_root && node.status() == Some(Status::Optimal) {
            relax(&mut node)?
        } else {
            node.reoptimize()?;
            relax(&mut node)?
        };
        if st != Status::Optimal {
            continue;
        }
        let lb = node.objective().ceil().to_i64().expect("small objective");
        if let Some((b, _)) = &best {
            if lb >= *b {
                continue;
            }
        }
        match opts.branch.pick(node.values()) {
            None => {
                let payload = accept(node.values())?;
                best = Some((lb, payload));
            }
            Some(j) => {
                let mut down = node.clone();
                down.set_bounds(j, Rational::zero(), Some(Rational::zero()));
                let mut up = node;
                up.set_bounds(j, Rational::one(), Some(Rational::one()));
                // Explore the up-branch first.
                stack.push((down, false));
                stack.push((up, false));
            }
        }
    }
    Ok(best)
}

/// Exact optimum tour by branch-and-bound over the subtour LP.
pub fn solve_tsp_ip(inst: &Instance) -> Result<Tour, SolveError> {
    solve_tsp_ip_with(inst, &IpOptions::default()).map(|(t, _)| t)
}

pub fn solve_tsp_ip_with(inst: &Instance, opts: &IpOptions) -> Result<(Tour, IpStats), SolveError> {
    let limits = opts.limits.unwrap_or_else(Limits::from_env);
    let root = subtour_state(inst, limits)?;
    solve_tsp_ip_from(inst, root, opts)
}

/// Continues from an already solved subtour LP state.
pub fn solve_tsp_ip_from(inst: &Instance, root: SubtourState, opts: &IpOptions) -> Result<(Tour, IpStats), SolveError> {
    let limits = opts.limits.unwrap_or_else(Limits::from_env);
    let n = inst.n();
    let mut stats = IpStats { nodes: 0, cuts: root.cuts.sets.len() };
    let mut cuts = root.cuts.clone();
    let best = branch_and_bound(
        root.simplex,
        opts,
        limits,
        |s| cut_loop(inst, s, &mut cuts),
        |values| {
            let cycles = integral_cycles(n, values)?;
            if cycles.len() != 1 {
                return Err(SolveError::InvalidSolution("integral subtour point is not a tour".into()));
            }
            Ok(Tour::new(inst, cycles.into_iter().next().unwrap())?)
        },
        &mut stats,
    )?;
    stats.cuts = cuts.sets.len();
    let (_, tour) = best.ok_or(SolveError::UnexpectedStatus(Status::Infeasible))?;
    Ok((tour, stats))
}

/// A minimum-cost 2-matching: node-disjoint cycles (length ≥ 3) covering
/// every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoMatching {
    pub cost: i64,
    pub cycles: Vec<Vec<NodeId>>,
}

pub fn solve_min_2m(inst: &Instance) -> Result<TwoMatching, SolveError> {
    solve_min_2m_with(inst, &IpOptions::default()).map(|(m, _)| m)
}

pub fn solve_min_2m_with(inst: &Instance, opts: &IpOptions) -> Result<(TwoMatching, IpStats), SolveError> {
    let limits = opts.limits.unwrap_or_else(Limits::from_env);
    let root = f2m_state(inst, limits)?;
    solve_min_2m_from(inst, root, opts)
}

pub fn solve_min_2m_from(inst: &Instance, root: Simplex, opts: &IpOptions) -> Result<(TwoMatching, IpStats), SolveError> {
    let limits = opts.limits.unwrap_or_else(Limits::from_env);
    let n = inst.n();
    let mut stats = IpStats::default();
    let best = branch_and_bound(
        root,
        opts,
        limits,
        |s| Ok(s.status().unwrap_or(Status::Infeasible)),
        |values| integral_cycles(n, values),
        &mut stats,
    )?;
    let (cost, cycles) = best.ok_or(SolveError::UnexpectedStatus(Status::Infeasible))?;
    debug_assert_eq!(cost, cycles.iter().map(|c| inst.cycle_cost(c)).sum::<i64>());
    Ok((TwoMatching { cost, cycles }, stats))
}
