//! Worst-case costs for a fixed subtour vertex.
//!
//! For a vertex `x` and a ratio `α`, find costs `c ∈ {1,2}` on every pair
//! maximizing `min_T c(T) − α·c·x`. The master LP has one variable per pair
//! (bounded to `[1, 2]`) and `z ∈ [0, 2n]`, and tour rows `c(T) ≥ z` are
//! added whenever Held–Karp finds a tour cheaper than `z`.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::instance::{all_pairs, held_karp_with, num_pairs, Edge, Instance, NodeId, Tour};
use crate::lp::{LinearProgram, LpError, Relation, Row, Sense, Simplex, Status};
use crate::rational::Rational;
use crate::subtour::{exhaustive_min_cut, min_cut_separation, FracSolution, Limits, SolveError};

pub const DEFAULT_SEED_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct CostSearchProblem {
    pub x: FracSolution,
    pub alpha: Rational,
    pub initial_tours: Vec<Tour>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSearchResult {
    pub objective: Rational,
    /// Cost of every pair, 1 or 2.
    pub costs: std::collections::BTreeMap<Edge, i64>,
    pub generated_tours: usize,
    pub nodes: usize,
    pub witness_tour: Vec<NodeId>,
    pub witness_cost: i64,
}

impl CostSearchResult {
    /// The costs as a 1,2-instance (cost-1 pairs are its edges).
    pub fn instance(&self, n: usize) -> Instance {
        Instance::new(n, self.costs.iter().filter(|(_, &c)| c == 1).map(|(e, _)| e.ends())).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostSearchError {
    #[error("vertex is not subtour feasible: {0}")]
    NotFeasible(String),
    #[error("point is not an extreme point: tight constraints have rank {rank} < {needed}")]
    NotExtreme { rank: usize, needed: usize },
    #[error("tour does not visit every node exactly once")]
    BadTour,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl From<LpError> for CostSearchError {
    fn from(e: LpError) -> Self {
        CostSearchError::Solve(SolveError::Lp(e))
    }
}

/// The support graph of `x` as a 1,2-instance.
pub fn support_instance(x: &FracSolution) -> Instance {
    Instance::new(x.n(), x.support().filter(|(_, v)| v.is_positive()).map(|(e, _)| e.ends())).unwrap()
}

/// Degree, bounds and every subtour constraint.
pub fn check_subtour_feasible(x: &FracSolution) -> Result<(), CostSearchError> {
    x.check_degree_and_bounds().map_err(CostSearchError::NotFeasible)?;
    let violated = if x.n() <= 16 {
        let (side, v) = exhaustive_min_cut(x);
        (v < Rational::from_int(2)).then_some((side, v))
    } else {
        min_cut_separation(x)
    };
    match violated {
        Some((side, v)) => Err(CostSearchError::NotFeasible(format!("x(δ({side:?})) = {v} < 2"))),
        None => Ok(()),
    }
}

/// Rank of the constraints tight at `x` must equal the number of pairs.
pub fn check_extreme(x: &FracSolution) -> Result<(), CostSearchError> {
    let n = x.n();
    let m = num_pairs(n);
    let mut basis = RowBasis::new(m);
    for e in all_pairs(n) {
        let v = x.value(e);
        if v.is_zero() || v.is_one() {
            basis.insert(vec![(e.index(n), Rational::one())]);
        }
    }
    for i in 0..n {
        basis.insert((0..n).filter(|&j| j != i).map(|j| (Edge::new(i, j).index(n), Rational::one())).collect());
    }
    // Tight subtour cuts; sides containing node 0 cover every cut once.
    let two = Rational::from_int(2);
    if n <= 16 {
        for mask in 0u32..(1 << (n - 1)) {
            if basis.rank() == m {
                break;
            }
            let side: Vec<NodeId> = std::iter::once(0).chain((1..n).filter(|v| mask >> (v - 1) & 1 == 1)).collect();
            if side.len() < 2 || side.len() + 2 > n || x.crossing(&side) != two {
                continue;
            }
            let inside: Vec<bool> = (0..n).map(|v| side.contains(&v)).collect();
            basis.insert(all_pairs(n).filter(|e| inside[e.u()] != inside[e.v()]).map(|e| (e.index(n), Rational::one())).collect());
        }
    }
    if basis.rank() < m {
        return Err(CostSearchError::NotExtreme { rank: basis.rank(), needed: m });
    }
    Ok(())
}

/// Incremental row echelon form for rank computation.
struct RowBasis {
    width: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RowBasis {
    fn new(width: usize) -> Self {
        RowBasis { width, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, sparse: Vec<(usize, Rational)>) {
        let mut v = vec![Rational::zero(); self.width];
        for (j, a) in sparse {
            v[j] += &a;
        }
        for (p, r) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (k, a) in r.iter().enumerate() {
                    if !a.is_zero() {
                        v[k].sub_mul(&f, a);
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|a| !a.is_zero()) else { return };
        let inv = Rational::one() / &v[p];
        for a in v.iter_mut() {
            *a = &*a * &inv;
        }
        for (_, r) in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (k, a) in v.iter().enumerate() {
                    if !a.is_zero() {
                        r[k].sub_mul(&f, a);
                    }
                }
            }
        }
        self.rows.push((p, v));
    }
}

fn edge_set(order: &[NodeId]) -> BTreeSet<Edge> {
    (0..order.len()).map(|i| Edge::new(order[i], order[(i + 1) % order.len()])).collect()
}

/// Tours using at least `n − 1` support edges of `x`: support Hamiltonian
/// cycles first, then support Hamiltonian paths closed by one other pair.
pub fn seed_tours(x: &FracSolution, cap: usize) -> Vec<Tour> {
    let inst = support_instance(x);
    let n = inst.n();
    if n < 3 || cap == 0 {
        return Vec::new();
    }
    let adj: Vec<Vec<NodeId>> = (0..n).map(|v| inst.neighbors(v).collect()).collect();
    let mut seen: BTreeSet<BTreeSet<Edge>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut closed_later: Vec<Vec<NodeId>> = Vec::new();

    // Every Hamiltonian path of the support, each found from both ends.
    let mut paths: Vec<Vec<NodeId>> = Vec::new();
    let mut path = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn dfs(adj: &[Vec<NodeId>], path: &mut Vec<NodeId>, used: &mut [bool], out: &mut Vec<Vec<NodeId>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if path.len() == adj.len() {
            out.push(path.clone());
            return;
        }
        let last = *path.last().unwrap();
        for &w in &adj[last] {
            if !used[w] {
                used[w] = true;
                path.push(w);
                dfs(adj, path, used, out, limit);
                path.pop();
                used[w] = false;
            }
        }
    }
    let limit = cap.saturating_mul(8).max(64);
    for s in 0..n {
        path.push(s);
        used[s] = true;
        dfs(&adj, &mut path, &mut used, &mut paths, limit);
        path.pop();
        used[s] = false;
    }
    for p in paths {
        if inst.is_one(p[0], p[n - 1]) {
            if seen.insert(edge_set(&p)) {
                out.push(Tour::new(&inst, p).unwrap());
            }
        } else {
            closed_later.push(p);
        }
    }
    for p in closed_later {
        if seen.insert(edge_set(&p)) {
            out.push(Tour::new(&inst, p).unwrap());
        }
    }
    out.truncate(cap);
    out
}

/// Exact minimum tour under rational costs (scaled to integers).
fn min_tour(n: usize, costs: &[Rational]) -> (Vec<NodeId>, Rational) {
    let scale = costs.iter().fold(1i64, |l, c| l.lcm(&c.denom().to_i64().expect("small denominator")));
    let scaled: Vec<i64> = costs.iter().map(|c| (c * scale).to_i64().expect("small cost")).collect();
    let order = held_karp_with(n, |a, b| scaled[Edge::new(a, b).index(n)]).expect("supported size");
    let value: Rational = edge_set(&order).iter().map(|e| &costs[e.index(n)]).sum();
    (order, value)
}

fn tour_row(n: usize, order: &[NodeId]) -> Row {
    let z = num_pairs(n);
    let mut coeffs: Vec<(usize, Rational)> = edge_set(order).iter().map(|e| (e.index(n), Rational::one())).collect();
    coeffs.push((z, Rational::from_int(-1)));
    Row::new(coeffs, Relation::Ge, Rational::zero())
}

struct Node {
    simplex: Simplex,
    rows_seen: usize,
}

pub fn worst_costs(prob: &CostSearchProblem) -> Result<CostSearchResult, CostSearchError> {
    worst_costs_with(prob, Limits::from_env())
}

pub fn worst_costs_with(prob: &CostSearchProblem, limits: Limits) -> Result<CostSearchResult, CostSearchError> {
    let x = &prob.x;
    check_subtour_feasible(x)?;
    check_extreme(x)?;
    let n = x.n();
    let m = num_pairs(n);
    for t in &prob.initial_tours {
        if t.order.len() != n || t.order.iter().collect::<BTreeSet<_>>().len() != n || t.order.iter().any(|&v| v >= n) {
            return Err(CostSearchError::BadTour);
        }
    }

    let mut lp = LinearProgram::new(Sense::Maximize);
    for e in all_pairs(n) {
        lp.add_var(-(&prob.alpha * &x.value(e)), Rational::one(), Some(Rational::from_int(2)));
    }
    lp.add_var(Rational::one(), Rational::zero(), Some(Rational::from_int(2 * n as i64)));
    let mut rows: Vec<Row> = Vec::new();
    let mut seen: BTreeSet<BTreeSet<Edge>> = BTreeSet::new();
    for t in &prob.initial_tours {
        if seen.insert(edge_set(&t.order)) {
            rows.push(tour_row(n, &t.order));
        }
    }
    for r in &rows {
        lp.add_row(r.clone());
    }
    let mut root = Simplex::new(&lp, limits.simplex())?;
    if root.solve()? != Status::Optimal {
        return Err(SolveError::UnexpectedStatus(root.status().unwrap()).into());
    }
    let rows_seen = rows.len();
    let mut stack = vec![Node { simplex: root, rows_seen }];
    let mut best: Option<(Rational, Vec<Rational>, Vec<NodeId>)> = None;
    let mut nodes = 0usize;
    while let Some(mut node) = stack.pop() {
        nodes += 1;
        if nodes > limits.node_budget {
            let bound = best.as_ref().map(|b| b.0.clone()).unwrap_or_else(|| node.simplex.objective());
            return Err(SolveError::NodeBudget { budget: limits.node_budget, bound }.into());
        }
        // Rows found elsewhere in the tree are valid here too.
        for r in &rows[node.rows_seen..] {
            node.simplex.add_row(r.clone())?;
        }
        node.rows_seen = rows.len();
        let mut st = node.simplex.reoptimize()?;
        let found = loop {
            if st != Status::Optimal {
                break None;
            }
            let ub = node.simplex.objective();
            if best.as_ref().is_some_and(|b| ub <= b.0) {
                break None;
            }
            let vals = node.simplex.values();
            let (order, value) = min_tour(n, &vals[..m]);
            if value < vals[m] {
                let row = tour_row(n, &order);
                seen.insert(edge_set(&order));
                rows.push(row.clone());
                node.simplex.add_row(row)?;
                node.rows_seen = rows.len();
                st = node.simplex.reoptimize()?;
                continue;
            }
            break Some((ub, vals[..m].to_vec(), order));
        };
        let Some((ub, costs, order)) = found else { continue };
        // Most fractional cost, nearest to 3/2.
        let three_halves = Rational::new(3, 2);
        let pick = costs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_integer())
            .min_by(|(i, a), (j, b)| (&**a - &three_halves).abs().cmp(&(&**b - &three_halves).abs()).then(i.cmp(j)))
            .map(|(i, _)| i);
        match pick {
            None => best = Some((ub, costs, order)),
            Some(j) => {
                let mut down = node.simplex.clone();
                down.set_bounds(j, Rational::one(), Some(Rational::one()));
                let mut up = node.simplex;
                up.set_bounds(j, Rational::from_int(2), Some(Rational::from_int(2)));
                stack.push(Node { simplex: down, rows_seen: node.rows_seen });
                stack.push(Node { simplex: up, rows_seen: node.rows_seen });
            }
        }
    }
    let (objective, costs, order) = best.ok_or(SolveError::UnexpectedStatus(Status::Infeasible))?;
    let costs: std::collections::BTreeMap<Edge, i64> =
        all_pairs(n).map(|e| (e, costs[e.index(n)].to_i64().expect("integral cost"))).collect();
    let witness_cost = edge_set(&order).iter().map(|e| costs[e]).sum();
    Ok(CostSearchResult {
        objective,
        costs,
        generated_tours: seen.len().saturating_sub(prob.initial_tours.len()),
        nodes,
        witness_tour: order,
        witness_cost,
    })
}

/// Exhaustive oracle over all `2^(n(n−1)/2)` cost vectors with Held–Karp.
pub fn worst_costs_exhaustive(x: &FracSolution, alpha: &Rational) -> Rational {
    let n = x.n();
    let m = num_pairs(n);
    assert!(m <= 21, "exhaustive search limited to n <= 7");
    let xs: Vec<Rational> = all_pairs(n).map(|e| x.value(e)).collect();
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << m) {
        let c = |i: usize| if mask >> i & 1 == 1 { 2 } else { 1 };
        let order = held_karp_with(n, |a, b| c(Edge::new(a, b).index(n))).unwrap();
        let tour: i64 = edge_set(&order).iter().map(|e| c(e.index(n))).sum();
        let lp: Rational = xs.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| v * c(i)).sum();
        let obj = Rational::from_int(tour) - alpha * &lp;
        if best.as_ref().is_none_or(|b| obj > *b) {
            best = Some(obj);
        }
    }
    best.unwrap()
}
