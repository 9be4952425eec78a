//! Balinski structure of basic fractional 2-matchings: integer cycles, and
//! fractional components made of odd half-cycles joined by 1-paths.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::{Edge, Instance, NodeId};
use crate::mincut::stoer_wagner;
use crate::rational::Rational;
use crate::subtour::FracSolution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum F2MError {
    #[error("not a fractional 2-matching: {0}")]
    Infeasible(String),
    #[error("component {component}: {detail}")]
    Structure { component: usize, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalComponent {
    /// Odd cycles of `x = 1/2` edges, each from its smallest node.
    pub half_cycles: Vec<Vec<NodeId>>,
    /// Maximal `x = 1` paths, each from its smaller endpoint.
    pub one_paths: Vec<Vec<NodeId>>,
}

impl FractionalComponent {
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.half_cycles.iter().chain(&self.one_paths).flatten().copied().collect()
    }

    pub fn cycle_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.half_cycles.iter().flat_map(|c| cycle_edge_list(c))
    }

    pub fn path_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.one_paths.iter().flat_map(|p| p.windows(2).map(|w| Edge::new(w[0], w[1])))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2MDecomposition {
    pub integer_cycles: Vec<Vec<NodeId>>,
    pub fractional_components: Vec<FractionalComponent>,
}

/// Counts used by the tour-building analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2MStats {
    /// Cycle nodes.
    pub k: usize,
    /// Cost-2 cycle edges.
    pub p: usize,
    /// Total cost of the 1-paths.
    pub c_p: i64,
    /// Eared paths; filled in by the tour builder.
    pub z_eared: usize,
}

impl F2MStats {
    pub fn of_component(inst: &Instance, comp: &FractionalComponent) -> Self {
        F2MStats {
            k: comp.half_cycles.iter().map(Vec::len).sum(),
            p: comp.cycle_edges().filter(|e| inst.c(e.u(), e.v()) == 2).count(),
            c_p: comp.path_edges().map(|e| inst.c(e.u(), e.v())).sum(),
            z_eared: 0,
        }
    }

    pub fn of(inst: &Instance, d: &F2MDecomposition) -> Self {
        let mut s = F2MStats::default();
        for c in &d.fractional_components {
            let t = F2MStats::of_component(inst, c);
            s.k += t.k;
            s.p += t.p;
            s.c_p += t.c_p;
        }
        s
    }

    /// `c(P) + k/2 + p/2`, the cost of the fractional part.
    pub fn fractional_cost(&self) -> Rational {
        Rational::from_int(self.c_p) + Rational::new(self.k as i64 + self.p as i64, 2)
    }
}

pub(crate) fn cycle_edge_list(c: &[NodeId]) -> impl Iterator<Item = Edge> + '_ {
    (0..c.len()).map(move |i| Edge::new(c[i], c[(i + 1) % c.len()]))
}

/// Walks a 2-regular adjacency from `start`, heading to the smaller neighbour.
fn walk_cycle(adj: &[Vec<NodeId>], start: NodeId) -> Vec<NodeId> {
    let mut cyc = vec![start];
    let mut prev = start;
    let mut cur = *adj[start].iter().min().unwrap();
    while cur != start {
        cyc.push(cur);
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = next;
    }
    cyc
}

impl F2MDecomposition {
    /// All edges with their x-values.
    pub fn edges(&self) -> Vec<(Edge, Rational)> {
        let half = Rational::new(1, 2);
        let mut out: Vec<(Edge, Rational)> = Vec::new();
        for c in &self.integer_cycles {
            out.extend(cycle_edge_list(c).map(|e| (e, Rational::one())));
        }
        for comp in &self.fractional_components {
            out.extend(comp.cycle_edges().map(|e| (e, half.clone())));
            out.extend(comp.path_edges().map(|e| (e, Rational::one())));
        }
        out.sort();
        out
    }

    pub fn reassemble(&self, inst: &Instance) -> FracSolution {
        FracSolution::from_edges(inst, self.edges())
    }

    pub fn is_connected(&self) -> bool {
        self.integer_cycles.is_empty() && self.fractional_components.len() == 1
    }
}

/// Splits a basic F2M solution into its Balinski structure.
pub fn decompose(x: &FracSolution) -> Result<F2MDecomposition, F2MError> {
    x.check_degree_and_bounds().map_err(F2MError::Infeasible)?;
    if !x.is_half_integral() {
        return Err(F2MError::Infeasible("values outside {0, 1/2, 1}".into()));
    }
    let n = x.n();
    let half = Rational::new(1, 2);
    let mut hadj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut oadj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut all: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (e, v) in x.support() {
        let (a, b) = e.ends();
        let adj = if *v == half { &mut hadj } else { &mut oadj };
        adj[a].push(b);
        adj[b].push(a);
        all[a].push(b);
        all[b].push(a);
    }

    // Support components, ordered by smallest node.
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<NodeId>> = Vec::new();
    for s in 0..n {
        if comp_of[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![s];
        comp_of[s] = id;
        let mut nodes = Vec::new();
        while let Some(v) = stack.pop() {
            nodes.push(v);
            for &w in &all[v] {
                if comp_of[w] == usize::MAX {
                    comp_of[w] = id;
                    stack.push(w);
                }
            }
        }
        nodes.sort_unstable();
        comps.push(nodes);
    }

    let mut out = F2MDecomposition::default();
    for (ci, nodes) in comps.iter().enumerate() {
        let bad = |detail: String| F2MError::Structure { component: ci, detail };
        if nodes.iter().all(|&v| hadj[v].is_empty()) {
            out.integer_cycles.push(walk_cycle(&oadj, nodes[0]));
            continue;
        }
        for &v in nodes {
            match (hadj[v].len(), oadj[v].len()) {
                (2, 1) | (0, 2) => {}
                (h, o) => return Err(bad(format!("node {v} has {h} half edges and {o} unit edges"))),
            }
        }
        let mut comp = FractionalComponent::default();
        let mut seen = vec![false; n];
        for &v in nodes {
            if hadj[v].is_empty() || seen[v] {
                continue;
            }
            let cyc = walk_cycle(&hadj, v);
            for &u in &cyc {
                seen[u] = true;
            }
            if cyc.len().is_multiple_of(2) {
                return Err(bad(format!("half-cycle {cyc:?} has even length")));
            }
            comp.half_cycles.push(cyc);
        }
        let mut on_path = vec![false; n];
        for &v in nodes {
            if hadj[v].is_empty() || on_path[v] {
                continue;
            }
            let mut path = vec![v];
            let mut prev = v;
            let mut cur = oadj[v][0];
            while hadj[cur].is_empty() {
                path.push(cur);
                let next = if oadj[cur][0] == prev { oadj[cur][1] } else { oadj[cur][0] };
                prev = cur;
                cur = next;
                if cur == v {
                    return Err(bad(format!("unit cycle through {v}")));
                }
            }
            path.push(cur);
            for &u in &path {
                on_path[u] = true;
            }
            if path[0] > path[path.len() - 1] {
                path.reverse();
            }
            comp.one_paths.push(path);
        }
        if let Some(&v) = nodes.iter().find(|&&v| !on_path[v]) {
            return Err(bad(format!("node {v} is not on any 1-path")));
        }
        comp.one_paths.sort();
        out.fractional_components.push(comp);
    }
    Ok(out)
}

/// Whether every cut of the x-weighted support carries at least 2.
pub fn is_two_connected(x: &FracSolution) -> bool {
    match stoer_wagner(&x.weight_matrix()) {
        Some(r) => r.best.value >= Rational::from_int(2),
        None => true,
    }
}

/// A cost-1 single-edge 1-path between two different half-cycles whose four
/// incident cycle edges all cost 1.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RewireCandidate {
    path: Edge,
    cycle_a: Vec<NodeId>,
    cycle_b: Vec<NodeId>,
}

fn candidates(inst: &Instance, d: &F2MDecomposition) -> Vec<RewireCandidate> {
    let mut out = Vec::new();
    for comp in &d.fractional_components {
        let cycle_of = |v: NodeId| comp.half_cycles.iter().position(|c| c.contains(&v));
        for p in &comp.one_paths {
            if p.len() != 2 || inst.c(p[0], p[1]) != 1 {
                continue;
            }
            let (Some(a), Some(b)) = (cycle_of(p[0]), cycle_of(p[1])) else { continue };
            if a == b {
                continue;
            }
            let incident_cost_one = |v: NodeId, c: &[NodeId]| {
                let i = c.iter().position(|&u| u == v).unwrap();
                let m = c.len();
                inst.c(v, c[(i + 1) % m]) == 1 && inst.c(v, c[(i + m - 1) % m]) == 1
            };
            let (ca, cb) = (&comp.half_cycles[a], &comp.half_cycles[b]);
            if incident_cost_one(p[0], ca) && incident_cost_one(p[1], cb) {
                out.push(RewireCandidate { path: Edge::new(p[0], p[1]), cycle_a: ca.clone(), cycle_b: cb.clone() });
            }
        }
    }
    out.sort_by_key(|c| c.path);
    out
}

/// Alternates 1, 0, 1, … around the odd cycle starting at `v`, so both cycle
/// edges at `v` get 1.
fn alternate_from(x: &mut FracSolution, cycle: &[NodeId], v: NodeId) {
    let m = cycle.len();
    let s = cycle.iter().position(|&u| u == v).unwrap();
    for t in 0..m {
        let a = cycle[(s + t) % m];
        let b = cycle[(s + t + 1) % m];
        let val = if t % 2 == 0 { Rational::one() } else { Rational::zero() };
        x.set(Edge::new(a, b), val);
    }
}

fn rewire(inst: &Instance, x: &FracSolution, c: &RewireCandidate) -> FracSolution {
    let mut y = x.clone();
    y.set(c.path, Rational::zero());
    alternate_from(&mut y, &c.cycle_a, c.path.u());
    alternate_from(&mut y, &c.cycle_b, c.path.v());
    y.recompute_objective(inst);
    y
}

/// No offending 1-path remains.
pub fn is_canonical(inst: &Instance, x: &FracSolution) -> Result<bool, F2MError> {
    Ok(candidates(inst, &decompose(x)?).is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalizeReport {
    pub x: FracSolution,
    /// Removed 1-paths, in application order.
    pub rewired: Vec<Edge>,
    /// Offending 1-paths left alone because rewiring them would raise the
    /// cost (a cost-2 cycle edge would move to value 1).
    pub skipped: Vec<Edge>,
}

/// Removes offending 1-paths one at a time in edge order until none can be
/// removed without raising the cost.
pub fn canonicalize_report(inst: &Instance, x: &FracSolution) -> Result<CanonicalizeReport, F2MError> {
    let mut cur = x.clone();
    cur.recompute_objective(inst);
    let mut rewired = Vec::new();
    loop {
        let d = decompose(&cur)?;
        let mut skipped = Vec::new();
        let mut applied = false;
        for cand in candidates(inst, &d) {
            let y = rewire(inst, &cur, &cand);
            if y.objective() <= cur.objective() {
                y.check_degree_and_bounds().map_err(|e| F2MError::Structure {
                    component: 0,
                    detail: format!("rewiring {} broke feasibility: {e}", cand.path),
                })?;
                rewired.push(cand.path);
                cur = y;
                applied = true;
                break;
            }
            skipped.push(cand.path);
        }
        if !applied {
            return Ok(CanonicalizeReport { x: cur, rewired, skipped });
        }
    }
}

pub fn canonicalize(inst: &Instance, x: &FracSolution) -> Result<FracSolution, F2MError> {
    canonicalize_report(inst, x).map(|r| r.x)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::w9;
    use crate::rational::rat;
    use crate::subtour::solve_f2m_lp;

    /// Two triangles joined by a single unit edge plus two 2-edge paths.
    pub(crate) fn triangles_with_short_path() -> (Instance, FracSolution) {
        // Triangles {0,1,2} and {3,4,5}; 1-paths 0-3, 1-6-4, 2-7-5.
        let inst = Instance::new(8, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 6), (6, 4), (2, 7), (7, 5)])
            .unwrap();
        let h = rat(1, 2);
        let one = Rational::one();
        let x = FracSolution::from_edges(
            &inst,
            [
                (Edge::new(0, 1), h.clone()),
                (Edge::new(1, 2), h.clone()),
                (Edge::new(0, 2), h.clone()),
                (Edge::new(3, 4), h.clone()),
                (Edge::new(4, 5), h.clone()),
                (Edge::new(3, 5), h.clone()),
                (Edge::new(0, 3), one.clone()),
                (Edge::new(1, 6), one.clone()),
                (Edge::new(4, 6), one.clone()),
                (Edge::new(2, 7), one.clone()),
                (Edge::new(5, 7), one),
            ],
        );
        (inst, x)
    }

    #[test]
    fn w9_structure() {
        let inst = w9();
        let x = solve_f2m_lp(&inst).unwrap();
        let d = decompose(&x).unwrap();
        assert!(d.is_connected());
        let c = &d.fractional_components[0];
        assert_eq!(c.half_cycles, vec![vec![0, 1, 2], vec![6, 7, 8]]);
        assert_eq!(c.one_paths, vec![vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8]]);
        assert_eq!(d.reassemble(&inst), x);
        let s = F2MStats::of(&inst, &d);
        assert_eq!((s.k, s.p, s.c_p), (6, 0, 6));
        assert_eq!(s.fractional_cost(), *x.objective());
        assert!(is_two_connected(&x));
        assert!(is_canonical(&inst, &x).unwrap());
        assert_eq!(canonicalize(&inst, &x).unwrap(), x);
    }

    #[test]
    fn integer_solution_has_no_fractional_part() {
        let inst = Instance::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let x = FracSolution::from_edges(&inst, inst.one_edges().into_iter().map(|e| (e, Rational::one())));
        let d = decompose(&x).unwrap();
        assert_eq!(d.integer_cycles, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(d.fractional_components.is_empty());
        assert!(!is_two_connected(&x));
    }

    #[test]
    fn even_half_cycle_is_rejected() {
        // Half 4-cycle with both diagonals at 1.
        let inst = Instance::complete(4);
        let h = rat(1, 2);
        let x = FracSolution::from_edges(
            &inst,
            [
                (Edge::new(0, 1), h.clone()),
                (Edge::new(1, 2), h.clone()),
                (Edge::new(2, 3), h.clone()),
                (Edge::new(0, 3), h),
                (Edge::new(0, 2), Rational::one()),
                (Edge::new(1, 3), Rational::one()),
            ],
        );
        assert!(matches!(decompose(&x), Err(F2MError::Structure { component: 0, .. })));
    }

    #[test]
    fn eared_component_is_not_two_connected() {
        // Triangle {0,1,2} with 1-path 0-3-1 (an ear) and 2-4-...; close the
        // structure with a second triangle {5,6,7} and paths 2-4-5, 6-8-7.
        let inst = Instance::complete(9);
        let h = rat(1, 2);
        let one = Rational::one();
        let x = FracSolution::from_edges(
            &inst,
            [
                (Edge::new(0, 1), h.clone()),
                (Edge::new(1, 2), h.clone()),
                (Edge::new(0, 2), h.clone()),
                (Edge::new(5, 6), h.clone()),
                (Edge::new(6, 7), h.clone()),
                (Edge::new(5, 7), h),
                (Edge::new(0, 3), one.clone()),
                (Edge::new(1, 3), one.clone()),
                (Edge::new(2, 4), one.clone()),
                (Edge::new(4, 5), one.clone()),
                (Edge::new(6, 8), one.clone()),
                (Edge::new(7, 8), one),
            ],
        );
        let d = decompose(&x).unwrap();
        assert!(d.is_connected());
        assert!(!is_two_connected(&x));
    }

    #[test]
    fn rewiring_removes_cost_one_path() {
        let (inst, x) = triangles_with_short_path();
        assert!(!is_canonical(&inst, &x).unwrap());
        let r = canonicalize_report(&inst, &x).unwrap();
        assert_eq!(r.rewired, vec![Edge::new(0, 3)]);
        assert!(r.skipped.is_empty());
        let y = r.x;
        assert_eq!(y.objective(), x.objective());
        assert!(y.value(Edge::new(0, 3)).is_zero());
        assert!(y.value(Edge::new(0, 1)).is_one());
        assert!(y.value(Edge::new(0, 2)).is_one());
        assert!(y.value(Edge::new(1, 2)).is_zero());
        assert!(y.value(Edge::new(3, 4)).is_one());
        assert!(y.value(Edge::new(3, 5)).is_one());
        assert!(y.value(Edge::new(4, 5)).is_zero());
        y.check_degree_and_bounds().unwrap();
        assert!(is_canonical(&inst, &y).unwrap());
        assert_eq!(canonicalize(&inst, &y).unwrap(), y);
        let d = decompose(&y).unwrap();
        assert_eq!(d.integer_cycles, vec![vec![0, 1, 6, 4, 3, 5, 7, 2]]);
    }
}
