//! Isomorph-free generation of biconnected graphs and the integrality-gap
//! sweep over them.
//!
//! Canonical forms come from individualization–refinement: refine to an
//! equitable ordered partition, branch on the first non-singleton cell, and
//! keep the leaf whose relabeled adjacency string is largest. Automorphisms
//! found at equal leaves prune sibling branches.
//!
//! Generation is canonical augmentation. A graph on `n` nodes is built from
//! a canonical graph on `n-1` nodes by adding node `n-1` with every possible
//! neighbourhood; the child is kept only if the new node is equivalent under
//! `Aut` to the child's canonical deletion node, and duplicate siblings are
//! dropped by canonical code.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::instance::{held_karp_opt, Instance, InstanceFile, NodeId};
use crate::lp::PivotRule;
use crate::rational::Rational;
use crate::subtour::{solve_tsp_ip_from, subtour_state, IpOptions, Limits, SolveError};

/// Largest `n` the generator accepts.
pub const MAX_GEN_N: usize = 10;
/// Largest `n` a canonical code can hold (`n(n-1)/2 ≤ 64`).
pub const MAX_CODE_N: usize = 11;

type Adj = Vec<u16>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Canon {
    /// Adjacency bits of the relabeled graph, pair (0,1) most significant.
    pub code: u64,
    /// `lab[i]` is the original node placed at position `i`.
    pub lab: [u8; 16],
}

fn code_of(adj: &[u16], lab: &[u8]) -> u64 {
    let n = lab.len();
    let mut code = 0u64;
    for i in 0..n {
        let row = adj[lab[i] as usize];
        for &lj in &lab[i + 1..] {
            code = (code << 1) | ((row >> lj) & 1) as u64;
        }
    }
    code
}

/// Splits cells by neighbour counts into each splitter cell until stable.
fn refine(adj: &[u16], n: usize, cells: &mut Vec<u16>) {
    let mut next: Vec<u16> = Vec::with_capacity(n);
    loop {
        let mut changed = false;
        let mut s = 0;
        while s < cells.len() {
            let splitter = cells[s];
            next.clear();
            for &cell in cells.iter() {
                if cell.count_ones() == 1 {
                    next.push(cell);
                    continue;
                }
                let mut groups = [0u16; 17];
                let mut bits = cell;
                while bits != 0 {
                    let v = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    groups[(adj[v] & splitter).count_ones() as usize] |= 1 << v;
                }
                let before = next.len();
                next.extend(groups[..=n].iter().copied().filter(|&g| g != 0));
                changed |= next.len() - before > 1;
            }
            std::mem::swap(cells, &mut next);
            s += 1;
        }
        if !changed {
            return;
        }
    }
}

fn initial_cells(n: usize, colors: Option<&[u8]>) -> Vec<u16> {
    match colors {
        None => vec![((1u32 << n) - 1) as u16],
        Some(col) => {
            let mut by: BTreeMap<u8, u16> = BTreeMap::new();
            for (v, &c) in col.iter().enumerate().take(n) {
                *by.entry(c).or_default() |= 1 << v;
            }
            by.into_values().collect()
        }
    }
}

/// Equitable refinement of the (optionally colored) unit partition.
pub fn equitable_cells(adj: &[u16], n: usize, colors: Option<&[u8]>) -> Vec<u16> {
    let mut cells = initial_cells(n, colors);
    refine(adj, n, &mut cells);
    cells
}

struct Search<'a> {
    adj: &'a [u16],
    n: usize,
    first: Option<(u64, Vec<u8>, Vec<u8>)>,
    best: Option<(u64, Vec<u8>, Vec<u8>)>,
    gens: Vec<[u8; 16]>,
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    fn same_orbit(&self, prefix: &[u8], a: u8, b: u8) -> bool {
        let mut parent: [u8; 16] = std::array::from_fn(|i| i as u8);
        fn find(p: &mut [u8; 16], mut x: u8) -> u8 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for g in &self.gens {
            if prefix.iter().any(|&p| g[p as usize] != p) {
                continue;
            }
            for v in 0..self.n as u8 {
                let (x, y) = (find(&mut parent, v), find(&mut parent, g[v as usize]));
                if x != y {
                    parent[x as usize] = y;
                }
            }
        }
        find(&mut parent, a) == find(&mut parent, b)
    }

    /// Returns `Some(level)` to unwind to that depth after an automorphism.
    fn run(&mut self, cells: Vec<u16>, prefix: &mut Vec<u8>) -> Option<usize> {
        if cells.len() == self.n {
            let lab: Vec<u8> = cells.iter().map(|c| c.trailing_zeros() as u8).collect();
            let code = code_of(self.adj, &lab);
            if self.first.is_none() {
                self.first = Some((code, lab.clone(), prefix.clone()));
                self.best = Some((code, lab, prefix.clone()));
                return None;
            }
            for reference in [&self.first, &self.best] {
                let (rc, rlab, rprefix) = reference.as_ref().unwrap();
                if *rc == code {
                    let mut g = [0u8; 16];
                    for i in 0..self.n {
                        g[rlab[i] as usize] = lab[i];
                    }
                    let back = common_prefix(rprefix, prefix);
                    self.gens.push(g);
                    return Some(back);
                }
            }
            if code > self.best.as_ref().unwrap().0 {
                self.best = Some((code, lab, prefix.clone()));
            }
            return None;
        }
        let t = cells.iter().position(|c| c.count_ones() > 1).unwrap();
        let depth = prefix.len();
        let mut explored: Vec<u8> = Vec::new();
        let mut bits = cells[t];
        while bits != 0 {
            let v = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            if explored.iter().any(|&w| self.same_orbit(prefix, w, v)) {
                continue;
            }
            let mut child = Vec::with_capacity(cells.len() + 1);
            child.extend_from_slice(&cells[..t]);
            child.push(1 << v);
            child.push(cells[t] & !(1 << v));
            child.extend_from_slice(&cells[t + 1..]);
            refine(self.adj, self.n, &mut child);
            prefix.push(v);
            let jump = self.run(child, prefix);
            prefix.pop();
            explored.push(v);
            if let Some(level) = jump {
                if level < depth {
                    return Some(level);
                }
            }
        }
        None
    }
}

/// Canonical labeling of a graph on `n ≤ 11` nodes, optionally with node
/// colors (cells ordered by color value).
pub fn canonical_form(adj: &[u16], n: usize, colors: Option<&[u8]>) -> Canon {
    assert!(n <= MAX_CODE_N && adj.len() >= n);
    let cells = equitable_cells(adj, n, colors);
    let mut s = Search { adj, n, first: None, best: None, gens: Vec::new() };
    s.run(cells, &mut Vec::new());
    let (code, lab, _) = s.best.unwrap();
    let mut out = [0u8; 16];
    out[..n].copy_from_slice(&lab);
    Canon { code, lab: out }
}

fn relabel(adj: &[u16], n: usize, lab: &[u8]) -> Adj {
    let mut pos = [0u8; 16];
    for (i, &v) in lab[..n].iter().enumerate() {
        pos[v as usize] = i as u8;
    }
    let mut out = vec![0u16; n];
    for i in 0..n {
        let mut bits = adj[lab[i] as usize];
        while bits != 0 {
            let w = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out[i] |= 1 << pos[w];
        }
    }
    out
}

/// A graph in canonical labeling, identified by its code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalGraph {
    pub n: usize,
    pub code: u64,
    adj: Adj,
}

impl CanonicalGraph {
    pub fn from_adjacency(adj: &[u16], n: usize) -> Self {
        let c = canonical_form(adj, n, None);
        CanonicalGraph { n, code: c.code, adj: relabel(adj, n, &c.lab[..n]) }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let adj: Adj = inst.adjacency().iter().map(|&m| m as u16).collect();
        CanonicalGraph::from_adjacency(&adj, inst.n())
    }

    pub fn adjacency(&self) -> &[u16] {
        &self.adj
    }

    /// `n` followed by the code, big-endian.
    pub fn certificate(&self) -> [u8; 9] {
        let mut out = [0u8; 9];
        out[0] = self.n as u8;
        out[1..].copy_from_slice(&self.code.to_be_bytes());
        out
    }

    pub fn cert_hex(&self) -> String {
        self.certificate().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn instance(&self) -> Instance {
        Instance::from_adjacency(self.adj.iter().map(|&m| m as u64).collect())
    }

    pub fn is_biconnected(&self) -> bool {
        self.instance().is_biconnected()
    }
}

/// Children of `parent` (on `n-1` nodes) accepted by canonical augmentation.
fn children(parent: &CanonicalGraph) -> Vec<CanonicalGraph> {
    let m = parent.n;
    let n = m + 1;
    let v = m;
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    let mut adj = vec![0u16; n];
    for s in 0u32..(1 << m) {
        let s = s as u16;
        for i in 0..m {
            adj[i] = parent.adj[i] | (((s >> i) & 1) << v);
        }
        adj[v] = s;
        // Deletion candidates: the last cell of the equitable partition.
        let cells = equitable_cells(&adj, n, None);
        let last = *cells.last().unwrap();
        if last >> v & 1 == 0 {
            continue;
        }
        let canon = canonical_form(&adj, n, None);
        if seen.contains(&canon.code) {
            continue;
        }
        if last.count_ones() > 1 {
            let del = *canon.lab[..n].iter().rev().find(|&&w| last >> w & 1 == 1).unwrap() as usize;
            if del != v && !same_orbit(&adj, n, del, v) {
                continue;
            }
        }
        seen.insert(canon.code);
        out.push(CanonicalGraph { n, code: canon.code, adj: relabel(&adj, n, &canon.lab[..n]) });
    }
    out
}

/// Whether an automorphism maps `a` to `b`.
pub fn same_orbit(adj: &[u16], n: usize, a: usize, b: usize) -> bool {
    let mut ca = vec![1u8; n];
    ca[a] = 0;
    let mut cb = vec![1u8; n];
    cb[b] = 0;
    canonical_form(adj, n, Some(&ca)).code == canonical_form(adj, n, Some(&cb)).code
}

/// One representative of every graph on `n` nodes.
pub fn gen_all(n: usize) -> Vec<CanonicalGraph> {
    assert!((1..=MAX_GEN_N).contains(&n));
    let mut level = vec![CanonicalGraph { n: 1, code: 0, adj: vec![0] }];
    for _ in 1..n {
        level = level.iter().flat_map(children).collect();
    }
    level
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("n = {0} outside 3..={MAX_GEN_N}")]
    UnsupportedN(usize),
    #[error("checkpoint line {line}: {detail}")]
    CorruptCheckpoint { line: usize, detail: String },
    #[error("checkpoint i/o: {0}")]
    Io(String),
    #[error("instance {cert}: {source}")]
    Solve { cert: String, source: SolveError },
    #[error("audit of {cert} failed: {detail}")]
    Audit { cert: String, detail: String },
}

fn check_n(n: usize) -> Result<(), EnumError> {
    if (3..=MAX_GEN_N).contains(&n) {
        Ok(())
    } else {
        Err(EnumError::UnsupportedN(n))
    }
}

/// Parents for the last augmentation step: all graphs on `n-1` nodes.
pub fn biconnected_parents(n: usize) -> Result<Vec<CanonicalGraph>, EnumError> {
    check_n(n)?;
    Ok(gen_all(n - 1))
}

pub fn biconnected_children(parent: &CanonicalGraph) -> Vec<CanonicalGraph> {
    children(parent).into_iter().filter(CanonicalGraph::is_biconnected).collect()
}

/// One representative of every biconnected graph on `n` nodes.
pub fn gen_biconnected(n: usize) -> Result<Vec<CanonicalGraph>, EnumError> {
    Ok(biconnected_parents(n)?.iter().flat_map(biconnected_children).collect())
}

/// All classes by brute force over edge sets; a slow cross-check.
pub fn brute_force_classes(n: usize, keep: impl Fn(&CanonicalGraph) -> bool) -> HashSet<u64> {
    assert!(n <= 7);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = HashSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut adj = vec![0u16; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        let g = CanonicalGraph::from_adjacency(&adj, n);
        if keep(&g) {
            out.insert(g.code);
        }
    }
    out
}

/// Subtour LP and optimal tour of one enumerated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub cert: String,
    pub lp_value: Rational,
    pub ip_value: i64,
    pub ratio: Rational,
    pub biconnected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    /// Biconnected graphs emitted by the generator.
    #[serde(rename = "count")]
    pub graph_count: usize,
    /// Worst ratio over every instance on `n` nodes.
    pub worst_ratio: Rational,
    pub worst: GapRecord,
    pub worst_instance: InstanceFile,
    pub biconnected_worst_ratio: Rational,
    /// Graphs of every connectivity, biconnected ones included.
    pub all_graph_count: usize,
    /// Ratio → number of biconnected instances.
    pub histogram: BTreeMap<Rational, usize>,
}

pub fn gap_record(g: &CanonicalGraph, limits: Limits) -> Result<GapRecord, SolveError> {
    let inst = g.instance();
    let state = subtour_state(&inst, limits)?;
    let lp = state.simplex.objective();
    let (tour, _) = solve_tsp_ip_from(&inst, state, &IpOptions { limits: Some(limits), ..Default::default() })?;
    Ok(GapRecord {
        cert: g.cert_hex(),
        ratio: Rational::from_int(tour.cost) / &lp,
        lp_value: lp,
        ip_value: tour.cost,
        biconnected: g.is_biconnected(),
    })
}

/// Re-solves with the other pivot rule and Held–Karp.
fn audit(g: &CanonicalGraph, rec: &GapRecord, limits: Limits) -> Result<(), EnumError> {
    let inst = g.instance();
    let fail = |detail: String| EnumError::Audit { cert: rec.cert.clone(), detail };
    let hk = held_karp_opt(&inst).map_err(|e| fail(e.to_string()))?;
    if hk.cost != rec.ip_value {
        return Err(fail(format!("Held–Karp gives {}, record has {}", hk.cost, rec.ip_value)));
    }
    let mut opts = limits.simplex();
    opts.rule = PivotRule::LargestCoefficient;
    let mut s = crate::lp::Simplex::new(&crate::subtour::f2m_program(&inst), opts).map_err(|e| fail(e.to_string()))?;
    s.solve().map_err(|e| fail(e.to_string()))?;
    let mut lp = s.objective();
    // Cut loop against the fresh solver.
    loop {
        let x = crate::subtour::FracSolution::from_dense(&inst, s.values());
        let cuts = crate::subtour::violated_phase_cuts(&x);
        if cuts.is_empty() {
            break;
        }
        for c in cuts {
            s.add_row(crate::subtour::cut_row(inst.n(), &c)).map_err(|e| fail(e.to_string()))?;
        }
        s.reoptimize().map_err(|e| fail(e.to_string()))?;
        lp = s.objective();
    }
    if lp != rec.lp_value {
        return Err(fail(format!("re-solve gives {lp}, record has {}", rec.lp_value)));
    }
    Ok(())
}

fn audited(g: &CanonicalGraph) -> bool {
    // Deterministic 1% sample.
    (g.code.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32).is_multiple_of(100)
}

fn read_checkpoint(path: &Path) -> Result<HashMap<String, GapRecord>, EnumError> {
    let mut done = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(EnumError::Io(e.to_string())),
    };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EnumError::Io(e.to_string()))?;
        let corrupt = |detail: String| EnumError::CorruptCheckpoint { line: i + 1, detail };
        let rec: GapRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        if rec.lp_value.is_zero() || rec.ratio != Rational::from_int(rec.ip_value) / &rec.lp_value {
            return Err(corrupt("ratio is not ip/lp".into()));
        }
        match instance_from_cert(&rec.cert) {
            Some(inst) if inst.is_biconnected() == rec.biconnected => {}
            Some(_) => return Err(corrupt("biconnectivity flag does not match the certificate".into())),
            None => return Err(corrupt(format!("malformed certificate {}", rec.cert))),
        }
        if done.insert(rec.cert.clone(), rec).is_some() {
            return Err(corrupt("duplicate certificate".into()));
        }
    }
    Ok(done)
}

/// Options for [`gap_sweep`].
#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub workers: usize,
    pub checkpoint: Option<std::path::PathBuf>,
    pub limits: Option<Limits>,
}

/// Solves the subtour LP and the TSP on every instance on `n` nodes.
///
/// Biconnected instances are the ones counted and histogrammed. The others
/// are solved too, since for small `n` the worst ratio is only reached by a
/// graph with a cut vertex (at `n = 6`, a triangle with a pendant edge on
/// each corner). The report does not depend on the worker count or on
/// resuming.
pub fn gap_sweep(n: usize, opts: &SweepOptions) -> Result<GapReport, EnumError> {
    let limits = opts.limits.unwrap_or_else(Limits::from_env);
    let parents = biconnected_parents(n)?;
    let mut done = match &opts.checkpoint {
        Some(p) => read_checkpoint(p)?,
        None => HashMap::new(),
    };
    let log = match &opts.checkpoint {
        Some(p) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(p).map_err(|e| EnumError::Io(e.to_string()))?,
        )),
        None => None,
    };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<GapRecord>> = Mutex::new(Vec::new());
    let first_error: Mutex<Option<EnumError>> = Mutex::new(None);
    let seen_certs: Mutex<HashSet<String>> = Mutex::new(HashSet::new());
    let done_ref = &done;
    let work = || loop {
        if first_error.lock().unwrap().is_some() {
            return;
        }
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(parent) = parents.get(i) else { return };
        for g in children(parent) {
            let cert = g.cert_hex();
            seen_certs.lock().unwrap().insert(cert.clone());
            let res = match done_ref.get(&cert) {
                Some(rec) => Ok(rec.clone()),
                None => gap_record(&g, limits).map_err(|source| EnumError::Solve { cert: cert.clone(), source }).and_then(|rec| {
                    if let Some(log) = &log {
                        let mut f = log.lock().unwrap();
                        writeln!(f, "{}", serde_json::to_string(&rec).unwrap())
                            .and_then(|_| f.flush())
                            .map_err(|e| EnumError::Io(e.to_string()))?;
                    }
                    Ok(rec)
                }),
            };
            let res = res.and_then(|rec| {
                if audited(&g) {
                    audit(&g, &rec, limits)?;
                }
                Ok(rec)
            });
            match res {
                Ok(rec) => results.lock().unwrap().push(rec),
                Err(e) => {
                    first_error.lock().unwrap().get_or_insert(e);
                    return;
                }
            }
        }
    };
    let workers = opts.workers.max(1);
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let seen = seen_certs.into_inner().unwrap();
    if let Some(stray) = done.keys().find(|c| !seen.contains(*c)) {
        return Err(EnumError::CorruptCheckpoint { line: 0, detail: format!("certificate {stray} is not an {n}-node graph") });
    }
    done.clear();
    let mut records = results.into_inner().unwrap();
    records.sort_by(|a, b| a.cert.cmp(&b.cert));
    let mut histogram: BTreeMap<Rational, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.biconnected) {
        *histogram.entry(r.ratio.clone()).or_default() += 1;
    }
    // Largest ratio; ties go to the smallest certificate.
    let worst_of = |only_bic: bool| {
        records
            .iter()
            .filter(|r| r.biconnected || !only_bic)
            .fold(None::<&GapRecord>, |acc, r| match acc {
                Some(w) if w.ratio >= r.ratio => Some(w),
                _ => Some(r),
            })
            .expect("every supported n has a biconnected graph")
            .clone()
    };
    let worst = worst_of(false);
    let biconnected_worst_ratio = worst_of(true).ratio;
    let worst_instance = InstanceFile::from(&instance_from_cert(&worst.cert).expect("own certificate"));
    Ok(GapReport {
        n,
        graph_count: histogram.values().sum(),
        worst_ratio: worst.ratio.clone(),
        worst,
        worst_instance,
        biconnected_worst_ratio,
        all_graph_count: records.len(),
        histogram,
    })
}

/// Rebuilds the canonical instance from a certificate hex string.
pub fn instance_from_cert(cert: &str) -> Option<Instance> {
    if cert.len() != 18 {
        return None;
    }
    let n = usize::from_str_radix(&cert[..2], 16).ok()?;
    let code = u64::from_str_radix(&cert[2..], 16).ok()?;
    if !(1..=MAX_CODE_N).contains(&n) {
        return None;
    }
    let mut adj = vec![0u64; n];
    let mut bit = n * (n - 1) / 2;
    for i in 0..n {
        for j in i + 1..n {
            bit -= 1;
            if code >> bit & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    Some(Instance::from_adjacency(adj))
}

pub fn node_count(cert: &str) -> Option<NodeId> {
    usize::from_str_radix(cert.get(..2)?, 16).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_perm(n: usize, seed: u64) -> Vec<usize> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        p
    }

    #[test]
    fn canonical_form_is_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for t in 0..300 {
            let n = rng.gen_range(1..=10);
            let mut adj = vec![0u16; n];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.4) {
                        adj[a] |= 1 << b;
                        adj[b] |= 1 << a;
                    }
                }
            }
            let p = random_perm(n, t);
            let mut padj = vec![0u16; n];
            for a in 0..n {
                for b in 0..n {
                    if adj[a] >> b & 1 == 1 {
                        padj[p[a]] |= 1 << p[b];
                    }
                }
            }
            let c1 = CanonicalGraph::from_adjacency(&adj, n);
            let c2 = CanonicalGraph::from_adjacency(&padj, n);
            assert_eq!(c1.code, c2.code);
            assert_eq!(c1.adjacency(), c2.adjacency());
        }
    }

    #[test]
    fn counts_of_all_graphs() {
        let expect = [1, 2, 4, 11, 34, 156, 1044];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(gen_all(i + 1).len(), e, "n = {}", i + 1);
        }
    }

    #[test]
    fn counts_of_biconnected_graphs() {
        for (n, e) in [(3, 1), (4, 3), (5, 10), (6, 56)] {
            assert_eq!(gen_biconnected(n).unwrap().len(), e, "n = {n}");
        }
        assert!(gen_biconnected(2).is_err());
        assert!(gen_biconnected(11).is_err());
    }

    #[test]
    fn brute_force_agrees_up_to_six() {
        for n in 3..=6 {
            let brute = brute_force_classes(n, |g| g.is_biconnected());
            let gen: HashSet<u64> = gen_biconnected(n).unwrap().iter().map(|g| g.code).collect();
            assert_eq!(gen, brute, "n = {n}");
        }
    }

    #[test]
    fn certificates_round_trip() {
        for g in gen_biconnected(5).unwrap() {
            let inst = instance_from_cert(&g.cert_hex()).unwrap();
            assert_eq!(CanonicalGraph::from_instance(&inst), g);
        }
    }

    #[test]
    fn orbits_of_a_path() {
        // Path 0-1-2-3: ends swap, middles swap.
        let adj = [0b0010u16, 0b0101, 0b1010, 0b0100];
        assert!(same_orbit(&adj, 4, 0, 3));
        assert!(same_orbit(&adj, 4, 1, 2));
        assert!(!same_orbit(&adj, 4, 0, 1));
    }
}
