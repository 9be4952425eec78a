//! Stoer–Wagner global minimum cut over exact rational weights.

use crate::instance::NodeId;
use crate::rational::Rational;

/// One cut-of-the-phase: the merged node set `side` against the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseCut {
    pub side: Vec<NodeId>,
    pub value: Rational,
}

#[derive(Debug, Clone)]
pub struct MinCutResult {
    /// The global minimum cut (first minimum phase on ties).
    pub best: PhaseCut,
    /// Every cut-of-the-phase, in phase order.
    pub phases: Vec<PhaseCut>,
}

/// Runs Stoer–Wagner on the symmetric weight matrix `w` (zero = no edge).
/// Returns `None` for fewer than two nodes.
pub fn stoer_wagner(w: &[Vec<Rational>]) -> Option<MinCutResult> {
    let n = w.len();
    if n < 2 {
        return None;
    }
    let mut w: Vec<Vec<Rational>> = w.to_vec();
    let mut groups: Vec<Vec<NodeId>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut phases = Vec::with_capacity(n - 1);
    let mut best_idx = 0usize;
    while alive.len() > 1 {
        let k = alive.len();
        let mut added = vec![false; k];
        let mut key: Vec<Rational> = vec![Rational::zero(); k];
        let mut prev = 0usize;
        let mut last = 0usize;
        for step in 0..k {
            // Most tightly connected vertex; ties broken by position.
            let mut sel = usize::MAX;
            for i in 0..k {
                if !added[i] && (sel == usize::MAX || key[i] > key[sel]) {
                    sel = i;
                }
            }
            added[sel] = true;
            if step == k - 1 {
                last = sel;
            } else {
                prev = sel;
                let s = alive[sel];
                for i in 0..k {
                    if !added[i] {
                        let ws = &w[s][alive[i]];
                        if !ws.is_zero() {
                            key[i] += ws;
                        }
                    }
                }
            }
        }
        let t = alive[last];
        let s = alive[prev];
        let mut side = groups[t].clone();
        side.sort_unstable();
        phases.push(PhaseCut { side, value: key[last].clone() });
        if phases[phases.len() - 1].value < phases[best_idx].value {
            best_idx = phases.len() - 1;
        }
        // Merge t into s.
        let moved = std::mem::take(&mut groups[t]);
        groups[s].extend(moved);
        for &v in &alive {
            if v != s && v != t {
                let add = w[t][v].clone();
                if !add.is_zero() {
                    w[s][v] += &add;
                    w[v][s] += &add;
                }
            }
        }
        alive.remove(last);
    }
    Some(MinCutResult { best: phases[best_idx].clone(), phases })
}

/// Total weight crossing the cut `side` / complement.
pub fn cut_value(w: &[Vec<Rational>], side: &[NodeId]) -> Rational {
    let n = w.len();
    let mut inside = vec![false; n];
    for &v in side {
        inside[v] = true;
    }
    let mut total = Rational::zero();
    for a in 0..n {
        if !inside[a] {
            continue;
        }
        for b in 0..n {
            if !inside[b] && !w[a][b].is_zero() {
                total += &w[a][b];
            }
        }
    }
    total
}
