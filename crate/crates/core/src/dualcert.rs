//! The combinatorial dual behind `SUBT ≥ n + r`: half a unit on every node
//! outside the matching cover and on every pure cycle outside it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::{all_pairs, Edge, Instance, NodeId};
use crate::rational::Rational;
use crate::tourbuild::{is_normalized, CycleCover, MatchResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDual {
    #[serde(rename = "S")]
    pub set: Vec<NodeId>,
    pub y: Rational,
}

/// A solution of the subtour dual: `y(i)`, `y(S)` and `z(e)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub y_node: BTreeMap<NodeId, Rational>,
    pub y_set: Vec<SetDual>,
    #[serde(rename = "z")]
    pub z_edge: BTreeMap<Edge, Rational>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DualError {
    #[error("cycle cover is not normalized")]
    NotNormalized,
    #[error("matching refers to cycle {0}, which is not a pure cycle of the cover")]
    BadMatching(usize),
    #[error("node {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("set {0:?} needs 3 <= |S| <= n - 3 and distinct nodes")]
    BadSet(Vec<NodeId>),
    #[error("negative dual {0}")]
    Negative(String),
    #[error("load {load} on edge {edge} exceeds its cost {cost}")]
    LoadViolation { edge: Edge, load: Rational, cost: i64 },
    #[error("stated value {stated} differs from the dual objective {computed}")]
    ValueMismatch { stated: Rational, computed: Rational },
}

impl DualCertificate {
    /// `2 Σ y(S) + 2 Σ y(i) − Σ z(e)`.
    pub fn objective(&self) -> Rational {
        let two = Rational::from_int(2);
        let ys: Rational = self.y_set.iter().map(|s| &s.y).sum();
        let yi: Rational = self.y_node.values().sum();
        let z: Rational = self.z_edge.values().sum();
        &two * &ys + &two * &yi - z
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap()
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Builds the `n + r` certificate from a normalized cover and its matching.
pub fn build_dual(inst: &Instance, cover: &CycleCover, m: &MatchResult) -> Result<DualCertificate, DualError> {
    if !is_normalized(inst, cover) {
        return Err(DualError::NotNormalized);
    }
    if let Some(&c) = m.pure_cycles.iter().find(|&&c| c >= cover.cycles.len() || !cover.pure[c]) {
        return Err(DualError::BadMatching(c));
    }
    let half = Rational::new(1, 2);
    let mut in_vm = vec![false; inst.n()];
    for &v in &m.cover_nodes {
        in_vm[v] = true;
    }
    let mut cert = DualCertificate::default();
    for i in 0..inst.n() {
        let y = if in_vm[i] { Rational::zero() } else { half.clone() };
        cert.y_node.insert(i, y);
    }
    for &c in &m.pure_cycles {
        if !m.cover_cycles.contains(&c) {
            let mut set = cover.cycles[c].clone();
            set.sort_unstable();
            cert.y_set.push(SetDual { set, y: half.clone() });
        }
    }
    cert.value = cert.objective();
    debug_assert_eq!(cert.value, Rational::from_int((inst.n() + m.r) as i64));
    Ok(cert)
}

/// Checks every load constraint exactly and returns the certified bound.
pub fn verify_dual(inst: &Instance, cert: &DualCertificate) -> Result<Rational, DualError> {
    let n = inst.n();
    let mut y = vec![Rational::zero(); n];
    for (&i, v) in &cert.y_node {
        if i >= n {
            return Err(DualError::NodeOutOfRange(i));
        }
        y[i] = v.clone();
    }
    let mut masks = Vec::with_capacity(cert.y_set.len());
    for s in &cert.y_set {
        if s.y.is_negative() {
            return Err(DualError::Negative(format!("y({:?}) = {}", s.set, s.y)));
        }
        let mut mask = 0u64;
        for &v in &s.set {
            if v >= n {
                return Err(DualError::NodeOutOfRange(v));
            }
            mask |= 1 << v;
        }
        if mask.count_ones() as usize != s.set.len() || s.set.len() < 3 || s.set.len() + 3 > n {
            return Err(DualError::BadSet(s.set.clone()));
        }
        masks.push((mask, &s.y));
    }
    for (e, z) in &cert.z_edge {
        if e.v() >= n {
            return Err(DualError::NodeOutOfRange(e.v()));
        }
        if z.is_negative() {
            return Err(DualError::Negative(format!("z({e}) = {z}")));
        }
    }
    for e in all_pairs(n) {
        let (i, j) = e.ends();
        let mut load = &y[i] + &y[j];
        for &(mask, ys) in &masks {
            if (mask >> i & 1) != (mask >> j & 1) {
                load += ys;
            }
        }
        if let Some(z) = cert.z_edge.get(&e) {
            load -= z;
        }
        let cost = inst.c(i, j);
        if load > Rational::from_int(cost) {
            return Err(DualError::LoadViolation { edge: e, load, cost });
        }
    }
    let computed = cert.objective();
    if computed != cert.value {
        return Err(DualError::ValueMismatch { stated: cert.value.clone(), computed });
    }
    Ok(computed)
}
