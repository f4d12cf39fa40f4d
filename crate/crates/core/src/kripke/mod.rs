//! Finite propositional Kripke frames and models.

mod eval;
mod generate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{eval_prop, first_failure, frame_valid, Failure};
pub use generate::{generate_frame, preorders, sampled_preorders, FrameClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("world {world} out of range (frame has {count} worlds)")]
    WorldOutOfRange { world: usize, count: usize },
    #[error("frame is not a preorder")]
    NotPreorder,
    #[error("frame size must be positive")]
    ZeroSize,
    #[error("too many valuation bits ({0})")]
    TooLarge(usize),
    #[error("variable p{index} exceeds declared count {count}")]
    VariableOutOfRange { index: u32, count: u32 },
    #[error("malformed model: {0}")]
    Format(String),
}

/// Accessibility relation on worlds `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    access: Vec<Vec<bool>>,
}

impl Frame {
    pub fn new(n: usize) -> Result<Self, KripkeError> {
        if n == 0 {
            return Err(KripkeError::ZeroSize);
        }
        Ok(Frame { access: vec![vec![false; n]; n] })
    }

    pub fn from_matrix(access: Vec<Vec<bool>>) -> Result<Self, KripkeError> {
        let n = access.len();
        if n == 0 {
            return Err(KripkeError::ZeroSize);
        }
        if access.iter().any(|r| r.len() != n) {
            return Err(KripkeError::Format("access matrix is not square".into()));
        }
        Ok(Frame { access })
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, KripkeError> {
        let mut f = Frame::new(n)?;
        for (a, b) in pairs {
            f.check_world(a)?;
            f.check_world(b)?;
            f.access[a][b] = true;
        }
        Ok(f)
    }

    /// Reflexive-transitive closure of the given edges.
    pub fn preorder_closure(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, KripkeError> {
        let mut f = Frame::from_pairs(n, pairs)?;
        for w in 0..n {
            f.access[w][w] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if f.access[i][k] {
                    for j in 0..n {
                        if f.access[k][j] {
                            f.access[i][j] = true;
                        }
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.access.len()
    }

    pub fn is_empty(&self) -> bool {
        self.access.is_empty()
    }

    pub fn accesses(&self, a: usize, b: usize) -> bool {
        self.access[a][b]
    }

    pub fn set(&mut self, a: usize, b: usize, value: bool) {
        self.access[a][b] = value;
    }

    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.access[w].iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.access
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| self.access[a][b]).collect()
    }

    pub fn check_world(&self, w: usize) -> Result<(), KripkeError> {
        if w < self.len() {
            Ok(())
        } else {
            Err(KripkeError::WorldOutOfRange { world: w, count: self.len() })
        }
    }

    /// The subframe on the given worlds, renumbered in the order listed.
    pub fn restrict(&self, worlds: &[usize]) -> Frame {
        Frame {
            access: worlds.iter().map(|&a| worlds.iter().map(|&b| self.access[a][b]).collect()).collect(),
        }
    }

    /// Worlds reachable from `w` in ascending order.
    pub fn cone(&self, w: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![w];
        seen[w] = true;
        while let Some(u) = stack.pop() {
            for v in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameProperties {
    pub reflexive: bool,
    pub transitive: bool,
    pub convergent: bool,
    pub linear_preorder: bool,
    pub complete: bool,
}

pub fn frame_properties(f: &Frame) -> FrameProperties {
    let n = f.len();
    let r = |a: usize, b: usize| f.accesses(a, b);
    let reflexive = (0..n).all(|w| r(w, w));
    let transitive = (0..n).all(|a| (0..n).all(|b| !r(a, b) || (0..n).all(|c| !r(b, c) || r(a, c))));
    let convergent = (0..n).all(|w| {
        (0..n).all(|u| {
            !r(w, u) || (0..n).all(|v| !r(w, v) || (0..n).any(|z| r(u, z) && r(v, z)))
        })
    });
    let connected = (0..n).all(|u| (0..n).all(|v| r(u, v) || r(v, u)));
    let complete = (0..n).all(|u| (0..n).all(|v| r(u, v)));
    FrameProperties {
        reflexive,
        transitive,
        convergent,
        linear_preorder: reflexive && transitive && connected,
        complete,
    }
}

pub fn is_preorder(f: &Frame) -> bool {
    let p = frame_properties(f);
    p.reflexive && p.transitive
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterDecomposition {
    /// Cluster id of each world. Ids are assigned in order of first member.
    pub cluster_of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    /// `order[c][d]` iff cluster c sees cluster d (reflexive partial order).
    pub order: Vec<Vec<bool>>,
}

impl ClusterDecomposition {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn strictly_below(&self, c: usize, d: usize) -> bool {
        c != d && self.order[c][d]
    }

    /// Clusters with nothing strictly below them.
    pub fn minimal(&self) -> Vec<usize> {
        (0..self.count()).filter(|&c| (0..self.count()).all(|d| !self.strictly_below(d, c))).collect()
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.count()).filter(|&c| (0..self.count()).all(|d| !self.strictly_below(c, d))).collect()
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn clusters(f: &Frame) -> Result<ClusterDecomposition, KripkeError> {
    if !is_preorder(f) {
        return Err(KripkeError::NotPreorder);
    }
    let n = f.len();
    let mut cluster_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for w in 0..n {
        if cluster_of[w] != usize::MAX {
            continue;
        }
        let id = members.len();
        let group: Vec<usize> = (w..n).filter(|&u| f.accesses(w, u) && f.accesses(u, w)).collect();
        for &u in &group {
            cluster_of[u] = id;
        }
        members.push(group);
    }
    let order = members
        .iter()
        .map(|a| members.iter().map(|b| f.accesses(a[0], b[0])).collect())
        .collect();
    Ok(ClusterDecomposition { cluster_of, members, order })
}

/// Whether the cluster quotient is a finite Boolean algebra: every cluster
/// corresponds to exactly one set of atoms, and order is inclusion.
pub fn is_pre_boolean_algebra(f: &Frame) -> Result<bool, KripkeError> {
    let cd = clusters(f)?;
    let mins = cd.minimal();
    if mins.len() != 1 {
        return Ok(false);
    }
    let bottom = mins[0];
    let k = cd.count();
    let atoms: Vec<usize> = (0..k)
        .filter(|&c| {
            cd.strictly_below(bottom, c) && (0..k).all(|d| !(cd.strictly_below(bottom, d) && cd.strictly_below(d, c)))
        })
        .collect();
    if atoms.len() >= usize::BITS as usize - 1 || k != 1usize << atoms.len() {
        return Ok(false);
    }
    let code = |c: usize| -> usize {
        atoms.iter().enumerate().filter(|(_, &a)| cd.order[a][c]).map(|(i, _)| 1 << i).sum()
    };
    let codes: Vec<usize> = (0..k).map(code).collect();
    if codes.iter().collect::<BTreeSet<_>>().len() != k {
        return Ok(false);
    }
    Ok((0..k).all(|c| (0..k).all(|d| cd.order[c][d] == (codes[c] & !codes[d] == 0))))
}

/// A frame with a valuation of `var_count` propositional variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub frame: Frame,
    pub var_count: u32,
    pub valuation: Vec<BTreeSet<u32>>,
}

impl KripkeModel {
    pub fn new(frame: Frame, var_count: u32, valuation: Vec<BTreeSet<u32>>) -> Result<Self, KripkeError> {
        if valuation.len() != frame.len() {
            return Err(KripkeError::Format(format!(
                "valuation covers {} worlds, frame has {}",
                valuation.len(),
                frame.len()
            )));
        }
        for set in &valuation {
            if let Some(&index) = set.iter().find(|&&i| i >= var_count) {
                return Err(KripkeError::VariableOutOfRange { index, count: var_count });
            }
        }
        Ok(KripkeModel { frame, var_count, valuation })
    }

    pub fn holds(&self, w: usize, var: u32) -> bool {
        self.valuation[w].contains(&var)
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    /// The submodel generated by `w`, with `w` first and the rest ascending.
    pub fn generated(&self, w: usize) -> (KripkeModel, Vec<usize>) {
        let mut worlds = vec![w];
        worlds.extend(self.frame.cone(w).into_iter().filter(|&u| u != w));
        let model = KripkeModel {
            frame: self.frame.restrict(&worlds),
            var_count: self.var_count,
            valuation: worlds.iter().map(|&u| self.valuation[u].clone()).collect(),
        };
        (model, worlds)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            worlds: self.len(),
            access: self.frame.pairs(),
            valuation: self
                .valuation
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(w, s)| (w, s.iter().copied().collect()))
                .collect(),
        }
    }
}

/// Serialized frame or model: access as a pair list, valuation keyed by world.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub worlds: usize,
    pub access: Vec<(usize, usize)>,
    #[serde(default)]
    pub valuation: BTreeMap<usize, Vec<u32>>,
}

impl ModelFile {
    pub fn frame(&self) -> Result<Frame, KripkeError> {
        Frame::from_pairs(self.worlds, self.access.iter().copied())
    }

    pub fn model(&self) -> Result<KripkeModel, KripkeError> {
        let frame = self.frame()?;
        let mut valuation = vec![BTreeSet::new(); self.worlds];
        for (&w, vars) in &self.valuation {
            frame.check_world(w)?;
            valuation[w].extend(vars.iter().copied());
        }
        let var_count = valuation.iter().flatten().max().map_or(0, |m| m + 1);
        KripkeModel::new(frame, var_count, valuation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Frame {
        Frame::from_pairs(n, (0..n).map(|i| (i, i))).unwrap()
    }

    fn total(n: usize) -> Frame {
        Frame::from_matrix(vec![vec![true; n]; n]).unwrap()
    }

    #[test]
    fn identity_properties() {
        let p = frame_properties(&identity(3));
        assert!(p.reflexive && p.transitive && p.convergent);
        assert!(!p.complete && !p.linear_preorder);
    }

    #[test]
    fn fork_is_not_convergent() {
        let f = Frame::preorder_closure(3, [(0, 1), (0, 2)]).unwrap();
        let p = frame_properties(&f);
        assert!(p.reflexive && p.transitive);
        assert!(!p.convergent);
    }

    #[test]
    fn total_has_everything() {
        let p = frame_properties(&total(3));
        assert!(p.reflexive && p.transitive && p.convergent && p.linear_preorder && p.complete);
    }

    #[test]
    fn cluster_counts() {
        assert_eq!(clusters(&total(4)).unwrap().count(), 1);
        let id = clusters(&identity(3)).unwrap();
        assert_eq!(id.count(), 3);
        assert!((0..3).all(|c| (0..3).all(|d| !id.strictly_below(c, d))));

        let chain = Frame::preorder_closure(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let cd = clusters(&chain).unwrap();
        assert_eq!(cd.members, vec![vec![0, 1], vec![2, 3]]);
        assert!(cd.strictly_below(0, 1) && !cd.strictly_below(1, 0));
    }

    #[test]
    fn clusters_reject_non_preorder() {
        let f = Frame::from_pairs(2, [(0, 1)]).unwrap();
        assert_eq!(clusters(&f), Err(KripkeError::NotPreorder));
    }

    #[test]
    fn pre_boolean_recognition() {
        assert!(is_pre_boolean_algebra(&total(3)).unwrap());
        let diamond = Frame::preorder_closure(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert!(is_pre_boolean_algebra(&diamond).unwrap());
        let chain3 = Frame::preorder_closure(3, [(0, 1), (1, 2)]).unwrap();
        assert!(!is_pre_boolean_algebra(&chain3).unwrap());
        // 4-chain has the right size but the wrong shape
        let chain4 = Frame::preorder_closure(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(!is_pre_boolean_algebra(&chain4).unwrap());
    }

    #[test]
    fn generated_submodel_roots_first() {
        let f = Frame::preorder_closure(4, [(0, 1), (0, 2), (2, 3)]).unwrap();
        let m = KripkeModel::new(f, 1, vec![BTreeSet::new(), BTreeSet::new(), BTreeSet::from([0]), BTreeSet::new()]).unwrap();
        let (g, map) = m.generated(2);
        assert_eq!(map, vec![2, 3]);
        assert!(g.holds(0, 0));
        assert!(g.frame.accesses(0, 1) && !g.frame.accesses(1, 0));
    }

    #[test]
    fn model_file_round_trip() {
        let f = Frame::preorder_closure(2, [(0, 1)]).unwrap();
        let m = KripkeModel::new(f, 2, vec![BTreeSet::new(), BTreeSet::from([0, 1])]).unwrap();
        let text = serde_json::to_string(&m.to_file()).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.model().unwrap(), m);
    }
}
