//! Hereditarily finite sets, the rank system `V_0 ⊆ .. ⊆ V_N`, systems of
//! transitive subsets of `V_N`, and the set-theoretic control sentences.

mod hf;
mod sentences;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::control::ControlError;
use crate::formula::Signature;
use crate::potentialist::{Access, PotentialistError, PotentialistSystem, WorldData};

pub use hf::{HFSet, ParseSetError};
pub use sentences::{describe_set, exact_height, height_dial, ordinal_count_at_least, rank_long_ratchet, rank_ratchet, transitive_buttons};

/// Largest `n` for which `V_n` is enumerated unless a caller raises the cap.
pub const DEFAULT_CAP: usize = 4;
/// `|V_5| = 65536`; `V_6` has `2^65536` elements.
pub const HARD_CAP: usize = 5;
/// Default bound on the number of worlds built in closure mode.
pub const DEFAULT_MAX_WORLDS: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetTheoryError {
    #[error("V_{n} exceeds the cap {cap}")]
    Cap { n: usize, cap: usize },
    #[error("{count} worlds exceed the limit {limit}")]
    TooManyWorlds { count: usize, limit: usize },
    #[error("need {needed} candidate sets, found {found}")]
    NotEnoughCandidates { needed: usize, found: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    System(#[from] PotentialistError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// `|V_n|`.
pub fn v_size(n: usize) -> u64 {
    (0..n).fold(0u64, |acc, _| if acc >= 64 { u64::MAX } else { 1u64 << acc })
}

fn check_cap(n: usize, cap: usize) -> Result<(), SetTheoryError> {
    if n > cap.min(HARD_CAP) {
        return Err(SetTheoryError::Cap { n, cap: cap.min(HARD_CAP) });
    }
    Ok(())
}

/// The elements of `V_n` in canonical order (their Ackermann codes are
/// `0 .. |V_n|`).
pub fn build_v(n: usize) -> Result<Vec<HFSet>, SetTheoryError> {
    build_v_capped(n, DEFAULT_CAP)
}

pub fn build_v_capped(n: usize, cap: usize) -> Result<Vec<HFSet>, SetTheoryError> {
    check_cap(n, cap)?;
    Ok((0..v_size(n)).map(HFSet::from_code).collect())
}

fn element_names(n: usize) -> Vec<String> {
    (0..v_size(n)).map(|c| c.to_string()).collect()
}

/// Membership among the given codes: `a ∈ b` iff bit `a` of `b` is set.
fn membership(domain: &[u32]) -> Vec<Vec<u32>> {
    let inside: BTreeSet<u32> = domain.iter().copied().collect();
    let mut out = Vec::new();
    for &b in domain {
        for a in 0..32u32 {
            if b >> a & 1 == 1 && inside.contains(&a) {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// Worlds `V_0 .. V_N` with world ids `V0 ..`, elements named by code,
/// accessibility by inclusion.
pub fn build_rank_system(n: usize) -> Result<PotentialistSystem, SetTheoryError> {
    check_cap(n, HARD_CAP)?;
    let worlds = (0..=n)
        .map(|k| {
            let domain: Vec<u32> = (0..v_size(k) as u32).collect();
            let relations = vec![membership(&domain)];
            WorldData { id: format!("V{k}"), domain, relations }
        })
        .collect();
    Ok(PotentialistSystem::new(Signature::membership(), element_names(n), worlds, Access::Substructure)?)
}

fn transitive(set: &BTreeSet<u32>) -> bool {
    set.iter().all(|&b| (0..32).all(|a| b >> a & 1 == 0 || set.contains(&a)))
}

/// Transitive closure of `{x}` together with `x`'s members.
fn closure_of(x: u32) -> BTreeSet<u32> {
    let mut out = BTreeSet::from([x]);
    let mut stack = vec![x];
    while let Some(b) = stack.pop() {
        for a in 0..32u32 {
            if b >> a & 1 == 1 && out.insert(a) {
                stack.push(a);
            }
        }
    }
    out
}

fn world_id(set: &BTreeSet<u32>) -> String {
    let items: Vec<String> = set.iter().map(|c| c.to_string()).collect();
    format!("T{{{}}}", items.join(","))
}

fn transitive_system(n: usize, mut sets: Vec<BTreeSet<u32>>) -> Result<PotentialistSystem, SetTheoryError> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().rev().cmp(b.iter().rev())));
    let worlds = sets
        .iter()
        .map(|s| {
            let domain: Vec<u32> = s.iter().copied().collect();
            let relations = vec![membership(&domain)];
            WorldData { id: world_id(s), domain, relations }
        })
        .collect();
    Ok(PotentialistSystem::new(Signature::membership(), element_names(n), worlds, Access::Substructure)?)
}

/// All transitive subsets of `V_N` when there are at most `max_worlds` of
/// them (always the case for `N <= 3`); otherwise the union closure of the
/// default seeds. Accessibility is inclusion.
pub fn build_transitive_system(n: usize, max_worlds: usize) -> Result<PotentialistSystem, SetTheoryError> {
    check_cap(n, HARD_CAP)?;
    if n <= 4 {
        let size = v_size(n) as u32;
        let mut sets = Vec::new();
        for mask in 0u32..1 << size {
            let set: BTreeSet<u32> = (0..size).filter(|i| mask >> i & 1 == 1).collect();
            if transitive(&set) {
                sets.push(set);
                if sets.len() > max_worlds {
                    break;
                }
            }
        }
        if sets.len() <= max_worlds {
            return transitive_system(n, sets);
        }
    }
    build_transitive_closure(n, &default_seeds(n), max_worlds)
}

/// The chain `V_0 .. V_{N-1}` and `V_{N-1} ∪ {x}` for the first three sets
/// `x` of rank `N - 1`.
pub fn default_seeds(n: usize) -> Vec<BTreeSet<u32>> {
    let below = |k: usize| (0..v_size(k) as u32).collect::<BTreeSet<u32>>();
    let mut seeds: Vec<BTreeSet<u32>> = (0..n).map(below).collect();
    if n >= 1 {
        let lo = v_size(n - 1);
        for x in (lo..v_size(n)).take(3) {
            let mut s = below(n - 1);
            s.insert(x as u32);
            seeds.push(s);
        }
    }
    seeds
}

/// Closure of the seeds (each replaced by its transitive closure) under
/// pairwise union.
pub fn build_transitive_closure(n: usize, seeds: &[BTreeSet<u32>], max_worlds: usize) -> Result<PotentialistSystem, SetTheoryError> {
    check_cap(n, HARD_CAP)?;
    let size = v_size(n);
    let mut family: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    for s in seeds {
        if s.iter().any(|&x| x as u64 >= size) {
            return Err(SetTheoryError::Precondition(format!("seed element outside V_{n}")));
        }
        family.insert(s.iter().flat_map(|&x| closure_of(x)).collect());
    }
    family.insert(BTreeSet::new());
    loop {
        let items: Vec<&BTreeSet<u32>> = family.iter().collect();
        let mut fresh = BTreeSet::new();
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                let u: BTreeSet<u32> = a.union(b).copied().collect();
                if !family.contains(&u) {
                    fresh.insert(u);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        family.extend(fresh);
        if family.len() > max_worlds {
            return Err(SetTheoryError::TooManyWorlds { count: family.len(), limit: max_worlds });
        }
    }
    if family.len() > max_worlds {
        return Err(SetTheoryError::TooManyWorlds { count: family.len(), limit: max_worlds });
    }
    transitive_system(n, family.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let sizes: Vec<u64> = (0..=5).map(v_size).collect();
        assert_eq!(sizes, vec![0, 1, 2, 4, 16, 65536]);
        assert_eq!(build_v(4).unwrap().len(), 16);
        assert!(matches!(build_v(5), Err(SetTheoryError::Cap { .. })));
        assert_eq!(build_v_capped(5, 5).unwrap().len(), 65536);
    }

    #[test]
    fn rank_system_shape() {
        let s = build_rank_system(3).unwrap();
        assert_eq!(s.world_count(), 4);
        assert_eq!(s.domain(3).len(), 4);
        // 2 = {{{}}} has the single member 1 = {{}}
        assert!(s.holds_atom(3, 0, &[1, 2]));
        assert!(!s.holds_atom(3, 0, &[0, 2]));
        assert!(s.holds_atom(3, 0, &[0, 3]));
        assert!(build_rank_system(6).is_err());
    }

    #[test]
    fn transitive_three() {
        let s = build_transitive_system(3, DEFAULT_MAX_WORLDS).unwrap();
        let ids: Vec<&str> = (0..s.world_count()).map(|w| s.world_id(w)).collect();
        assert_eq!(ids, vec!["T{}", "T{0}", "T{0,1}", "T{0,1,2}", "T{0,1,3}", "T{0,1,2,3}"]);
        assert!(s.frame().accesses(3, 5));
        assert!(!s.frame().accesses(3, 4));
    }

    #[test]
    fn transitive_four_needs_closure() {
        assert!(matches!(
            build_transitive_system(4, 5000).map(|s| s.world_count()),
            Ok(4131)
        ));
        let s = build_transitive_system(4, DEFAULT_MAX_WORLDS).unwrap();
        // chain of 4, then V_3 plus any of three rank-3 sets
        assert_eq!(s.world_count(), 4 + 7);
    }
}
