use super::{v_size, HFSet, SetTheoryError};
use crate::control::{long_ratchet_extract, Companion, ControlCertificate, ControlKind, Extracted, Rounds};
use crate::formula::FoFormula;
use crate::potentialist::PotentialistSystem;

fn mem(a: &str, b: &str) -> FoFormula {
    FoFormula::atom2("mem", a, b)
}

/// ∀a (a ∈ v → ∀b (b ∈ a → b ∈ v))
fn transitive_set(v: &str) -> FoFormula {
    FoFormula::forall("a", FoFormula::implies(mem("a", v), FoFormula::forall("b", FoFormula::implies(mem("b", "a"), mem("b", v)))))
}

/// A transitive set of transitive sets.
fn ordinal(v: &str) -> FoFormula {
    FoFormula::and(transitive_set(v), FoFormula::forall("c", FoFormula::implies(mem("c", v), transitive_set("c"))))
}

/// There are at least `k` ordinals, stated as a descending membership chain
/// of `k` ordinals `o1 ∋ o2 ∋ ..`; `k = 0` gives ⊤.
pub fn ordinal_count_at_least(k: usize) -> FoFormula {
    if k == 0 {
        return FoFormula::Top;
    }
    let name = |i: usize| format!("o{i}");
    let mut body = ordinal(&name(k));
    for i in (1..k).rev() {
        body = FoFormula::and(ordinal(&name(i)), FoFormula::exists(name(i + 1), FoFormula::and(mem(&name(i + 1), &name(i)), body)));
    }
    FoFormula::exists(name(1), body)
}

/// Exactly `c` ordinals.
pub fn exact_height(c: usize) -> FoFormula {
    if c == 0 {
        FoFormula::not(ordinal_count_at_least(1))
    } else {
        FoFormula::and(ordinal_count_at_least(c), FoFormula::not(ordinal_count_at_least(c + 1)))
    }
}

/// `d_j`: the number of ordinals, at most `n`, is `≡ j (mod m)`.
pub fn height_dial(m: usize, n: usize) -> Result<Vec<FoFormula>, SetTheoryError> {
    if m == 0 {
        return Err(SetTheoryError::Precondition("dial needs m >= 1".into()));
    }
    Ok((0..m).map(|j| FoFormula::disjunction((j..=n).step_by(m).map(exact_height))).collect())
}

/// `r_0 = ⊤, r_v` = at least `v` ordinals, for `v <= n`.
pub fn rank_long_ratchet(n: usize) -> Vec<FoFormula> {
    (0..=n).map(ordinal_count_at_least).collect()
}

/// Verifies the long ratchet of ordinal counts on a rank system at `V_0` and
/// extracts a ratchet of `n` with a dial of `m` values.
pub fn rank_ratchet(sys: &PotentialistSystem, n: usize, m: usize) -> Result<Extracted, SetTheoryError> {
    let top = sys.world_count() - 1;
    if top < m * n + 1 {
        return Err(SetTheoryError::Precondition(format!("rank {top} < {m}*{n}+1")));
    }
    let mut long = ControlCertificate::new(ControlKind::LongRatchet(rank_long_ratchet(top)), 0);
    if !long.verify(sys, Rounds::default())? {
        return Err(SetTheoryError::Precondition("ordinal counts do not form a long ratchet here".into()));
    }
    Ok(long_ratchet_extract(&long, n, m)?)
}

fn characterize(h: &HFSet, depth: usize) -> FoFormula {
    let x = format!("x{depth}");
    let y = format!("x{}", depth + 1);
    if h.children().is_empty() {
        return FoFormula::forall(y.clone(), FoFormula::not(mem(&y, &x)));
    }
    let each = h
        .children()
        .iter()
        .map(|c| FoFormula::exists(y.clone(), FoFormula::and(mem(&y, &x), characterize(c, depth + 1))));
    let only = FoFormula::forall(
        y.clone(),
        FoFormula::implies(mem(&y, &x), FoFormula::disjunction(h.children().iter().map(|c| characterize(c, depth + 1)))),
    );
    FoFormula::conjunction(each.chain([only]))
}

/// A parameter-free sentence true in a well-founded extensional world iff `h`
/// is one of its elements.
pub fn describe_set(h: &HFSet) -> FoFormula {
    FoFormula::exists("x0", characterize(h, 0))
}

/// `k` buttons "this rank-(N-1) set exists", for the first `k` such sets in
/// canonical order, with the single-valued height dial as companion.
pub fn transitive_buttons(k: usize, n: usize) -> Result<(Vec<FoFormula>, Companion), SetTheoryError> {
    if n == 0 {
        return Err(SetTheoryError::NotEnoughCandidates { needed: k, found: 0 });
    }
    let candidates: Vec<u64> = (v_size(n - 1)..v_size(n)).take(k).collect();
    if candidates.len() < k {
        return Err(SetTheoryError::NotEnoughCandidates { needed: k, found: candidates.len() });
    }
    let buttons = candidates.into_iter().map(|c| describe_set(&HFSet::from_code(c))).collect();
    Ok((buttons, Companion::Dial(height_dial(1, n)?)))
}
