//! Small hand-built systems with known control families.

use crate::formula::{FoFormula, Signature, Term};
use crate::potentialist::{Access, PotentialistError, PotentialistSystem, WorldData};

const PREDICATES: [&str; 4] = ["a", "b", "c", "d"];

/// A chain of `len` worlds over `{lt/2, a/1, b/1, ..}`; world `k` has
/// elements `e0 .. ek` in order, and element `i` carries the predicates
/// spelling `(i + 1) mod 2^switches` in binary. Returns the system and the
/// switches "the largest element has predicate j".
pub fn pattern_chain(len: usize, switches: usize) -> Result<(PotentialistSystem, Vec<FoFormula>), PotentialistError> {
    assert!((1..=PREDICATES.len()).contains(&switches), "1..=4 switches");
    let mut rels = vec![("lt", 2)];
    rels.extend(PREDICATES[..switches].iter().map(|&p| (p, 1)));
    let sig = Signature::new(rels)?;
    let width = 1usize << switches;
    let worlds = (0..len)
        .map(|k| {
            let domain: Vec<u32> = (0..=k as u32).collect();
            let mut relations = vec![Vec::new(); switches + 1];
            for i in 0..=k as u32 {
                for j in i + 1..=k as u32 {
                    relations[0].push(vec![i, j]);
                }
                let pattern = (i as usize + 1) % width;
                for (p, rel) in relations[1..].iter_mut().enumerate() {
                    if pattern >> p & 1 == 1 {
                        rel.push(vec![i]);
                    }
                }
            }
            WorldData { id: format!("C{k}"), domain, relations }
        })
        .collect();
    let elements = (0..len).map(|i| format!("e{i}")).collect();
    let sys = PotentialistSystem::new(sig, elements, worlds, Access::Substructure)?;
    let x = || Term::Var("x".into());
    let largest = FoFormula::forall("y", FoFormula::not(FoFormula::atom2("lt", "x", "y")));
    let family = PREDICATES[..switches]
        .iter()
        .map(|&p| FoFormula::exists("x", FoFormula::and(FoFormula::atom(p, vec![x()]), largest.clone())))
        .collect();
    Ok((sys, family))
}
