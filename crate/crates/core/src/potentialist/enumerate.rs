//! Exhaustive enumeration of small negation-normal-form formulas.

use std::collections::{BTreeSet, HashMap};

use crate::formula::{FoFormula, Signature, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Total number of variables in scope at the deepest point; quantifier
    /// depth is at most `max_scope - free`.
    pub max_scope: usize,
    /// Number of binary connectives (`&`, `|`).
    pub max_connectives: usize,
    pub equality: bool,
}

/// All NNF formulas whose free variables are among `x0..x{free-1}`, binding
/// `x{k}` at scope depth `k`, within the limits. Deduplicated, in a
/// deterministic order (by connective count, then construction order).
pub fn enumerate_formulas(sig: &Signature, free: usize, limits: EnumerationLimits) -> Vec<FoFormula> {
    let mut memo = HashMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if free == 0 {
        for f in [FoFormula::Top, FoFormula::Bot] {
            seen.insert(f.clone());
            out.push(f);
        }
    }
    for c in 0..=limits.max_connectives {
        for f in level(sig, free, c, limits, &mut memo) {
            if seen.insert(f.clone()) {
                out.push(f);
            }
        }
    }
    out
}

fn var(k: usize) -> Term {
    Term::Var(format!("x{k}"))
}

fn literals(sig: &Signature, k: usize, equality: bool) -> Vec<FoFormula> {
    let mut out = Vec::new();
    for rel in &sig.relations {
        let total = k.pow(rel.arity as u32);
        for code in 0..total {
            let mut c = code;
            let args: Vec<Term> = (0..rel.arity)
                .map(|_| {
                    let t = var(c % k);
                    c /= k;
                    t
                })
                .collect();
            let atom = FoFormula::atom(rel.name.clone(), args);
            out.push(atom.clone());
            out.push(FoFormula::not(atom));
        }
    }
    if equality {
        for i in 0..k {
            for j in i + 1..k {
                let eq = FoFormula::Eq(var(i), var(j));
                out.push(eq.clone());
                out.push(FoFormula::not(eq));
            }
        }
    }
    out
}

fn level(
    sig: &Signature,
    k: usize,
    c: usize,
    limits: EnumerationLimits,
    memo: &mut HashMap<(usize, usize), Vec<FoFormula>>,
) -> Vec<FoFormula> {
    if let Some(v) = memo.get(&(k, c)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if c == 0 {
        if k > 0 {
            out.extend(literals(sig, k, limits.equality));
        }
    } else {
        for c1 in 0..c {
            let c2 = c - 1 - c1;
            if c1 > c2 {
                break;
            }
            let left = level(sig, k, c1, limits, memo);
            let right = level(sig, k, c2, limits, memo);
            for (i, p) in left.iter().enumerate() {
                let start = if c1 == c2 { i + 1 } else { 0 };
                for q in &right[start..] {
                    out.push(FoFormula::and(p.clone(), q.clone()));
                    out.push(FoFormula::or(p.clone(), q.clone()));
                }
            }
        }
    }
    if k < limits.max_scope {
        let name = format!("x{k}");
        for body in level(sig, k + 1, c, limits, memo) {
            out.push(FoFormula::exists(name.clone(), body.clone()));
            out.push(FoFormula::forall(name.clone(), body));
        }
    }
    memo.insert((k, c), out.clone());
    out
}
