//! Syntax for the propositional modal language and the first-order modal
//! language with parameters.

mod fo;
mod parse;
mod prop;

use std::collections::BTreeMap;

use thiserror::Error;

pub use fo::{FoFormula, RelationSymbol, Signature, Term};
pub use parse::{parse_fo, parse_prop, SyntaxError};
pub use prop::PropFormula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {expected}, used with {found} arguments")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("duplicate relation `{0}` in signature")]
    DuplicateRelation(String),
    #[error("relation `{0}` must have positive arity")]
    ZeroArity(String),
    #[error("formula already contains a modal operator")]
    AlreadyModal,
    #[error("variable p{0} has no substitute")]
    Unmapped(u32),
    #[error("substitute for p{index} is not a sentence (free: {free})")]
    NotASentence { index: u32, free: String },
}

/// Assignment of first-order sentences to propositional variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<u32, FoFormula>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `p<index> := sentence`, rejecting formulas with free variables.
    pub fn insert(&mut self, index: u32, sentence: FoFormula) -> Result<(), FormulaError> {
        let free = sentence.free_variables();
        if !free.is_empty() {
            let free = free.into_iter().collect::<Vec<_>>().join(", ");
            return Err(FormulaError::NotASentence { index, free });
        }
        self.map.insert(index, sentence);
        Ok(())
    }

    pub fn get(&self, index: u32) -> Option<&FoFormula> {
        self.map.get(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &FoFormula)> {
        self.map.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Builds a substitution from pairs, failing on the first open formula.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, FoFormula)>) -> Result<Self, FormulaError> {
        let mut s = Self::new();
        for (i, f) in pairs {
            s.insert(i, f)?;
        }
        Ok(s)
    }

    /// Exchanges the substitutes of two variables.
    pub fn swap(&mut self, a: u32, b: u32) {
        let fa = self.map.remove(&a);
        let fb = self.map.remove(&b);
        if let Some(f) = fb {
            self.map.insert(a, f);
        }
        if let Some(f) = fa {
            self.map.insert(b, f);
        }
    }
}

/// Homomorphic replacement of every `p_i` in `phi` by `sigma(i)`.
pub fn substitute(phi: &PropFormula, sigma: &Substitution) -> Result<FoFormula, FormulaError> {
    use PropFormula as P;
    let rec = |p: &PropFormula| substitute(p, sigma);
    Ok(match phi {
        P::Var(i) => sigma.get(*i).cloned().ok_or(FormulaError::Unmapped(*i))?,
        P::Top => FoFormula::Top,
        P::Bot => FoFormula::Bot,
        P::Not(p) => FoFormula::not(rec(p)?),
        P::Diamond(p) => FoFormula::diamond(rec(p)?),
        P::Box(p) => FoFormula::boxed(rec(p)?),
        P::And(p, q) => FoFormula::and(rec(p)?, rec(q)?),
        P::Or(p, q) => FoFormula::or(rec(p)?, rec(q)?),
        P::Implies(p, q) => FoFormula::implies(rec(p)?, rec(q)?),
        P::Iff(p, q) => FoFormula::iff(rec(p)?, rec(q)?),
    })
}
